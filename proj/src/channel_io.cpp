// simwave - wave-domain combiner simulator for stacked-metasurface receivers
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "simwave/channel_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>

namespace simwave
{

static_assert(std::endian::native == std::endian::little,
              "channel container assumes a little-endian host");

namespace
{

constexpr std::array<char, 8> magic = {'S', 'I', 'M', 'C', 'H', 'A', 'N', '1'};
constexpr std::uint32_t format_version = 1;

template <typename T> void write_pod(std::ofstream &out, const T &v)
{
    out.write(reinterpret_cast<const char *>(&v), sizeof(T));
}

template <typename T> T read_pod(std::ifstream &in, const std::string &path, std::uint64_t &offset)
{
    T v;
    in.read(reinterpret_cast<char *>(&v), sizeof(T));
    if (!in)
        throw std::runtime_error(path + ": truncated at byte offset " + std::to_string(offset));
    offset += sizeof(T);
    return v;
}

} // namespace

void export_channels(const std::vector<ChannelEnsemble> &ensembles, const std::string &path)
{
    if (ensembles.empty())
        throw std::invalid_argument("export channels: empty ensemble list");
    const arma::uword n = ensembles.front().h.n_rows;
    const arma::uword k = ensembles.front().h.n_cols;
    for (const auto &e : ensembles)
        if (e.h.n_rows != n || e.h.n_cols != k || e.beta.n_elem != k)
            throw std::invalid_argument("export channels: inconsistent ensemble dimensions");

    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error(path + ": cannot open for writing");

    out.write(magic.data(), magic.size());
    write_pod(out, format_version);
    write_pod(out, static_cast<std::uint32_t>(n));
    write_pod(out, static_cast<std::uint32_t>(k));
    write_pod(out, static_cast<std::uint32_t>(ensembles.size()));

    for (const auto &e : ensembles)
    {
        write_pod(out, e.placement_id);
        write_pod(out, e.realization_id);
        for (arma::uword j = 0; j < k; ++j)
            write_pod(out, e.beta(j));
        for (arma::uword r = 0; r < n; ++r)
            for (arma::uword c = 0; c < k; ++c)
            {
                write_pod(out, e.h(r, c).real());
                write_pod(out, e.h(r, c).imag());
            }
    }
    if (!out)
        throw std::runtime_error(path + ": write failed");
}

std::vector<ChannelEnsemble> import_channels(const std::string &path, std::size_t expected_n,
                                             std::size_t expected_k)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error(path + ": cannot open");

    std::uint64_t offset = 0;
    std::array<char, 8> got{};
    in.read(got.data(), got.size());
    if (!in)
        throw std::runtime_error(path + ": truncated at byte offset 0");
    for (std::size_t i = 0; i < magic.size(); ++i)
        if (got[i] != magic[i])
            throw std::runtime_error(path + ": bad magic byte at offset " + std::to_string(i));
    offset = magic.size();

    const auto version = read_pod<std::uint32_t>(in, path, offset);
    if (version != format_version)
        throw std::runtime_error(path + ": unsupported version " + std::to_string(version));
    const auto n = read_pod<std::uint32_t>(in, path, offset);
    const auto k = read_pod<std::uint32_t>(in, path, offset);
    const auto count = read_pod<std::uint32_t>(in, path, offset);
    if (n == 0 || k == 0 || count == 0)
        throw std::runtime_error(path + ": degenerate dimensions in header");

    if (expected_n != 0 && n != expected_n)
        throw std::runtime_error(path + ": channel rows " + std::to_string(n) +
                                 " do not match configured element count " +
                                 std::to_string(expected_n));
    if (expected_k != 0 && k != expected_k)
        throw std::runtime_error(path + ": user count " + std::to_string(k) +
                                 " does not match configured K " + std::to_string(expected_k));

    // declared size vs actual file length
    const std::uint64_t per_ens = 16 + 8ull * k + 16ull * n * k;
    const std::uint64_t want = offset + per_ens * count;
    in.seekg(0, std::ios::end);
    const std::uint64_t have = static_cast<std::uint64_t>(in.tellg());
    if (have != want)
        throw std::runtime_error(path + ": file length " + std::to_string(have) +
                                 " does not match declared contents (" + std::to_string(want) +
                                 " bytes)");
    in.seekg(static_cast<std::streamoff>(offset));

    std::vector<ChannelEnsemble> out;
    out.reserve(count);
    for (std::uint32_t e = 0; e < count; ++e)
    {
        ChannelEnsemble ens;
        ens.placement_id = read_pod<std::uint64_t>(in, path, offset);
        ens.realization_id = read_pod<std::uint64_t>(in, path, offset);
        ens.beta.set_size(k);
        for (std::uint32_t j = 0; j < k; ++j)
            ens.beta(j) = read_pod<double>(in, path, offset);
        ens.h.set_size(n, k);
        for (std::uint32_t r = 0; r < n; ++r)
            for (std::uint32_t c = 0; c < k; ++c)
            {
                const double re = read_pod<double>(in, path, offset);
                const double im = read_pod<double>(in, path, offset);
                ens.h(r, c) = {re, im};
            }
        out.push_back(std::move(ens));
    }
    return out;
}

} // namespace simwave
