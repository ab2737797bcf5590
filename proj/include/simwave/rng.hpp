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

#ifndef SIMWAVE_RNG_HPP
#define SIMWAVE_RNG_HPP

#include <armadillo>
#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace simwave
{

// Deterministic per-trial random streams. Every stream is keyed by the master
// seed plus a list of labels (placement, realization, purpose string), so
// trials can run concurrently in any order and still reproduce bit-identical
// draws. Distributions are generated in-house (Box-Muller etc.) rather than
// through std::<distribution> so results do not depend on the standard
// library implementation.
class RngStream
{
  public:
    explicit RngStream(std::uint64_t seed) : state_(seed) {}

    static std::uint64_t hash_label(std::string_view s)
    {
        std::uint64_t h = 1469598103934665603ull; // FNV-1a
        for (unsigned char c : s)
        {
            h ^= c;
            h *= 1099511628211ull;
        }
        return h;
    }

    static RngStream derive(std::uint64_t master_seed, std::string_view purpose,
                            std::initializer_list<std::uint64_t> labels = {})
    {
        std::uint64_t s = mix(master_seed, hash_label(purpose));
        for (std::uint64_t v : labels)
            s = mix(s, v);
        return RngStream(s);
    }

    // splitmix64
    std::uint64_t next_u64()
    {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // uniform on [0, 1)
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    std::uint64_t uniform_index(std::uint64_t n) { return next_u64() % n; }

    // standard normal via Box-Muller (pairs are drawn eagerly; no state carry)
    double normal()
    {
        double u1 = 0.0;
        do
        {
            u1 = next_double();
        } while (u1 <= 0.0);
        const double u2 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
    }

    // standard complex normal CN(0, 1): real and imaginary parts N(0, 1/2)
    std::complex<double> complex_normal()
    {
        double u1 = 0.0;
        do
        {
            u1 = next_double();
        } while (u1 <= 0.0);
        const double u2 = next_double();
        const double r = std::sqrt(-std::log(u1)); // sqrt(-2 ln u)/sqrt(2)
        return {r * std::cos(two_pi * u2), r * std::sin(two_pi * u2)};
    }

    void fill_complex_normal(arma::cx_mat &m)
    {
        for (arma::uword c = 0; c < m.n_cols; ++c)
            for (arma::uword r = 0; r < m.n_rows; ++r)
                m(r, c) = complex_normal();
    }

  private:
    static std::uint64_t mix(std::uint64_t a, std::uint64_t b)
    {
        std::uint64_t z = a + 0x9E3779B97F4A7C15ull * (b + 1);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    static constexpr double two_pi = 6.283185307179586476925286766559;

    std::uint64_t state_;
};

} // namespace simwave

#endif
