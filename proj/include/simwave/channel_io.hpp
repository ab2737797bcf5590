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

#ifndef SIMWAVE_CHANNEL_IO_HPP
#define SIMWAVE_CHANNEL_IO_HPP

#include <string>
#include <vector>

#include "simwave/channel.hpp"

namespace simwave
{

// Binary channel-ensemble container (little-endian):
//   magic "SIMCHAN1" | u32 version=1 | u32 N | u32 K | u32 count
//   per ensemble: u64 placement_id | u64 realization_id |
//                 K float64 beta | N*K complex (re, im float64) row-major
// Round trips are bit-exact.

void export_channels(const std::vector<ChannelEnsemble> &ensembles, const std::string &path);

// expected_n / expected_k of 0 skip the dimension check.
std::vector<ChannelEnsemble> import_channels(const std::string &path, std::size_t expected_n = 0,
                                             std::size_t expected_k = 0);

} // namespace simwave

#endif
