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

#ifndef SIMWAVE_COMMON_HPP
#define SIMWAVE_COMMON_HPP

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace simwave
{

constexpr double speed_of_light = 299792458.0;  // m/s
constexpr double boltzmann = 1.380649e-23;      // J/K
constexpr double two_pi = 2.0 * std::numbers::pi;

struct Vec3
{
    double x = 0.0, y = 0.0, z = 0.0;

    Vec3 operator-(const Vec3 &o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator+(const Vec3 &o) const { return {x + o.x, y + o.y, z + o.z}; }
    double dot(const Vec3 &o) const { return x * o.x + y * o.y + z * o.z; }
    double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

// Carrier-derived constants; wavelength and wavenumber are always consistent
// with the stored frequency.
struct PhysicalConstants
{
    double carrier_frequency_hz = 0.0;
    double wavelength_m = 0.0;
    double wavenumber_rad_per_m = 0.0;
    double bandwidth_hz = 0.0;

    static PhysicalConstants from_carrier(double carrier_frequency_hz, double bandwidth_hz)
    {
        if (carrier_frequency_hz <= 0.0)
            throw std::invalid_argument("carrier frequency must be positive");
        if (bandwidth_hz <= 0.0)
            throw std::invalid_argument("bandwidth must be positive");
        PhysicalConstants c;
        c.carrier_frequency_hz = carrier_frequency_hz;
        c.wavelength_m = speed_of_light / carrier_frequency_hz;
        c.wavenumber_rad_per_m = two_pi / c.wavelength_m;
        c.bandwidth_hz = bandwidth_hz;
        return c;
    }
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double dbm_per_m2_to_w_per_m2(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

} // namespace simwave

#endif
