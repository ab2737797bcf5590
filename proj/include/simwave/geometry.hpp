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

#ifndef SIMWAVE_GEOMETRY_HPP
#define SIMWAVE_GEOMETRY_HPP

#include <armadillo>
#include <vector>

#include "simwave/common.hpp"

namespace simwave
{

// Orientation of the short-dipole axis used to model every radiating element
// (unit-cells and array elements alike). The axis lies in the layer plane so
// that boresight, the stacking direction, sits on the dipole equator where
// the radiated amplitude is maximal; an element never points its pattern null
// at the next layer.
enum class DipoleAxis
{
    x,
    y
};

enum class DpaLayout
{
    linear_half_wavelength,
    grid_half_wavelength,
    explicit_list
};

// Physical layout of the stacked-metasurface receiver: a square aperture of
// uniformly gridded unit-cells repeated on every layer, stacked in front of
// the digital array plane along +z.
struct Geometry
{
    double aperture_side_m = 0.0;
    double cell_pitch_m = 0.0;
    std::size_t layer_count = 0;
    double sim_thickness_m = 0.0;
    std::size_t cells_per_layer = 0;

    std::vector<Vec3> dpa_element_positions;
    std::vector<std::vector<Vec3>> layer_cell_positions; // [layer][cell]

    DipoleAxis dipole_axis = DipoleAxis::x;

    double layer_spacing_m() const { return sim_thickness_m / static_cast<double>(layer_count); }
    const std::vector<Vec3> &outermost_layer() const { return layer_cell_positions.back(); }
};

// Square grid of `count x count` points at pitch `pitch`, centered on the z
// axis in the plane at height z, row-major over (x, y).
std::vector<Vec3> square_grid(std::size_t count_per_side, double pitch, double z);

Geometry build_geometry(const PhysicalConstants &constants, double aperture_side_m,
                        double cell_pitch_m, std::size_t layer_count, double sim_thickness_m,
                        std::size_t dpa_element_count, DpaLayout dpa_layout,
                        const std::vector<Vec3> &explicit_dpa_positions = {},
                        DipoleAxis dipole_axis = DipoleAxis::x);

// Field amplitude radiated by a short dipole at `source` with the given
// in-plane axis, evaluated at `target`: sqrt(3*sqrt(2)/(8*pi) * sin^2(theta))
// / r, where theta is measured from the dipole axis.
double propagation_amplitude(const Vec3 &source, const Vec3 &target, DipoleAxis axis);

// Propagating-component phase at distance r from the source, wrapped to
// (-pi, pi]: pi/2 - k0*r + arg(1 + 1/(j*k0*r) - 1/(k0*r)^2).
double propagation_phase(const Vec3 &source, const Vec3 &target, double wavenumber);

std::complex<double> propagation_coefficient(const Vec3 &source, const Vec3 &target,
                                             DipoleAxis axis, double wavenumber);

// Coupling matrix with entry (t, s) = coefficient from sources[s] to
// targets[t]. The coefficient is direction-symmetric, so the reverse-link
// matrix is the plain transpose.
arma::cx_mat propagation_matrix(const std::vector<Vec3> &sources, const std::vector<Vec3> &targets,
                                DipoleAxis axis, double wavenumber);

// Fixed coupling matrices of a geometry: the M x N matrix linking the digital
// array to the innermost layer, and one N x N matrix per adjacent layer pair
// with entry (n', n) coupling cell n on the inner layer to cell n' on the
// next layer outward. Immutable once built; safe to share across threads.
struct PropagationStack
{
    arma::cx_mat dpa_link;                // M x N
    std::vector<arma::cx_mat> interlayer; // layer_count - 1 entries, N x N

    std::size_t layer_count() const { return interlayer.size() + 1; }
    std::size_t cells_per_layer() const { return dpa_link.n_cols; }
    std::size_t dpa_element_count() const { return dpa_link.n_rows; }
};

PropagationStack build_propagation_stack(const Geometry &geometry,
                                         const PhysicalConstants &constants);

} // namespace simwave

#endif
