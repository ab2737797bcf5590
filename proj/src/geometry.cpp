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

#include "simwave/geometry.hpp"

#include <complex>
#include <string>

namespace simwave
{

namespace
{

// Power-pattern normalization of the short-dipole model: 3*sqrt(2)/(8*pi).
constexpr double dipole_power_scale = 0.1688093092794574;

double axis_component(const Vec3 &v, DipoleAxis axis)
{
    return axis == DipoleAxis::x ? v.x : v.y;
}

} // namespace

std::vector<Vec3> square_grid(std::size_t count_per_side, double pitch, double z)
{
    std::vector<Vec3> pts;
    pts.reserve(count_per_side * count_per_side);
    const double half = 0.5 * static_cast<double>(count_per_side - 1);
    for (std::size_t i = 0; i < count_per_side; ++i)
        for (std::size_t j = 0; j < count_per_side; ++j)
            pts.push_back({(static_cast<double>(i) - half) * pitch,
                           (static_cast<double>(j) - half) * pitch, z});
    return pts;
}

Geometry build_geometry(const PhysicalConstants &constants, double aperture_side_m,
                        double cell_pitch_m, std::size_t layer_count, double sim_thickness_m,
                        std::size_t dpa_element_count, DpaLayout dpa_layout,
                        const std::vector<Vec3> &explicit_dpa_positions, DipoleAxis dipole_axis)
{
    if (aperture_side_m <= 0.0 || cell_pitch_m <= 0.0)
        throw std::invalid_argument("aperture side and cell pitch must be positive");
    if (layer_count < 1)
        throw std::invalid_argument("layer count must be >= 1");
    if (sim_thickness_m <= 0.0)
        throw std::invalid_argument("sim thickness must be positive");
    if (dpa_element_count < 1)
        throw std::invalid_argument("dpa element count must be >= 1");

    const double ratio = aperture_side_m / cell_pitch_m;
    const double rounded = std::round(ratio);
    if (std::abs(ratio - rounded) > 1e-9 * ratio || rounded < 1.0)
        throw std::invalid_argument("aperture side " + std::to_string(aperture_side_m) +
                                    " is not an integer multiple of cell pitch " +
                                    std::to_string(cell_pitch_m));
    const auto cells_per_side = static_cast<std::size_t>(rounded);

    Geometry g;
    g.aperture_side_m = aperture_side_m;
    g.cell_pitch_m = cell_pitch_m;
    g.layer_count = layer_count;
    g.sim_thickness_m = sim_thickness_m;
    g.cells_per_layer = cells_per_side * cells_per_side;
    g.dipole_axis = dipole_axis;

    const double spacing = sim_thickness_m / static_cast<double>(layer_count);
    g.layer_cell_positions.reserve(layer_count);
    for (std::size_t l = 0; l < layer_count; ++l)
        g.layer_cell_positions.push_back(
            square_grid(cells_per_side, cell_pitch_m, static_cast<double>(l + 1) * spacing));

    const double half_wave = 0.5 * constants.wavelength_m;
    switch (dpa_layout)
    {
    case DpaLayout::linear_half_wavelength:
    {
        const double extent = static_cast<double>(dpa_element_count - 1) * half_wave;
        if (extent > aperture_side_m + 1e-12)
            throw std::invalid_argument("linear DPA layout of " +
                                        std::to_string(dpa_element_count) +
                                        " elements does not fit inside the aperture");
        const double half = 0.5 * static_cast<double>(dpa_element_count - 1);
        for (std::size_t m = 0; m < dpa_element_count; ++m)
            g.dpa_element_positions.push_back(
                {(static_cast<double>(m) - half) * half_wave, 0.0, 0.0});
        break;
    }
    case DpaLayout::grid_half_wavelength:
    {
        const auto side = static_cast<std::size_t>(
            std::round(std::sqrt(static_cast<double>(dpa_element_count))));
        if (side * side != dpa_element_count)
            throw std::invalid_argument("grid DPA layout requires a square element count, got " +
                                        std::to_string(dpa_element_count));
        const double extent = static_cast<double>(side - 1) * half_wave;
        if (extent > aperture_side_m + 1e-12)
            throw std::invalid_argument("grid DPA layout of " + std::to_string(dpa_element_count) +
                                        " elements does not fit inside the aperture");
        g.dpa_element_positions = square_grid(side, half_wave, 0.0);
        break;
    }
    case DpaLayout::explicit_list:
    {
        if (explicit_dpa_positions.size() != dpa_element_count)
            throw std::invalid_argument("explicit DPA layout: position count does not match M");
        g.dpa_element_positions = explicit_dpa_positions;
        break;
    }
    }

    return g;
}

double propagation_amplitude(const Vec3 &source, const Vec3 &target, DipoleAxis axis)
{
    const Vec3 d = target - source;
    const double r = d.norm();
    if (r <= 0.0)
        throw std::invalid_argument("propagation amplitude: source and target coincide");
    const double cos_theta = axis_component(d, axis) / r;
    const double sin2_theta = 1.0 - cos_theta * cos_theta;
    return std::sqrt(dipole_power_scale * std::max(sin2_theta, 0.0)) / r;
}

double propagation_phase(const Vec3 &source, const Vec3 &target, double wavenumber)
{
    const double r = (target - source).norm();
    if (r <= 0.0)
        throw std::invalid_argument("propagation phase: source and target coincide");
    const double kr = wavenumber * r;
    const std::complex<double> near_term(1.0 - 1.0 / (kr * kr), -1.0 / kr);
    double phase = std::numbers::pi / 2.0 - kr + std::arg(near_term);
    // reduce to (-pi, pi]
    phase = std::remainder(phase, two_pi);
    if (phase <= -std::numbers::pi)
        phase += two_pi;
    return phase;
}

std::complex<double> propagation_coefficient(const Vec3 &source, const Vec3 &target,
                                             DipoleAxis axis, double wavenumber)
{
    return std::polar(propagation_amplitude(source, target, axis),
                      propagation_phase(source, target, wavenumber));
}

arma::cx_mat propagation_matrix(const std::vector<Vec3> &sources, const std::vector<Vec3> &targets,
                                DipoleAxis axis, double wavenumber)
{
    arma::cx_mat p(targets.size(), sources.size());
    for (std::size_t s = 0; s < sources.size(); ++s)
        for (std::size_t t = 0; t < targets.size(); ++t)
            p(t, s) = propagation_coefficient(sources[s], targets[t], axis, wavenumber);
    return p;
}

PropagationStack build_propagation_stack(const Geometry &geometry,
                                         const PhysicalConstants &constants)
{
    const double k0 = constants.wavenumber_rad_per_m;
    PropagationStack stack;
    // DPA <-> innermost layer, entry (m, n); the coupling coefficient is
    // direction-symmetric so reciprocity is a plain transpose.
    stack.dpa_link = propagation_matrix(geometry.layer_cell_positions.front(),
                                        geometry.dpa_element_positions, geometry.dipole_axis, k0);
    stack.interlayer.reserve(geometry.layer_count - 1);
    for (std::size_t l = 0; l + 1 < geometry.layer_count; ++l)
        stack.interlayer.push_back(propagation_matrix(geometry.layer_cell_positions[l],
                                                      geometry.layer_cell_positions[l + 1],
                                                      geometry.dipole_axis, k0));
    return stack;
}

} // namespace simwave
