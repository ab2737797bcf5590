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

#ifndef SIMWAVE_CHANNEL_HPP
#define SIMWAVE_CHANNEL_HPP

#include <armadillo>
#include <cstdint>
#include <vector>

#include "simwave/common.hpp"
#include "simwave/rng.hpp"

namespace simwave
{

// Receive-side spatial correlation of a set of element positions under a 3D
// isotropic scatterer field, plus its positive-semidefinite square-root
// factor. The factor is the symmetric eigendecomposition root, so
// factor * factor ^H reconstructs the (regularized) correlation matrix and
// the factor is its own conjugate transpose.
struct CorrelationModel
{
    arma::mat sigma_rx;   // N x N, unit diagonal
    arma::cx_mat factor;  // N x N symmetric PSD square root
};

// Eigenvalues below this floor are clamped before factoring; the sinc matrix
// is PSD in exact arithmetic but can dip slightly negative numerically.
constexpr double correlation_eigenvalue_floor = 1e-10;

CorrelationModel build_correlation(const std::vector<Vec3> &positions, double wavelength_m);

// sin(pi x) / (pi x), 1 at x = 0
double sinc(double x);

struct NoiseBudget
{
    double sigma2_ant_w = 0.0;       // antenna-captured noise power per element
    double sigma2_rf_w = 0.0;        // input-referred RF-chain noise power per chain
    double p_t_w_per_m2 = 0.0;       // transmit power flux density
    double a_eff_m2 = 0.0;           // effective capture area per receiving element
    double sim_layer_efficiency = 1.0; // per-layer power transmission efficiency, (0, 1]

    void validate() const
    {
        if (sigma2_ant_w <= 0.0 || sigma2_rf_w < 0.0 || p_t_w_per_m2 <= 0.0 || a_eff_m2 <= 0.0)
            throw std::invalid_argument("noise budget: powers and areas must be positive");
        if (sim_layer_efficiency <= 0.0 || sim_layer_efficiency > 1.0)
            throw std::invalid_argument("noise budget: layer efficiency must be in (0, 1]");
    }
};

// One fading realization: H(n, k) = fading x sqrt(path gain) x sqrt(capture
// area), rows matching the receiving elements the correlation was built on.
struct ChannelEnsemble
{
    arma::cx_mat h;                    // N x K
    arma::vec beta;                    // K power path gains
    std::vector<Vec3> user_positions;  // K entries (may be empty for imported data)
    std::uint64_t placement_id = 0;
    std::uint64_t realization_id = 0;
};

// Correlated Rayleigh draw: H = factor * Hiid * diag(sqrt(beta_k * A_eff)),
// Hiid i.i.d. CN(0,1), so column k has covariance beta_k * A_eff * sigma_rx.
ChannelEnsemble build_channel(const CorrelationModel &correlation, const arma::vec &beta,
                              const NoiseBudget &noise, RngStream &rng);

struct PathLossModel
{
    double exponent = 3.67;
    double reference_loss_db = 52.7; // at 1 m
};

// Log-distance power path gain: 10^-(ref + 10 e log10 d)/10.
double path_loss(double distance_m, const PathLossModel &model);

// Environmental noise power captured by an element of effective area A_eff
// over bandwidth B from a 2*pi-steradian noise field at temperature T_E.
double antenna_noise_power(double a_eff_m2, double wavelength_m, double bandwidth_hz,
                           double environment_temperature_k);

// Input-referred RF chain noise k_B * T * B * (F - 1); the chain gain then
// cancels in every SINR.
double rf_noise_power(double bandwidth_hz, double temperature_k, double noise_figure_db);

} // namespace simwave

#endif
