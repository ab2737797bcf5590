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

#include "simwave/channel.hpp"

namespace simwave
{

double sinc(double x)
{
    if (x == 0.0)
        return 1.0;
    const double px = std::numbers::pi * x;
    return std::sin(px) / px;
}

CorrelationModel build_correlation(const std::vector<Vec3> &positions, double wavelength_m)
{
    if (positions.empty())
        throw std::invalid_argument("correlation: need at least one position");
    if (wavelength_m <= 0.0)
        throw std::invalid_argument("correlation: wavelength must be positive");

    const arma::uword n = positions.size();
    arma::mat sigma(n, n);
    for (arma::uword i = 0; i < n; ++i)
    {
        sigma(i, i) = 1.0;
        for (arma::uword j = i + 1; j < n; ++j)
        {
            const double d = (positions[i] - positions[j]).norm();
            const double v = sinc(2.0 * d / wavelength_m);
            sigma(i, j) = v;
            sigma(j, i) = v;
        }
    }

    arma::vec eigval;
    arma::mat eigvec;
    if (!arma::eig_sym(eigval, eigvec, sigma))
        throw std::runtime_error("correlation: eigendecomposition failed");
    eigval.transform([](double v) { return std::max(v, correlation_eigenvalue_floor); });
    const arma::mat root = eigvec * arma::diagmat(arma::sqrt(eigval)) * eigvec.t();

    CorrelationModel model;
    model.sigma_rx = std::move(sigma);
    model.factor = arma::cx_mat(root, arma::mat(n, n, arma::fill::zeros));
    return model;
}

ChannelEnsemble build_channel(const CorrelationModel &correlation, const arma::vec &beta,
                              const NoiseBudget &noise, RngStream &rng)
{
    const arma::uword n = correlation.sigma_rx.n_rows;
    const arma::uword k = beta.n_elem;
    if (k == 0)
        throw std::invalid_argument("channel: need at least one user");
    if (beta.min() <= 0.0)
        throw std::invalid_argument("channel: path gains must be positive");

    arma::cx_mat fading(n, k);
    rng.fill_complex_normal(fading);

    ChannelEnsemble ens;
    ens.h = correlation.factor * fading;
    const arma::vec col_scale = arma::sqrt(beta * noise.a_eff_m2);
    for (arma::uword c = 0; c < k; ++c)
        ens.h.col(c) *= col_scale(c);
    ens.beta = beta;
    return ens;
}

double path_loss(double distance_m, const PathLossModel &model)
{
    if (distance_m <= 0.0)
        throw std::invalid_argument("path loss: distance must be positive");
    const double loss_db = model.reference_loss_db + 10.0 * model.exponent * std::log10(distance_m);
    return std::pow(10.0, -loss_db / 10.0);
}

double antenna_noise_power(double a_eff_m2, double wavelength_m, double bandwidth_hz,
                           double environment_temperature_k)
{
    if (a_eff_m2 <= 0.0 || wavelength_m <= 0.0 || bandwidth_hz <= 0.0 ||
        environment_temperature_k <= 0.0)
        throw std::invalid_argument("antenna noise: all arguments must be positive");
    return boltzmann * environment_temperature_k * bandwidth_hz *
           (a_eff_m2 / (wavelength_m * wavelength_m)) * two_pi;
}

double rf_noise_power(double bandwidth_hz, double temperature_k, double noise_figure_db)
{
    if (bandwidth_hz <= 0.0 || temperature_k <= 0.0)
        throw std::invalid_argument("rf noise: bandwidth and temperature must be positive");
    const double factor = db_to_linear(noise_figure_db);
    return boltzmann * temperature_k * bandwidth_hz * (factor - 1.0);
}

} // namespace simwave
