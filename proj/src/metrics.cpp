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

#include "simwave/metrics.hpp"

namespace simwave
{

RateReport sinr(const CombinerMatrix &combiner, const arma::cx_mat &h, const NoiseBudget &noise,
                const arma::cx_mat &correlation_factor)
{
    const arma::uword users = h.n_cols;
    const arma::uword elements = h.n_rows;
    if (combiner.g.n_cols != elements)
        throw std::invalid_argument("sinr: combiner columns do not match channel rows");
    if (combiner.g.n_rows != users)
        throw std::invalid_argument("sinr: combiner rows must match the user count");
    if (correlation_factor.n_rows != elements || correlation_factor.n_cols != elements)
        throw std::invalid_argument("sinr: correlation factor has wrong dimensions");
    noise.validate();

    RateReport rep;
    rep.gamma.set_size(users);
    rep.per_user_rate_bits.set_size(users);
    rep.signal_power_w.set_size(users);
    rep.interference_power_w.set_size(users);
    rep.colored_noise_power_w.set_size(users);
    rep.rf_noise_power_w.set_size(users);

    const arma::cx_mat mixed = combiner.g * h;                  // K x K
    const arma::cx_mat colored = combiner.g * correlation_factor; // K x N

    for (arma::uword k = 0; k < users; ++k)
    {
        const double signal = noise.p_t_w_per_m2 * std::norm(mixed(k, k));
        double interference = 0.0;
        for (arma::uword j = 0; j < users; ++j)
            if (j != k)
                interference += noise.p_t_w_per_m2 * std::norm(mixed(k, j));
        const double colored_noise =
            noise.sigma2_ant_w * std::real(arma::cdot(colored.row(k), colored.row(k)));
        const double rf_scale =
            combiner.wave_domain() ? 1.0 : std::real(arma::cdot(combiner.g.row(k), combiner.g.row(k)));
        const double rf = noise.sigma2_rf_w * rf_scale;

        rep.signal_power_w(k) = signal;
        rep.interference_power_w(k) = interference;
        rep.colored_noise_power_w(k) = colored_noise;
        rep.rf_noise_power_w(k) = rf;
        rep.gamma(k) = signal / (interference + colored_noise + rf);
        rep.per_user_rate_bits(k) = std::log2(1.0 + rep.gamma(k));
    }
    rep.sum_rate_bits = arma::accu(rep.per_user_rate_bits);
    return rep;
}

double sum_rate(const RateReport &report) { return arma::accu(report.per_user_rate_bits); }

} // namespace simwave
