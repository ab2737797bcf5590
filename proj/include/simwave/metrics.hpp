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

#ifndef SIMWAVE_METRICS_HPP
#define SIMWAVE_METRICS_HPP

#include "simwave/channel.hpp"
#include "simwave/combiner.hpp"

namespace simwave
{

struct RateReport
{
    arma::vec gamma;                // per-user SINR
    arma::vec per_user_rate_bits;   // log2(1 + gamma_k)
    double sum_rate_bits = 0.0;

    arma::vec signal_power_w;
    arma::vec interference_power_w;
    arma::vec colored_noise_power_w;
    arma::vec rf_noise_power_w;
};

// Per-user SINR and achievable rate for combiner row k detecting user k:
//
//   gamma_k = P_T |G_k h_k|^2 /
//             ( sum_{j!=k} P_T |G_k h_j|^2 + s_ant^2 G_k Sigma G_k^H + rf_k )
//
// The colored environmental-noise term is evaluated through the correlation
// factor, ||G_k U||^2. For wave-domain combiners the RF chains sit behind the
// combining, so rf_k = s_rf^2; for digital arrays every element's chain
// contributes and rf_k = s_rf^2 ||G_k||^2 (chain noise referred through the
// digital weights, making the SINR invariant to combiner row scaling).
RateReport sinr(const CombinerMatrix &combiner, const arma::cx_mat &h, const NoiseBudget &noise,
                const arma::cx_mat &correlation_factor);

double sum_rate(const RateReport &report);

} // namespace simwave

#endif
