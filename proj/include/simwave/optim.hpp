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

#ifndef SIMWAVE_OPTIM_HPP
#define SIMWAVE_OPTIM_HPP

#include <functional>
#include <optional>

#include "simwave/metrics.hpp"

namespace simwave
{

struct OptimizerConfig
{
    std::size_t max_iterations = 500;
    double alpha_init = 1.8;          // line-search warm start on the first iteration
    double backtrack_factor = 0.5;    // in (0, 1)
    double armijo_c = 1e-4;           // in (0, 1)
    double rel_improvement_tol = 1e-6;
    std::size_t patience = 10;        // window for the relative-improvement stop
    double mu_min = 1e-12;
    double mu_max = 1e6;
    bool mirror_probe = true;         // also evaluate theta - mu*d at the accepted step
    std::size_t lbfgs_memory = 10;
    std::uint64_t seed = 0;           // used only when no initial profile is supplied

    void validate() const;

    // alpha defaults follow the single-/two-user tuning (1.8 and 2.2)
    static OptimizerConfig gradient_ascent_defaults(std::size_t users);
    static OptimizerConfig quasi_newton_defaults();
};

enum class TerminationReason
{
    max_iterations,
    converged,     // relative improvement below tolerance over the patience window
    stalled,       // no improving step of at least mu_min exists
    zero_gradient
};

const char *to_string(TerminationReason reason);

struct OptimizerTrace
{
    std::vector<double> sum_rate_bits;                 // initial value plus one per accepted step
    std::vector<double> step_size;                     // signed accepted step
    std::vector<std::vector<double>> layer_gradient_max; // per iteration, per layer
    TerminationReason termination = TerminationReason::max_iterations;

    std::size_t iterations() const { return step_size.size(); }
    double final_rate() const { return sum_rate_bits.back(); }
};

struct OptimizationResult
{
    PhaseProfile phases;
    OptimizerTrace trace;
};

// dR/dtheta for every (layer, cell) as a layer_count x cells matrix. Prefix
// and suffix partial products of the cascade are shared across cells so one
// evaluation costs O(L N^2 (K + 1)) instead of O(L^2 N^3).
arma::mat analytic_gradient(const PropagationStack &stack, const PhaseProfile &phases,
                            const arma::cx_mat &h, const NoiseBudget &noise,
                            const arma::cx_mat &correlation_factor);

// Divide each layer's row by that layer's max |entry|; all-zero layers are
// left untouched.
arma::mat normalize_gradient(const arma::mat &gradient);

struct LineSearchResult
{
    double step = 0.0;
    double sign = 1.0;      // +1 for theta + mu d, -1 for the mirrored candidate
    double rate = 0.0;      // objective at the accepted point
    bool stalled = false;
    std::size_t evaluations = 0;
};

using Objective = std::function<double(const PhaseProfile &)>;

// Armijo line search that grows the step while the ascent condition keeps
// holding and shrinks it otherwise, starting from the previously accepted
// step. The mirrored candidate theta - mu d is probed at the accepted mu when
// enabled and wins if it scores higher.
LineSearchResult two_way_backtracking(const Objective &objective, const PhaseProfile &phases,
                                      const arma::mat &gradient, const arma::mat &direction,
                                      double initial_step, double current_rate,
                                      const OptimizerConfig &config);

// Sum-rate ascent with per-layer gradient normalization and simultaneous
// phase updates.
OptimizationResult gradient_ascent(const PropagationStack &stack, const arma::cx_mat &h,
                                   const NoiseBudget &noise,
                                   const arma::cx_mat &correlation_factor,
                                   const OptimizerConfig &config,
                                   std::optional<PhaseProfile> init = std::nullopt);

// Limited-memory BFGS ascent on the same objective and gradient; falls back
// to a plain normalized-gradient step whenever the curvature pairs do not
// yield an ascent direction.
OptimizationResult quasi_newton(const PropagationStack &stack, const arma::cx_mat &h,
                                const NoiseBudget &noise, const arma::cx_mat &correlation_factor,
                                const OptimizerConfig &config,
                                std::optional<PhaseProfile> init = std::nullopt);

} // namespace simwave

#endif
