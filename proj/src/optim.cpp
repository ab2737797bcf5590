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

#include "simwave/optim.hpp"

#include <deque>

namespace simwave
{

void OptimizerConfig::validate() const
{
    if (max_iterations < 1)
        throw std::invalid_argument("optimizer: max_iterations must be >= 1");
    if (backtrack_factor <= 0.0 || backtrack_factor >= 1.0)
        throw std::invalid_argument("optimizer: backtrack factor must be in (0, 1)");
    if (armijo_c <= 0.0 || armijo_c >= 1.0)
        throw std::invalid_argument("optimizer: armijo constant must be in (0, 1)");
    if (alpha_init <= 0.0 || mu_min <= 0.0 || mu_max <= mu_min)
        throw std::invalid_argument("optimizer: step-size bounds must satisfy 0 < mu_min < mu_max");
    if (rel_improvement_tol < 0.0)
        throw std::invalid_argument("optimizer: relative improvement tolerance must be >= 0");
    if (patience < 1)
        throw std::invalid_argument("optimizer: patience must be >= 1");
}

OptimizerConfig OptimizerConfig::gradient_ascent_defaults(std::size_t users)
{
    OptimizerConfig c;
    c.max_iterations = 500;
    c.alpha_init = users >= 2 ? 2.2 : 1.8;
    return c;
}

OptimizerConfig OptimizerConfig::quasi_newton_defaults()
{
    OptimizerConfig c;
    c.max_iterations = 100;
    c.alpha_init = 1.0;
    c.mirror_probe = false;
    return c;
}

const char *to_string(TerminationReason reason)
{
    switch (reason)
    {
    case TerminationReason::max_iterations: return "max_iterations";
    case TerminationReason::converged: return "converged";
    case TerminationReason::stalled: return "stalled";
    case TerminationReason::zero_gradient: return "zero_gradient";
    }
    return "unknown";
}

namespace
{

arma::cx_vec unit_phasors(const arma::vec &theta)
{
    arma::cx_vec w(theta.n_elem);
    for (arma::uword i = 0; i < theta.n_elem; ++i)
        w(i) = std::polar(1.0, theta(i));
    return w;
}

PhaseProfile advance(const PhaseProfile &phases, const arma::mat &direction, double signed_step)
{
    PhaseProfile out = phases;
    for (std::size_t l = 0; l < out.layers.size(); ++l)
        out.layers[l] += signed_step * direction.row(l).t();
    return out;
}

std::vector<double> layer_max_abs(const arma::mat &gradient)
{
    std::vector<double> out(gradient.n_rows);
    for (arma::uword l = 0; l < gradient.n_rows; ++l)
        out[l] = arma::abs(gradient.row(l)).max();
    return out;
}

struct ConvergenceWindow
{
    // stop once the relative gain over the last `patience` accepted steps
    // drops below tol
    bool converged(const std::vector<double> &rates, const OptimizerConfig &config) const
    {
        if (rates.size() <= config.patience)
            return false;
        const double now = rates.back();
        const double then = rates[rates.size() - 1 - config.patience];
        return (now - then) <= config.rel_improvement_tol * std::max(std::abs(now), 1e-300);
    }
};

} // namespace

arma::mat analytic_gradient(const PropagationStack &stack, const PhaseProfile &phases,
                            const arma::cx_mat &h, const NoiseBudget &noise,
                            const arma::cx_mat &correlation_factor)
{
    const std::size_t layer_count = stack.layer_count();
    const arma::uword cells = stack.cells_per_layer();
    const arma::uword users = h.n_cols;
    if (phases.layer_count() != layer_count || phases.cells_per_layer() != cells)
        throw std::invalid_argument("gradient: phase profile does not match the stack");
    if (h.n_rows != cells)
        throw std::invalid_argument("gradient: channel rows do not match cell count");
    if (stack.dpa_element_count() != users)
        throw std::invalid_argument("gradient: combiner output count must equal user count");

    const double cascade_scale =
        std::sqrt(std::pow(noise.sim_layer_efficiency, static_cast<double>(layer_count)));

    std::vector<arma::cx_vec> w(layer_count);
    for (std::size_t l = 0; l < layer_count; ++l)
        w[l] = unit_phasors(phases.layers[l]);

    // prefix[l] = P_dpa W_1 P_12 ... P_(l-1)l  (ends with a propagation hop)
    std::vector<arma::cx_mat> prefix(layer_count);
    prefix[0] = stack.dpa_link;
    for (std::size_t l = 1; l < layer_count; ++l)
    {
        arma::cx_mat scaled = prefix[l - 1];
        scaled.each_row() %= w[l - 1].st();
        prefix[l] = scaled * stack.interlayer[l - 1];
    }

    arma::cx_mat g_full = prefix[layer_count - 1];
    g_full.each_row() %= w[layer_count - 1].st();
    g_full *= cascade_scale;

    // suffix products applied to the channel columns and to the
    // correlation-shaped combiner rows
    std::vector<arma::cx_mat> chan_suffix(layer_count);
    chan_suffix[layer_count - 1] = h;
    const arma::cx_mat colored = g_full * correlation_factor; // K x N
    std::vector<arma::cx_mat> corr_suffix(layer_count);
    corr_suffix[layer_count - 1] = correlation_factor * colored.t(); // Sigma * G^H, N x K
    for (std::size_t l = layer_count - 1; l >= 1; --l)
    {
        arma::cx_mat scaled_chan = chan_suffix[l];
        scaled_chan.each_col() %= w[l];
        chan_suffix[l - 1] = stack.interlayer[l - 1] * scaled_chan;
        arma::cx_mat scaled_corr = corr_suffix[l];
        scaled_corr.each_col() %= w[l];
        corr_suffix[l - 1] = stack.interlayer[l - 1] * scaled_corr;
    }

    const arma::cx_mat mixed = g_full * h; // K x K, entry (k, j) = G_k h_j
    arma::vec signal(users), denom(users), gamma(users);
    for (arma::uword k = 0; k < users; ++k)
    {
        signal(k) = noise.p_t_w_per_m2 * std::norm(mixed(k, k));
        double z = noise.sigma2_rf_w +
                   noise.sigma2_ant_w * std::real(arma::cdot(colored.row(k), colored.row(k)));
        for (arma::uword j = 0; j < users; ++j)
            if (j != k)
                z += noise.p_t_w_per_m2 * std::norm(mixed(k, j));
        denom(k) = z;
        gamma(k) = z > 0.0 ? signal(k) / z : 0.0;
    }

    const double inv_log2 = 1.0 / std::log(2.0);
    arma::mat gradient(layer_count, cells, arma::fill::zeros);
    for (std::size_t l = 0; l < layer_count; ++l)
    {
        const arma::cx_vec jw = arma::cx_double(0.0, 1.0) * w[l];
        for (arma::uword k = 0; k < users; ++k)
        {
            if (denom(k) <= 0.0)
                continue;
            const arma::cx_vec common = cascade_scale * (prefix[l].row(k).st() % jw);
            const arma::vec d_signal =
                2.0 * noise.p_t_w_per_m2 *
                arma::real(std::conj(mixed(k, k)) * (common % chan_suffix[l].col(k)));
            arma::vec d_denom =
                2.0 * noise.sigma2_ant_w * arma::real(common % corr_suffix[l].col(k));
            for (arma::uword j = 0; j < users; ++j)
                if (j != k)
                    d_denom += 2.0 * noise.p_t_w_per_m2 *
                               arma::real(std::conj(mixed(k, j)) * (common % chan_suffix[l].col(j)));
            const double coef = inv_log2 / (1.0 + gamma(k));
            gradient.row(l) +=
                (coef * (d_signal * denom(k) - d_denom * signal(k)) / (denom(k) * denom(k))).t();
        }
    }
    return gradient;
}

arma::mat normalize_gradient(const arma::mat &gradient)
{
    arma::mat out = gradient;
    for (arma::uword l = 0; l < out.n_rows; ++l)
    {
        const double peak = arma::abs(out.row(l)).max();
        if (peak > 0.0)
            out.row(l) /= peak;
    }
    return out;
}

LineSearchResult two_way_backtracking(const Objective &objective, const PhaseProfile &phases,
                                      const arma::mat &gradient, const arma::mat &direction,
                                      double initial_step, double current_rate,
                                      const OptimizerConfig &config)
{
    LineSearchResult result;
    const double slope = arma::accu(gradient % direction);
    if (!(slope > 0.0))
    {
        result.stalled = true;
        return result;
    }

    auto rate_at = [&](double signed_step) {
        ++result.evaluations;
        return objective(advance(phases, direction, signed_step));
    };
    auto armijo_holds = [&](double mu, double rate) {
        return rate >= current_rate + config.armijo_c * mu * slope;
    };

    double mu = std::clamp(initial_step, config.mu_min, config.mu_max);
    double rate = rate_at(mu);
    if (armijo_holds(mu, rate))
    {
        while (mu / config.backtrack_factor <= config.mu_max)
        {
            const double grown = mu / config.backtrack_factor;
            const double grown_rate = rate_at(grown);
            if (!armijo_holds(grown, grown_rate))
                break;
            mu = grown;
            rate = grown_rate;
        }
    }
    else
    {
        bool found = false;
        while (mu * config.backtrack_factor >= config.mu_min)
        {
            mu *= config.backtrack_factor;
            rate = rate_at(mu);
            if (armijo_holds(mu, rate))
            {
                found = true;
                break;
            }
        }
        if (!found)
        {
            result.stalled = true;
            result.step = 0.0;
            return result;
        }
    }

    result.step = mu;
    result.rate = rate;
    if (config.mirror_probe)
    {
        const double mirrored = rate_at(-mu);
        if (mirrored > rate)
        {
            result.sign = -1.0;
            result.rate = mirrored;
        }
    }
    return result;
}

namespace
{

struct Problem
{
    const PropagationStack &stack;
    const arma::cx_mat &h;
    const NoiseBudget &noise;
    const arma::cx_mat &factor;

    double rate(const PhaseProfile &phases) const
    {
        const CombinerMatrix g = compose_sim(stack, phases, noise.sim_layer_efficiency);
        return sinr(g, h, noise, factor).sum_rate_bits;
    }

    arma::mat gradient(const PhaseProfile &phases) const
    {
        return analytic_gradient(stack, phases, h, noise, factor);
    }
};

PhaseProfile initial_profile(const PropagationStack &stack, const OptimizerConfig &config,
                             std::optional<PhaseProfile> init)
{
    if (init)
    {
        PhaseProfile p = std::move(*init);
        p.canonicalize();
        return p;
    }
    RngStream rng = RngStream::derive(config.seed, "phase-init");
    return PhaseProfile::random(stack.layer_count(), stack.cells_per_layer(), rng);
}

arma::vec flatten(const arma::mat &m) { return arma::vectorise(m); }

} // namespace

OptimizationResult gradient_ascent(const PropagationStack &stack, const arma::cx_mat &h,
                                   const NoiseBudget &noise,
                                   const arma::cx_mat &correlation_factor,
                                   const OptimizerConfig &config, std::optional<PhaseProfile> init)
{
    config.validate();
    const Problem problem{stack, h, noise, correlation_factor};
    const Objective objective = [&](const PhaseProfile &p) { return problem.rate(p); };

    OptimizationResult result;
    result.phases = initial_profile(stack, config, std::move(init));
    result.trace.sum_rate_bits.push_back(problem.rate(result.phases));
    result.trace.termination = TerminationReason::max_iterations;

    const ConvergenceWindow window;
    double warm_step = config.alpha_init;
    for (std::size_t it = 0; it < config.max_iterations; ++it)
    {
        const arma::mat gradient = problem.gradient(result.phases);
        result.trace.layer_gradient_max.push_back(layer_max_abs(gradient));
        if (arma::abs(gradient).max() == 0.0)
        {
            result.trace.termination = TerminationReason::zero_gradient;
            break;
        }
        const arma::mat direction = normalize_gradient(gradient);
        const LineSearchResult ls =
            two_way_backtracking(objective, result.phases, gradient, direction, warm_step,
                                 result.trace.sum_rate_bits.back(), config);
        if (ls.stalled)
        {
            result.trace.termination = TerminationReason::stalled;
            break;
        }
        result.phases = advance(result.phases, direction, ls.sign * ls.step);
        result.phases.canonicalize();
        result.trace.sum_rate_bits.push_back(ls.rate);
        result.trace.step_size.push_back(ls.sign * ls.step);
        warm_step = ls.step;
        if (window.converged(result.trace.sum_rate_bits, config))
        {
            result.trace.termination = TerminationReason::converged;
            break;
        }
    }
    return result;
}

OptimizationResult quasi_newton(const PropagationStack &stack, const arma::cx_mat &h,
                                const NoiseBudget &noise, const arma::cx_mat &correlation_factor,
                                const OptimizerConfig &config, std::optional<PhaseProfile> init)
{
    config.validate();
    const Problem problem{stack, h, noise, correlation_factor};
    const Objective objective = [&](const PhaseProfile &p) { return problem.rate(p); };

    const std::size_t layer_count = stack.layer_count();
    const arma::uword cells = stack.cells_per_layer();

    OptimizationResult result;
    result.phases = initial_profile(stack, config, std::move(init));
    result.trace.sum_rate_bits.push_back(problem.rate(result.phases));
    result.trace.termination = TerminationReason::max_iterations;

    struct Pair
    {
        arma::vec s, y; // y is the descent-gradient difference of f = -R
        double rho;
    };
    std::deque<Pair> memory;

    arma::mat gradient = problem.gradient(result.phases);
    const ConvergenceWindow window;
    for (std::size_t it = 0; it < config.max_iterations; ++it)
    {
        result.trace.layer_gradient_max.push_back(layer_max_abs(gradient));
        if (arma::abs(gradient).max() == 0.0)
        {
            result.trace.termination = TerminationReason::zero_gradient;
            break;
        }

        // two-loop recursion on f = -R; p is the ascent direction for R
        arma::vec q = -flatten(gradient);
        std::vector<double> alpha(memory.size());
        for (std::size_t i = memory.size(); i-- > 0;)
        {
            alpha[i] = memory[i].rho * arma::dot(memory[i].s, q);
            q -= alpha[i] * memory[i].y;
        }
        if (!memory.empty())
        {
            const Pair &last = memory.back();
            q *= arma::dot(last.s, last.y) / arma::dot(last.y, last.y);
        }
        for (std::size_t i = 0; i < memory.size(); ++i)
        {
            const double beta = memory[i].rho * arma::dot(memory[i].y, q);
            q += (alpha[i] - beta) * memory[i].s;
        }
        arma::mat direction = arma::reshape(-q, layer_count, cells);

        if (!(arma::accu(gradient % direction) > 0.0))
            direction = normalize_gradient(gradient); // curvature failed, plain ascent step

        const LineSearchResult ls =
            two_way_backtracking(objective, result.phases, gradient, direction, config.alpha_init,
                                 result.trace.sum_rate_bits.back(), config);
        if (ls.stalled)
        {
            result.trace.termination = TerminationReason::stalled;
            break;
        }

        const PhaseProfile next = advance(result.phases, direction, ls.sign * ls.step);
        const arma::mat next_gradient = problem.gradient(next);

        const arma::vec s = ls.sign * ls.step * flatten(direction);
        const arma::vec y = -(flatten(next_gradient) - flatten(gradient));
        const double sy = arma::dot(s, y);
        if (sy > 1e-10 * arma::norm(s) * arma::norm(y))
        {
            memory.push_back({s, y, 1.0 / sy});
            if (memory.size() > config.lbfgs_memory)
                memory.pop_front();
        }

        result.phases = next;
        gradient = next_gradient;
        result.trace.sum_rate_bits.push_back(ls.rate);
        result.trace.step_size.push_back(ls.sign * ls.step);
        if (window.converged(result.trace.sum_rate_bits, config))
        {
            result.trace.termination = TerminationReason::converged;
            break;
        }
    }
    result.phases.canonicalize();
    return result;
}

} // namespace simwave
