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

#include "simwave/combiner.hpp"

namespace simwave
{

void PhaseProfile::canonicalize()
{
    for (auto &layer : layers)
        layer.transform([](double v) {
            double w = std::remainder(v, two_pi);
            if (w < 0.0)
                w += two_pi;
            return w;
        });
}

PhaseProfile PhaseProfile::zeros(std::size_t layer_count, std::size_t cells_per_layer)
{
    PhaseProfile p;
    p.layers.assign(layer_count, arma::vec(cells_per_layer, arma::fill::zeros));
    return p;
}

PhaseProfile PhaseProfile::random(std::size_t layer_count, std::size_t cells_per_layer,
                                  RngStream &rng)
{
    PhaseProfile p;
    p.layers.reserve(layer_count);
    for (std::size_t l = 0; l < layer_count; ++l)
    {
        arma::vec v(cells_per_layer);
        for (auto &e : v)
            e = rng.uniform(0.0, two_pi);
        p.layers.push_back(std::move(v));
    }
    return p;
}

namespace
{

arma::cx_rowvec phase_row(const arma::vec &theta)
{
    arma::cx_rowvec w(theta.n_elem);
    for (arma::uword i = 0; i < theta.n_elem; ++i)
        w(i) = std::polar(1.0, theta(i));
    return w;
}

void check_dimensions(const PropagationStack &stack, const PhaseProfile &phases)
{
    if (phases.layer_count() != stack.layer_count())
        throw std::invalid_argument("combiner: phase profile layer count " +
                                    std::to_string(phases.layer_count()) +
                                    " does not match the stack's " +
                                    std::to_string(stack.layer_count()));
    for (const auto &layer : phases.layers)
        if (layer.n_elem != stack.cells_per_layer())
            throw std::invalid_argument("combiner: phase vector length does not match cell count");
}

} // namespace

CombinerMatrix compose_sim(const PropagationStack &stack, const PhaseProfile &phases,
                           double layer_efficiency, CombinerKind kind)
{
    check_dimensions(stack, phases);
    if (layer_efficiency <= 0.0 || layer_efficiency > 1.0)
        throw std::invalid_argument("combiner: layer efficiency must be in (0, 1]");

    const std::size_t layer_count = stack.layer_count();
    arma::cx_mat g = stack.dpa_link;
    g.each_row() %= phase_row(phases.layers[0]);
    for (std::size_t l = 1; l < layer_count; ++l)
    {
        g = g * stack.interlayer[l - 1];
        g.each_row() %= phase_row(phases.layers[l]);
    }
    g *= std::sqrt(std::pow(layer_efficiency, static_cast<double>(layer_count)));
    return {std::move(g), kind};
}

MatchedFilterResult matched_filter_phases(const PropagationStack &stack, const arma::cx_mat &h,
                                          std::size_t target_user)
{
    if (target_user >= h.n_cols || target_user >= stack.dpa_element_count())
        throw std::invalid_argument("matched filter: target user out of range");
    if (h.n_rows != stack.cells_per_layer())
        throw std::invalid_argument("matched filter: channel rows do not match cell count");

    const std::size_t layer_count = stack.layer_count();
    const arma::uword n = stack.cells_per_layer();

    MatchedFilterResult result;
    result.phases.layers.assign(layer_count, arma::vec(n, arma::fill::zeros));

    arma::cx_vec arriving = h.col(target_user); // equivalent channel at the outermost layer
    for (std::size_t l = layer_count; l >= 1; --l)
    {
        arma::cx_vec inward_diag(n);
        if (l >= 2)
            inward_diag = stack.interlayer[l - 2].diag();
        else
            inward_diag = stack.dpa_link.row(target_user).st();

        arma::vec &theta = result.phases.layers[l - 1];
        for (arma::uword i = 0; i < n; ++i)
        {
            if (arriving(i) == std::complex<double>(0.0, 0.0))
            {
                ++result.undefined_phase_count;
                theta(i) = 0.0;
            }
            else
            {
                theta(i) = -std::arg(arriving(i)) - std::arg(inward_diag(i));
            }
        }

        if (l >= 2)
        {
            arma::cx_vec phased(n);
            for (arma::uword i = 0; i < n; ++i)
                phased(i) = std::polar(1.0, theta(i)) * arriving(i);
            arriving = stack.interlayer[l - 2] * phased;
        }
    }
    result.phases.canonicalize();
    return result;
}

CombinerMatrix dpa_mrc(const arma::cx_mat &h_dpa)
{
    if (h_dpa.n_cols != 1)
        throw std::invalid_argument("mrc: defined for a single user");
    return {h_dpa.t(), CombinerKind::dpa_mrc};
}

CombinerMatrix dpa_zf(const arma::cx_mat &h_dpa)
{
    if (h_dpa.n_rows < h_dpa.n_cols)
        throw std::invalid_argument("zf: channel needs at least as many elements as users");
    const double condition = arma::cond(h_dpa);
    if (!std::isfinite(condition) || condition > zf_condition_limit)
        throw std::runtime_error("zf: channel is rank deficient, condition number " +
                                 std::to_string(condition));
    const arma::cx_mat gram = h_dpa.t() * h_dpa;
    const arma::cx_mat g = arma::solve(gram, h_dpa.t(), arma::solve_opts::likely_sympd);
    return {g, CombinerKind::dpa_zf};
}

} // namespace simwave
