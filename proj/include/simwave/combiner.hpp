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

#ifndef SIMWAVE_COMBINER_HPP
#define SIMWAVE_COMBINER_HPP

#include <armadillo>
#include <vector>

#include "simwave/geometry.hpp"
#include "simwave/rng.hpp"

namespace simwave
{

// One phase shift per unit-cell per layer, stored canonically in [0, 2*pi).
struct PhaseProfile
{
    std::vector<arma::vec> layers;

    std::size_t layer_count() const { return layers.size(); }
    std::size_t cells_per_layer() const { return layers.empty() ? 0 : layers.front().n_elem; }

    // wrap every entry into [0, 2*pi); a no-op on downstream values
    void canonicalize();

    static PhaseProfile zeros(std::size_t layer_count, std::size_t cells_per_layer);
    static PhaseProfile random(std::size_t layer_count, std::size_t cells_per_layer,
                               RngStream &rng);
};

enum class CombinerKind
{
    sim,
    sim_matched_filter,
    dpa_mrc,
    dpa_zf
};

// The kind records where RF-chain noise enters relative to the combiner:
// wave-domain kinds combine before the (M = K) RF chains, digital kinds
// combine per-chain outputs. The metrics module keys its RF-noise term on
// this.
struct CombinerMatrix
{
    arma::cx_mat g; // M x N
    CombinerKind kind = CombinerKind::sim;

    bool wave_domain() const
    {
        return kind == CombinerKind::sim || kind == CombinerKind::sim_matched_filter;
    }
};

// Effective wave-domain combiner of the whole stack:
// sqrt(T^L) * P_dpa * W_1 * P_12 * W_2 * ... * P_(L-1)L * W_L
// with W_l = diag(exp(j theta_l)).
CombinerMatrix compose_sim(const PropagationStack &stack, const PhaseProfile &phases,
                           double layer_efficiency,
                           CombinerKind kind = CombinerKind::sim);

struct MatchedFilterResult
{
    PhaseProfile phases;
    std::size_t undefined_phase_count = 0; // entries where the arriving field was exactly zero
};

// Layer-by-layer phase-compensation heuristic for one target user: working
// from the outermost layer inward, each cell cancels the phase of its
// arriving equivalent channel plus the phase of its straight-through coupling
// into the next plane (the diagonal of the inward propagation matrix; on the
// innermost layer, the target user's row of the DPA link). The phased field
// is propagated inward through the full coupling matrix between layers.
MatchedFilterResult matched_filter_phases(const PropagationStack &stack, const arma::cx_mat &h,
                                          std::size_t target_user);

// Digital-array baselines. MRC is single-user conjugate matching; ZF inverts
// the channel via a linear solve and refuses condition numbers above 1e12.
CombinerMatrix dpa_mrc(const arma::cx_mat &h_dpa);
CombinerMatrix dpa_zf(const arma::cx_mat &h_dpa);

constexpr double zf_condition_limit = 1e12;

} // namespace simwave

#endif
