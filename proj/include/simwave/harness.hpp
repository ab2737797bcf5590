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

#ifndef SIMWAVE_HARNESS_HPP
#define SIMWAVE_HARNESS_HPP

#include <iosfwd>
#include <map>
#include <string>

#include "simwave/channel_io.hpp"
#include "simwave/optim.hpp"

namespace simwave
{

struct config_error : std::runtime_error
{
    using std::runtime_error::runtime_error;
};
struct io_error : std::runtime_error
{
    using std::runtime_error::runtime_error;
};
struct numerical_error : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

enum class Method
{
    sim_ga,
    sim_qn,
    sim_mf,
    dpa_equal_aperture,
    dpa_equal_rf
};

const char *to_string(Method method);
Method method_from_string(const std::string &name);
bool is_sim_method(Method method);

struct GeometrySettings
{
    double aperture_side_wavelengths = 4.0;
    double cell_pitch_wavelengths = 0.5;
    double sim_thickness_wavelengths = 5.0;
    DipoleAxis dipole_axis = DipoleAxis::x;
};

struct UserSettings
{
    std::size_t count = 1;
    double min_distance_m = 20.0;
    double max_distance_m = 200.0;
    double height_m = 1.5;
};

struct NoiseSettings
{
    double environment_temperature_k = 290.0;
    double rf_temperature_k = 290.0;
    double rf_noise_figure_db = 18.8;
    double sim_layer_efficiency = 0.7;
    double dpa_element_efficiency = 0.9;
    double dpa_element_area_m2 = 0.0026;
};

struct OptimizerSettings
{
    std::size_t ga_iterations = 500;
    std::size_t qn_iterations = 100;
    double alpha_init = 0.0; // 0 picks the per-K default (1.8 single user, 2.2 beyond)
    double backtrack_factor = 0.5;
    double armijo_c = 1e-4;
    double rel_improvement_tol = 1e-6;
    bool mirror_probe = true;
};

struct ChannelSourceSettings
{
    enum class Type
    {
        generate_rayleigh,
        import
    };
    Type type = Type::generate_rayleigh;
    std::string path;
};

struct ExperimentConfig
{
    double carrier_frequency_hz = 3.0e9;
    double bandwidth_hz = 20.0e6;
    GeometrySettings geometry;
    UserSettings users;
    std::vector<Method> methods{Method::sim_ga};
    std::vector<double> pt_dbm_per_m2{20.0};
    std::vector<std::size_t> layers{5};
    std::size_t placements = 10;
    std::size_t realizations_per_placement = 100;
    std::uint64_t master_seed = 1;
    PathLossModel path_loss;
    ChannelSourceSettings channel_source;
    NoiseSettings noise;
    OptimizerSettings optimizer;
    std::size_t workers = 0; // 0 = all hardware threads

    void validate() const; // throws config_error naming the offending field path
    static ExperimentConfig from_json_file(const std::string &path);
    static ExperimentConfig from_json_text(const std::string &text);
};

struct TrialResult
{
    Method method = Method::sim_ga;
    std::size_t layer_count = 0;
    double pt_dbm_per_m2 = 0.0;
    std::uint64_t placement = 0;
    std::uint64_t realization = 0;
    arma::vec gamma;
    arma::vec per_user_rate_bits;
    double sum_rate_bits = 0.0;
    std::size_t iterations = 0;
    double seconds = 0.0;
};

struct AggregateRow
{
    Method method;
    std::size_t layer_count;
    double pt_dbm_per_m2;
    std::size_t trials;
    double mean_sum_rate_bits;
    double ci95_bits; // 1.96 * stderr of the mean
};

struct CampaignResult
{
    std::vector<TrialResult> trials;        // canonical order
    std::vector<AggregateRow> aggregates;   // per (method, L, P_T)
};

// Runs the full (method x L x P_T x placement x realization) grid. All SIM
// methods of a cell share one channel realization; DPA methods draw their own
// on their own geometry from matched (placement, realization) streams.
CampaignResult run_experiment(const ExperimentConfig &config);

// Thin wrappers that insist the swept axis is non-trivial.
CampaignResult sweep_layers(const ExperimentConfig &config);
CampaignResult sweep_power(const ExperimentConfig &config);

struct GradientCheckInstance
{
    std::size_t layer_count, cells, users;
    double max_rel_error;
};

struct GradientCheckReport
{
    std::vector<GradientCheckInstance> instances;
    double max_rel_error = 0.0;
    double tolerance = 1e-5;
    bool passed() const { return max_rel_error <= tolerance; }
};

// Central finite-difference verification of the analytic gradient on random
// small instances. The optional mutator distorts the analytic gradient before
// comparison (negative-control hook for tests).
GradientCheckReport
gradient_check(std::uint64_t seed, std::size_t instance_count = 20,
               const std::function<arma::mat(const arma::mat &)> &mutator = nullptr);

// Generate the per-(placement, realization) SIM channel ensembles a campaign
// would use and write them to the binary container.
void export_campaign_channels(const ExperimentConfig &config, const std::string &path);

// one row per (trial, user); the seconds column is wall time and is the only
// field not derived from the master seed
void write_csv(const CampaignResult &result, std::ostream &out);
void write_summary_json(const ExperimentConfig &config, const CampaignResult &result,
                        std::ostream &out);

} // namespace simwave

#endif
