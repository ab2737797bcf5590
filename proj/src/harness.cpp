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

#include "simwave/harness.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace simwave
{

using nlohmann::json;

const char *to_string(Method method)
{
    switch (method)
    {
    case Method::sim_ga: return "sim_ga";
    case Method::sim_qn: return "sim_qn";
    case Method::sim_mf: return "sim_mf";
    case Method::dpa_equal_aperture: return "dpa_equal_aperture";
    case Method::dpa_equal_rf: return "dpa_equal_rf";
    }
    return "unknown";
}

Method method_from_string(const std::string &name)
{
    if (name == "sim_ga") return Method::sim_ga;
    if (name == "sim_qn") return Method::sim_qn;
    if (name == "sim_mf") return Method::sim_mf;
    if (name == "dpa_equal_aperture") return Method::dpa_equal_aperture;
    if (name == "dpa_equal_rf") return Method::dpa_equal_rf;
    throw config_error("unknown method '" + name + "'");
}

bool is_sim_method(Method method)
{
    return method == Method::sim_ga || method == Method::sim_qn || method == Method::sim_mf;
}

// ---------------------------------------------------------------------------
// configuration
// ---------------------------------------------------------------------------

void ExperimentConfig::validate() const
{
    auto fail = [](const std::string &path, const std::string &why) {
        throw config_error("config error at " + path + ": " + why);
    };
    if (carrier_frequency_hz <= 0.0)
        fail("/carrier_frequency_hz", "must be positive");
    if (bandwidth_hz <= 0.0)
        fail("/bandwidth_hz", "must be positive");
    if (geometry.aperture_side_wavelengths <= 0.0)
        fail("/geometry/aperture_side_wavelengths", "must be positive");
    if (geometry.cell_pitch_wavelengths <= 0.0)
        fail("/geometry/cell_pitch_wavelengths", "must be positive");
    if (geometry.sim_thickness_wavelengths <= 0.0)
        fail("/geometry/sim_thickness_wavelengths", "must be positive");
    const double ratio = geometry.aperture_side_wavelengths / geometry.cell_pitch_wavelengths;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio)
        fail("/geometry/cell_pitch_wavelengths", "aperture side must be an integer number of cells");
    if (users.count < 1)
        fail("/users/count", "must be >= 1");
    if (users.min_distance_m <= 0.0 || users.max_distance_m < users.min_distance_m)
        fail("/users/min_distance_m", "need 0 < min <= max");
    if (methods.empty())
        fail("/methods", "must not be empty");
    if (pt_dbm_per_m2.empty())
        fail("/pt_dbm_per_m2", "must not be empty");
    if (layers.empty())
        fail("/layers", "must not be empty");
    for (std::size_t l : layers)
        if (l < 1)
            fail("/layers", "layer counts must be >= 1");
    if (placements < 1)
        fail("/placements", "must be >= 1");
    if (realizations_per_placement < 1)
        fail("/realizations_per_placement", "must be >= 1");
    if (noise.sim_layer_efficiency <= 0.0 || noise.sim_layer_efficiency > 1.0)
        fail("/noise/sim_layer_efficiency", "must be in (0, 1]");
    if (noise.dpa_element_efficiency <= 0.0 || noise.dpa_element_efficiency > 1.0)
        fail("/noise/dpa_element_efficiency", "must be in (0, 1]");
    if (noise.dpa_element_area_m2 <= 0.0)
        fail("/noise/dpa_element_area_m2", "must be positive");
    if (noise.environment_temperature_k <= 0.0 || noise.rf_temperature_k <= 0.0)
        fail("/noise/environment_temperature_k", "temperatures must be positive");
    if (optimizer.ga_iterations < 1 || optimizer.qn_iterations < 1)
        fail("/optimizer/ga_iterations", "iteration caps must be >= 1");
    if (optimizer.backtrack_factor <= 0.0 || optimizer.backtrack_factor >= 1.0)
        fail("/optimizer/backtrack_factor", "must be in (0, 1)");
    if (optimizer.armijo_c <= 0.0 || optimizer.armijo_c >= 1.0)
        fail("/optimizer/armijo_c", "must be in (0, 1)");
    if (optimizer.alpha_init < 0.0)
        fail("/optimizer/alpha_init", "must be positive (or 0 for the per-K default)");
    if (channel_source.type == ChannelSourceSettings::Type::import && channel_source.path.empty())
        fail("/channel_source/path", "required when type is 'import'");
}

namespace
{

template <typename T>
T get_or(const json &j, const std::string &path, const char *key, T fallback)
{
    if (!j.contains(key))
        return fallback;
    try
    {
        return j.at(key).get<T>();
    }
    catch (const json::exception &e)
    {
        throw config_error("config error at " + path + "/" + key + ": " + e.what());
    }
}

} // namespace

ExperimentConfig ExperimentConfig::from_json_text(const std::string &text)
{
    json j;
    try
    {
        j = json::parse(text);
    }
    catch (const json::exception &e)
    {
        throw config_error(std::string("config error: invalid JSON: ") + e.what());
    }

    ExperimentConfig c;
    c.carrier_frequency_hz = get_or(j, "", "carrier_frequency_hz", c.carrier_frequency_hz);
    c.bandwidth_hz = get_or(j, "", "bandwidth_hz", c.bandwidth_hz);

    if (j.contains("geometry"))
    {
        const json &g = j.at("geometry");
        c.geometry.aperture_side_wavelengths =
            get_or(g, "/geometry", "aperture_side_wavelengths", c.geometry.aperture_side_wavelengths);
        c.geometry.cell_pitch_wavelengths =
            get_or(g, "/geometry", "cell_pitch_wavelengths", c.geometry.cell_pitch_wavelengths);
        c.geometry.sim_thickness_wavelengths =
            get_or(g, "/geometry", "sim_thickness_wavelengths", c.geometry.sim_thickness_wavelengths);
        const std::string axis = get_or<std::string>(g, "/geometry", "dipole_axis", "x");
        if (axis == "x")
            c.geometry.dipole_axis = DipoleAxis::x;
        else if (axis == "y")
            c.geometry.dipole_axis = DipoleAxis::y;
        else
            throw config_error("config error at /geometry/dipole_axis: must be 'x' or 'y'");
    }
    if (j.contains("users"))
    {
        const json &u = j.at("users");
        c.users.count = get_or<std::size_t>(u, "/users", "count", c.users.count);
        c.users.min_distance_m = get_or(u, "/users", "min_distance_m", c.users.min_distance_m);
        c.users.max_distance_m = get_or(u, "/users", "max_distance_m", c.users.max_distance_m);
        c.users.height_m = get_or(u, "/users", "height_m", c.users.height_m);
    }
    if (j.contains("methods"))
    {
        c.methods.clear();
        for (const auto &m : j.at("methods"))
            c.methods.push_back(method_from_string(m.get<std::string>()));
    }
    if (j.contains("pt_dbm_per_m2"))
        c.pt_dbm_per_m2 = j.at("pt_dbm_per_m2").get<std::vector<double>>();
    if (j.contains("layers"))
        c.layers = j.at("layers").get<std::vector<std::size_t>>();
    c.placements = get_or<std::size_t>(j, "", "placements", c.placements);
    c.realizations_per_placement =
        get_or<std::size_t>(j, "", "realizations_per_placement", c.realizations_per_placement);
    c.master_seed = get_or<std::uint64_t>(j, "", "master_seed", c.master_seed);
    if (j.contains("path_loss"))
    {
        const json &p = j.at("path_loss");
        c.path_loss.exponent = get_or(p, "/path_loss", "exponent", c.path_loss.exponent);
        c.path_loss.reference_loss_db =
            get_or(p, "/path_loss", "reference_loss_db", c.path_loss.reference_loss_db);
    }
    if (j.contains("channel_source"))
    {
        const json &s = j.at("channel_source");
        const std::string type = get_or<std::string>(s, "/channel_source", "type", "generate_rayleigh");
        if (type == "generate_rayleigh")
            c.channel_source.type = ChannelSourceSettings::Type::generate_rayleigh;
        else if (type == "import")
            c.channel_source.type = ChannelSourceSettings::Type::import;
        else
            throw config_error(
                "config error at /channel_source/type: must be 'generate_rayleigh' or 'import'");
        c.channel_source.path = get_or<std::string>(s, "/channel_source", "path", "");
    }
    if (j.contains("noise"))
    {
        const json &n = j.at("noise");
        c.noise.environment_temperature_k =
            get_or(n, "/noise", "environment_temperature_k", c.noise.environment_temperature_k);
        c.noise.rf_temperature_k = get_or(n, "/noise", "rf_temperature_k", c.noise.rf_temperature_k);
        c.noise.rf_noise_figure_db =
            get_or(n, "/noise", "rf_noise_figure_db", c.noise.rf_noise_figure_db);
        c.noise.sim_layer_efficiency =
            get_or(n, "/noise", "sim_layer_efficiency", c.noise.sim_layer_efficiency);
        c.noise.dpa_element_efficiency =
            get_or(n, "/noise", "dpa_element_efficiency", c.noise.dpa_element_efficiency);
        c.noise.dpa_element_area_m2 =
            get_or(n, "/noise", "dpa_element_area_m2", c.noise.dpa_element_area_m2);
    }
    if (j.contains("optimizer"))
    {
        const json &o = j.at("optimizer");
        c.optimizer.ga_iterations =
            get_or<std::size_t>(o, "/optimizer", "ga_iterations", c.optimizer.ga_iterations);
        c.optimizer.qn_iterations =
            get_or<std::size_t>(o, "/optimizer", "qn_iterations", c.optimizer.qn_iterations);
        c.optimizer.alpha_init = get_or(o, "/optimizer", "alpha_init", c.optimizer.alpha_init);
        c.optimizer.backtrack_factor =
            get_or(o, "/optimizer", "backtrack_factor", c.optimizer.backtrack_factor);
        c.optimizer.armijo_c = get_or(o, "/optimizer", "armijo_c", c.optimizer.armijo_c);
        c.optimizer.rel_improvement_tol =
            get_or(o, "/optimizer", "rel_improvement_tol", c.optimizer.rel_improvement_tol);
        c.optimizer.mirror_probe = get_or(o, "/optimizer", "mirror_probe", c.optimizer.mirror_probe);
    }
    c.workers = get_or<std::size_t>(j, "", "workers", c.workers);

    c.validate();
    return c;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw io_error(path + ": cannot open config file");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return from_json_text(buffer.str());
}

// ---------------------------------------------------------------------------
// campaign machinery
// ---------------------------------------------------------------------------

namespace
{

struct PlacementDraw
{
    std::vector<Vec3> positions;
    arma::vec beta;
};

PlacementDraw draw_placement(const ExperimentConfig &cfg, std::uint64_t placement)
{
    RngStream rng = RngStream::derive(cfg.master_seed, "placement", {placement});
    PlacementDraw out;
    out.beta.set_size(cfg.users.count);
    for (std::size_t k = 0; k < cfg.users.count; ++k)
    {
        const double distance = rng.uniform(cfg.users.min_distance_m, cfg.users.max_distance_m);
        const double azimuth = rng.uniform(-std::numbers::pi / 2.0, std::numbers::pi / 2.0);
        out.positions.push_back({distance * std::sin(azimuth), cfg.users.height_m,
                                 distance * std::cos(azimuth)});
        out.beta(k) = path_loss(distance, cfg.path_loss);
    }
    return out;
}

struct CampaignContext
{
    explicit CampaignContext(const ExperimentConfig &config) : cfg(config) {}

    const ExperimentConfig &cfg;
    PhysicalConstants constants;

    std::vector<std::size_t> layer_values;
    std::map<std::size_t, PropagationStack> sim_stacks;
    CorrelationModel sim_corr;
    double sim_a_eff = 0.0;

    CorrelationModel dpa_aperture_corr;
    std::size_t dpa_aperture_elements = 0;
    CorrelationModel dpa_rf_corr;

    double sigma2_ant_sim = 0.0;
    double sigma2_ant_dpa = 0.0;
    double sigma2_rf = 0.0;

    std::map<std::pair<std::uint64_t, std::uint64_t>, const ChannelEnsemble *> imported;
    std::vector<ChannelEnsemble> imported_storage;
};

CampaignContext build_context(const ExperimentConfig &cfg)
{
    CampaignContext ctx(cfg);
    ctx.constants = PhysicalConstants::from_carrier(cfg.carrier_frequency_hz, cfg.bandwidth_hz);
    const double lam = ctx.constants.wavelength_m;
    const double side = cfg.geometry.aperture_side_wavelengths * lam;
    const double pitch = cfg.geometry.cell_pitch_wavelengths * lam;
    const double thickness = cfg.geometry.sim_thickness_wavelengths * lam;

    ctx.layer_values = cfg.layers;
    const bool any_sim = std::any_of(cfg.methods.begin(), cfg.methods.end(), is_sim_method);
    Geometry reference_geometry;
    bool have_reference = false;
    for (std::size_t layer_count : ctx.layer_values)
    {
        if (!any_sim && have_reference)
            break;
        Geometry geom = build_geometry(ctx.constants, side, pitch, layer_count, thickness,
                                       cfg.users.count, DpaLayout::linear_half_wavelength, {},
                                       cfg.geometry.dipole_axis);
        if (!have_reference)
        {
            reference_geometry = geom;
            have_reference = true;
        }
        if (any_sim && !ctx.sim_stacks.count(layer_count))
            ctx.sim_stacks.emplace(layer_count, build_propagation_stack(geom, ctx.constants));
    }

    // every layer is the same translated grid, so one correlation model serves
    // all layer counts
    ctx.sim_corr = build_correlation(reference_geometry.outermost_layer(), lam);
    ctx.sim_a_eff = pitch * pitch;

    const auto per_side = static_cast<std::size_t>(std::round(side / (lam / 2.0)));
    const auto aperture_elements = per_side * per_side;
    ctx.dpa_aperture_elements = aperture_elements;
    ctx.dpa_aperture_corr = build_correlation(square_grid(per_side, lam / 2.0, 0.0), lam);
    {
        std::vector<Vec3> rf_positions;
        const double half = 0.5 * static_cast<double>(cfg.users.count - 1);
        for (std::size_t m = 0; m < cfg.users.count; ++m)
            rf_positions.push_back({(static_cast<double>(m) - half) * lam / 2.0, 0.0, 0.0});
        ctx.dpa_rf_corr = build_correlation(rf_positions, lam);
    }

    ctx.sigma2_ant_sim = antenna_noise_power(ctx.sim_a_eff, lam, cfg.bandwidth_hz,
                                             cfg.noise.environment_temperature_k);
    ctx.sigma2_ant_dpa = antenna_noise_power(cfg.noise.dpa_element_area_m2, lam, cfg.bandwidth_hz,
                                             cfg.noise.environment_temperature_k);
    ctx.sigma2_rf =
        rf_noise_power(cfg.bandwidth_hz, cfg.noise.rf_temperature_k, cfg.noise.rf_noise_figure_db);

    if (cfg.channel_source.type == ChannelSourceSettings::Type::import)
    {
        const std::size_t cells = reference_geometry.cells_per_layer;
        ctx.imported_storage =
            import_channels(cfg.channel_source.path, cells, cfg.users.count);
        for (const auto &e : ctx.imported_storage)
            ctx.imported[{e.placement_id, e.realization_id}] = &e;
        for (std::uint64_t p = 0; p < cfg.placements; ++p)
            for (std::uint64_t r = 0; r < cfg.realizations_per_placement; ++r)
                if (!ctx.imported.count({p, r}))
                    throw io_error(cfg.channel_source.path + ": no ensemble for placement " +
                                   std::to_string(p) + ", realization " + std::to_string(r));
    }
    return ctx;
}

NoiseBudget sim_noise_budget(const CampaignContext &ctx, double pt_dbm)
{
    NoiseBudget n;
    n.sigma2_ant_w = ctx.sigma2_ant_sim;
    n.sigma2_rf_w = ctx.sigma2_rf;
    n.p_t_w_per_m2 = dbm_per_m2_to_w_per_m2(pt_dbm);
    n.a_eff_m2 = ctx.sim_a_eff;
    n.sim_layer_efficiency = ctx.cfg.noise.sim_layer_efficiency;
    return n;
}

NoiseBudget dpa_noise_budget(const CampaignContext &ctx, double pt_dbm)
{
    NoiseBudget n;
    n.sigma2_ant_w = ctx.sigma2_ant_dpa;
    n.sigma2_rf_w = ctx.sigma2_rf;
    n.p_t_w_per_m2 = dbm_per_m2_to_w_per_m2(pt_dbm);
    n.a_eff_m2 = ctx.cfg.noise.dpa_element_area_m2;
    n.sim_layer_efficiency = 1.0;
    return n;
}

arma::cx_mat sim_channel(const CampaignContext &ctx, std::uint64_t p, std::uint64_t r,
                         const arma::vec &beta, const NoiseBudget &noise)
{
    if (ctx.cfg.channel_source.type == ChannelSourceSettings::Type::import)
        return ctx.imported.at({p, r})->h;
    RngStream rng = RngStream::derive(ctx.cfg.master_seed, "channel-sim", {p, r});
    return build_channel(ctx.sim_corr, beta, noise, rng).h;
}

arma::cx_mat dpa_channel(const CampaignContext &ctx, const CorrelationModel &corr,
                         const char *stream_label, std::uint64_t p, std::uint64_t r,
                         const arma::vec &beta, const NoiseBudget &noise)
{
    RngStream rng = RngStream::derive(ctx.cfg.master_seed, stream_label, {p, r});
    arma::cx_mat h = build_channel(corr, beta, noise, rng).h;
    return std::sqrt(ctx.cfg.noise.dpa_element_efficiency) * h;
}

OptimizerConfig make_optimizer_config(const ExperimentConfig &cfg, bool quasi_newton_mode)
{
    OptimizerConfig oc = quasi_newton_mode ? OptimizerConfig::quasi_newton_defaults()
                                           : OptimizerConfig::gradient_ascent_defaults(cfg.users.count);
    oc.max_iterations = quasi_newton_mode ? cfg.optimizer.qn_iterations : cfg.optimizer.ga_iterations;
    if (!quasi_newton_mode && cfg.optimizer.alpha_init > 0.0)
        oc.alpha_init = cfg.optimizer.alpha_init;
    oc.backtrack_factor = cfg.optimizer.backtrack_factor;
    oc.armijo_c = cfg.optimizer.armijo_c;
    oc.rel_improvement_tol = cfg.optimizer.rel_improvement_tol;
    if (!quasi_newton_mode)
        oc.mirror_probe = cfg.optimizer.mirror_probe;
    return oc;
}

struct TrialKey
{
    Method method;
    std::size_t layer_count;
    double pt_dbm;
    std::uint64_t placement, realization;
};

TrialResult evaluate_trial(const CampaignContext &ctx, const TrialKey &key)
{
    const auto start = std::chrono::steady_clock::now();
    const ExperimentConfig &cfg = ctx.cfg;
    const PlacementDraw placement = draw_placement(cfg, key.placement);

    TrialResult out;
    out.method = key.method;
    out.layer_count = key.layer_count;
    out.pt_dbm_per_m2 = key.pt_dbm;
    out.placement = key.placement;
    out.realization = key.realization;

    RateReport report;
    if (is_sim_method(key.method))
    {
        const PropagationStack &stack = ctx.sim_stacks.at(key.layer_count);
        const NoiseBudget noise = sim_noise_budget(ctx, key.pt_dbm);
        const arma::cx_mat h =
            sim_channel(ctx, key.placement, key.realization, placement.beta, noise);

        if (key.method == Method::sim_mf)
        {
            RngStream target_rng =
                RngStream::derive(cfg.master_seed, "mf-target", {key.placement, key.realization});
            const std::size_t target = target_rng.uniform_index(cfg.users.count);
            const MatchedFilterResult mf = matched_filter_phases(stack, h, target);
            const CombinerMatrix g = compose_sim(stack, mf.phases, noise.sim_layer_efficiency,
                                                 CombinerKind::sim_matched_filter);
            report = sinr(g, h, noise, ctx.sim_corr.factor);
            out.iterations = 0;
        }
        else
        {
            const bool quasi_newton_mode = key.method == Method::sim_qn;
            const OptimizerConfig oc = make_optimizer_config(cfg, quasi_newton_mode);
            RngStream init_rng = RngStream::derive(cfg.master_seed, "phase-init",
                                                   {key.placement, key.realization, key.layer_count});
            PhaseProfile init =
                PhaseProfile::random(stack.layer_count(), stack.cells_per_layer(), init_rng);
            const OptimizationResult res =
                quasi_newton_mode
                    ? quasi_newton(stack, h, noise, ctx.sim_corr.factor, oc, std::move(init))
                    : gradient_ascent(stack, h, noise, ctx.sim_corr.factor, oc, std::move(init));
            const CombinerMatrix g = compose_sim(stack, res.phases, noise.sim_layer_efficiency);
            report = sinr(g, h, noise, ctx.sim_corr.factor);
            out.iterations = res.trace.iterations();
        }
    }
    else
    {
        const NoiseBudget noise = dpa_noise_budget(ctx, key.pt_dbm);
        const CorrelationModel &corr = key.method == Method::dpa_equal_aperture
                                           ? ctx.dpa_aperture_corr
                                           : ctx.dpa_rf_corr;
        const char *label =
            key.method == Method::dpa_equal_aperture ? "channel-dpa-aperture" : "channel-dpa-rf";
        const arma::cx_mat h =
            dpa_channel(ctx, corr, label, key.placement, key.realization, placement.beta, noise);
        const CombinerMatrix g = cfg.users.count == 1 ? dpa_mrc(h) : dpa_zf(h);
        report = sinr(g, h, noise, corr.factor);
        out.iterations = 0;
    }

    out.gamma = report.gamma;
    out.per_user_rate_bits = report.per_user_rate_bits;
    out.sum_rate_bits = report.sum_rate_bits;
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

} // namespace

CampaignResult run_experiment(const ExperimentConfig &config)
{
    config.validate();
    const CampaignContext ctx = build_context(config);

    std::vector<TrialKey> keys;
    for (Method method : config.methods)
        for (std::size_t layer_count : config.layers)
            for (double pt : config.pt_dbm_per_m2)
                for (std::uint64_t p = 0; p < config.placements; ++p)
                    for (std::uint64_t r = 0; r < config.realizations_per_placement; ++r)
                        keys.push_back({method, layer_count, pt, p, r});

    CampaignResult result;
    result.trials.resize(keys.size());
    std::exception_ptr first_error = nullptr;

#ifdef _OPENMP
    const int thread_count = config.workers == 0
                                 ? omp_get_max_threads()
                                 : static_cast<int>(std::min<std::size_t>(config.workers, 1024));
#pragma omp parallel for schedule(dynamic) num_threads(thread_count)
#endif
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(keys.size()); ++i)
    {
        try
        {
            result.trials[static_cast<std::size_t>(i)] =
                evaluate_trial(ctx, keys[static_cast<std::size_t>(i)]);
        }
        catch (...)
        {
#ifdef _OPENMP
#pragma omp critical
#endif
            if (!first_error)
                first_error = std::current_exception();
        }
    }
    if (first_error)
        std::rethrow_exception(first_error);

    for (const TrialResult &t : result.trials)
        if (!std::isfinite(t.sum_rate_bits) || !t.gamma.is_finite())
            throw numerical_error(std::string("non-finite result in cell method=") +
                                  to_string(t.method) + " L=" + std::to_string(t.layer_count) +
                                  " placement=" + std::to_string(t.placement) +
                                  " realization=" + std::to_string(t.realization));

    // aggregates in canonical cell order
    std::size_t index = 0;
    const std::size_t per_cell = config.placements * config.realizations_per_placement;
    for (Method method : config.methods)
        for (std::size_t layer_count : config.layers)
            for (double pt : config.pt_dbm_per_m2)
            {
                double sum = 0.0, sum_sq = 0.0;
                for (std::size_t t = 0; t < per_cell; ++t)
                {
                    const double v = result.trials[index + t].sum_rate_bits;
                    sum += v;
                    sum_sq += v * v;
                }
                const double n = static_cast<double>(per_cell);
                const double mean = sum / n;
                const double var = per_cell > 1 ? std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0))
                                                : 0.0;
                const double ci = per_cell > 1 ? 1.96 * std::sqrt(var / n) : 0.0;
                result.aggregates.push_back({method, layer_count, pt, per_cell, mean, ci});
                index += per_cell;
            }
    return result;
}

CampaignResult sweep_layers(const ExperimentConfig &config)
{
    if (config.layers.empty())
        throw config_error("config error at /layers: sweep list must not be empty");
    return run_experiment(config);
}

CampaignResult sweep_power(const ExperimentConfig &config)
{
    if (config.pt_dbm_per_m2.empty())
        throw config_error("config error at /pt_dbm_per_m2: sweep list must not be empty");
    return run_experiment(config);
}

// ---------------------------------------------------------------------------
// gradient verification entry point
// ---------------------------------------------------------------------------

GradientCheckReport gradient_check(std::uint64_t seed, std::size_t instance_count,
                                   const std::function<arma::mat(const arma::mat &)> &mutator)
{
    GradientCheckReport report;
    RngStream rng = RngStream::derive(seed, "gradient-check");
    const PhysicalConstants constants = PhysicalConstants::from_carrier(3.0e9, 20.0e6);
    const double lam = constants.wavelength_m;

    for (std::size_t i = 0; i < instance_count; ++i)
    {
        const std::size_t layer_count = 1 + rng.uniform_index(4);   // 1..4
        const std::size_t side = 2 + rng.uniform_index(3);          // N in {4, 9, 16}
        const std::size_t users = 1 + rng.uniform_index(3);         // 1..3

        const double aperture = 4.0 * lam;
        const Geometry geom =
            build_geometry(constants, aperture, aperture / static_cast<double>(side), layer_count,
                           5.0 * lam, users, DpaLayout::linear_half_wavelength);
        const PropagationStack stack = build_propagation_stack(geom, constants);
        const CorrelationModel corr = build_correlation(geom.outermost_layer(), lam);

        NoiseBudget noise;
        noise.a_eff_m2 = geom.cell_pitch_m * geom.cell_pitch_m;
        noise.sigma2_ant_w = antenna_noise_power(noise.a_eff_m2, lam, constants.bandwidth_hz, 290.0);
        noise.sigma2_rf_w = rf_noise_power(constants.bandwidth_hz, 290.0, 18.8);
        noise.p_t_w_per_m2 = dbm_per_m2_to_w_per_m2(20.0);
        noise.sim_layer_efficiency = 0.7;

        arma::vec beta(users);
        for (auto &b : beta)
            b = path_loss(rng.uniform(20.0, 200.0), PathLossModel{});
        const arma::cx_mat h = build_channel(corr, beta, noise, rng).h;

        PhaseProfile phases = PhaseProfile::random(layer_count, geom.cells_per_layer, rng);

        arma::mat analytic = analytic_gradient(stack, phases, h, noise, corr.factor);
        if (mutator)
            analytic = mutator(analytic);

        // independent path: central differences through compose + SINR only
        const double step = 1e-6;
        double worst = 0.0;
        for (std::size_t l = 0; l < layer_count; ++l)
            for (std::size_t n = 0; n < geom.cells_per_layer; ++n)
            {
                PhaseProfile perturbed = phases;
                perturbed.layers[l](n) += step;
                const double up =
                    sinr(compose_sim(stack, perturbed, noise.sim_layer_efficiency), h, noise,
                         corr.factor)
                        .sum_rate_bits;
                perturbed.layers[l](n) -= 2.0 * step;
                const double down =
                    sinr(compose_sim(stack, perturbed, noise.sim_layer_efficiency), h, noise,
                         corr.factor)
                        .sum_rate_bits;
                const double fd = (up - down) / (2.0 * step);
                const double rel = std::abs(analytic(l, n) - fd) / (1e-8 + std::abs(fd));
                worst = std::max(worst, rel);
            }
        report.instances.push_back({layer_count, geom.cells_per_layer, users, worst});
        report.max_rel_error = std::max(report.max_rel_error, worst);
    }
    return report;
}

void export_campaign_channels(const ExperimentConfig &config, const std::string &path)
{
    config.validate();
    ExperimentConfig generating = config;
    generating.channel_source.type = ChannelSourceSettings::Type::generate_rayleigh;
    const CampaignContext ctx = build_context(generating);
    const NoiseBudget noise = sim_noise_budget(ctx, config.pt_dbm_per_m2.front());

    std::vector<ChannelEnsemble> ensembles;
    ensembles.reserve(config.placements * config.realizations_per_placement);
    for (std::uint64_t p = 0; p < config.placements; ++p)
    {
        const PlacementDraw placement = draw_placement(config, p);
        for (std::uint64_t r = 0; r < config.realizations_per_placement; ++r)
        {
            RngStream rng = RngStream::derive(config.master_seed, "channel-sim", {p, r});
            ChannelEnsemble ens = build_channel(ctx.sim_corr, placement.beta, noise, rng);
            ens.placement_id = p;
            ens.realization_id = r;
            ens.user_positions = placement.positions;
            ensembles.push_back(std::move(ens));
        }
    }
    export_channels(ensembles, path);
}

// ---------------------------------------------------------------------------
// output
// ---------------------------------------------------------------------------

namespace
{

std::string format_double(double v)
{
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.17g", v);
    return buffer;
}

} // namespace

void write_csv(const CampaignResult &result, std::ostream &out)
{
    out << "method,L,P_T_dBm_per_m2,placement,realization,user,gamma,rate_bits,sum_rate_bits,"
           "iterations,seconds\n";
    for (const TrialResult &t : result.trials)
        for (arma::uword u = 0; u < t.gamma.n_elem; ++u)
            out << to_string(t.method) << ',' << t.layer_count << ','
                << format_double(t.pt_dbm_per_m2) << ',' << t.placement << ',' << t.realization
                << ',' << u << ',' << format_double(t.gamma(u)) << ','
                << format_double(t.per_user_rate_bits(u)) << ','
                << format_double(t.sum_rate_bits) << ',' << t.iterations << ','
                << format_double(t.seconds) << '\n';
}

void write_summary_json(const ExperimentConfig &config, const CampaignResult &result,
                        std::ostream &out)
{
    json aggregates = json::array();
    for (const AggregateRow &row : result.aggregates)
        aggregates.push_back({{"method", to_string(row.method)},
                              {"L", row.layer_count},
                              {"P_T_dBm_per_m2", row.pt_dbm_per_m2},
                              {"trials", row.trials},
                              {"mean_sum_rate_bits", row.mean_sum_rate_bits},
                              {"ci95_bits", row.ci95_bits}});

    json methods = json::array();
    for (Method m : config.methods)
        methods.push_back(to_string(m));

    const json summary = {
        {"carrier_frequency_hz", config.carrier_frequency_hz},
        {"bandwidth_hz", config.bandwidth_hz},
        {"users", config.users.count},
        {"methods", methods},
        {"layers", config.layers},
        {"pt_dbm_per_m2", config.pt_dbm_per_m2},
        {"placements", config.placements},
        {"realizations_per_placement", config.realizations_per_placement},
        {"master_seed", config.master_seed},
        {"aggregates", aggregates},
    };
    out << summary.dump(2) << '\n';
}

} // namespace simwave
