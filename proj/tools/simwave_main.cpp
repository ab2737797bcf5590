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

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "simwave/harness.hpp"

namespace
{

constexpr int exit_ok = 0;
constexpr int exit_config = 2;
constexpr int exit_numerical = 3;
constexpr int exit_io = 4;

struct CommonOptions
{
    std::string config_path;
    std::string out_dir = ".";
    std::string format = "csv";
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::size_t workers = 0;
    bool workers_given = false;
};

void add_common(CLI::App *cmd, CommonOptions &opt, bool needs_output)
{
    cmd->add_option("--config", opt.config_path, "experiment config (JSON)")->required();
    if (needs_output)
    {
        cmd->add_option("--out", opt.out_dir, "output directory");
        cmd->add_option("--format", opt.format, "csv|json")
            ->check(CLI::IsMember({"csv", "json"}));
    }
    cmd->add_option("--seed", opt.seed, "override master_seed")
        ->each([&opt](const std::string &) { opt.seed_given = true; });
    cmd->add_option("--workers", opt.workers, "worker thread count (0 = all)")
        ->each([&opt](const std::string &) { opt.workers_given = true; });
}

simwave::ExperimentConfig load_config(const CommonOptions &opt)
{
    simwave::ExperimentConfig cfg = simwave::ExperimentConfig::from_json_file(opt.config_path);
    if (opt.seed_given)
        cfg.master_seed = opt.seed;
    if (opt.workers_given)
        cfg.workers = opt.workers;
    return cfg;
}

void write_outputs(const simwave::ExperimentConfig &cfg, const simwave::CampaignResult &result,
                   const CommonOptions &opt)
{
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(opt.out_dir, ec);
    if (ec)
        throw simwave::io_error(opt.out_dir + ": cannot create output directory: " + ec.message());

    if (opt.format == "csv")
    {
        const fs::path csv_path = fs::path(opt.out_dir) / "results.csv";
        std::ofstream csv(csv_path);
        if (!csv)
            throw simwave::io_error(csv_path.string() + ": cannot open for writing");
        simwave::write_csv(result, csv);
        if (!csv)
            throw simwave::io_error(csv_path.string() + ": write failed");
        std::cout << "wrote " << csv_path.string() << "\n";
    }

    const fs::path json_path = fs::path(opt.out_dir) / "summary.json";
    std::ofstream summary(json_path);
    if (!summary)
        throw simwave::io_error(json_path.string() + ": cannot open for writing");
    simwave::write_summary_json(cfg, result, summary);
    if (!summary)
        throw simwave::io_error(json_path.string() + ": write failed");
    std::cout << "wrote " << json_path.string() << "\n";
}

void print_aggregates(const simwave::CampaignResult &result)
{
    for (const auto &row : result.aggregates)
        std::printf("%-20s L=%zu P_T=%g dBm/m2  mean R = %.6g bits/s/Hz (+-%.3g, n=%zu)\n",
                    simwave::to_string(row.method), row.layer_count, row.pt_dbm_per_m2,
                    row.mean_sum_rate_bits, row.ci95_bits, row.trials);
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"uplink sum-rate simulator for stacked-metasurface receivers"};
    app.require_subcommand(1);

    CommonOptions run_opt, sweep_l_opt, sweep_p_opt, export_opt, validate_opt;
    std::string export_file = "channels.simchan";
    std::string import_file;
    std::string import_config;
    std::uint64_t grad_seed = 1;
    std::size_t grad_instances = 20;
    double grad_tolerance = 1e-5;

    CLI::App *run_cmd = app.add_subcommand("run", "run the full campaign grid");
    add_common(run_cmd, run_opt, true);

    CLI::App *sweep_l_cmd = app.add_subcommand("sweep-layers", "campaign over the layer-count axis");
    add_common(sweep_l_cmd, sweep_l_opt, true);

    CLI::App *sweep_p_cmd = app.add_subcommand("sweep-power", "campaign over the transmit-power axis");
    add_common(sweep_p_cmd, sweep_p_opt, true);

    CLI::App *grad_cmd = app.add_subcommand("grad-check", "finite-difference gradient verification");
    grad_cmd->add_option("--seed", grad_seed, "rng seed");
    grad_cmd->add_option("--instances", grad_instances, "random instance count");
    grad_cmd->add_option("--tolerance", grad_tolerance, "max relative error allowed");

    CLI::App *export_cmd =
        app.add_subcommand("export-channels", "generate and save the campaign's channel ensembles");
    add_common(export_cmd, export_opt, false);
    export_cmd->add_option("--file", export_file, "output channel file");

    CLI::App *import_cmd = app.add_subcommand("import-channels", "validate a channel file");
    import_cmd->add_option("--file", import_file, "channel file")->required();
    import_cmd->add_option("--config", import_config,
                           "optional config to check dimensions against");

    CLI::App *validate_cmd = app.add_subcommand("validate-config", "parse and validate a config");
    add_common(validate_cmd, validate_opt, false);

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (run_cmd->parsed() || sweep_l_cmd->parsed() || sweep_p_cmd->parsed())
        {
            CommonOptions &opt = run_cmd->parsed() ? run_opt
                                 : sweep_l_cmd->parsed() ? sweep_l_opt
                                                         : sweep_p_opt;
            const simwave::ExperimentConfig cfg = load_config(opt);
            const simwave::CampaignResult result = run_cmd->parsed() ? simwave::run_experiment(cfg)
                                                   : sweep_l_cmd->parsed()
                                                       ? simwave::sweep_layers(cfg)
                                                       : simwave::sweep_power(cfg);
            print_aggregates(result);
            write_outputs(cfg, result, opt);
        }
        else if (grad_cmd->parsed())
        {
            const simwave::GradientCheckReport report =
                simwave::gradient_check(grad_seed, grad_instances);
            for (const auto &inst : report.instances)
                std::printf("L=%zu N=%zu K=%zu  max rel err %.3e\n", inst.layer_count, inst.cells,
                            inst.users, inst.max_rel_error);
            std::printf("gradient check: max relative error %.3e (tolerance %.1e)\n",
                        report.max_rel_error, grad_tolerance);
            if (report.max_rel_error > grad_tolerance)
            {
                std::cerr << "gradient check FAILED\n";
                return exit_numerical;
            }
        }
        else if (export_cmd->parsed())
        {
            const simwave::ExperimentConfig cfg = load_config(export_opt);
            simwave::export_campaign_channels(cfg, export_file);
            std::cout << "wrote " << export_file << "\n";
        }
        else if (import_cmd->parsed())
        {
            std::size_t expected_n = 0, expected_k = 0;
            if (!import_config.empty())
            {
                const auto cfg = simwave::ExperimentConfig::from_json_file(import_config);
                const double cells_per_side = cfg.geometry.aperture_side_wavelengths /
                                              cfg.geometry.cell_pitch_wavelengths;
                const auto side = static_cast<std::size_t>(std::llround(cells_per_side));
                expected_n = side * side;
                expected_k = cfg.users.count;
            }
            const auto ensembles = simwave::import_channels(import_file, expected_n, expected_k);
            std::cout << import_file << ": " << ensembles.size() << " ensembles, N="
                      << ensembles.front().h.n_rows << " K=" << ensembles.front().h.n_cols << "\n";
        }
        else if (validate_cmd->parsed())
        {
            load_config(validate_opt);
            std::cout << "config OK\n";
        }
    }
    catch (const simwave::config_error &e)
    {
        std::cerr << e.what() << "\n";
        return exit_config;
    }
    catch (const simwave::numerical_error &e)
    {
        std::cerr << e.what() << "\n";
        return exit_numerical;
    }
    catch (const simwave::io_error &e)
    {
        std::cerr << e.what() << "\n";
        return exit_io;
    }
    catch (const std::runtime_error &e)
    {
        // filesystem / channel-container failures
        std::cerr << e.what() << "\n";
        return exit_io;
    }
    catch (const std::exception &e)
    {
        std::cerr << e.what() << "\n";
        return 1;
    }
    return exit_ok;
}
