#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "clustersync/experiment.hpp"

namespace {

int run_command(const std::string& config_path, const std::string& preset,
                const std::string& out_csv, const std::string& summary_path, double step,
                double horizon, double tol) {
    using namespace clustersync;
    ExperimentConfig config =
        config_path.empty() ? make_preset(preset) : load_config(config_path);
    if (!out_csv.empty()) config.output.csv = out_csv;
    if (!summary_path.empty()) config.output.summary = summary_path;
    if (step > 0) config.integrator.h = step;
    if (horizon > 0) config.integrator.T = horizon;
    if (tol > 0) config.settle_tol = tol;

    RunResult result = run_case(config);
    std::cout << result.summary.to_json().dump(2) << "\n";

    const bool t1_fail =
        result.summary.theorem1_report && !result.summary.theorem1_report->overall_pass();
    const bool t2_fail =
        result.summary.theorem2_report && !result.summary.theorem2_report->overall_pass();
    return (t1_fail || t2_fail) ? 2 : 0;
}

int check_command(const std::string& config_path) {
    using namespace clustersync;
    ExperimentConfig config = load_config(config_path);
    RunSummary summary = check_only(config);
    bool ok = true;
    if (summary.theorem1_report) {
        std::cout << summary.theorem1_report->to_text();
        ok = ok && summary.theorem1_report->overall_pass();
    }
    if (summary.theorem2_report) {
        std::cout << summary.theorem2_report->to_text();
        ok = ok && summary.theorem2_report->overall_pass();
    }
    return ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cluster synchronization simulator and criteria checker"};
    app.require_subcommand(1);

    std::string config_path, preset, out_csv, summary_path;
    double step = 0, horizon = 0, tol = 0;

    CLI::App* run = app.add_subcommand("run", "simulate a configured system");
    CLI::Option* opt_config = run->add_option("--config", config_path, "config file (json)");
    CLI::Option* opt_preset =
        run->add_option("--preset", preset, "built-in preset: case1|case2|case3");
    opt_config->excludes(opt_preset);
    opt_preset->excludes(opt_config);
    run->add_option("--out", out_csv, "trajectory csv output path");
    run->add_option("--summary", summary_path, "summary json output path");
    run->add_option("--step", step, "integration step h");
    run->add_option("--horizon", horizon, "time horizon T");
    run->add_option("--tol", tol, "settling tolerance");

    std::string check_config;
    CLI::App* check = app.add_subcommand("check", "evaluate criteria without simulating");
    check->add_option("--config", check_config, "config file (json)")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            if (config_path.empty() && preset.empty()) {
                std::cerr << "error: run needs --config or --preset\n";
                return 1;
            }
            return run_command(config_path, preset, out_csv, summary_path, step, horizon, tol);
        }
        return check_command(check_config);
    } catch (const clustersync::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
