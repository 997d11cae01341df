#pragma once

#include <optional>
#include <ostream>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "clustersync/criteria.hpp"
#include "clustersync/simulate.hpp"

namespace clustersync {

struct CriteriaSection {
    std::optional<Theorem1Params> theorem1;
    std::optional<Theorem2Params> theorem2;
};

struct OutputSection {
    std::string csv;
    std::string summary;
};

struct ExperimentConfig {
    NetworkSpec network;
    Matrix X0;  // initial node values
    Matrix S0;  // initial leader values
    ControllerSpec controller = NoController{};
    IntegratorConfig integrator;
    CriteriaSection criteria;
    OutputSection output;
    double settle_tol = 1e-3;

    nlohmann::json to_json() const;
    static ExperimentConfig from_json(const nlohmann::json& j);
};

ExperimentConfig load_config(const std::string& path);
void save_config(const ExperimentConfig& config, const std::string& path);

/// Built-in presets "case1", "case2", "case3" (the worked example's three runs).
ExperimentConfig make_preset(const std::string& name);

/// FNV-1a hash of the canonical serialized config.
std::string config_digest(const ExperimentConfig& config);

struct RunSummary {
    double final_max_error = 0;
    std::vector<double> per_cluster_final;
    std::optional<double> settling;
    double min_leader_separation = 0;
    std::optional<CriteriaReport> theorem1_report;
    std::optional<CriteriaReport> theorem2_report;
    double wall_ms = 0;
    std::string config_digest;

    nlohmann::json to_json() const;
};

struct RunResult {
    Trajectory trajectory;
    RunSummary summary;
};

RunResult run_case(const ExperimentConfig& config);

/// Criteria checks only, no simulation.
RunSummary check_only(const ExperimentConfig& config);

/// Smallest recorded time t* with max_i ||e_i(t)|| < tol for every t >= t*.
std::optional<double> detect_settling(const Trajectory& trajectory, double tol);

void export_csv(const Trajectory& trajectory, std::ostream& out);
void export_csv(const Trajectory& trajectory, const std::string& path);

}  // namespace clustersync
