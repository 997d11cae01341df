#include "clustersync/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

namespace clustersync {

using nlohmann::json;

namespace {

[[noreturn]] void parse_fail(const std::string& path, const std::string& what) {
    throw Error(Error::Code::ParseError, path + ": " + what);
}

const json& req(const json& j, const std::string& path, const std::string& key) {
    if (!j.is_object()) parse_fail(path, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) parse_fail(path + "." + key, "missing");
    return *it;
}

double as_number(const json& j, const std::string& path) {
    if (!j.is_number()) parse_fail(path, "expected a number");
    return j.get<double>();
}

double opt_number(const json& j, const std::string& path, const std::string& key,
                  double fallback) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    return as_number(j.at(key), path + "." + key);
}

Matrix as_matrix(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) parse_fail(path, "expected a non-empty 2-d array");
    const std::size_t rows = j.size();
    const std::size_t cols = j.at(0).is_array() ? j.at(0).size() : 0;
    if (cols == 0) parse_fail(path, "expected a non-empty 2-d array");
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
        const json& row = j.at(r);
        if (!row.is_array() || row.size() != cols)
            parse_fail(path, "ragged rows at row " + std::to_string(r));
        for (std::size_t c = 0; c < cols; ++c)
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                as_number(row.at(c), path + "[" + std::to_string(r) + "][" +
                                         std::to_string(c) + "]");
    }
    return m;
}

Vector as_vector(const json& j, const std::string& path) {
    if (!j.is_array()) parse_fail(path, "expected an array");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i)
        v[static_cast<Eigen::Index>(i)] = as_number(j.at(i), path + "[" + std::to_string(i) + "]");
    return v;
}

std::vector<int> as_int_list(const json& j, const std::string& path) {
    if (!j.is_array()) parse_fail(path, "expected an array of integers");
    std::vector<int> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        const json& e = j.at(i);
        if (!e.is_number_integer())
            parse_fail(path + "[" + std::to_string(i) + "]", "expected an integer");
        out.push_back(e.get<int>());
    }
    return out;
}

std::vector<double> as_double_list(const json& j, const std::string& path) {
    Vector v = as_vector(j, path);
    return {v.data(), v.data() + v.size()};
}

json matrix_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

json vector_json(const Vector& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

NetworkSpec network_from_json(const json& j) {
    const std::string path = "network";
    NetworkSpec spec;
    spec.n = static_cast<int>(as_number(req(j, path, "n"), path + ".n"));
    spec.partition.boundaries = as_int_list(req(j, path, "partition"), path + ".partition");

    const json& clusters = req(j, path, "clusters");
    if (!clusters.is_array()) parse_fail(path + ".clusters", "expected an array");
    for (std::size_t p = 0; p < clusters.size(); ++p) {
        const std::string cp = path + ".clusters[" + std::to_string(p) + "]";
        const json& c = clusters.at(p);
        ClusterParams params;
        params.C = as_matrix(req(c, cp, "C"), cp + ".C");
        params.A = as_matrix(req(c, cp, "A"), cp + ".A");
        params.B = as_matrix(req(c, cp, "B"), cp + ".B");
        params.I = c.contains("I") ? as_vector(c.at("I"), cp + ".I")
                                   : Vector(Vector::Zero(spec.n));
        spec.params.push_back(std::move(params));
    }

    spec.G = as_matrix(req(j, path, "G"), path + ".G");

    if (j.contains("activation")) {
        const json& act = j.at("activation");
        const std::string kind = req(act, path + ".activation", "kind").get<std::string>();
        if (kind == "arctan")
            spec.activation.kind = ActivationSpec::Kind::Arctan;
        else
            throw Error(Error::Code::UnknownActivation,
                        path + ".activation.kind: unsupported kind '" + kind + "'");
    }

    const json& delay = req(j, path, "delay");
    const std::string dp = path + ".delay";
    const std::string form = req(delay, dp, "form").get<std::string>();
    if (form == "constant") {
        spec.delay = DelayEvaluator::constant(as_number(req(delay, dp, "c"), dp + ".c"));
    } else if (form == "logistic") {
        spec.delay = DelayEvaluator::logistic(as_number(req(delay, dp, "a"), dp + ".a"));
    } else if (form == "tabulated") {
        spec.delay = DelayEvaluator::tabulated(
            as_double_list(req(delay, dp, "t"), dp + ".t"),
            as_double_list(req(delay, dp, "v"), dp + ".v"),
            as_number(req(delay, dp, "tau_bar"), dp + ".tau_bar"),
            as_number(req(delay, dp, "sigma"), dp + ".sigma"));
    } else {
        parse_fail(dp + ".form", "unknown delay form '" + form + "'");
    }
    return spec;
}

json network_to_json(const NetworkSpec& spec) {
    json j;
    j["n"] = spec.n;
    j["partition"] = spec.partition.boundaries;
    json clusters = json::array();
    for (const auto& p : spec.params) {
        json c;
        c["C"] = matrix_json(p.C);
        c["A"] = matrix_json(p.A);
        c["B"] = matrix_json(p.B);
        c["I"] = vector_json(p.I);
        clusters.push_back(std::move(c));
    }
    j["clusters"] = std::move(clusters);
    j["G"] = matrix_json(spec.G);
    if (spec.activation.kind != ActivationSpec::Kind::Arctan)
        throw Error(Error::Code::ValidationError,
                    "custom activations cannot be serialized to a config file");
    j["activation"] = {{"kind", "arctan"}};
    json delay;
    switch (spec.delay.form) {
        case DelayEvaluator::Form::Constant:
            delay = {{"form", "constant"}, {"c", spec.delay.c}};
            break;
        case DelayEvaluator::Form::Logistic:
            delay = {{"form", "logistic"}, {"a", spec.delay.a}};
            break;
        case DelayEvaluator::Form::Tabulated:
            delay = {{"form", "tabulated"},
                     {"t", spec.delay.t_tab},
                     {"v", spec.delay.v_tab},
                     {"tau_bar", spec.delay.tau_bar},
                     {"sigma", spec.delay.sigma}};
            break;
    }
    j["delay"] = std::move(delay);
    return j;
}

ControllerSpec controller_from_json(const json& j) {
    const std::string path = "controller";
    const std::string type = req(j, path, "type").get<std::string>();
    if (type == "none") return NoController{};
    if (type == "pinning_impulsive") {
        PinningImpulsiveConfig cfg;
        cfg.gains = as_double_list(req(j, path, "gains"), path + ".gains");
        const json& sched = req(j, path, "schedule");
        const std::string sp = path + ".schedule";
        if (sched.contains("times")) {
            cfg.schedule =
                ImpulseSchedule::explicit_times(as_double_list(sched.at("times"), sp + ".times"));
        } else {
            cfg.schedule = ImpulseSchedule::arithmetic(
                as_number(req(sched, sp, "delta"), sp + ".delta"),
                as_number(req(sched, sp, "horizon"), sp + ".horizon"));
        }
        cfg.rho = as_int_list(req(j, path, "rho"), path + ".rho");
        if (j.contains("fixed_nodes"))
            cfg.fixed_nodes = as_int_list(j.at("fixed_nodes"), path + ".fixed_nodes");
        return cfg;
    }
    if (type == "hybrid") {
        HybridConfig cfg;
        cfg.k = opt_number(j, path, "k", cfg.k);
        cfg.k1 = opt_number(j, path, "k1", cfg.k1);
        cfg.g1 = opt_number(j, path, "g1", cfg.g1);
        cfg.mu_exp = opt_number(j, path, "mu", cfg.mu_exp);
        cfg.psi_epsilon = opt_number(j, path, "psi_epsilon", cfg.psi_epsilon);
        if (j.contains("future_mode")) {
            const std::string mode = j.at("future_mode").get<std::string>();
            if (mode == "zero")
                cfg.future_mode = FutureMode::ZeroFuture;
            else if (mode == "iterative")
                cfg.future_mode = FutureMode::Iterative;
            else
                parse_fail(path + ".future_mode", "unknown mode '" + mode + "'");
        }
        cfg.passes = static_cast<int>(opt_number(j, path, "passes", cfg.passes));
        if (j.contains("chi")) cfg.chi = as_int_list(j.at("chi"), path + ".chi");
        return cfg;
    }
    parse_fail(path + ".type", "unknown controller type '" + type + "'");
}

json controller_to_json(const ControllerSpec& controller) {
    json j;
    if (std::holds_alternative<NoController>(controller)) {
        j["type"] = "none";
    } else if (const auto* p = std::get_if<PinningImpulsiveConfig>(&controller)) {
        j["type"] = "pinning_impulsive";
        j["gains"] = p->gains;
        j["schedule"] = {{"times", p->schedule.times}};
        j["rho"] = p->rho;
        if (p->fixed_nodes) j["fixed_nodes"] = *p->fixed_nodes;
    } else {
        const auto& h = std::get<HybridConfig>(controller);
        j["type"] = "hybrid";
        j["k"] = h.k;
        j["k1"] = h.k1;
        j["g1"] = h.g1;
        j["mu"] = h.mu_exp;
        j["psi_epsilon"] = h.psi_epsilon;
        j["future_mode"] = h.future_mode == FutureMode::Iterative ? "iterative" : "zero";
        j["passes"] = h.passes;
        if (h.chi) j["chi"] = *h.chi;
    }
    return j;
}

Theorem1Params theorem1_from_json(const json& j) {
    const std::string path = "criteria.theorem1";
    Theorem1Params p;
    p.Q = as_matrix(req(j, path, "Q"), path + ".Q");
    p.E1 = as_matrix(req(j, path, "E1"), path + ".E1");
    p.E2 = as_matrix(req(j, path, "E2"), path + ".E2");
    p.alpha = opt_number(j, path, "alpha", p.alpha);
    p.beta = opt_number(j, path, "beta", p.beta);
    p.lambda = opt_number(j, path, "lambda", p.lambda);
    p.gamma = opt_number(j, path, "gamma", p.gamma);
    p.q = opt_number(j, path, "q", p.q);
    if (j.contains("epsilon")) p.epsilon = as_number(j.at("epsilon"), path + ".epsilon");
    if (j.contains("mu")) p.mu_override = as_number(j.at("mu"), path + ".mu");
    if (j.contains("upsilon")) p.upsilon_override = as_number(j.at("upsilon"), path + ".upsilon");
    return p;
}

json theorem1_to_json(const Theorem1Params& p) {
    json j;
    j["Q"] = matrix_json(p.Q);
    j["E1"] = matrix_json(p.E1);
    j["E2"] = matrix_json(p.E2);
    j["alpha"] = p.alpha;
    j["beta"] = p.beta;
    j["lambda"] = p.lambda;
    j["gamma"] = p.gamma;
    j["q"] = p.q;
    if (p.epsilon) j["epsilon"] = *p.epsilon;
    if (p.mu_override) j["mu"] = *p.mu_override;
    if (p.upsilon_override) j["upsilon"] = *p.upsilon_override;
    return j;
}

Theorem2Params theorem2_from_json(const json& j) {
    const std::string path = "criteria.theorem2";
    Theorem2Params p;
    p.E1 = as_matrix(req(j, path, "E1"), path + ".E1");
    p.E2 = as_matrix(req(j, path, "E2"), path + ".E2");
    p.alpha = opt_number(j, path, "alpha", p.alpha);
    p.beta = opt_number(j, path, "beta", p.beta);
    return p;
}

json theorem2_to_json(const Theorem2Params& p) {
    json j;
    j["E1"] = matrix_json(p.E1);
    j["E2"] = matrix_json(p.E2);
    j["alpha"] = p.alpha;
    j["beta"] = p.beta;
    return j;
}

}  // namespace

json ExperimentConfig::to_json() const {
    json j;
    j["network"] = network_to_json(network);
    j["initial"] = {{"nodes", matrix_json(X0)}, {"leaders", matrix_json(S0)}};
    j["controller"] = controller_to_json(controller);
    j["integrator"] = {{"h", integrator.h}, {"T", integrator.T}};
    j["settle_tol"] = settle_tol;
    if (criteria.theorem1 || criteria.theorem2) {
        json c;
        if (criteria.theorem1) c["theorem1"] = theorem1_to_json(*criteria.theorem1);
        if (criteria.theorem2) c["theorem2"] = theorem2_to_json(*criteria.theorem2);
        j["criteria"] = std::move(c);
    }
    if (!output.csv.empty() || !output.summary.empty()) {
        json o;
        if (!output.csv.empty()) o["csv"] = output.csv;
        if (!output.summary.empty()) o["summary"] = output.summary;
        j["output"] = std::move(o);
    }
    return j;
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
    ExperimentConfig cfg;
    cfg.network = network_from_json(req(j, "", "network"));

    const json& init = req(j, "", "initial");
    cfg.X0 = as_matrix(req(init, "initial", "nodes"), "initial.nodes");
    cfg.S0 = as_matrix(req(init, "initial", "leaders"), "initial.leaders");

    if (j.contains("controller")) cfg.controller = controller_from_json(j.at("controller"));

    if (j.contains("integrator")) {
        const json& ig = j.at("integrator");
        cfg.integrator.h = opt_number(ig, "integrator", "h", cfg.integrator.h);
        cfg.integrator.T = opt_number(ig, "integrator", "T", cfg.integrator.T);
    }
    cfg.settle_tol = opt_number(j, "", "settle_tol", cfg.settle_tol);

    if (j.contains("criteria")) {
        const json& c = j.at("criteria");
        if (c.contains("theorem1")) cfg.criteria.theorem1 = theorem1_from_json(c.at("theorem1"));
        if (c.contains("theorem2")) cfg.criteria.theorem2 = theorem2_from_json(c.at("theorem2"));
    }
    if (j.contains("output")) {
        const json& o = j.at("output");
        if (o.contains("csv")) cfg.output.csv = o.at("csv").get<std::string>();
        if (o.contains("summary")) cfg.output.summary = o.at("summary").get<std::string>();
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Error::Code::IoError, "cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw Error(Error::Code::ParseError, path + ": " + e.what());
    }
    return ExperimentConfig::from_json(j);
}

void save_config(const ExperimentConfig& config, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error(Error::Code::IoError, "cannot write config file: " + path);
    out << config.to_json().dump(2) << "\n";
}

ExperimentConfig make_preset(const std::string& name) {
    if (name != "case1" && name != "case2" && name != "case3")
        throw Error(Error::Code::BadArgument, "unknown preset: " + name);

    ExperimentConfig cfg;
    NetworkSpec& net = cfg.network;
    net.n = 2;
    net.partition.boundaries = {0, 2, 5};

    ClusterParams p1;
    p1.C = Matrix::Identity(2, 2);
    p1.A = (Matrix(2, 2) << 1.95, -0.1, -5.0, 3.0).finished();
    p1.B = (Matrix(2, 2) << -1.5, -0.1, -0.3, -2.41).finished();
    p1.I = Vector::Zero(2);
    ClusterParams p2;
    p2.C = Matrix::Identity(2, 2);
    p2.A = (Matrix(2, 2) << 2.0, -0.11, -5.1, 3.0).finished();
    p2.B = (Matrix(2, 2) << -1.5, -0.1, -0.2, -2.45).finished();
    p2.I = Vector::Zero(2);
    net.params = {p1, p2};

    net.G = (Matrix(5, 5) << -4, 2, 2, 0.5, -0.5,
                              2, -3, 1, 0.2, -0.2,
                              1, 1, -2, 0.3, -0.3,
                              0.5, 0.5, -1, -1, 1,
                              0.4, -0.4, 0, 1, -1).finished();
    net.activation.kind = ActivationSpec::Kind::Arctan;
    net.delay = DelayEvaluator::logistic(1.7);

    cfg.X0 = (Matrix(5, 2) << 10, -5, 10, -5, 8, -6, 8, -6, 8, -6).finished();
    cfg.S0 = (Matrix(2, 2) << 0.4, 0.6, 0.4, 0.6).finished();

    cfg.integrator.h = 1e-3;
    cfg.integrator.T = 5.0;
    cfg.settle_tol = 1e-3;

    if (name == "case1") {
        cfg.controller = NoController{};
    } else if (name == "case2") {
        PinningImpulsiveConfig pin;
        pin.gains = {-0.8};
        pin.schedule = ImpulseSchedule::arithmetic(0.03, cfg.integrator.T);
        pin.rho = {1, 3};
        cfg.controller = pin;
    } else {
        cfg.controller = HybridConfig{};
    }
    return cfg;
}

std::string config_digest(const ExperimentConfig& config) {
    const std::string dump = config.to_json().dump();
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

json RunSummary::to_json() const {
    json j;
    j["final_max_error"] = final_max_error;
    j["per_cluster_final"] = per_cluster_final;
    if (settling)
        j["settling"] = *settling;
    else
        j["settling"] = nullptr;
    j["min_leader_separation"] = min_leader_separation;
    if (theorem1_report) j["theorem1"] = theorem1_report->to_json();
    if (theorem2_report) j["theorem2"] = theorem2_report->to_json();
    j["wall_ms"] = wall_ms;
    j["config_digest"] = config_digest;
    return j;
}

std::optional<double> detect_settling(const Trajectory& trajectory, double tol) {
    if (trajectory.size() == 0) return std::nullopt;
    std::size_t first_good = trajectory.size();
    for (std::size_t idx = trajectory.size(); idx-- > 0;) {
        if (trajectory.max_error_norm(idx) >= tol) break;
        first_good = idx;
    }
    if (first_good == trajectory.size()) return std::nullopt;
    return trajectory.times.at(first_good);
}

namespace {

void fill_criteria(const ExperimentConfig& config, const ValidatedNetwork& net,
                   RunSummary& summary) {
    if (config.criteria.theorem1) {
        if (const auto* pin = std::get_if<PinningImpulsiveConfig>(&config.controller))
            summary.theorem1_report = check_theorem1(net, *config.criteria.theorem1, *pin);
    }
    if (config.criteria.theorem2) {
        if (const auto* hyb = std::get_if<HybridConfig>(&config.controller))
            summary.theorem2_report =
                check_theorem2(net, *config.criteria.theorem2, hyb->g1, hyb->k1);
    }
}

double leader_separation(const Trajectory& traj) {
    double best = std::numeric_limits<double>::infinity();
    for (const Matrix& S : traj.leaders)
        for (Eigen::Index p = 0; p < S.rows(); ++p)
            for (Eigen::Index q = p + 1; q < S.rows(); ++q)
                best = std::min(best, (S.row(p) - S.row(q)).norm());
    return std::isfinite(best) ? best : 0.0;
}

}  // namespace

RunResult run_case(const ExperimentConfig& config) {
    const auto t_start = std::chrono::steady_clock::now();

    ValidatedNetwork net = validate_network(config.network);
    InitialState init{config.X0, config.S0};

    Trajectory traj;
    if (const auto* hyb = std::get_if<HybridConfig>(&config.controller);
        hyb && hyb->future_mode == FutureMode::Iterative) {
        // refine the forward-integral term against the previous pass
        HybridConfig pass_cfg = *hyb;
        pass_cfg.t1_estimate = config.integrator.T;
        traj = integrate(net, pass_cfg, config.integrator, init, nullptr);
        for (int pass = 1; pass < std::max(1, hyb->passes); ++pass) {
            auto settled = detect_settling(traj, config.settle_tol);
            pass_cfg.t1_estimate = settled ? *settled : config.integrator.T;
            Trajectory prev = std::move(traj);
            traj = integrate(net, pass_cfg, config.integrator, init, &prev);
        }
    } else {
        traj = integrate(net, config.controller, config.integrator, init, nullptr);
    }

    RunResult result;
    RunSummary& s = result.summary;
    const std::size_t last = traj.size() - 1;
    s.final_max_error = traj.max_error_norm(last);

    const ClusterPartition& part = config.network.partition;
    const Vector final_norms = traj.error_norms(last);
    for (int p = 1; p <= part.num_clusters(); ++p) {
        double worst = 0;
        for (int i = part.boundaries[static_cast<std::size_t>(p - 1)];
             i < part.boundaries[static_cast<std::size_t>(p)]; ++i)
            worst = std::max(worst, final_norms[i]);
        s.per_cluster_final.push_back(worst);
    }

    s.settling = detect_settling(traj, config.settle_tol);
    s.min_leader_separation = leader_separation(traj);
    fill_criteria(config, net, s);
    s.config_digest = clustersync::config_digest(config);

    if (!config.output.csv.empty()) export_csv(traj, config.output.csv);

    s.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                          t_start)
                    .count();

    if (!config.output.summary.empty()) {
        std::ofstream out(config.output.summary);
        if (!out)
            throw Error(Error::Code::IoError,
                        "cannot write summary file: " + config.output.summary);
        out << s.to_json().dump(2) << "\n";
    }

    result.trajectory = std::move(traj);
    return result;
}

RunSummary check_only(const ExperimentConfig& config) {
    ValidatedNetwork net = validate_network(config.network);
    RunSummary s;
    s.config_digest = clustersync::config_digest(config);
    fill_criteria(config, net, s);
    if (!s.theorem1_report && !s.theorem2_report)
        throw Error(Error::Code::ValidationError,
                    "no applicable criteria: the config needs a criteria section matching "
                    "its controller type");
    return s;
}

void export_csv(const Trajectory& trajectory, std::ostream& out) {
    const Eigen::Index N = trajectory.errors.empty() ? 0 : trajectory.errors.front().rows();
    out << "t";
    for (Eigen::Index i = 1; i <= N; ++i) out << ",e_norm_" << i;
    out << ",V,limit\n";
    char buf[64];
    auto put = [&](double x) {
        std::snprintf(buf, sizeof(buf), "%.15g", x);
        out << buf;
    };
    for (std::size_t r = 0; r < trajectory.size(); ++r) {
        put(trajectory.times[r]);
        const Vector norms = trajectory.error_norms(r);
        for (Eigen::Index i = 0; i < N; ++i) {
            out << ",";
            put(norms[i]);
        }
        out << ",";
        put(trajectory.V[r]);
        out << "," << trajectory.limit[r] << "\n";
    }
}

void export_csv(const Trajectory& trajectory, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error(Error::Code::IoError, "cannot write csv file: " + path);
    export_csv(trajectory, out);
}

}  // namespace clustersync
