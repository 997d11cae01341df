#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "clustersync/criteria.hpp"
#include "clustersync/experiment.hpp"

namespace py = pybind11;
using nlohmann::json;
using namespace clustersync;

namespace {

py::object json_to_py(const json& j) {
    switch (j.type()) {
        case json::value_t::null:
            return py::none();
        case json::value_t::boolean:
            return py::bool_(j.get<bool>());
        case json::value_t::number_integer:
            return py::int_(j.get<long long>());
        case json::value_t::number_unsigned:
            return py::int_(j.get<unsigned long long>());
        case json::value_t::number_float:
            return py::float_(j.get<double>());
        case json::value_t::string:
            return py::str(j.get<std::string>());
        case json::value_t::array: {
            py::list out;
            for (const auto& e : j) out.append(json_to_py(e));
            return out;
        }
        case json::value_t::object: {
            py::dict out;
            for (auto it = j.begin(); it != j.end(); ++it)
                out[py::str(it.key())] = json_to_py(it.value());
            return out;
        }
        default:
            return py::none();
    }
}

json py_to_json(const py::handle& obj) {
    if (obj.is_none()) return nullptr;
    if (py::isinstance<py::bool_>(obj)) return obj.cast<bool>();
    if (py::isinstance<py::int_>(obj)) return obj.cast<long long>();
    if (py::isinstance<py::float_>(obj)) return obj.cast<double>();
    if (py::isinstance<py::str>(obj)) return obj.cast<std::string>();
    if (py::isinstance<py::dict>(obj)) {
        json out = json::object();
        for (auto item : obj.cast<py::dict>())
            out[item.first.cast<std::string>()] = py_to_json(item.second);
        return out;
    }
    if (py::isinstance<py::sequence>(obj)) {
        json out = json::array();
        for (auto item : obj.cast<py::sequence>()) out.push_back(py_to_json(item));
        return out;
    }
    throw py::type_error("cannot convert object to json");
}

py::dict summary_dict(const RunSummary& s) {
    return json_to_py(s.to_json()).cast<py::dict>();
}

py::dict run_result_dict(const RunResult& r) {
    py::dict out;
    out["summary"] = summary_dict(r.summary);
    out["times"] = r.trajectory.times;
    py::list norms;
    for (std::size_t i = 0; i < r.trajectory.size(); ++i) {
        const Vector v = r.trajectory.error_norms(i);
        norms.append(std::vector<double>(v.data(), v.data() + v.size()));
    }
    out["error_norms"] = norms;
    out["V"] = r.trajectory.V;
    py::list limits;
    for (char c : r.trajectory.limit) limits.append(std::string(1, c));
    out["limit"] = limits;
    return out;
}

ExperimentConfig config_from_py(const py::dict& d) {
    return ExperimentConfig::from_json(py_to_json(d));
}

}  // namespace

PYBIND11_MODULE(clustersync, m) {
    m.doc() = "cluster synchronization of delayed coupled networks";

    m.def("preset_config",
          [](const std::string& name) { return json_to_py(make_preset(name).to_json()); },
          py::arg("name"), "built-in config for case1|case2|case3 as a dict");

    m.def("run_preset",
          [](const std::string& name, double h, double T, double tol) {
              ExperimentConfig cfg = make_preset(name);
              if (h > 0) cfg.integrator.h = h;
              if (T > 0) cfg.integrator.T = T;
              if (tol > 0) cfg.settle_tol = tol;
              return run_result_dict(run_case(cfg));
          },
          py::arg("name"), py::arg("h") = 0.0, py::arg("T") = 0.0, py::arg("tol") = 0.0);

    m.def("run",
          [](const py::dict& config) { return run_result_dict(run_case(config_from_py(config))); },
          py::arg("config"), "simulate a config dict; returns summary + trajectory arrays");

    m.def("check",
          [](const py::dict& config) { return summary_dict(check_only(config_from_py(config))); },
          py::arg("config"), "criteria checks only, no simulation");

    m.def("config_digest",
          [](const py::dict& config) { return config_digest(config_from_py(config)); },
          py::arg("config"));

    m.def("settling_time", &settling_time, py::arg("V0"), py::arg("k"), py::arg("mu"));

    m.def("eta_k",
          [](const Matrix& Q, double d_k, const std::vector<int>& boundaries,
             const std::vector<int>& rho) {
              ClusterPartition part{boundaries};
              part.validate();
              return eta_k(Q, d_k, part, rho);
          },
          py::arg("Q"), py::arg("d_k"), py::arg("partition"), py::arg("rho"));

    m.def("psi", &psi, py::arg("e_i"), py::arg("norm_e"), py::arg("epsilon"));

    m.def("select_pinned_nodes",
          [](const Vector& norms, const std::vector<int>& boundaries, double d_k,
             const std::vector<int>& rho) {
              ClusterPartition part{boundaries};
              part.validate();
              return select_pinned_nodes(norms, part, d_k, rho).per_cluster;
          },
          py::arg("error_norms"), py::arg("partition"), py::arg("d_k"), py::arg("rho"));

    m.def("power_mean_check", &power_mean_check, py::arg("vectors"), py::arg("q"));

    py::register_exception<Error>(m, "ClusterSyncError");
}
