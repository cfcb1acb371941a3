#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rlsvi/harness.hpp"
#include "rlsvi/optimism.hpp"

namespace py = pybind11;
using namespace rlsvi;

namespace {

// Python dicts cross the boundary as JSON text.
nlohmann::json to_json_obj(const py::dict& d) {
  const auto dumps = py::module_::import("json").attr("dumps");
  return nlohmann::json::parse(dumps(d).cast<std::string>());
}

py::object from_json_obj(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

ExperimentConfig resolve(const std::string& experiment, const py::dict& overrides) {
  auto c = default_config(parse_experiment(experiment));
  merge_json(c, to_json_obj(overrides));
  c.experiment = parse_experiment(experiment);
  c.validate();
  return c;
}

py::dict records_to_columns(const std::vector<RunRecord>& records) {
  std::vector<int> run_id, episode;
  std::vector<double> reward, regret, cum;
  std::vector<std::string> algorithm;
  std::vector<py::object> rho, distance;
  for (const auto& r : records) {
    run_id.push_back(r.run_id);
    episode.push_back(r.episode);
    reward.push_back(r.reward);
    regret.push_back(r.regret);
    cum.push_back(r.cum_regret);
    algorithm.push_back(r.algorithm);
    rho.push_back(r.rho ? py::object(py::float_(*r.rho)) : py::object(py::none()));
    distance.push_back(r.distance ? py::object(py::float_(*r.distance)) : py::object(py::none()));
  }
  py::dict out;
  out["run_id"] = run_id;
  out["episode"] = episode;
  out["reward"] = reward;
  out["regret"] = regret;
  out["cum_regret"] = cum;
  out["algorithm"] = algorithm;
  out["rho"] = rho;
  out["distance"] = distance;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.attr("__version__") = kLibraryVersion;
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def("default_config", [](const std::string& experiment) {
    return from_json_obj(to_json(default_config(parse_experiment(experiment))));
  }, py::arg("experiment"));

  m.def("run_study", [](const std::string& experiment, const py::dict& overrides) {
    const auto config = resolve(experiment, overrides);
    StudyResult result;
    {
      py::gil_scoped_release release;
      result = run_study(config);
    }
    py::dict out;
    out["records"] = records_to_columns(result.records);
    out["manifest"] = from_json_obj(build_manifest(config, result));
    return out;
  }, py::arg("experiment"), py::arg("overrides") = py::dict());

  m.def("run_optimism_suite", [](std::uint64_t seed, int n_mc, int workers) {
    OptimismReport report;
    {
      py::gil_scoped_release release;
      report = run_optimism_suite(seed, n_mc, workers);
    }
    py::list rows;
    for (const auto& r : report.rows)
      rows.append(py::dict(py::arg("check") = r.check, py::arg("case") = r.label, py::arg("statistic") = r.statistic,
                           py::arg("threshold") = r.threshold, py::arg("pass") = r.pass));
    return rows;
  }, py::arg("seed") = 1, py::arg("n_mc") = 100000, py::arg("workers") = 1);

  m.def("chain_optimal_value", [](int n) { return solve_optimal(make_chain(n)).v(0, 0); }, py::arg("num_states"));
  m.def("chain_regret_lower_bound", &chain_regret_lower_bound, py::arg("num_states"), py::arg("total_steps"),
        py::arg("horizon"));

  m.def("ridge_posterior", [](const Eigen::MatrixXd& design, const Eigen::VectorXd& targets, double sigma,
                              double lambda) {
    if (design.rows() != targets.size()) throw py::value_error("design and targets disagree in length");
    const auto post = ridge_posterior(RegressionData{design, targets}, sigma, lambda);
    return py::make_tuple(post.mean, post.covariance);
  }, py::arg("design"), py::arg("targets"), py::arg("sigma"), py::arg("lambda_"));

  m.def("beta_projection", [](const std::vector<double>& values, const std::vector<double>& concentration) {
    const auto p = beta_projection(DirichletSpec{values, concentration});
    return py::make_tuple(p.alpha, p.beta);
  }, py::arg("values"), py::arg("concentration"));
  m.def("beta_cdf", &beta_cdf, py::arg("x"), py::arg("a"), py::arg("b"));
  m.def("single_crossing_count", [](double a, double b, int grid) { return single_crossing_check(a, b, grid).sign_changes; },
        py::arg("alpha"), py::arg("beta"), py::arg("grid_size") = 10000);
  m.def("gaussian_tail_crossover", [] { return gaussian_tail_crossover(); });
  m.def("normal_hazard", &normal_hazard, py::arg("x"));
  m.def("seed_schedule", [](std::uint64_t master, std::uint64_t run, int stream) {
    return seed_schedule(master, run, static_cast<SeedStream>(stream));
  }, py::arg("master_seed"), py::arg("run_id"), py::arg("stream"));
}
