#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "tatraj/dirichlet.hpp"
#include "tatraj/markov.hpp"
#include "tatraj/pipeline.hpp"
#include "tatraj/special.hpp"
#include "tatraj/stats.hpp"

namespace py = pybind11;
using namespace tatraj;

namespace {

std::vector<ActivitySequence> to_sequences(const std::vector<std::vector<int>>& diaries) {
  std::vector<ActivitySequence> out;
  for (const auto& d : diaries) {
    ActivitySequence s;
    for (int c : d) {
      if (c < 0 || c >= static_cast<int>(kNumCategories)) throw py::value_error("category index out of range");
      s.slots.push_back(category_at(static_cast<std::size_t>(c)));
    }
    out.push_back(std::move(s));
  }
  return out;
}

// Rows of X are (1, s^2, z...): the first column must be the intercept.
std::vector<DesignRow> to_design(const Eigen::MatrixXd& X) {
  if (X.cols() < 2) throw py::value_error("X needs at least the intercept and Time^2 columns");
  std::vector<DesignRow> rows(static_cast<std::size_t>(X.rows()));
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    auto& r = rows[static_cast<std::size_t>(i)];
    r.intercept = X(i, 0);
    r.time_sq = X(i, 1);
    for (Eigen::Index j = 2; j < X.cols(); ++j) r.covariates.push_back(X(i, j));
  }
  return rows;
}

std::vector<Composition> to_rows(const Eigen::MatrixXd& Y) {
  std::vector<Composition> out;
  for (Eigen::Index i = 0; i < Y.rows(); ++i) out.push_back(Y.row(i).transpose());
  return out;
}

py::dict fit_dict(const RegressionFit& f) {
  py::dict d;
  d["beta"] = f.beta;
  d["std_error"] = f.std_error;
  d["p_value"] = f.p_value;
  d["loglik"] = f.loglik;
  d["aic"] = f.aic;
  d["bic"] = f.bic;
  d["n_obs"] = f.n_obs;
  d["n_params"] = f.n_params;
  d["converged"] = f.converged;
  d["iterations"] = f.iterations;
  d["loglik_trace"] = f.loglik_trace;
  d["regressors"] = f.regressor_names;
  return d;
}

py::object json_to_py(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

}  // namespace

PYBIND11_MODULE(_tatraj, m) {
  m.doc() = "Community time-activity trajectories: Markov profiles and Dirichlet regression";
  m.attr("__version__") = std::string(kToolVersion);

  py::register_exception<Error>(m, "TatrajError", PyExc_ValueError);

  m.def("log_gamma", &log_gamma, py::arg("x"));
  m.def("digamma", &digamma, py::arg("x"));
  m.def("trigamma", &trigamma, py::arg("x"));

  m.def(
      "dirichlet_log_density",
      [](const Eigen::VectorXd& y, const Eigen::VectorXd& alpha) {
        return dirichlet_log_density(Composition(y), DirichletParams::from_alpha(alpha));
      },
      py::arg("y"), py::arg("alpha"));

  py::class_<TransitionModel>(m, "TransitionModel")
      .def_readonly("initial", &TransitionModel::initial)
      .def_readonly("matrices", &TransitionModel::matrices)
      .def_readonly("kappa", &TransitionModel::kappa)
      .def("to_json", [](const TransitionModel& t) { return model_to_json(t).dump(); });

  m.def(
      "estimate_transitions",
      [](const std::vector<std::vector<int>>& diaries, double kappa) {
        return estimate_transitions(to_sequences(diaries), kappa);
      },
      py::arg("diaries"), py::arg("kappa") = kDefaultKappa,
      "diaries: lists of 96 category indices (0 = c01 ... 7 = c08)");
  m.def("analytic_profile", [](const TransitionModel& t) { return analytic_profile(t).values(); }, py::arg("model"));
  m.def(
      "simulate_profile",
      [](const TransitionModel& t, std::size_t n, std::uint64_t seed, std::optional<double> epsilon) {
        py::gil_scoped_release release;
        return simulate_profile(t, n, seed, epsilon).values();
      },
      py::arg("model"), py::arg("n"), py::arg("seed"), py::arg("epsilon") = py::none());
  m.def(
      "zero_replace", [](const Eigen::MatrixXd& y, double eps) { return zero_replace(CompositionMatrix(y), eps).values(); },
      py::arg("compositions"), py::arg("epsilon"));

  m.def(
      "fit_regression",
      [](const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, double rel_tol, double grad_tol, int max_iter) {
        FitOptions o;
        o.rel_tol = rel_tol;
        o.grad_tol = grad_tol;
        o.max_iter = max_iter;
        const auto rows = to_design(X);
        const auto ys = to_rows(Y);
        py::gil_scoped_release release;
        auto fit = fit_regression(rows, ys, o);
        py::gil_scoped_acquire acquire;
        return fit_dict(fit);
      },
      py::arg("X"), py::arg("Y"), py::arg("rel_tol") = 1e-8, py::arg("grad_tol") = 1e-6, py::arg("max_iter") = 500,
      "X columns: intercept, Time^2, covariates. Y rows: interior compositions.");
  m.def(
      "loglik_and_score",
      [](const Eigen::MatrixXd& beta, const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y) {
        const auto r = loglik_and_score(beta, to_design(X), to_rows(Y));
        return py::make_tuple(r.loglik, r.score);
      },
      py::arg("beta"), py::arg("X"), py::arg("Y"));

  m.def(
      "kmeans",
      [](const Eigen::MatrixXd& points, int k, std::uint64_t seed, int restarts) {
        const auto r = kmeans(to_rows(points), k, seed, restarts);
        py::dict d;
        d["assignments"] = r.assignments;
        d["inertia"] = r.inertia;
        d["shares"] = r.shares;
        return d;
      },
      py::arg("points"), py::arg("k"), py::arg("seed"), py::arg("restarts") = 10);
  m.def(
      "correlation", [](const Eigen::MatrixXd& data) { return column_correlation(data); }, py::arg("data"),
      "Pearson correlation of the columns");
  m.def(
      "boxs_m_test",
      [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
        const auto r = boxs_m_test(a, b);
        py::dict d;
        d["M"] = r.M;
        d["chi2"] = r.chi2;
        d["df"] = r.df;
        d["p"] = r.p;
        d["ridge_applied"] = r.ridge_applied;
        return d;
      },
      py::arg("group_a"), py::arg("group_b"));
  m.def(
      "welch_t_test",
      [](const std::vector<double>& a, const std::vector<double>& b) {
        const auto r = welch_t_test(a, b);
        return py::make_tuple(r.t, r.df, r.p);
      },
      py::arg("a"), py::arg("b"));
  m.def(
      "ternary_coordinates",
      [](const Eigen::MatrixXd& Y, const std::array<int, 3>& triple) {
        std::array<ActivityCategory, 3> t{};
        for (std::size_t i = 0; i < 3; ++i) t[i] = category_at(static_cast<std::size_t>(triple[i]));
        const auto pts = ternary_coordinates(to_rows(Y), t);
        Eigen::MatrixXd out(static_cast<Eigen::Index>(pts.size()), 2);
        for (std::size_t i = 0; i < pts.size(); ++i) out.row(static_cast<Eigen::Index>(i)) << pts[i].x, pts[i].y;
        return out;
      },
      py::arg("compositions"), py::arg("triple") = std::array<int, 3>{4, 1, 6});

  m.def(
      "synthesize",
      [](const std::filesystem::path& out, std::size_t n, std::uint64_t seed,
         const std::optional<std::filesystem::path>& mapping) {
        const auto map = mapping ? CategoryMapping::load(*mapping) : CategoryMapping::identity();
        write_synthetic(generate_synthetic(default_truth(true), n, seed, map), out);
      },
      py::arg("out"), py::arg("n") = 200, py::arg("seed") = 20210, py::arg("mapping") = py::none());
  m.def(
      "run_all",
      [](const std::filesystem::path& config, std::optional<std::filesystem::path> out) {
        PipelineConfig c = load_config(config);
        if (out) c.paths.output = *out;
        RunReport r;
        {
          py::gil_scoped_release release;
          r = run_all(c, !c.paths.output.empty());
        }
        return json_to_py(r.json);
      },
      py::arg("config"), py::arg("out") = py::none(), "Runs the pipeline; returns the run report as a dict.");
}
