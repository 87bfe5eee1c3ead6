#include "tatraj/dirichlet.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>

#include "tatraj/error.hpp"
#include "tatraj/io.hpp"
#include "tatraj/special.hpp"

namespace tatraj {

namespace {

// Line-search guard: trial points with any alpha above this are shrunk.
constexpr double kAlphaCeiling = 1e12;

struct Data {
  Eigen::MatrixXd X;     // n x P
  Eigen::MatrixXd logY;  // n x D
};

Data pack(std::span<const DesignRow> X, std::span<const Composition> Y) {
  if (X.empty() || X.size() != Y.size()) {
    throw Error(Errc::CovariateMismatch, "design has " + std::to_string(X.size()) + " rows but there are " +
                                             std::to_string(Y.size()) + " compositions");
  }
  const Eigen::Index n = static_cast<Eigen::Index>(X.size());
  const Eigen::Index P = X[0].width();
  const Eigen::Index D = Y[0].size();
  if (D < 2) throw Error(Errc::NonInteriorY, "compositions need at least two parts");
  Data d{Eigen::MatrixXd(n, P), Eigen::MatrixXd(n, D)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = X[static_cast<std::size_t>(i)];
    const auto& y = Y[static_cast<std::size_t>(i)];
    if (row.width() != P) throw Error(Errc::CovariateMismatch, "design rows have differing widths");
    if (y.size() != D) throw Error(Errc::NonInteriorY, "compositions have differing lengths");
    const Eigen::VectorXd x = row.vector();
    if (!x.allFinite()) throw Error(Errc::CovariateMismatch, "design row " + std::to_string(i) + " is not finite");
    d.X.row(i) = x.transpose();
    if (!(y.minCoeff() > 0.0 && y.maxCoeff() < 1.0) || std::abs(y.sum() - 1.0) > 1e-9) {
      throw Error(Errc::NonInteriorY, "composition " + std::to_string(i) + " is not strictly inside the simplex");
    }
    d.logY.row(i) = y.array().log().transpose();
  }
  return d;
}

// alpha = exp(X beta^T); nullopt when any entry leaves (0, ceiling].
std::optional<Eigen::MatrixXd> alphas(const Eigen::MatrixXd& beta, const Data& d, double ceiling) {
  Eigen::MatrixXd A = (d.X * beta.transpose()).array().exp().matrix();
  for (Eigen::Index k = 0; k < A.size(); ++k) {
    const double a = A.data()[k];
    if (!(a > 0.0) || !(a <= ceiling)) return std::nullopt;
  }
  return A;
}

double loglik_from_alpha(const Eigen::MatrixXd& A, const Data& d) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    double a0 = 0.0;
    double obs = 0.0;
    for (Eigen::Index k = 0; k < A.cols(); ++k) {
      const double a = A(i, k);
      a0 += a;
      obs += (a - 1.0) * d.logY(i, k) - log_gamma(a);
    }
    total += obs + log_gamma(a0);
  }
  return total;
}

Eigen::MatrixXd score_from_alpha(const Eigen::MatrixXd& A, const Data& d) {
  Eigen::MatrixXd W(A.rows(), A.cols());
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    const double psi0 = digamma(A.row(i).sum());
    for (Eigen::Index k = 0; k < A.cols(); ++k) {
      W(i, k) = A(i, k) * (psi0 - digamma(A(i, k)) + d.logY(i, k));
    }
  }
  return W.transpose() * d.X;
}

LogLikScore evaluate(const Eigen::MatrixXd& beta, const Data& d) {
  auto A = alphas(beta, d, std::numeric_limits<double>::max());
  if (!A) throw Error(Errc::NonFiniteAlpha, "exp(x . beta) overflowed or underflowed");
  return {loglik_from_alpha(*A, d), score_from_alpha(*A, d)};
}

Eigen::VectorXd flatten(const Eigen::MatrixXd& m) { return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size()); }

Eigen::MatrixXd unflatten(const Eigen::VectorXd& v, Eigen::Index rows, Eigen::Index cols) {
  return Eigen::Map<const Eigen::MatrixXd>(v.data(), rows, cols);
}

// Intercepts from pooled moments: alpha_d = a0 * mean_d with a0 the median
// of the per-part moment estimates mean(1 - mean) / var - 1.
Eigen::MatrixXd moment_start(const Data& d, Eigen::Index P) {
  const Eigen::Index n = d.logY.rows();
  const Eigen::Index D = d.logY.cols();
  const Eigen::MatrixXd Y = d.logY.array().exp().matrix();
  const Eigen::RowVectorXd mean = Y.colwise().mean();
  std::vector<double> precisions;
  for (Eigen::Index k = 0; k < D; ++k) {
    if (n < 2) break;
    const double var = (Y.col(k).array() - mean(k)).square().sum() / static_cast<double>(n - 1);
    if (var > 0.0) precisions.push_back(mean(k) * (1.0 - mean(k)) / var - 1.0);
  }
  double a0 = static_cast<double>(D);
  if (!precisions.empty()) {
    std::nth_element(precisions.begin(), precisions.begin() + static_cast<std::ptrdiff_t>(precisions.size() / 2),
                     precisions.end());
    a0 = precisions[precisions.size() / 2];
  }
  a0 = std::clamp(a0, 0.1, 1e6);
  Eigen::MatrixXd beta = Eigen::MatrixXd::Zero(D, P);
  for (Eigen::Index k = 0; k < D; ++k) beta(k, 0) = std::log(a0 * mean(k));
  return beta;
}

void fill_statistics(RegressionFit& fit) {
  const double k = static_cast<double>(fit.n_params);
  fit.aic = 2.0 * k - 2.0 * fit.loglik;
  fit.bic = k * std::log(static_cast<double>(fit.n_obs)) - 2.0 * fit.loglik;
}

void fill_standard_errors(RegressionFit& fit, const Data& d) {
  const Eigen::Index D = fit.beta.rows();
  const Eigen::Index P = fit.beta.cols();
  const Eigen::Index K = D * P;
  const Eigen::VectorXd theta = flatten(fit.beta);
  Eigen::MatrixXd hessian(K, K);
  for (Eigen::Index j = 0; j < K; ++j) {
    const double h = 1e-5 * std::max(1.0, std::abs(theta(j)));
    Eigen::VectorXd up = theta;
    Eigen::VectorXd down = theta;
    up(j) += h;
    down(j) -= h;
    const Eigen::VectorXd g_up = flatten(evaluate(unflatten(up, D, P), d).score);
    const Eigen::VectorXd g_down = flatten(evaluate(unflatten(down, D, P), d).score);
    hessian.col(j) = (g_up - g_down) / (up(j) - down(j));
  }
  const Eigen::MatrixXd information = -0.5 * (hessian + hessian.transpose());
  Eigen::LDLT<Eigen::MatrixXd> ldlt(information);
  Eigen::VectorXd se = Eigen::VectorXd::Constant(K, std::numeric_limits<double>::quiet_NaN());
  if (ldlt.info() == Eigen::Success && ldlt.isPositive() && (ldlt.vectorD().array() > 0.0).all()) {
    const Eigen::MatrixXd cov = ldlt.solve(Eigen::MatrixXd::Identity(K, K));
    for (Eigen::Index j = 0; j < K; ++j) se(j) = cov(j, j) > 0.0 ? std::sqrt(cov(j, j)) : se(j);
  }
  fit.std_error = unflatten(se, D, P);
  fit.z_value = fit.beta.array() / fit.std_error.array();
  fit.p_value = fit.z_value.unaryExpr([](double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); });
}

}  // namespace

DirichletParams DirichletParams::from_alpha(Eigen::VectorXd alpha) {
  if (alpha.size() < 2) throw Error(Errc::InvalidAlpha, "need at least two shape parameters");
  for (Eigen::Index k = 0; k < alpha.size(); ++k) {
    if (!(alpha(k) > 0.0) || !std::isfinite(alpha(k))) {
      throw Error(Errc::InvalidAlpha, "shape parameter " + std::to_string(k) + " is " + format_double(alpha(k)));
    }
  }
  DirichletParams p;
  p.alpha0 = alpha.sum();
  p.alpha = std::move(alpha);
  return p;
}

double dirichlet_log_density(std::span<const double> y, const DirichletParams& params) {
  if (static_cast<Eigen::Index>(y.size()) != params.alpha.size()) {
    throw Error(Errc::OutsideSimplex, "composition length does not match the number of shape parameters");
  }
  double sum = 0.0;
  for (double v : y) {
    if (!(v > 0.0 && v < 1.0)) throw Error(Errc::OutsideSimplex, "entry " + format_double(v) + " not in (0,1)");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw Error(Errc::OutsideSimplex, "entries sum to " + format_double(sum));
  for (Eigen::Index k = 0; k < params.alpha.size(); ++k) {
    if (!(params.alpha(k) > 0.0) || !std::isfinite(params.alpha(k))) throw Error(Errc::InvalidAlpha, "non-positive shape parameter");
  }
  double out = log_gamma(params.alpha0);
  for (std::size_t k = 0; k < y.size(); ++k) {
    const double a = params.alpha(static_cast<Eigen::Index>(k));
    out += (a - 1.0) * std::log(y[k]) - log_gamma(a);
  }
  return out;
}

Composition dirichlet_mean(const DirichletParams& params) { return params.alpha / params.alpha0; }

Eigen::VectorXd dirichlet_variance(const DirichletParams& params) {
  const double a0 = params.alpha0;
  return (params.alpha.array() * (a0 - params.alpha.array()) / (a0 * a0 * (a0 + 1.0))).matrix();
}

double scaled_time(int step, const TimeGrid& grid) {
  const double T = grid.steps;
  return (step - (T + 1.0) / 2.0) / ((T - 1.0) / 2.0);
}

Standardization Standardization::fit(std::vector<std::string> names, const std::vector<std::vector<double>>& raw) {
  Standardization s;
  s.names = std::move(names);
  const std::size_t p = s.names.size();
  if (raw.size() < 2 && p > 0) throw Error(Errc::ZeroVariance, "standardization needs at least two rows");
  for (std::size_t j = 0; j < p; ++j) {
    double mean = 0.0;
    for (const auto& r : raw) mean += r.at(j);
    mean /= static_cast<double>(raw.size());
    double ss = 0.0;
    for (const auto& r : raw) ss += (r[j] - mean) * (r[j] - mean);
    const double sd = std::sqrt(ss / static_cast<double>(raw.size() - 1));
    if (!(sd > 0.0)) throw Error(Errc::ZeroVariance, "covariate '" + s.names[j] + "' is constant");
    s.mean.push_back(mean);
    s.sd.push_back(sd);
  }
  return s;
}

std::vector<double> Standardization::apply(std::span<const double> raw) const {
  if (raw.size() != names.size()) {
    throw Error(Errc::CovariateMismatch, "expected " + std::to_string(names.size()) + " covariates, got " +
                                             std::to_string(raw.size()));
  }
  std::vector<double> z(raw.size());
  for (std::size_t j = 0; j < raw.size(); ++j) z[j] = (raw[j] - mean[j]) / sd[j];
  return z;
}

Eigen::VectorXd DesignRow::vector() const {
  Eigen::VectorXd x(width());
  x(0) = intercept;
  x(1) = time_sq;
  for (std::size_t j = 0; j < covariates.size(); ++j) x(static_cast<Eigen::Index>(j) + 2) = covariates[j];
  return x;
}

DesignRow make_design_row(int step, std::span<const double> raw_covariates, const Standardization& standardization,
                          const TimeGrid& grid) {
  const double s = scaled_time(step, grid);
  return DesignRow{1.0, s * s, standardization.apply(raw_covariates)};
}

LogLikScore loglik_and_score(const Eigen::MatrixXd& beta, std::span<const DesignRow> X, std::span<const Composition> Y) {
  const Data d = pack(X, Y);
  if (beta.rows() != d.logY.cols() || beta.cols() != d.X.cols()) {
    throw Error(Errc::CovariateMismatch, "coefficient matrix shape does not match the data");
  }
  return evaluate(beta, d);
}

RegressionFit fit_regression(std::span<const DesignRow> X, std::span<const Composition> Y, const FitOptions& options,
                             Standardization standardization) {
  const Data d = pack(X, Y);
  const Eigen::Index n = d.X.rows();
  const Eigen::Index P = d.X.cols();
  const Eigen::Index D = d.logY.cols();
  if (n < P + 1) {
    throw Error(Errc::RankDeficientDesign, std::to_string(n) + " observations cannot identify " + std::to_string(P) +
                                               " regressors (need n >= p + 2)");
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(d.X);
  qr.setThreshold(1e-10);
  if (qr.rank() < P) {
    throw Error(Errc::RankDeficientDesign, "design matrix has rank " + std::to_string(qr.rank()) + " < " + std::to_string(P));
  }
  if (standardization.names.size() + 2 != static_cast<std::size_t>(P)) {
    if (!standardization.names.empty()) {
      throw Error(Errc::CovariateMismatch, "standardization names do not match the design width");
    }
    for (Eigen::Index j = 2; j < P; ++j) standardization.names.push_back("x" + std::to_string(j - 1));
    standardization.mean.assign(static_cast<std::size_t>(P - 2), 0.0);
    standardization.sd.assign(static_cast<std::size_t>(P - 2), 1.0);
  }

  RegressionFit fit;
  fit.regressor_names = {"(Intercept)", "Time^2"};
  for (const auto& name : standardization.names) fit.regressor_names.push_back(name);
  fit.standardization = std::move(standardization);
  fit.n_obs = static_cast<int>(n);
  fit.n_params = static_cast<int>(D * P);

  // Minimize f = -loglik over theta = vec(beta).
  Eigen::VectorXd theta = flatten(moment_start(d, P));
  LogLikScore cur = evaluate(unflatten(theta, D, P), d);
  double f = -cur.loglik;
  Eigen::VectorXd g = -flatten(cur.score);
  const Eigen::Index K = theta.size();
  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(K, K);
  bool scaled = false;
  fit.loglik_trace.push_back(-f);

  int iter = 0;
  for (; iter < options.max_iter; ++iter) {
    if (g.cwiseAbs().maxCoeff() < options.grad_tol) {
      fit.converged = true;
      fit.stop_reason = "gradient";
      break;
    }
    Eigen::VectorXd dir = -H * g;
    double slope = g.dot(dir);
    if (!(slope < 0.0)) {
      H.setIdentity();
      scaled = false;
      dir = -g;
      slope = g.dot(dir);
    }
    double step = 1.0;
    bool accepted = false;
    Eigen::VectorXd trial;
    double f_trial = 0.0;
    std::optional<Eigen::MatrixXd> A;
    for (int halvings = 0; halvings < 80; ++halvings, step *= 0.5) {
      trial = theta + step * dir;
      A = alphas(unflatten(trial, D, P), d, kAlphaCeiling);
      if (!A) continue;
      f_trial = -loglik_from_alpha(*A, d);
      if (std::isfinite(f_trial) && f_trial <= f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      fit.stop_reason = "line search failed";
      break;
    }
    const Eigen::VectorXd g_trial = -flatten(score_from_alpha(*A, d));
    const Eigen::VectorXd s = trial - theta;
    const Eigen::VectorXd y = g_trial - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (!scaled) {
        H *= sy / y.dot(y);
        scaled = true;
      }
      const double rho = 1.0 / sy;
      const Eigen::VectorXd Hy = H * y;
      // (I - rho s y^T) H (I - rho y s^T) + rho s s^T
      H += (rho * rho * y.dot(Hy) + rho) * (s * s.transpose()) - rho * (Hy * s.transpose() + s * Hy.transpose());
    }
    const double change = std::abs(f_trial - f) / std::max(std::abs(f), 1.0);
    theta = trial;
    f = f_trial;
    g = g_trial;
    fit.loglik_trace.push_back(-f);
    if (change < options.rel_tol) {
      fit.converged = true;
      fit.stop_reason = "relative change";
      ++iter;
      break;
    }
  }
  if (!fit.converged && fit.stop_reason.empty()) fit.stop_reason = "iteration limit";
  if (!fit.converged && g.cwiseAbs().maxCoeff() < options.grad_tol) {
    fit.converged = true;
    fit.stop_reason = "gradient";
  }

  fit.iterations = iter;
  fit.beta = unflatten(theta, D, P);
  fit.loglik = -f;
  fill_statistics(fit);
  if (options.standard_errors) {
    fill_standard_errors(fit, d);
  } else {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    fit.std_error = Eigen::MatrixXd::Constant(D, P, nan);
    fit.z_value = fit.std_error;
    fit.p_value = fit.std_error;
  }
  return fit;
}

std::pair<DirichletParams, Composition> predict(const RegressionFit& fit, const DesignRow& x) {
  if (x.width() != fit.beta.cols()) {
    throw Error(Errc::CovariateMismatch, "design row has " + std::to_string(x.covariates.size()) +
                                             " covariates, fit expects " + std::to_string(fit.beta.cols() - 2));
  }
  Eigen::VectorXd alpha = (fit.beta * x.vector()).array().exp().matrix();
  DirichletParams params = DirichletParams::from_alpha(std::move(alpha));
  Composition mean = dirichlet_mean(params);
  return {std::move(params), std::move(mean)};
}

Eigen::MatrixXd residuals(const RegressionFit& fit, std::span<const DesignRow> X, std::span<const Composition> Y) {
  if (X.size() != Y.size()) throw Error(Errc::CovariateMismatch, "design and composition counts differ");
  Eigen::MatrixXd r(static_cast<Eigen::Index>(X.size()), fit.beta.rows());
  for (std::size_t i = 0; i < X.size(); ++i) {
    const auto [params, mu] = predict(fit, X[i]);
    const Eigen::VectorXd sd = dirichlet_variance(params).array().sqrt();
    r.row(static_cast<Eigen::Index>(i)) = ((Y[i] - mu).array() / sd.array()).transpose();
  }
  return r;
}

std::string significance_code(double p) {
  if (p < 0.001) return "***";
  if (p < 0.01) return "**";
  if (p < 0.05) return "*";
  return "";
}

std::string coefficient_table(const RegressionFit& fit) {
  const Eigen::Index D = fit.beta.rows();
  char buf[64];
  std::string out = "Dirichlet regression coefficients (log link, common parametrization)\n";
  std::snprintf(buf, sizeof buf, "%-14s", "");
  out += buf;
  for (Eigen::Index k = 0; k < D; ++k) {
    const std::string code = k < static_cast<Eigen::Index>(kNumCategories)
                                 ? std::string(category_code(category_at(static_cast<std::size_t>(k))))
                                 : "c" + std::to_string(k + 1);
    std::snprintf(buf, sizeof buf, " %-19s", code.c_str());
    out += buf;
  }
  out += "\n";
  std::snprintf(buf, sizeof buf, "%-14s", "");
  out += buf;
  for (Eigen::Index k = 0; k < D; ++k) {
    std::snprintf(buf, sizeof buf, " %9s %-9s", "Estimate", "Pr");
    out += buf;
  }
  out += "\n";
  for (std::size_t j = 0; j < fit.regressor_names.size(); ++j) {
    std::snprintf(buf, sizeof buf, "%-14s", fit.regressor_names[j].c_str());
    out += buf;
    for (Eigen::Index k = 0; k < D; ++k) {
      const auto col = static_cast<Eigen::Index>(j);
      const double p = fit.p_value(k, col);
      std::string pr = significance_code(p);
      if (pr.empty()) {
        char pbuf[32];
        std::snprintf(pbuf, sizeof pbuf, "%.4f", p);
        pr = pbuf;
      }
      std::snprintf(buf, sizeof buf, " %9.4f %-9s", fit.beta(k, col), pr.c_str());
      out += buf;
    }
    out += "\n";
  }
  std::snprintf(buf, sizeof buf, "AIC: %.6g    BIC: %.6g    Log-likelihood: %.6g\n", fit.aic, fit.bic, fit.loglik);
  out += buf;
  std::snprintf(buf, sizeof buf, "n_obs: %d    n_params: %d    converged: %s\n", fit.n_obs, fit.n_params,
                fit.converged ? "yes" : "no");
  out += buf;
  out += "Significance codes: 0 '***' 0.001 '**' 0.01 '*' 0.05\n";
  return out;
}

namespace {

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const double v = m(r, c);
      if (std::isfinite(v)) {
        row.push_back(v);
      } else {
        row.push_back(nullptr);
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows > 0 ? static_cast<Eigen::Index>(j.at(0).size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j.at(static_cast<std::size_t>(r));
    if (static_cast<Eigen::Index>(row.size()) != cols) throw Error(Errc::ParseError, "ragged matrix in fit JSON");
    for (Eigen::Index c = 0; c < cols; ++c) {
      const auto& v = row.at(static_cast<std::size_t>(c));
      m(r, c) = v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
    }
  }
  return m;
}

}  // namespace

nlohmann::json fit_to_json(const RegressionFit& fit) {
  nlohmann::json j;
  j["beta"] = matrix_json(fit.beta);
  j["regressors"] = fit.regressor_names;
  j["covariate_names"] = fit.standardization.names;
  nlohmann::json standardization = nlohmann::json::array();
  for (std::size_t k = 0; k < fit.standardization.names.size(); ++k) {
    standardization.push_back(
        {{"name", fit.standardization.names[k]}, {"mean", fit.standardization.mean[k]}, {"sd", fit.standardization.sd[k]}});
  }
  j["standardization"] = std::move(standardization);
  j["loglik"] = fit.loglik;
  j["aic"] = fit.aic;
  j["bic"] = fit.bic;
  j["n_obs"] = fit.n_obs;
  j["n_params"] = fit.n_params;
  j["converged"] = fit.converged;
  j["iterations"] = fit.iterations;
  j["stop_reason"] = fit.stop_reason;
  j["std_error"] = matrix_json(fit.std_error);
  j["p_value"] = matrix_json(fit.p_value);
  return j;
}

RegressionFit fit_from_json(const nlohmann::json& j) {
  RegressionFit fit;
  try {
    fit.beta = matrix_from_json(j.at("beta"));
    fit.regressor_names = j.at("regressors").get<std::vector<std::string>>();
    for (const auto& s : j.at("standardization")) {
      fit.standardization.names.push_back(s.at("name").get<std::string>());
      fit.standardization.mean.push_back(s.at("mean").get<double>());
      fit.standardization.sd.push_back(s.at("sd").get<double>());
    }
    fit.loglik = j.at("loglik").get<double>();
    fit.aic = j.at("aic").get<double>();
    fit.bic = j.at("bic").get<double>();
    fit.n_obs = j.at("n_obs").get<int>();
    fit.n_params = j.at("n_params").get<int>();
    fit.converged = j.at("converged").get<bool>();
    fit.iterations = j.value("iterations", 0);
    fit.stop_reason = j.value("stop_reason", "");
    fit.std_error = matrix_from_json(j.at("std_error"));
    fit.p_value = matrix_from_json(j.at("p_value"));
    fit.z_value = fit.beta.array() / fit.std_error.array();
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ParseError, std::string("fit JSON: ") + e.what());
  }
  if (fit.beta.cols() != static_cast<Eigen::Index>(fit.standardization.names.size()) + 2) {
    throw Error(Errc::ParseError, "fit JSON: beta width does not match the covariate list");
  }
  return fit;
}

}  // namespace tatraj
