#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "tatraj/activity.hpp"

namespace tatraj {

using Composition = Eigen::VectorXd;

struct DirichletParams {
  Eigen::VectorXd alpha;
  double alpha0 = 0.0;

  // Throws InvalidAlpha unless every entry is finite and > 0.
  static DirichletParams from_alpha(Eigen::VectorXd alpha);
};

// ln Gamma(a0) - sum ln Gamma(a_d) + sum (a_d - 1) ln y_d. `y` must lie
// strictly inside the simplex (row sum within 1e-9).
double dirichlet_log_density(std::span<const double> y, const DirichletParams& params);
inline double dirichlet_log_density(const Composition& y, const DirichletParams& params) {
  return dirichlet_log_density(std::span<const double>(y.data(), static_cast<std::size_t>(y.size())), params);
}

Composition dirichlet_mean(const DirichletParams& params);
// a_d (a0 - a_d) / (a0^2 (a0 + 1))
Eigen::VectorXd dirichlet_variance(const DirichletParams& params);

// s = (t - (T + 1) / 2) / ((T - 1) / 2): -1 at the first step, +1 at the last.
double scaled_time(int step, const TimeGrid& grid = kDayGrid);

// z-scoring of named covariates with training-set moments.
struct Standardization {
  std::vector<std::string> names;
  std::vector<double> mean;
  std::vector<double> sd;

  // Columns of `raw` follow `names`. Throws ZeroVariance for a constant
  // column.
  static Standardization fit(std::vector<std::string> names, const std::vector<std::vector<double>>& raw);
  std::vector<double> apply(std::span<const double> raw) const;
};

// One regression observation: x = (1, s^2, z-scored covariates...).
struct DesignRow {
  double intercept = 1.0;
  double time_sq = 0.0;
  std::vector<double> covariates;

  Eigen::Index width() const noexcept { return 2 + static_cast<Eigen::Index>(covariates.size()); }
  Eigen::VectorXd vector() const;
};

DesignRow make_design_row(int step, std::span<const double> raw_covariates, const Standardization& standardization,
                          const TimeGrid& grid = kDayGrid);

struct LogLikScore {
  double loglik = 0.0;
  Eigen::MatrixXd score;  // same shape as beta
};

// beta is categories x regressors; alpha_{i,d} = exp(x_i . beta_d).
LogLikScore loglik_and_score(const Eigen::MatrixXd& beta, std::span<const DesignRow> X, std::span<const Composition> Y);

struct FitOptions {
  double rel_tol = 1e-8;   // relative log-likelihood change
  double grad_tol = 1e-6;  // max-norm of the score
  int max_iter = 500;
  bool standard_errors = true;
};

struct RegressionFit {
  Eigen::MatrixXd beta;
  std::vector<std::string> regressor_names;  // "(Intercept)", "Time^2", covariates...
  Standardization standardization;
  double loglik = 0.0;
  double aic = 0.0;
  double bic = 0.0;
  int n_obs = 0;
  int n_params = 0;
  bool converged = false;
  int iterations = 0;
  std::string stop_reason;
  std::vector<double> loglik_trace;  // one entry per accepted iterate, starting point first
  Eigen::MatrixXd std_error;         // NaN when the information matrix is not positive definite
  Eigen::MatrixXd z_value;
  Eigen::MatrixXd p_value;           // two-sided normal tail

  const std::vector<std::string>& covariate_names() const noexcept { return standardization.names; }
};

// Quasi-Newton (BFGS) ascent with Armijo backtracking from a moment-matched
// start. `standardization` is stored in the fit; X must already use it.
// Non-convergence is reported through `converged`, never thrown.
RegressionFit fit_regression(std::span<const DesignRow> X, std::span<const Composition> Y, const FitOptions& options = {},
                             Standardization standardization = {});

std::pair<DirichletParams, Composition> predict(const RegressionFit& fit, const DesignRow& x);

// (y - mu) / sd per observation and category.
Eigen::MatrixXd residuals(const RegressionFit& fit, std::span<const DesignRow> X, std::span<const Composition> Y);

// "***" below 0.001, "**" below 0.01, "*" below 0.05, else "".
std::string significance_code(double p);

// Fixed-width table: one row per regressor, Estimate and Pr per category,
// fit statistics and the significance legend.
std::string coefficient_table(const RegressionFit& fit);

nlohmann::json fit_to_json(const RegressionFit& fit);
RegressionFit fit_from_json(const nlohmann::json& j);

}  // namespace tatraj
