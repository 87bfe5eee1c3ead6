#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include "doctest.h"
#include "support.hpp"
#include "tatraj/dirichlet.hpp"
#include "tatraj/error.hpp"
#include "tatraj/special.hpp"

using namespace tatraj;
using namespace tatraj::testing;

TEST_CASE("log_gamma") {
  CHECK(log_gamma(1.0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(std::abs(log_gamma(1.0)) < 1e-15);
  CHECK(std::abs(log_gamma(2.0)) < 1e-15);
  CHECK(log_gamma(5.0) == doctest::Approx(std::log(24.0)).epsilon(1e-14));
  CHECK(std::abs(log_gamma(5.0) - 3.1780538303) <= 1e-10);
  CHECK(log_gamma(8.0) == doctest::Approx(std::log(5040.0)).epsilon(1e-13));
  for (double x = 1e-3; x < 500.0; x *= 1.07) {
    const double ref = std::lgamma(x);
    CHECK(std::abs(log_gamma(x) - ref) <= 1e-13 * std::max(1.0, std::abs(ref)));
  }
  // Near the zeros relative accuracy matters.
  for (double x : {0.9, 0.99, 1.001, 1.2, 1.8, 1.999, 2.0001, 2.2}) {
    CHECK(std::abs(log_gamma(x) - std::lgamma(x)) <= 1e-13 * std::abs(std::lgamma(x)));
  }
  CHECK_THROWS_AS(log_gamma(0.0), Error);
  CHECK_THROWS_AS(log_gamma(-1.5), Error);
  CHECK_THROWS_AS(log_gamma(std::nan("")), Error);
}

TEST_CASE("digamma and trigamma") {
  CHECK(std::abs(digamma(1.0) + 0.5772156649015329) <= 1e-12);
  for (double x : {0.5, 1.0, 2.5, 10.0}) CHECK(std::abs(digamma(x + 1) - digamma(x) - 1.0 / x) <= 1e-12);
  for (double x = 1e-3; x < 1e4; x *= 1.13) {
    CHECK(std::abs(digamma(x) - boost::math::digamma(x)) <= 1e-12 * std::max(1.0, std::abs(boost::math::digamma(x))));
    CHECK(std::abs(trigamma(x) - boost::math::trigamma(x)) <= 1e-11 * boost::math::trigamma(x));
  }
  for (double x = 0.1; x <= 100.0; x *= 1.2) {
    const double h = 1e-5 * x;
    const double fd = (std::lgamma(x + h) - std::lgamma(x - h)) / (2 * h);
    CHECK(std::abs(digamma(x) - fd) <= 1e-6 * std::max(1.0, std::abs(fd)));
  }
  CHECK_THROWS_AS(digamma(0.0), Error);
  CHECK_THROWS_AS(trigamma(-2.0), Error);
}

TEST_CASE("Dirichlet density closed forms") {
  const auto flat = DirichletParams::from_alpha(Eigen::Vector3d(1, 1, 1));
  for (const Eigen::Vector3d y : {Eigen::Vector3d(0.2, 0.3, 0.5), Eigen::Vector3d(0.9, 0.05, 0.05)}) {
    CHECK(std::abs(dirichlet_log_density(Composition(y), flat) - std::numbers::ln2) <= 1e-12);
  }
  const auto p = DirichletParams::from_alpha(Eigen::Vector3d(2, 1, 1));
  CHECK(std::abs(std::exp(dirichlet_log_density(Composition(Eigen::Vector3d(0.5, 0.25, 0.25)), p)) - 3.0) <= 1e-12);
  CHECK_THROWS_AS(dirichlet_log_density(Composition(Eigen::Vector3d(0.5, 0.5, 0.0)), p), Error);
  CHECK_THROWS_AS(dirichlet_log_density(Composition(Eigen::Vector3d(0.5, 0.3, 0.3)), p), Error);
  CHECK_THROWS_AS(DirichletParams::from_alpha(Eigen::Vector3d(1, -1, 1)), Error);
}

TEST_CASE("Dirichlet density integrates to one") {
  const auto p = DirichletParams::from_alpha(Eigen::Vector3d(2, 3, 4));
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double sum = 0.0;
  int n = 0;
  while (n < 200000) {
    const double a = u(gen);
    const double b = u(gen);
    if (a + b >= 1.0 || a <= 0.0 || b <= 0.0) continue;
    sum += std::exp(dirichlet_log_density(Composition(Eigen::Vector3d(a, b, 1.0 - a - b)), p));
    ++n;
  }
  // Triangle area in the (y1, y2) chart is 1/2.
  CHECK(std::abs(0.5 * sum / n - 1.0) <= 0.02);
}

TEST_CASE("Dirichlet moments") {
  const auto even = dirichlet_mean(DirichletParams::from_alpha(Eigen::VectorXd::Ones(8)));
  CHECK(even.isApprox(Eigen::VectorXd::Constant(8, 0.125)));
  const auto two = dirichlet_mean(DirichletParams::from_alpha(Eigen::Vector2d(2, 6)));
  CHECK(two(0) == doctest::Approx(0.25));
  const Eigen::VectorXd a = Eigen::Vector4d(0.5, 2, 3, 7);
  CHECK(dirichlet_mean(DirichletParams::from_alpha(a)).isApprox(dirichlet_mean(DirichletParams::from_alpha(9.0 * a))));
  const auto v = dirichlet_variance(DirichletParams::from_alpha(Eigen::Vector2d(2, 2)));
  CHECK(v(0) == doctest::Approx(0.05));
}

TEST_CASE("scaled time is symmetric about mid-day") {
  CHECK(scaled_time(1) == -1.0);
  CHECK(scaled_time(96) == 1.0);
  CHECK(scaled_time(1) * scaled_time(1) == scaled_time(96) * scaled_time(96));
  for (int t = 1; t <= 48; ++t) CHECK(scaled_time(t) == doctest::Approx(-scaled_time(97 - t)));
}

TEST_CASE("log-likelihood hand value and additivity") {
  DesignRow x;
  std::vector<DesignRow> X = {x};
  std::vector<Composition> Y = {Composition::Constant(8, 0.125)};
  const Eigen::MatrixXd beta = Eigen::MatrixXd::Zero(8, 2);
  CHECK(loglik_and_score(beta, X, Y).loglik == doctest::Approx(std::log(5040.0)).epsilon(1e-13));

  const auto Xr = random_design(30, 2, 1);
  const auto b = random_beta(8, 4, 2);
  const auto Yr = draw_dirichlet(b, Xr, 3);
  auto X2 = Xr;
  X2.insert(X2.end(), Xr.begin(), Xr.end());
  auto Y2 = Yr;
  Y2.insert(Y2.end(), Yr.begin(), Yr.end());
  const auto one = loglik_and_score(b, Xr, Yr);
  const auto both = loglik_and_score(b, X2, Y2);
  CHECK(both.loglik == doctest::Approx(2.0 * one.loglik).epsilon(1e-14));
  CHECK(both.score.isApprox(2.0 * one.score, 1e-13));
}

TEST_CASE("score matches central differences") {
  for (std::uint64_t trial = 0; trial < 5; ++trial) {
    const auto X = random_design(50, 2, 100 + trial);
    const Eigen::MatrixXd b = random_beta(8, 4, 200 + trial);
    const auto Y = draw_dirichlet(b, X, 300 + trial);
    const Eigen::MatrixXd at = b + 0.3 * random_beta(8, 4, 400 + trial, 1.0) - Eigen::MatrixXd::Constant(8, 4, 0.0);
    const auto g = loglik_and_score(at, X, Y).score;
    for (Eigen::Index i = 0; i < at.size(); ++i) {
      Eigen::MatrixXd up = at;
      Eigen::MatrixXd down = at;
      up(i) += 1e-5;
      down(i) -= 1e-5;
      const double fd = (loglik_and_score(up, X, Y).loglik - loglik_and_score(down, X, Y).loglik) / 2e-5;
      CHECK(std::abs(g(i) - fd) <= 1e-5 * std::max(std::abs(fd), 1e-3));
    }
  }
}

TEST_CASE("overflowing alpha is reported") {
  DesignRow x;
  std::vector<DesignRow> X = {x};
  std::vector<Composition> Y = {Composition::Constant(8, 0.125)};
  Eigen::MatrixXd beta = Eigen::MatrixXd::Zero(8, 2);
  beta(0, 0) = 800.0;
  CHECK_THROWS_AS(loglik_and_score(beta, X, Y), Error);
}

TEST_CASE("fit: identities, ascent and recovery") {
  const auto X = random_design(500, 2, 11);
  const Eigen::MatrixXd truth = random_beta(8, 4, 12);
  const auto Y = draw_dirichlet(truth, X, 13);
  const auto fit = fit_regression(X, Y);
  REQUIRE(fit.converged);
  const double k = fit.n_params;
  CHECK(fit.n_params == 32);
  CHECK(fit.aic == 2.0 * k - 2.0 * fit.loglik);
  CHECK(fit.bic - fit.aic == doctest::Approx(k * (std::log(500.0) - 2.0)).epsilon(1e-12));
  for (std::size_t i = 1; i < fit.loglik_trace.size(); ++i) CHECK(fit.loglik_trace[i] >= fit.loglik_trace[i - 1]);
  const Eigen::ArrayXXd z = ((fit.beta - truth).array() / fit.std_error.array()).abs();
  CHECK((z <= 3.0).count() >= 30);
  const auto r = residuals(fit, X, Y);
  for (Eigen::Index d = 0; d < r.cols(); ++d) CHECK(std::abs(r.col(d).mean()) <= 0.1);
  for (const auto& x : X) {
    const auto mu = predict(fit, x).second;
    CHECK(std::abs(mu.sum() - 1.0) <= 1e-12);
    CHECK(mu.minCoeff() > 0.0);
    CHECK(mu.maxCoeff() < 1.0);
  }
}

TEST_CASE("fit is equivariant under category permutation") {
  const auto X = random_design(200, 2, 21);
  const auto Y = draw_dirichlet(random_beta(8, 4, 22), X, 23);
  const std::array<int, 8> perm = {3, 0, 7, 1, 6, 2, 5, 4};
  std::vector<Composition> Yp;
  for (const auto& y : Y) {
    Composition z(8);
    for (int k = 0; k < 8; ++k) z(k) = y(perm[static_cast<std::size_t>(k)]);
    Yp.push_back(z);
  }
  FitOptions tight;
  tight.rel_tol = 1e-14;
  tight.grad_tol = 1e-9;
  tight.standard_errors = false;
  const auto a = fit_regression(X, Y, tight);
  const auto b = fit_regression(X, Yp, tight);
  for (int k = 0; k < 8; ++k) {
    CHECK((b.beta.row(k) - a.beta.row(perm[static_cast<std::size_t>(k)])).cwiseAbs().maxCoeff() <= 1e-6);
  }
}

TEST_CASE("intercept-only fit on symmetric data gives equal means") {
  std::mt19937_64 gen(5);
  std::vector<DesignRow> X;
  std::vector<Composition> Y;
  for (int i = 0; i < 60; ++i) {
    Composition y(4);
    for (int k = 0; k < 4; ++k) y(k) = std::gamma_distribution<double>(2.0 + k, 1.0)(gen);
    y /= y.sum();
    Composition swapped = y;
    std::swap(swapped(0), swapped(1));
    DesignRow x;
    x.time_sq = (i % 7) / 7.0;
    X.push_back(x);
    X.push_back(x);
    Y.push_back(y);
    Y.push_back(swapped);
  }
  FitOptions o;
  o.rel_tol = 1e-14;
  o.grad_tol = 1e-9;
  const auto fit = fit_regression(X, Y, o);
  const auto mu = predict(fit, X[0]).second;
  CHECK(mu(0) == doctest::Approx(mu(1)).epsilon(1e-6));
}

TEST_CASE("rank-deficient designs are rejected") {
  auto X = random_design(40, 2, 31);
  for (auto& x : X) x.covariates[1] = 2.0 * x.covariates[0];
  const auto Y = draw_dirichlet(random_beta(8, 4, 1), random_design(40, 2, 1), 2);
  CHECK_THROWS_AS(fit_regression(X, Y), Error);
  const auto few = random_design(4, 2, 3);
  CHECK_THROWS_AS(fit_regression(few, std::vector<Composition>(Y.begin(), Y.begin() + 4)), Error);
}

TEST_CASE("predict") {
  RegressionFit fit;
  fit.beta = Eigen::MatrixXd::Zero(8, 3);
  fit.standardization.names = {"z"};
  fit.standardization.mean = {0.0};
  fit.standardization.sd = {1.0};
  DesignRow x;
  x.time_sq = 0.3;
  x.covariates = {1.7};
  auto [params, mu] = predict(fit, x);
  CHECK(params.alpha.isApprox(Eigen::VectorXd::Ones(8)));
  CHECK(mu.isApprox(Eigen::VectorXd::Constant(8, 0.125)));

  fit.beta = random_beta(8, 3, 4);
  const auto hand = (fit.beta.col(0) + 0.3 * fit.beta.col(1) + 1.7 * fit.beta.col(2)).array().exp().matrix();
  CHECK(predict(fit, x).first.alpha.isApprox(Eigen::VectorXd(hand), 1e-14));

  const auto base = predict(fit, x);
  fit.beta.col(0).array() += 0.8;
  const auto shifted = predict(fit, x);
  CHECK(shifted.first.alpha.isApprox(std::exp(0.8) * base.first.alpha, 1e-13));
  CHECK(shifted.second.isApprox(base.second, 1e-13));

  DesignRow wrong;
  CHECK_THROWS_AS(predict(fit, wrong), Error);
}

TEST_CASE("standardized residuals") {
  RegressionFit fit;
  fit.beta = Eigen::MatrixXd::Zero(2, 2);
  fit.beta(0, 0) = fit.beta(1, 0) = std::log(2.0);
  std::vector<DesignRow> X(2);
  std::vector<Composition> Y = {Eigen::Vector2d(0.6, 0.4), Eigen::Vector2d(0.5, 0.5)};
  const auto r = residuals(fit, X, Y);
  CHECK(r(0, 0) == doctest::Approx(0.1 / std::sqrt(0.05)));
  CHECK(r(0, 0) == doctest::Approx(0.4472).epsilon(1e-4));
  CHECK(r(1, 0) == 0.0);
  CHECK(r(1, 1) == 0.0);
}

TEST_CASE("standardization") {
  const auto st = Standardization::fit({"a", "b"}, {{1.0, 10.0}, {3.0, 10.5}, {5.0, 11.0}});
  CHECK(st.mean[0] == doctest::Approx(3.0));
  CHECK(st.sd[0] == doctest::Approx(2.0));
  const std::vector<double> raw = {5.0, 10.0};
  CHECK(st.apply(raw)[0] == doctest::Approx(1.0));
  CHECK_THROWS_AS(Standardization::fit({"a"}, {{1.0}, {1.0}}), Error);
  const std::vector<double> short_raw = {1.0};
  CHECK_THROWS_AS(st.apply(short_raw), Error);
}

TEST_CASE("coefficient table and json round trip") {
  const auto X = random_design(120, 1, 41);
  const auto Y = draw_dirichlet(random_beta(8, 3, 42), X, 43);
  Standardization st;
  st.names = {"diversity"};
  st.mean = {60.0};
  st.sd = {7.5};
  const auto fit = fit_regression(X, Y, {}, st);
  const auto table = coefficient_table(fit);
  CHECK(table.find("Significance codes: 0 '***' 0.001 '**' 0.01 '*' 0.05") != std::string::npos);
  CHECK(table.find("(Intercept)") != std::string::npos);
  CHECK(table.find("Time^2") != std::string::npos);
  CHECK(table.find("diversity") != std::string::npos);
  const auto back = fit_from_json(nlohmann::json::parse(fit_to_json(fit).dump()));
  CHECK(back.beta == fit.beta);
  CHECK(back.std_error == fit.std_error);
  CHECK(back.standardization.mean == fit.standardization.mean);
  CHECK(back.loglik == fit.loglik);
  CHECK(significance_code(0.0005) == "***");
  CHECK(significance_code(0.005) == "**");
  CHECK(significance_code(0.03) == "*");
  CHECK(significance_code(0.2).empty());
}
