#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "tatraj/activity.hpp"
#include "tatraj/dirichlet.hpp"
#include "tatraj/markov.hpp"
#include "tatraj/rng.hpp"

namespace tatraj::testing {

// Row-stochastic model with random rows. `spread` < 1 concentrates rows on
// a few states, which makes visit counts uneven.
inline TransitionModel random_model(std::uint64_t seed, std::size_t states = kNumCategories, int steps = 96,
                                    double spread = 1.0) {
  RandomStream rng(seed, 0);
  auto draw = [&] {
    Eigen::VectorXd v(static_cast<Eigen::Index>(states));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = std::pow(rng.uniform(), 1.0 / spread) + 1e-3;
    return Eigen::VectorXd(v / v.sum());
  };
  TransitionModel m;
  m.initial = draw();
  for (int t = 1; t < steps; ++t) {
    Eigen::MatrixXd M(static_cast<Eigen::Index>(states), static_cast<Eigen::Index>(states));
    for (Eigen::Index p = 0; p < M.rows(); ++p) M.row(p) = draw().transpose();
    m.matrices.push_back(M);
  }
  return m;
}

inline ActivitySequence constant_sequence(ActivityCategory c, int slots = 96) {
  ActivitySequence s;
  s.person_id = "p";
  s.community_id = "x";
  s.slots.assign(static_cast<std::size_t>(slots), c);
  return s;
}

// n design rows (1, s^2, z...) with `covariates` standard-normal columns.
inline std::vector<DesignRow> random_design(std::size_t n, std::size_t covariates, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> s(-1.0, 1.0);
  std::vector<DesignRow> X(n);
  for (auto& x : X) {
    const double t = s(gen);
    x.time_sq = t * t;
    for (std::size_t j = 0; j < covariates; ++j) x.covariates.push_back(z(gen));
  }
  return X;
}

// Gamma-normalization draws, kept away from the simplex boundary.
inline std::vector<Composition> draw_dirichlet(const Eigen::MatrixXd& beta, const std::vector<DesignRow>& X,
                                               std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::vector<Composition> Y;
  for (const auto& x : X) {
    const Eigen::VectorXd alpha = (beta * x.vector()).array().exp().matrix();
    Composition y(alpha.size());
    do {
      for (Eigen::Index k = 0; k < y.size(); ++k) y(k) = std::gamma_distribution<double>(alpha(k), 1.0)(gen);
      y /= y.sum();
    } while (!(y.minCoeff() > 0.0));
    Y.push_back(y);
  }
  return Y;
}

inline Eigen::MatrixXd random_beta(Eigen::Index D, Eigen::Index P, std::uint64_t seed, double scale = 0.4) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> z(0.0, scale);
  Eigen::MatrixXd b(D, P);
  for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = z(gen);
  b.col(0).array() += 1.5;
  return b;
}

// Every entry of an estimated transition row lies within 6 binomial
// standard errors (plus one count of granularity) of the truth.
inline bool within_binomial_error(const Eigen::RowVectorXd& estimate, const Eigen::RowVectorXd& truth, double visits) {
  for (Eigen::Index q = 0; q < truth.size(); ++q) {
    const double se = std::sqrt(truth(q) * (1.0 - truth(q)) / visits);
    if (std::abs(estimate(q) - truth(q)) > 6.0 * se + 1.0 / visits) return false;
  }
  return true;
}

}  // namespace tatraj::testing
