#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "tatraj/activity.hpp"

namespace tatraj {

inline constexpr double kDefaultKappa = 0.5;

// Time-inhomogeneous first-order chain over a fixed day grid.
// matrices[t](p, q) = P(state at step t+2 = q | state at step t+1 = p),
// with steps numbered from 1.
struct TransitionModel {
  Eigen::VectorXd initial;
  std::vector<Eigen::MatrixXd> matrices;
  double kappa = 0.0;

  Eigen::Index states() const noexcept { return initial.size(); }
  std::size_t steps() const noexcept { return matrices.size() + 1; }

  // Throws InvalidModel unless every distribution is non-negative and sums
  // to one within `tolerance`.
  void validate(double tolerance = 1e-12) const;
};

// Raw tallies behind an estimated model; visits(t, p) counts diaries in
// state p at step t+1 that have a successor.
struct TransitionCounts {
  Eigen::VectorXd initial;
  std::vector<Eigen::MatrixXd> transitions;

  Eigen::MatrixXd visits() const;
};

TransitionCounts count_transitions(std::span<const ActivitySequence> diaries, const TimeGrid& grid = kDayGrid);

// (counts + kappa) / (total + states * kappa); uniform when that
// denominator is zero.
Eigen::VectorXd smoothed_distribution(const Eigen::VectorXd& counts, double kappa);

TransitionModel estimate_transitions(std::span<const ActivitySequence> diaries, double kappa = kDefaultKappa,
                                     const TimeGrid& grid = kDayGrid);

// Exact marginal distribution at each step by forward propagation.
CompositionMatrix analytic_profile(const TransitionModel& model);

// State indices of one simulated day drawn from stream (seed, stream_id).
std::vector<std::size_t> simulate_states(const TransitionModel& model, std::uint64_t seed, std::uint64_t stream_id);

// Requires an 8-state model.
ActivitySequence simulate_trajectory(const TransitionModel& model, std::uint64_t seed);

// Per-step share of n simulated trajectories, before zero replacement.
// Trajectory i uses stream i of `seed`; the result does not depend on
// `threads`.
Eigen::MatrixXd simulated_shares(const TransitionModel& model, std::size_t n, std::uint64_t seed, unsigned threads = 0);

// min(1 / (2n), 1e-4).
double default_epsilon(std::size_t n_simulated);

// Simulated shares followed by zero_replace with `epsilon`, or with
// default_epsilon(n) when none is given.
CompositionMatrix simulate_profile(const TransitionModel& model, std::size_t n, std::uint64_t seed,
                                   std::optional<double> epsilon = std::nullopt, unsigned threads = 0);

// Multiplicative replacement: zeros become epsilon and the nonzero cells of
// that row shrink by (1 - zeros * epsilon). Requires epsilon in (0, 1/16).
CompositionMatrix zero_replace(const CompositionMatrix& matrix, double epsilon);

nlohmann::json model_to_json(const TransitionModel& model);
TransitionModel model_from_json(const nlohmann::json& j);

}  // namespace tatraj
