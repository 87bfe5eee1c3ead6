#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "tatraj/activity.hpp"
#include "tatraj/dirichlet.hpp"

namespace tatraj {

// --- Diary clustering ----------------------------------------------------

enum class DayState : std::uint8_t { HomeActive = 0, Sleep = 1, Out = 2 };
inline constexpr std::size_t kNumDayStates = 3;

std::string_view day_state_name(DayState s) noexcept;
std::optional<DayState> parse_day_state(std::string_view name) noexcept;

// Category -> {home-active, sleep, out}; unset entries are unmapped.
struct ReductionMap {
  std::array<std::optional<DayState>, kNumCategories> states{};

  // c02 -> sleep; c01, c03, c07 -> home; c04, c05, c06, c08 -> out.
  static ReductionMap defaults();
};

// One-hot of the reduced state per slot, slot-major: 3 * slots entries.
Eigen::VectorXd encode_diary(const ActivitySequence& sequence, const ReductionMap& reduction);

struct ClusterResult {
  std::vector<int> assignments;  // 1-based cluster per point
  std::vector<Eigen::VectorXd> centroids;
  double inertia = 0.0;
  std::vector<double> shares;
  int restart = 0;                    // restart that produced this result
  std::vector<double> inertia_trace;  // after each Lloyd assignment of that restart
};

// k-means++ seeding and Lloyd iterations to a fixpoint; the best of
// `restarts` runs by (inertia, restart index). Restart r seeds from stream r.
ClusterResult kmeans(std::span<const Eigen::VectorXd> points, int k, std::uint64_t seed, int restarts = 10);

// --- Covariate screening ---------------------------------------------------

// Pearson correlation of the columns of `data` (rows are observations).
// Throws ZeroVariance for a constant column.
Eigen::MatrixXd column_correlation(const Eigen::MatrixXd& data, std::span<const std::string> names = {});

// Requires at least three communities.
Eigen::MatrixXd correlation_matrix(std::span<const CommunityCovariates> covariates, std::span<const std::string> fields);

std::string correlation_csv(const Eigen::MatrixXd& corr, std::span<const std::string> names);

// Regression candidates: one row per observation.
struct CandidateSet {
  std::vector<int> steps;           // time step of each row (for the Time^2 regressor)
  std::vector<std::string> names;   // covariate candidates
  Eigen::MatrixXd values;           // rows x names, raw (unstandardized)
};

inline constexpr std::string_view kTimeSquaredName = "Time^2";

struct SelectionStep {
  std::string first;
  std::string second;
  double correlation = 0.0;
  double aic_without_first = 0.0;   // +inf when that fit was infeasible or skipped
  double aic_without_second = 0.0;
  std::string dropped;
  bool tie = false;
};

struct SelectionResult {
  std::vector<std::string> kept;  // includes Time^2, candidate order otherwise
  std::vector<SelectionStep> steps;
};

// Removes one member of the most correlated pair while any |r| exceeds
// `threshold`, choosing the removal whose refit has the lower AIC. Fixed
// names are never removed. AIC differences within `tie_tolerance` drop the
// member listed later.
SelectionResult select_variables(const CandidateSet& candidates, std::span<const Composition> Y, double threshold,
                                 std::span<const std::string> fixed, const FitOptions& options = {},
                                 double tie_tolerance = 1e-2, const TimeGrid& grid = kDayGrid);

// Design rows for a covariate subset, z-scored with moments of these rows.
std::vector<DesignRow> design_for(const CandidateSet& candidates, std::span<const std::string> covariates,
                                  Standardization* standardization_out = nullptr, const TimeGrid& grid = kDayGrid);

// --- Two-group validation ----------------------------------------------------

struct BoxMResult {
  double M = 0.0;
  double chi2 = 0.0;
  long long df = 0;
  double p = 1.0;
  double correction = 0.0;  // Box's c
  bool ridge_applied = false;
  double ridge = 0.0;
  int dimension = 0;
};

// Groups are observations x variables. With a singular covariance, every
// log-determinant uses S + 1e-8 I and the result says so.
BoxMResult boxs_m_test(std::span<const Eigen::MatrixXd> groups);
BoxMResult boxs_m_test(const Eigen::MatrixXd& group_a, const Eigen::MatrixXd& group_b);

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
  double mean_a = 0.0;
  double mean_b = 0.0;
};

WelchResult welch_t_test(std::span<const double> a, std::span<const double> b);

// Column-wise Welch tests; columns are categories, rows observations.
std::vector<WelchResult> t_test_per_component(const Eigen::MatrixXd& group_a, const Eigen::MatrixXd& group_b);

struct TestReport {
  BoxMResult boxm;
  std::vector<WelchResult> ttests;
};

nlohmann::json test_report_json(const TestReport& report);

// --- Ternary export ----------------------------------------------------------

struct TernaryPoint {
  double x = 0.0;
  double y = 0.0;
  std::array<double, 3> shares{};  // renormalized (a, b, c)
};

// Vertex a at (0,0), b at (1,0), c at (1/2, sqrt(3)/2).
std::vector<TernaryPoint> ternary_coordinates(std::span<const Composition> compositions,
                                              const std::array<ActivityCategory, 3>& triple);
std::array<double, 3> ternary_to_shares(double x, double y);

std::string ternary_csv(std::span<const TernaryPoint> points, const std::array<ActivityCategory, 3>& triple);

}  // namespace tatraj
