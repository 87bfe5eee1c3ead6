#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "tatraj/activity.hpp"
#include "tatraj/dirichlet.hpp"
#include "tatraj/error.hpp"
#include "tatraj/markov.hpp"
#include "tatraj/stats.hpp"

namespace tatraj {

inline constexpr std::string_view kToolVersion = "0.3.0";

// --- Configuration -------------------------------------------------------

struct PipelineConfig {
  struct Paths {
    std::filesystem::path diaries;
    std::filesystem::path covariates;
    std::filesystem::path mapping;
    std::filesystem::path output;
    std::filesystem::path truth;  // optional synthetic manifest with beta*
  } paths;
  TimeGrid grid;
  struct Markov {
    double kappa = kDefaultKappa;
    std::size_t n_sim = 10000;
    std::uint64_t seed = 20211;
    std::optional<double> epsilon;  // unset: min(1/(2 n_sim), 1e-4)
  } markov;
  struct Regression {
    double rel_tol = 1e-8;
    double grad_tol = 1e-6;
    int max_iter = 500;
    std::vector<std::string> candidates = {"diversity", "racial_segregation", "median_age", "transportation",
                                           "residential"};
    std::vector<std::string> fixed = {std::string(kTimeSquaredName)};
    double correlation_threshold = 0.75;
    double aic_tie_tolerance = 1e-2;
    double split_fraction = 0.8;
    std::uint64_t split_seed = 20212;
  } regression;
  struct Clustering {
    int k = 3;
    int restarts = 10;
    std::uint64_t seed = 20213;
    ReductionMap reduction = ReductionMap::defaults();
  } clustering;
  std::array<ActivityCategory, 3> ternary = {ActivityCategory::c05, ActivityCategory::c02, ActivityCategory::c07};

  // Raw text the config was parsed from; hashed into the run report.
  std::string source_text;

  FitOptions fit_options() const;
  // Throws ConfigError on any out-of-range value.
  void validate() const;
};

// INI-style text with [paths] [grid] [markov] [regression] [clustering]
// [reduction] [export] sections. Unknown sections or keys are errors.
// Relative paths resolve against `base_dir`.
PipelineConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
PipelineConfig load_config(const std::filesystem::path& path);

// --- Stages ------------------------------------------------------------------

struct IngestResult {
  std::vector<std::string> communities;  // sorted ids present in the diaries
  std::map<std::string, std::vector<ActivitySequence>> diaries;
  std::vector<CommunityCovariates> covariates;  // aligned with `communities`
};

IngestResult ingest(const PipelineConfig& config);

struct CommunityProfile {
  std::string community;
  TransitionModel model;
  CompositionMatrix profile;
};

std::vector<CommunityProfile> simulate_communities(const IngestResult& data, const PipelineConfig& config);

std::map<std::string, ClusterResult> cluster_communities(const IngestResult& data, const PipelineConfig& config);
std::string cluster_csv(const std::vector<ActivitySequence>& diaries, const ClusterResult& result);

// One observation per (community, step).
struct Dataset {
  std::vector<std::string> community;
  CandidateSet candidates;
  std::vector<Composition> Y;

  std::size_t size() const noexcept { return Y.size(); }
};

Dataset build_dataset(std::span<const CommunityProfile> profiles, std::span<const CommunityCovariates> covariates,
                      std::span<const std::string> fields);

struct Split {
  std::vector<std::size_t> train;  // ascending row indices
  std::vector<std::size_t> test;
};

// Stratified by `strata`: round(fraction * N) training rows in total,
// apportioned by largest remainder, each stratum shuffled with its own stream.
Split split_train_test(std::span<const std::string> strata, double fraction, std::uint64_t seed);

Dataset subset(const Dataset& data, std::span<const std::size_t> rows);

struct FitStage {
  Dataset dataset;
  Split split;
  SelectionResult selection;
  Eigen::MatrixXd correlation;
  std::vector<std::string> correlation_names;
  RegressionFit fit;
};

FitStage fit_stage(std::span<const CommunityProfile> profiles, std::span<const CommunityCovariates> covariates,
                   const PipelineConfig& config);

struct ValidationStage {
  std::vector<std::size_t> rows;     // dataset rows tested
  std::vector<Composition> observed;
  std::vector<Composition> predicted;
  TestReport report;
};

// Box's M with groups {test, predicted}: the 8 per-category vectors over the
// test rows are the observations, test rows the variables. Welch t-tests per
// category across test rows.
ValidationStage validate_stage(const FitStage& stage, const TimeGrid& grid = kDayGrid);

// Predicted 96 x 8 trajectory for one community's raw covariates.
CompositionMatrix predict_profile(const RegressionFit& fit, const CommunityCovariates& covariates,
                                  const TimeGrid& grid = kDayGrid);

// --- Synthetic fixtures -----------------------------------------------------

struct SyntheticTruth {
  std::vector<std::string> communities;
  std::vector<TransitionModel> models;
  std::vector<CommunityCovariates> covariates;
  std::vector<std::string> beta_covariates;  // regressors after Time^2
  std::optional<Eigen::MatrixXd> beta_star;  // 8 x (2 + beta_covariates)
};

// Five NYC-borough-shaped communities: Table-style socio-demographic values,
// invented built-environment shares, time-of-day chains that respond to the
// covariates. `beta_star` carries a coefficient matrix for recovery checks.
SyntheticTruth default_truth(bool with_beta_star = true);

struct SyntheticFiles {
  std::string diaries_csv;
  std::string covariates_csv;
  std::string manifest_json;
};

SyntheticFiles generate_synthetic(const SyntheticTruth& truth, std::size_t n_diaries_per_community, std::uint64_t seed,
                                  const CategoryMapping& mapping);
void write_synthetic(const SyntheticFiles& files, const std::filesystem::path& dir);

SyntheticTruth truth_from_manifest(const nlohmann::json& manifest);

// Draws Y_i ~ Dirichlet(exp(x_i . beta)) using stream (seed, i).
std::vector<Composition> sample_dirichlet_regression(const Eigen::MatrixXd& beta, std::span<const DesignRow> X,
                                                     std::uint64_t seed);
Composition sample_dirichlet(const Eigen::VectorXd& alpha, std::uint64_t seed, std::uint64_t stream);

// --- End to end ----------------------------------------------------------------

// Raised by run_all with the failing stage and the process exit code.
class StageError : public Error {
 public:
  StageError(std::string stage, int exit_code, Errc code, const std::string& message)
      : Error(code, "stage '" + stage + "': " + message), stage_(std::move(stage)), exit_code_(exit_code) {}

  const std::string& stage() const noexcept { return stage_; }
  int exit_code() const noexcept { return exit_code_; }

 private:
  std::string stage_;
  int exit_code_;
};

// 2 config, 3 parse/input, 4 fit, 5 validation.
int exit_code_for(std::string_view stage, Errc code);

// Collects outputs in memory; commit() writes them atomically with the run
// report last, so a failed run leaves nothing behind.
class OutputSet {
 public:
  void add(std::string relative_path, std::string content);
  void commit(const std::filesystem::path& dir, std::string_view last = "run_report.json") const;
  const std::map<std::string, std::string>& files() const noexcept { return files_; }

 private:
  std::map<std::string, std::string> files_;
};

struct RunReport {
  nlohmann::json json;
  OutputSet outputs;
  bool recovery_passed = true;
  double max_row_sum_error = 0.0;  // over every emitted composition row
  double min_composition_entry = 1.0;
};

// ingest -> cluster -> estimate + simulate -> correlation + selection ->
// dataset -> split -> fit -> predict -> Box's M + t-tests -> exports.
// Writes everything under config.paths.output unless `write` is false.
RunReport run_all(const PipelineConfig& config, bool write = true);

}  // namespace tatraj
