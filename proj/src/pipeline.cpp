#include "tatraj/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "tatraj/io.hpp"
#include "tatraj/rng.hpp"

namespace tatraj {

namespace fs = std::filesystem;

// --- Configuration -------------------------------------------------------

FitOptions PipelineConfig::fit_options() const {
  FitOptions o;
  o.rel_tol = regression.rel_tol;
  o.grad_tol = regression.grad_tol;
  o.max_iter = regression.max_iter;
  return o;
}

void PipelineConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(Errc::ConfigError, what); };
  if (paths.diaries.empty()) fail("[paths] diaries is required");
  if (paths.covariates.empty()) fail("[paths] covariates is required");
  if (paths.mapping.empty()) fail("[paths] mapping is required");
  if (!grid.valid()) fail("[grid] steps * slot_minutes must equal 1440");
  if (!(markov.kappa >= 0.0) || !std::isfinite(markov.kappa)) fail("[markov] kappa must be >= 0");
  if (markov.n_sim < 1) fail("[markov] n_sim must be >= 1");
  if (markov.epsilon && !(*markov.epsilon > 0.0 && *markov.epsilon < 1.0 / 16.0)) fail("[markov] epsilon must be in (0, 1/16)");
  if (!(regression.rel_tol > 0.0) || !(regression.grad_tol > 0.0)) fail("[regression] tolerances must be > 0");
  if (regression.max_iter < 1) fail("[regression] max_iter must be >= 1");
  if (!(regression.correlation_threshold > 0.0 && regression.correlation_threshold < 1.0)) {
    fail("[regression] correlation_threshold must be in (0,1)");
  }
  if (!(regression.split_fraction > 0.0 && regression.split_fraction < 1.0)) fail("[regression] split_fraction must be in (0,1)");
  if (!(regression.aic_tie_tolerance >= 0.0)) fail("[regression] aic_tie_tolerance must be >= 0");
  for (const auto& c : regression.candidates) {
    if (std::find(kCovariateFields.begin(), kCovariateFields.end(), c) == kCovariateFields.end()) {
      fail("[regression] unknown candidate covariate '" + c + "'");
    }
  }
  std::set<std::string> unique(regression.candidates.begin(), regression.candidates.end());
  if (unique.size() != regression.candidates.size()) fail("[regression] duplicate candidate covariate");
  if (clustering.k < 1) fail("[clustering] k must be >= 1");
  if (clustering.restarts < 1) fail("[clustering] restarts must be >= 1");
  for (std::size_t i = 0; i < kNumCategories; ++i) {
    if (!clustering.reduction.states[i]) fail("[reduction] category " + std::string(category_code(category_at(i))) + " is unmapped");
  }
}

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

template <typename T>
T parse_value(const std::string& section, const std::string& key, const std::string& value) {
  std::istringstream in(value);
  T out{};
  in >> out;
  if (!in || !(in >> std::ws).eof()) {
    throw Error(Errc::ConfigError, "[" + section + "] " + key + ": cannot parse '" + value + "'");
  }
  return out;
}

fs::path resolve(const fs::path& base, const std::string& value) {
  const fs::path p(value);
  return p.is_absolute() || base.empty() ? p : base / p;
}

}  // namespace

PipelineConfig parse_config(std::string_view text, const fs::path& base_dir) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in{std::string(text)};
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(Errc::ConfigError, std::string("config syntax: ") + e.what());
  }

  PipelineConfig c;
  c.source_text = std::string(text);
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw Error(Errc::ConfigError, "key '" + section + "' outside of any section");
    }
    for (const auto& [key, node] : body) {
      const std::string v = node.get_value<std::string>();
      auto unknown = [&] { throw Error(Errc::ConfigError, "unknown key '" + key + "' in [" + section + "]"); };
      if (section == "paths") {
        if (key == "diaries") c.paths.diaries = resolve(base_dir, v);
        else if (key == "covariates") c.paths.covariates = resolve(base_dir, v);
        else if (key == "mapping") c.paths.mapping = resolve(base_dir, v);
        else if (key == "output") c.paths.output = resolve(base_dir, v);
        else if (key == "truth") c.paths.truth = v.empty() ? fs::path{} : resolve(base_dir, v);
        else unknown();
      } else if (section == "grid") {
        if (key == "steps") c.grid.steps = parse_value<int>(section, key, v);
        else if (key == "slot_minutes") c.grid.slot_minutes = parse_value<int>(section, key, v);
        else unknown();
      } else if (section == "markov") {
        if (key == "kappa") c.markov.kappa = parse_value<double>(section, key, v);
        else if (key == "n_sim") c.markov.n_sim = parse_value<std::size_t>(section, key, v);
        else if (key == "seed") c.markov.seed = parse_value<std::uint64_t>(section, key, v);
        else if (key == "epsilon") {
          if (v == "auto") c.markov.epsilon.reset();
          else c.markov.epsilon = parse_value<double>(section, key, v);
        } else unknown();
      } else if (section == "regression") {
        if (key == "rel_tol") c.regression.rel_tol = parse_value<double>(section, key, v);
        else if (key == "grad_tol") c.regression.grad_tol = parse_value<double>(section, key, v);
        else if (key == "max_iter") c.regression.max_iter = parse_value<int>(section, key, v);
        else if (key == "candidates") c.regression.candidates = split_list(v);
        else if (key == "fixed") c.regression.fixed = split_list(v);
        else if (key == "correlation_threshold") c.regression.correlation_threshold = parse_value<double>(section, key, v);
        else if (key == "aic_tie_tolerance") c.regression.aic_tie_tolerance = parse_value<double>(section, key, v);
        else if (key == "split_fraction") c.regression.split_fraction = parse_value<double>(section, key, v);
        else if (key == "split_seed") c.regression.split_seed = parse_value<std::uint64_t>(section, key, v);
        else unknown();
      } else if (section == "clustering") {
        if (key == "k") c.clustering.k = parse_value<int>(section, key, v);
        else if (key == "restarts") c.clustering.restarts = parse_value<int>(section, key, v);
        else if (key == "seed") c.clustering.seed = parse_value<std::uint64_t>(section, key, v);
        else unknown();
      } else if (section == "reduction") {
        auto cat = parse_category(key);
        if (!cat) unknown();
        auto state = parse_day_state(v);
        if (!state) throw Error(Errc::ConfigError, "[reduction] " + key + ": expected home, sleep or out, got '" + v + "'");
        c.clustering.reduction.states[index_of(*cat)] = *state;
      } else if (section == "export") {
        if (key == "ternary") {
          const auto parts = split_list(v);
          if (parts.size() != 3) throw Error(Errc::ConfigError, "[export] ternary needs three categories");
          for (std::size_t i = 0; i < 3; ++i) {
            auto cat = parse_category(parts[i]);
            if (!cat) throw Error(Errc::ConfigError, "[export] unknown category '" + parts[i] + "'");
            c.ternary[i] = *cat;
          }
        } else unknown();
      } else {
        throw Error(Errc::ConfigError, "unknown section [" + section + "]");
      }
    }
  }
  c.validate();
  return c;
}

PipelineConfig load_config(const fs::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const Error& e) {
    throw Error(Errc::ConfigError, e.what());
  }
  return parse_config(text, path.parent_path());
}

// --- Stages ------------------------------------------------------------------

IngestResult ingest(const PipelineConfig& config) {
  const CategoryMapping mapping = CategoryMapping::load(config.paths.mapping);
  const auto rows = parse_diary_csv(read_text_file(config.paths.diaries), config.paths.diaries.string());
  if (rows.empty()) throw Error(Errc::EmptyInput, config.paths.diaries.string() + ": no diary rows");
  auto sequences = sequences_from_rows(rows, mapping, config.grid);
  const auto covariates = parse_covariates_csv(read_text_file(config.paths.covariates), config.paths.covariates.string());

  IngestResult out;
  for (auto& seq : sequences) {
    if (!out.diaries.contains(seq.community_id)) out.communities.push_back(seq.community_id);
    out.diaries[seq.community_id].push_back(std::move(seq));
  }
  std::sort(out.communities.begin(), out.communities.end());
  for (const auto& id : out.communities) {
    auto it = std::find_if(covariates.begin(), covariates.end(), [&](const auto& c) { return c.community_id == id; });
    if (it == covariates.end()) {
      throw Error(Errc::CommunityMismatch, "community '" + id + "' appears in the diaries but not in " +
                                               config.paths.covariates.string());
    }
    out.covariates.push_back(*it);
  }
  return out;
}

std::vector<CommunityProfile> simulate_communities(const IngestResult& data, const PipelineConfig& config) {
  std::vector<CommunityProfile> out;
  for (std::size_t i = 0; i < data.communities.size(); ++i) {
    const auto& id = data.communities[i];
    TransitionModel model = estimate_transitions(data.diaries.at(id), config.markov.kappa, config.grid);
    CompositionMatrix profile =
        simulate_profile(model, config.markov.n_sim, derive_seed(config.markov.seed, i), config.markov.epsilon);
    out.push_back({id, std::move(model), std::move(profile)});
  }
  return out;
}

std::map<std::string, ClusterResult> cluster_communities(const IngestResult& data, const PipelineConfig& config) {
  std::map<std::string, ClusterResult> out;
  for (std::size_t i = 0; i < data.communities.size(); ++i) {
    const auto& id = data.communities[i];
    std::vector<Eigen::VectorXd> points;
    for (const auto& d : data.diaries.at(id)) points.push_back(encode_diary(d, config.clustering.reduction));
    out.emplace(id, kmeans(points, config.clustering.k, derive_seed(config.clustering.seed, i), config.clustering.restarts));
  }
  return out;
}

std::string cluster_csv(const std::vector<ActivitySequence>& diaries, const ClusterResult& result) {
  std::string out = "diary_id,cluster\n";
  for (std::size_t i = 0; i < diaries.size(); ++i) {
    out += diaries[i].person_id + "," + std::to_string(result.assignments[i]) + "\n";
  }
  out += "shares,";
  for (std::size_t k = 0; k < result.shares.size(); ++k) {
    if (k) out += ";";
    out += format_double(result.shares[k]);
  }
  out += "\n";
  return out;
}

Dataset build_dataset(std::span<const CommunityProfile> profiles, std::span<const CommunityCovariates> covariates,
                      std::span<const std::string> fields) {
  Dataset d;
  d.candidates.names.assign(fields.begin(), fields.end());
  std::size_t rows = 0;
  for (const auto& p : profiles) rows += static_cast<std::size_t>(p.profile.steps());
  d.candidates.values.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(fields.size()));

  Eigen::Index r = 0;
  for (const auto& p : profiles) {
    auto cov = std::find_if(covariates.begin(), covariates.end(), [&](const auto& c) { return c.community_id == p.community; });
    if (cov == covariates.end()) throw Error(Errc::MissingCovariate, "no covariates for community '" + p.community + "'");
    std::vector<double> raw;
    for (const auto& f : fields) raw.push_back(cov->at(f));
    for (Eigen::Index t = 0; t < p.profile.steps(); ++t, ++r) {
      d.community.push_back(p.community);
      d.candidates.steps.push_back(static_cast<int>(t) + 1);
      for (std::size_t j = 0; j < raw.size(); ++j) d.candidates.values(r, static_cast<Eigen::Index>(j)) = raw[j];
      d.Y.push_back(p.profile.values().row(t).transpose());
    }
  }
  return d;
}

Split split_train_test(std::span<const std::string> strata, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw Error(Errc::ConfigError, "split fraction must be in (0,1)");
  std::vector<std::string> keys;
  std::map<std::string, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < strata.size(); ++i) {
    if (!members.contains(strata[i])) keys.push_back(strata[i]);
    members[strata[i]].push_back(i);
  }

  // Largest-remainder apportionment of round(fraction * N).
  const auto total = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(strata.size())));
  std::vector<std::size_t> quota(keys.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t k = 0; k < keys.size(); ++k) {
    const double exact = fraction * static_cast<double>(members[keys[k]].size());
    quota[k] = static_cast<std::size_t>(std::floor(exact));
    assigned += quota[k];
    remainders.emplace_back(exact - std::floor(exact), k);
  }
  std::stable_sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; assigned < total && i < remainders.size(); ++i, ++assigned) ++quota[remainders[i].second];

  Split split;
  for (std::size_t k = 0; k < keys.size(); ++k) {
    auto idx = members[keys[k]];
    RandomStream rng(seed, k);
    for (std::size_t i = idx.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(i));
      std::swap(idx[i - 1], idx[std::min(j, i - 1)]);
    }
    split.train.insert(split.train.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(quota[k]));
    split.test.insert(split.test.end(), idx.begin() + static_cast<std::ptrdiff_t>(quota[k]), idx.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

Dataset subset(const Dataset& data, std::span<const std::size_t> rows) {
  Dataset out;
  out.candidates.names = data.candidates.names;
  out.candidates.values.resize(static_cast<Eigen::Index>(rows.size()), data.candidates.values.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.community.push_back(data.community.at(rows[i]));
    out.candidates.steps.push_back(data.candidates.steps.at(rows[i]));
    out.candidates.values.row(static_cast<Eigen::Index>(i)) = data.candidates.values.row(static_cast<Eigen::Index>(rows[i]));
    out.Y.push_back(data.Y.at(rows[i]));
  }
  return out;
}

namespace {

std::vector<std::string> kept_covariates(const SelectionResult& selection) {
  std::vector<std::string> out;
  for (const auto& k : selection.kept) {
    if (k != kTimeSquaredName) out.push_back(k);
  }
  return out;
}

// Design rows for `data` z-scored with an existing standardization.
std::vector<DesignRow> design_with(const Dataset& data, const Standardization& st, const TimeGrid& grid) {
  std::vector<Eigen::Index> cols;
  for (const auto& name : st.names) {
    auto it = std::find(data.candidates.names.begin(), data.candidates.names.end(), name);
    if (it == data.candidates.names.end()) throw Error(Errc::MissingCovariate, "dataset lacks '" + name + "'");
    cols.push_back(static_cast<Eigen::Index>(it - data.candidates.names.begin()));
  }
  std::vector<DesignRow> rows;
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::vector<double> raw;
    for (auto c : cols) raw.push_back(data.candidates.values(static_cast<Eigen::Index>(i), c));
    rows.push_back(make_design_row(data.candidates.steps[i], raw, st, grid));
  }
  return rows;
}

}  // namespace

FitStage fit_stage(std::span<const CommunityProfile> profiles, std::span<const CommunityCovariates> covariates,
                   const PipelineConfig& config) {
  FitStage stage;
  // Correlation table over every non-constant covariate field.
  if (covariates.size() >= 3) {
    for (auto f : kCovariateFields) {
      const std::string name(f);
      double lo = covariates[0].at(name);
      double hi = lo;
      for (const auto& c : covariates) {
        lo = std::min(lo, c.at(name));
        hi = std::max(hi, c.at(name));
      }
      if (hi > lo) stage.correlation_names.push_back(name);
    }
    stage.correlation = correlation_matrix(covariates, stage.correlation_names);
  }

  stage.dataset = build_dataset(profiles, covariates, config.regression.candidates);
  const FitOptions options = config.fit_options();
  stage.selection = select_variables(stage.dataset.candidates, stage.dataset.Y, config.regression.correlation_threshold,
                                     config.regression.fixed, options, config.regression.aic_tie_tolerance, config.grid);

  stage.split = split_train_test(stage.dataset.community, config.regression.split_fraction, config.regression.split_seed);
  const Dataset train = subset(stage.dataset, stage.split.train);
  Standardization st;
  const auto covs = kept_covariates(stage.selection);
  const auto X = design_for(train.candidates, covs, &st, config.grid);
  stage.fit = fit_regression(X, train.Y, options, std::move(st));
  return stage;
}

ValidationStage validate_stage(const FitStage& stage, const TimeGrid& grid) {
  ValidationStage v;
  v.rows = stage.split.test;
  const Dataset test = subset(stage.dataset, v.rows);
  const auto X = design_with(test, stage.fit.standardization, grid);
  const auto n = static_cast<Eigen::Index>(X.size());
  const Eigen::Index D = stage.fit.beta.rows();
  Eigen::MatrixXd observed(n, D);
  Eigen::MatrixXd predicted(n, D);
  for (Eigen::Index i = 0; i < n; ++i) {
    auto [params, mu] = predict(stage.fit, X[static_cast<std::size_t>(i)]);
    v.observed.push_back(test.Y[static_cast<std::size_t>(i)]);
    v.predicted.push_back(mu);
    observed.row(i) = v.observed.back().transpose();
    predicted.row(i) = mu.transpose();
  }
  v.report.boxm = boxs_m_test(Eigen::MatrixXd(observed.transpose()), Eigen::MatrixXd(predicted.transpose()));
  v.report.ttests = t_test_per_component(observed, predicted);
  return v;
}

CompositionMatrix predict_profile(const RegressionFit& fit, const CommunityCovariates& covariates, const TimeGrid& grid) {
  std::vector<double> raw;
  for (const auto& name : fit.standardization.names) raw.push_back(covariates.at(name));
  Eigen::MatrixXd out(grid.steps, fit.beta.rows());
  for (int t = 1; t <= grid.steps; ++t) {
    out.row(t - 1) = predict(fit, make_design_row(t, raw, fit.standardization, grid)).second.transpose();
  }
  return CompositionMatrix(std::move(out));
}

// --- Synthetic fixtures -----------------------------------------------------

namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double bump(double h, double mu, double sigma) {
  double d = std::abs(h - mu);
  d = std::min(d, 24.0 - d);
  return std::exp(-0.5 * (d / sigma) * (d / sigma));
}

// Time-of-day activity propensities modulated by z-scored covariates
// (diversity, median_age, transportation, residential).
Eigen::VectorXd day_profile(double hour, const std::array<double, 4>& z) {
  const double night = logistic(-(hour - 6.5) / 0.5) + logistic((hour - 23.0) / 0.5);
  const double day = 1.0 - night;
  const double work = logistic((hour - 8.5) / 0.6) - logistic((hour - 17.5) / 0.6);
  const double school = logistic((hour - 8.0) / 0.5) - logistic((hour - 15.0) / 0.5);
  const auto [z_div, z_age, z_trans, z_res] = z;
  Eigen::VectorXd w(static_cast<Eigen::Index>(kNumCategories));
  w(0) = 0.006;
  w(1) = (0.04 + 0.92 * night + 0.10 * bump(hour, 7.5, 0.7) + 0.12 * bump(hour, 12.5, 0.7) + 0.15 * bump(hour, 18.75, 0.8)) *
         std::exp(-0.05 * z_trans);
  w(2) = 0.10 * day * std::exp(-0.10 * z_res);
  w(3) = 0.06 * bump(hour, 11.0, 2.5) + 0.04 * bump(hour, 16.0, 2.0) + 0.002;
  w(4) = (0.45 * work + 0.003) * std::exp(0.15 * z_trans);
  w(5) = (0.08 * school + 0.002) * std::exp(0.20 * z_div - 0.20 * z_age);
  w(6) = (0.03 + 0.30 * bump(hour, 20.5, 1.8) * day + 0.05 * day) * std::exp(0.10 * z_res);
  w(7) = 0.10 * bump(hour, 8.0, 0.8) + 0.10 * bump(hour, 17.8, 0.9) + 0.02 * day + 0.002;
  return w / w.sum();
}

TransitionModel schedule_model(const std::array<double, 4>& z, const TimeGrid& grid, double persistence) {
  auto target = [&](int step) {
    const double hour = (static_cast<double>(step) - 0.5) * grid.slot_minutes / 60.0;
    return day_profile(hour, z);
  };
  TransitionModel m;
  m.kappa = 0.0;
  m.initial = target(1);
  const auto S = static_cast<Eigen::Index>(kNumCategories);
  for (int t = 1; t < grid.steps; ++t) {
    const Eigen::VectorXd next = target(t + 1);
    Eigen::MatrixXd M = (1.0 - persistence) * Eigen::VectorXd::Ones(S) * next.transpose();
    M.diagonal().array() += persistence;
    for (Eigen::Index p = 0; p < S; ++p) M.row(p) /= M.row(p).sum();
    m.matrices.push_back(std::move(M));
  }
  return m;
}

}  // namespace

SyntheticTruth default_truth(bool with_beta_star) {
  struct Row {
    const char* id;
    std::array<double, kCovariateFields.size()> v;
  };
  // population_density, diversity, racial_segregation, median_age,
  // male_female_ratio, disabilities, household_median_income, unemployment,
  // education, transportation, institutional, residential, mercantile, business
  static const std::array<Row, 5> rows = {{
      {"bronx", {34090.12, 59.34, 0.26, 34, 89, 15.23, 40088, 5.3, 72.76, 43.9, 0.11, 0.74, 0.09, 0.06}},
      {"kings", {36573.40, 72.57, 0.43, 35, 90, 9.98, 60231, 4.0, 82.38, 42.0, 0.08, 0.77, 0.09, 0.06}},
      {"manhattan", {71488.69, 68.31, 0.33, 38, 90, 10.28, 86553, 3.4, 87.28, 31.4, 0.09, 0.69, 0.10, 0.12}},
      {"queens", {21075.68, 76.39, 0.36, 39, 94, 9.61, 68666, 3.4, 82.02, 43.7, 0.11, 0.73, 0.09, 0.07}},
      {"richmond", {8135.86, 56.54, 0.29, 40, 94, 9.83, 82783, 3.8, 88.75, 43.6, 0.14, 0.71, 0.08, 0.07}},
  }};

  SyntheticTruth truth;
  for (const auto& r : rows) {
    CommunityCovariates c;
    c.community_id = r.id;
    for (std::size_t f = 0; f < kCovariateFields.size(); ++f) c.values.emplace(std::string(kCovariateFields[f]), r.v[f]);
    truth.communities.push_back(r.id);
    truth.covariates.push_back(std::move(c));
  }

  const std::array<std::string, 4> drivers = {"diversity", "median_age", "transportation", "residential"};
  std::array<double, 4> mean{};
  std::array<double, 4> sd{};
  for (std::size_t j = 0; j < drivers.size(); ++j) {
    for (const auto& c : truth.covariates) mean[j] += c.at(drivers[j]) / 5.0;
    for (const auto& c : truth.covariates) sd[j] += (c.at(drivers[j]) - mean[j]) * (c.at(drivers[j]) - mean[j]) / 4.0;
    sd[j] = std::sqrt(sd[j]);
  }
  for (const auto& c : truth.covariates) {
    std::array<double, 4> z{};
    for (std::size_t j = 0; j < drivers.size(); ++j) z[j] = (c.at(drivers[j]) - mean[j]) / sd[j];
    truth.models.push_back(schedule_model(z, kDayGrid, 0.8));
  }

  if (with_beta_star) {
    truth.beta_covariates = {drivers.begin(), drivers.end()};
    Eigen::MatrixXd b(8, 6);
    // Rows c01..c08; columns (Intercept), Time^2, diversity, median_age,
    // transportation, residential.
    b << -0.8623, -0.1853, -0.0224, -0.0879, -0.0751, 0.0654,  //
        0.3345, 1.6110, 0.1783, -0.1210, -0.1262, -0.4644,    //
        0.7421, -0.6456, 0.1126, -0.1763, -0.1197, -0.3727,   //
        0.4401, -0.5734, -0.1434, 0.1417, -0.0117, -0.0581,   //
        1.6749, -0.6598, 0.1274, -0.2325, 0.3596, -0.3138,    //
        -0.4812, -0.3473, 0.3271, -0.3946, -0.0636, -0.7864,  //
        1.7993, -0.4113, -0.0078, 0.1722, 0.0237, 0.3466,     //
        0.5554, -0.6582, 0.2102, -0.2141, -0.0086, -0.4107;
    truth.beta_star = b;
  }
  return truth;
}

SyntheticFiles generate_synthetic(const SyntheticTruth& truth, std::size_t n_diaries_per_community, std::uint64_t seed,
                                  const CategoryMapping& mapping) {
  if (truth.models.size() != truth.communities.size() || truth.covariates.size() != truth.communities.size()) {
    throw Error(Errc::InvalidModel, "truth needs one model and one covariate row per community");
  }
  for (const auto& m : truth.models) {
    m.validate(1e-9);
    if (m.states() != static_cast<Eigen::Index>(kNumCategories) || m.steps() != static_cast<std::size_t>(kDayGrid.steps)) {
      throw Error(Errc::InvalidModel, "truth models must have 8 states and 96 steps");
    }
  }

  std::array<std::vector<std::string>, kNumCategories> codes;
  for (const auto& [raw, cat] : mapping.entries()) codes[index_of(cat)].push_back(raw);
  for (std::size_t c = 0; c < kNumCategories; ++c) {
    if (codes[c].empty()) codes[c].push_back(std::string(category_code(category_at(c))));
  }

  SyntheticFiles files;
  files.diaries_csv = "person_id,community_id,start_min,end_min,raw_code\n";
  for (std::size_t ci = 0; ci < truth.communities.size(); ++ci) {
    const auto& id = truth.communities[ci];
    const std::uint64_t community_seed = derive_seed(seed, ci);
    for (std::size_t j = 0; j < n_diaries_per_community; ++j) {
      ActivitySequence seq;
      for (auto s : simulate_states(truth.models[ci], community_seed, j)) seq.slots.push_back(category_at(s));
      char pid[32];
      std::snprintf(pid, sizeof pid, "%s-%04zu", id.c_str(), j + 1);
      RandomStream pick(derive_seed(community_seed, 0xC0DE), j);
      for (const auto& e : sequence_to_events(seq)) {
        const auto& options = codes[index_of(e.category)];
        const auto& raw = options[static_cast<std::size_t>(pick.uniform() * static_cast<double>(options.size())) % options.size()];
        files.diaries_csv += std::string(pid) + "," + id + "," + std::to_string(e.start) + "," + std::to_string(e.end) + "," +
                             raw + "\n";
      }
    }
  }
  files.covariates_csv = covariates_csv(truth.covariates);

  nlohmann::json manifest;
  manifest["generator"] = "tatraj synth";
  manifest["version"] = kToolVersion;
  manifest["seed"] = seed;
  manifest["n_diaries_per_community"] = n_diaries_per_community;
  nlohmann::json communities = nlohmann::json::array();
  for (std::size_t ci = 0; ci < truth.communities.size(); ++ci) {
    nlohmann::json cov = nlohmann::json::object();
    for (auto f : kCovariateFields) cov[std::string(f)] = truth.covariates[ci].at(f);
    communities.push_back({{"id", truth.communities[ci]}, {"covariates", cov}, {"model", model_to_json(truth.models[ci])}});
  }
  manifest["communities"] = std::move(communities);
  if (truth.beta_star) {
    nlohmann::json beta = nlohmann::json::array();
    for (Eigen::Index r = 0; r < truth.beta_star->rows(); ++r) {
      std::vector<double> row;
      for (Eigen::Index c = 0; c < truth.beta_star->cols(); ++c) row.push_back((*truth.beta_star)(r, c));
      beta.push_back(row);
    }
    manifest["beta_star"] = {{"covariates", truth.beta_covariates}, {"beta", beta}};
  }
  files.manifest_json = manifest.dump(1) + "\n";
  return files;
}

void write_synthetic(const SyntheticFiles& files, const fs::path& dir) {
  write_file_atomic(dir / "diaries.csv", files.diaries_csv);
  write_file_atomic(dir / "covariates.csv", files.covariates_csv);
  write_file_atomic(dir / "truth.json", files.manifest_json);
}

SyntheticTruth truth_from_manifest(const nlohmann::json& manifest) {
  SyntheticTruth truth;
  try {
    for (const auto& c : manifest.at("communities")) {
      truth.communities.push_back(c.at("id").get<std::string>());
      CommunityCovariates cov;
      cov.community_id = truth.communities.back();
      for (const auto& [k, v] : c.at("covariates").items()) cov.values.emplace(k, v.get<double>());
      truth.covariates.push_back(std::move(cov));
      truth.models.push_back(model_from_json(c.at("model")));
    }
    if (manifest.contains("beta_star")) {
      const auto& bs = manifest.at("beta_star");
      truth.beta_covariates = bs.at("covariates").get<std::vector<std::string>>();
      const auto rows = bs.at("beta").get<std::vector<std::vector<double>>>();
      Eigen::MatrixXd b(static_cast<Eigen::Index>(rows.size()), rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0].size()));
      for (std::size_t r = 0; r < rows.size(); ++r) {
        if (static_cast<Eigen::Index>(rows[r].size()) != b.cols()) throw Error(Errc::ParseError, "ragged beta_star");
        for (std::size_t c = 0; c < rows[r].size(); ++c) b(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
      }
      truth.beta_star = b;
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ParseError, std::string("truth manifest: ") + e.what());
  }
  return truth;
}

Composition sample_dirichlet(const Eigen::VectorXd& alpha, std::uint64_t seed, std::uint64_t stream) {
  RandomStream rng(seed, stream);
  for (int attempt = 0; attempt < 64; ++attempt) {
    Composition y(alpha.size());
    for (Eigen::Index k = 0; k < alpha.size(); ++k) {
      std::gamma_distribution<double> gamma(alpha(k), 1.0);
      y(k) = gamma(rng.engine());
    }
    const double total = y.sum();
    y /= total;
    if (total > 0.0 && std::isfinite(total) && y.minCoeff() > 0.0 && y.maxCoeff() < 1.0) return y;
  }
  throw Error(Errc::NonInteriorY, "could not draw an interior Dirichlet sample");
}

std::vector<Composition> sample_dirichlet_regression(const Eigen::MatrixXd& beta, std::span<const DesignRow> X,
                                                     std::uint64_t seed) {
  std::vector<Composition> Y;
  Y.reserve(X.size());
  for (std::size_t i = 0; i < X.size(); ++i) {
    const Eigen::VectorXd alpha = (beta * X[i].vector()).array().exp().matrix();
    Y.push_back(sample_dirichlet(alpha, seed, i));
  }
  return Y;
}

// --- End to end ----------------------------------------------------------------

int exit_code_for(std::string_view stage, Errc code) {
  switch (code) {
    case Errc::ConfigError:
    case Errc::EpsilonOutOfRange:
    case Errc::InvalidN:
      return 2;
    case Errc::ParseError:
    case Errc::IOError:
    case Errc::EmptyInput:
    case Errc::UnknownRawCode:
    case Errc::CoverageGap:
    case Errc::OverlapError:
    case Errc::InvalidEvent:
    case Errc::CommunityMismatch:
    case Errc::MissingCovariate:
      return 3;
    default:
      break;
  }
  if (stage == "config") return 2;
  if (stage == "ingest") return 3;
  if (stage == "select" || stage == "fit") return 4;
  return 5;
}

void OutputSet::add(std::string relative_path, std::string content) { files_[std::move(relative_path)] = std::move(content); }

void OutputSet::commit(const fs::path& dir, std::string_view last) const {
  for (const auto& [path, content] : files_) {
    if (path != last) write_file_atomic(dir / path, content);
  }
  auto it = files_.find(std::string(last));
  if (it != files_.end()) write_file_atomic(dir / it->first, it->second);
}

namespace {

template <typename F>
auto stage(const std::string& name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(name, exit_code_for(name, e.code()), e.code(), e.what());
  } catch (const std::exception& e) {
    throw StageError(name, exit_code_for(name, Errc::IOError) == 3 ? 5 : 5, Errc::IOError, e.what());
  }
}

void track_hygiene(RunReport& report, const Eigen::MatrixXd& rows, const std::string& what) {
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    const double err = std::abs(rows.row(r).sum() - 1.0);
    const double lo = rows.row(r).minCoeff();
    report.max_row_sum_error = std::max(report.max_row_sum_error, err);
    report.min_composition_entry = std::min(report.min_composition_entry, lo);
    if (err > 1e-9 || !(lo > 0.0)) {
      throw Error(Errc::OutsideSimplex, what + " row " + std::to_string(r + 1) + " is not a strictly positive composition");
    }
  }
}

Eigen::MatrixXd stack(std::span<const Composition> rows) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), rows.empty() ? 0 : rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  return m;
}

}  // namespace

RunReport run_all(const PipelineConfig& config, bool write) {
  stage("config", [&] {
    config.validate();
    if (write && config.paths.output.empty()) throw Error(Errc::ConfigError, "[paths] output is required");
    return 0;
  });

  RunReport report;
  auto& out = report.outputs;
  nlohmann::json& j = report.json;
  j["tool"] = "tatraj";
  j["version"] = kToolVersion;
  j["config_hash"] = fnv1a_hex(config.source_text);
  j["seeds"] = {{"markov", config.markov.seed}, {"split", config.regression.split_seed}, {"clustering", config.clustering.seed}};

  const IngestResult data = stage("ingest", [&] { return ingest(config); });

  const auto clusters = stage("cluster", [&] { return cluster_communities(data, config); });
  const auto profiles = stage("simulate", [&] { return simulate_communities(data, config); });

  nlohmann::json communities = nlohmann::json::array();
  stage("simulate", [&] {
    for (const auto& p : profiles) {
      track_hygiene(report, p.profile.values(), "profile of " + p.community);
      out.add("profiles/" + p.community + ".csv", composition_csv(p.profile));
      out.add("models/" + p.community + ".json", model_to_json(p.model).dump(1) + "\n");
      std::vector<Composition> rows;
      for (Eigen::Index t = 0; t < p.profile.steps(); ++t) rows.push_back(p.profile.values().row(t).transpose());
      out.add("ternary/" + p.community + ".csv", ternary_csv(ternary_coordinates(rows, config.ternary), config.ternary));
      const auto& cl = clusters.at(p.community);
      out.add("clusters/" + p.community + ".csv", cluster_csv(data.diaries.at(p.community), cl));
      communities.push_back({{"id", p.community},
                             {"n_diaries", data.diaries.at(p.community).size()},
                             {"profile", "profiles/" + p.community + ".csv"},
                             {"model", "models/" + p.community + ".json"},
                             {"ternary", "ternary/" + p.community + ".csv"},
                             {"clusters", "clusters/" + p.community + ".csv"},
                             {"cluster_shares", cl.shares},
                             {"cluster_inertia", cl.inertia}});
    }
    return 0;
  });

  const FitStage fitted = stage("fit", [&] { return fit_stage(profiles, data.covariates, config); });
  if (!fitted.correlation_names.empty()) {
    out.add("correlation.csv", correlation_csv(fitted.correlation, fitted.correlation_names));
    j["correlation"] = "correlation.csv";
  }
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : fitted.selection.steps) {
    auto aic = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
    steps.push_back({{"pair", {s.first, s.second}},
                     {"r", s.correlation},
                     {"aic_without_first", aic(s.aic_without_first)},
                     {"aic_without_second", aic(s.aic_without_second)},
                     {"dropped", s.dropped},
                     {"tie", s.tie}});
  }
  j["selection"] = {{"candidates", config.regression.candidates},
                    {"threshold", config.regression.correlation_threshold},
                    {"kept", fitted.selection.kept},
                    {"steps", steps}};
  j["split"] = {{"fraction", config.regression.split_fraction},
                {"train_rows", fitted.split.train.size()},
                {"test_rows", fitted.split.test.size()},
                {"stratified_by", "community"}};
  out.add("fit.json", fitted.fit.loglik_trace.empty() ? "{}\n" : fit_to_json(fitted.fit).dump(1) + "\n");
  out.add("coefficients.txt", coefficient_table(fitted.fit));
  j["fit"] = {{"path", "fit.json"},
              {"table", "coefficients.txt"},
              {"pooled_across_communities", true},
              {"converged", fitted.fit.converged},
              {"stop_reason", fitted.fit.stop_reason},
              {"iterations", fitted.fit.iterations},
              {"loglik", fitted.fit.loglik},
              {"aic", fitted.fit.aic},
              {"bic", fitted.fit.bic},
              {"n_obs", fitted.fit.n_obs},
              {"n_params", fitted.fit.n_params},
              {"p_value_method", "wald z, inverse observed information"}};
  if (!fitted.fit.converged) {
    throw StageError("fit", 4, Errc::NotConverged,
                     "regression did not converge after " + std::to_string(fitted.fit.iterations) + " iterations (" +
                         fitted.fit.stop_reason + ")");
  }

  const ValidationStage validation = stage("validate", [&] { return validate_stage(fitted, config.grid); });
  stage("validate", [&] {
    track_hygiene(report, stack(validation.predicted), "prediction");
    std::string csv = "community,step";
    for (auto c : all_categories()) csv += ",obs_" + std::string(category_code(c));
    for (auto c : all_categories()) csv += ",pred_" + std::string(category_code(c));
    csv += "\n";
    for (std::size_t i = 0; i < validation.rows.size(); ++i) {
      const auto row = validation.rows[i];
      csv += fitted.dataset.community[row] + "," + std::to_string(fitted.dataset.candidates.steps[row]);
      for (Eigen::Index k = 0; k < validation.observed[i].size(); ++k) csv += "," + format_double(validation.observed[i](k));
      for (Eigen::Index k = 0; k < validation.predicted[i].size(); ++k) csv += "," + format_double(validation.predicted[i](k));
      csv += "\n";
    }
    out.add("predictions.csv", std::move(csv));
    out.add("test_report.json", test_report_json(validation.report).dump(1) + "\n");

    for (const auto& cov : data.covariates) {
      const CompositionMatrix predicted = predict_profile(fitted.fit, cov, config.grid);
      track_hygiene(report, predicted.values(), "predicted profile of " + cov.community_id);
      out.add("predicted/" + cov.community_id + ".csv", composition_csv(predicted));
      std::vector<Composition> rows;
      for (Eigen::Index t = 0; t < predicted.steps(); ++t) rows.push_back(predicted.values().row(t).transpose());
      out.add("ternary/" + cov.community_id + "_predicted.csv",
              ternary_csv(ternary_coordinates(rows, config.ternary), config.ternary));
    }
    return 0;
  });
  for (std::size_t i = 0; i < communities.size(); ++i) {
    const std::string id = communities[i]["id"];
    communities[i]["predicted"] = "predicted/" + id + ".csv";
    communities[i]["ternary_predicted"] = "ternary/" + id + "_predicted.csv";
  }
  j["communities"] = std::move(communities);
  j["predictions"] = "predictions.csv";
  const auto& bm = validation.report.boxm;
  j["validation"] = {{"path", "test_report.json"},
                     {"boxm", {{"M", bm.M}, {"chi2", bm.chi2}, {"df", bm.df}, {"p", bm.p}, {"ridge_applied", bm.ridge_applied}}},
                     {"arrangement", "groups {test, predicted}; observations = per-category vectors; variables = test rows"}};

  // Recovery check against a known coefficient matrix, when one is supplied.
  nlohmann::json recovery = {{"status", "skipped"}, {"reason", "no truth manifest configured"}};
  if (!config.paths.truth.empty()) {
    stage("validate", [&] {
      const SyntheticTruth truth = truth_from_manifest(nlohmann::json::parse(read_text_file(config.paths.truth)));
      const auto kept = kept_covariates(fitted.selection);
      if (!truth.beta_star) {
        recovery["reason"] = "manifest has no beta_star";
      } else if (truth.beta_covariates != kept || truth.beta_star->cols() != fitted.fit.beta.cols()) {
        recovery["reason"] = "beta_star covariates do not match the selected regressors";
      } else {
        const Dataset train = subset(fitted.dataset, fitted.split.train);
        const auto X = design_with(train, fitted.fit.standardization, config.grid);
        const auto Y = sample_dirichlet_regression(*truth.beta_star, X, derive_seed(config.markov.seed, 0xBE7A));
        track_hygiene(report, stack(Y), "recovery sample");
        const RegressionFit refit = fit_regression(X, Y, config.fit_options(), fitted.fit.standardization);
        const Eigen::ArrayXXd dev = ((refit.beta - *truth.beta_star).array() / refit.std_error.array()).abs();
        const auto within = (dev <= 3.0).count();
        const double fraction = static_cast<double>(within) / static_cast<double>(dev.size());
        report.recovery_passed = refit.converged && fraction >= 0.95;
        recovery = {{"status", report.recovery_passed ? "PASS" : "FAIL"},
                    {"criterion", "fraction of coefficients within 3 SE of beta_star >= 0.95"},
                    {"within_3se", within},
                    {"coefficients", dev.size()},
                    {"fraction", fraction},
                    {"max_abs_z", dev.maxCoeff()},
                    {"converged", refit.converged}};
      }
      return 0;
    });
  }
  j["recovery"] = std::move(recovery);
  j["hygiene"] = {{"max_row_sum_error", report.max_row_sum_error}, {"min_entry", report.min_composition_entry}};

  std::vector<std::string> files;
  for (const auto& [path, content] : out.files()) files.push_back(path);
  j["files"] = files;
  out.add("run_report.json", j.dump(1) + "\n");
  if (write) {
    stage("export", [&] {
      out.commit(config.paths.output);
      return 0;
    });
  }
  return report;
}

}  // namespace tatraj
