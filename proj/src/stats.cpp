#include "tatraj/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "tatraj/error.hpp"
#include "tatraj/io.hpp"
#include "tatraj/rng.hpp"

namespace tatraj {

// --- Diary clustering ----------------------------------------------------

std::string_view day_state_name(DayState s) noexcept {
  switch (s) {
    case DayState::HomeActive: return "home";
    case DayState::Sleep: return "sleep";
    case DayState::Out: return "out";
  }
  return "home";
}

std::optional<DayState> parse_day_state(std::string_view name) noexcept {
  if (name == "home" || name == "home-active") return DayState::HomeActive;
  if (name == "sleep") return DayState::Sleep;
  if (name == "out") return DayState::Out;
  return std::nullopt;
}

ReductionMap ReductionMap::defaults() {
  using enum DayState;
  ReductionMap m;
  m.states = {HomeActive, Sleep, HomeActive, Out, Out, Out, HomeActive, Out};
  return m;
}

Eigen::VectorXd encode_diary(const ActivitySequence& sequence, const ReductionMap& reduction) {
  const auto slots = static_cast<Eigen::Index>(sequence.slots.size());
  Eigen::VectorXd v = Eigen::VectorXd::Zero(slots * static_cast<Eigen::Index>(kNumDayStates));
  for (Eigen::Index t = 0; t < slots; ++t) {
    const ActivityCategory c = sequence.slots[static_cast<std::size_t>(t)];
    const auto& state = reduction.states[index_of(c)];
    if (!state) {
      throw Error(Errc::UnmappedCategory, "category " + std::string(category_code(c)) + " has no day-state reduction");
    }
    v(t * static_cast<Eigen::Index>(kNumDayStates) + static_cast<Eigen::Index>(*state)) = 1.0;
  }
  return v;
}

namespace {

struct LloydRun {
  std::vector<int> assignment;  // 0-based
  std::vector<Eigen::VectorXd> centroids;
  double inertia = 0.0;
  std::vector<double> trace;
};

std::size_t nearest(const Eigen::VectorXd& p, const std::vector<Eigen::VectorXd>& centroids, double* dist = nullptr) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const double d = (p - centroids[c]).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  if (dist) *dist = best_d;
  return best;
}

LloydRun lloyd(std::span<const Eigen::VectorXd> points, int k, RandomStream& rng) {
  const std::size_t n = points.size();
  LloydRun run;

  // k-means++ seeding.
  run.centroids.push_back(points[static_cast<std::size_t>(rng.uniform() * static_cast<double>(n)) % n]);
  std::vector<double> d2(n);
  while (run.centroids.size() < static_cast<std::size_t>(k)) {
    for (std::size_t i = 0; i < n; ++i) nearest(points[i], run.centroids, &d2[i]);
    double total = 0.0;
    for (double v : d2) total += v;
    std::size_t pick = 0;
    if (total > 0.0) {
      pick = rng.categorical(d2);
    } else {
      pick = static_cast<std::size_t>(rng.uniform() * static_cast<double>(n)) % n;
    }
    run.centroids.push_back(points[pick]);
  }

  run.assignment.assign(n, -1);
  for (int iter = 0; iter < 1000; ++iter) {
    bool changed = false;
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double d = 0.0;
      const int c = static_cast<int>(nearest(points[i], run.centroids, &d));
      inertia += d;
      if (c != run.assignment[i]) {
        run.assignment[i] = c;
        changed = true;
      }
    }
    run.trace.push_back(inertia);
    run.inertia = inertia;
    if (!changed) break;

    std::vector<Eigen::VectorXd> sums(static_cast<std::size_t>(k), Eigen::VectorXd::Zero(points[0].size()));
    std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < n; ++i) {
      sums[static_cast<std::size_t>(run.assignment[i])] += points[i];
      ++counts[static_cast<std::size_t>(run.assignment[i])];
    }
    for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
      if (counts[c] > 0) {
        run.centroids[c] = sums[c] / static_cast<double>(counts[c]);
        continue;
      }
      // Empty cluster: move it onto the point farthest from its centroid.
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = (points[i] - run.centroids[static_cast<std::size_t>(run.assignment[i])]).squaredNorm();
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      run.centroids[c] = points[far];
    }
  }
  return run;
}

}  // namespace

ClusterResult kmeans(std::span<const Eigen::VectorXd> points, int k, std::uint64_t seed, int restarts) {
  if (k < 1) throw Error(Errc::TooFewPoints, "k must be >= 1");
  if (points.size() < static_cast<std::size_t>(k)) {
    throw Error(Errc::TooFewPoints, std::to_string(points.size()) + " points cannot form " + std::to_string(k) + " clusters");
  }
  for (const auto& p : points) {
    if (p.size() != points[0].size()) throw Error(Errc::TooFewPoints, "points have differing dimensions");
  }
  restarts = std::max(restarts, 1);

  std::optional<LloydRun> best;
  int best_restart = 0;
  for (int r = 0; r < restarts; ++r) {
    RandomStream rng(seed, static_cast<std::uint64_t>(r));
    LloydRun run = lloyd(points, k, rng);
    if (!best || run.inertia < best->inertia) {
      best = std::move(run);
      best_restart = r;
    }
  }

  ClusterResult out;
  out.centroids = best->centroids;
  out.inertia = std::max(0.0, best->inertia);
  out.restart = best_restart;
  out.inertia_trace = best->trace;
  out.shares.assign(static_cast<std::size_t>(k), 0.0);
  for (int a : best->assignment) {
    out.assignments.push_back(a + 1);
    out.shares[static_cast<std::size_t>(a)] += 1.0;
  }
  for (double& s : out.shares) s /= static_cast<double>(points.size());
  return out;
}

// --- Covariate screening ---------------------------------------------------

Eigen::MatrixXd column_correlation(const Eigen::MatrixXd& data, std::span<const std::string> names) {
  const Eigen::Index p = data.cols();
  const Eigen::MatrixXd centered = data.rowwise() - data.colwise().mean();
  Eigen::VectorXd norms(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    norms(j) = centered.col(j).norm();
    if (!(norms(j) > 0.0)) {
      const std::string name = static_cast<std::size_t>(j) < names.size() ? names[static_cast<std::size_t>(j)]
                                                                          : "column " + std::to_string(j);
      throw Error(Errc::ZeroVariance, "'" + name + "' has zero variance");
    }
  }
  Eigen::MatrixXd corr = Eigen::MatrixXd::Identity(p, p);
  for (Eigen::Index a = 0; a < p; ++a) {
    for (Eigen::Index b = a + 1; b < p; ++b) {
      const double r = std::clamp(centered.col(a).dot(centered.col(b)) / (norms(a) * norms(b)), -1.0, 1.0);
      corr(a, b) = r;
      corr(b, a) = r;
    }
  }
  return corr;
}

Eigen::MatrixXd correlation_matrix(std::span<const CommunityCovariates> covariates, std::span<const std::string> fields) {
  if (covariates.size() < 3) throw Error(Errc::TooFewPoints, "correlation needs at least three communities");
  Eigen::MatrixXd data(static_cast<Eigen::Index>(covariates.size()), static_cast<Eigen::Index>(fields.size()));
  for (std::size_t i = 0; i < covariates.size(); ++i) {
    for (std::size_t j = 0; j < fields.size(); ++j) {
      data(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = covariates[i].at(fields[j]);
    }
  }
  return column_correlation(data, fields);
}

std::string correlation_csv(const Eigen::MatrixXd& corr, std::span<const std::string> names) {
  std::string out = "variable";
  for (const auto& n : names) out += "," + n;
  out += "\n";
  for (Eigen::Index r = 0; r < corr.rows(); ++r) {
    out += names[static_cast<std::size_t>(r)];
    for (Eigen::Index c = 0; c < corr.cols(); ++c) out += "," + format_double(corr(r, c));
    out += "\n";
  }
  return out;
}

std::vector<DesignRow> design_for(const CandidateSet& candidates, std::span<const std::string> covariates,
                                  Standardization* standardization_out, const TimeGrid& grid) {
  std::vector<Eigen::Index> cols;
  for (const auto& name : covariates) {
    auto it = std::find(candidates.names.begin(), candidates.names.end(), name);
    if (it == candidates.names.end()) throw Error(Errc::MissingCovariate, "no candidate named '" + name + "'");
    cols.push_back(static_cast<Eigen::Index>(it - candidates.names.begin()));
  }
  const std::size_t n = candidates.steps.size();
  std::vector<std::vector<double>> raw(n, std::vector<double>(cols.size()));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) raw[i][j] = candidates.values(static_cast<Eigen::Index>(i), cols[j]);
  }
  Standardization s = Standardization::fit(std::vector<std::string>(covariates.begin(), covariates.end()), raw);
  std::vector<DesignRow> rows;
  rows.reserve(n);
  for (std::size_t i = 0; i < n; ++i) rows.push_back(make_design_row(candidates.steps[i], raw[i], s, grid));
  if (standardization_out) *standardization_out = std::move(s);
  return rows;
}

SelectionResult select_variables(const CandidateSet& candidates, std::span<const Composition> Y, double threshold,
                                 std::span<const std::string> fixed, const FitOptions& options, double tie_tolerance,
                                 const TimeGrid& grid) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw Error(Errc::ConfigError, "correlation threshold must be in (0,1)");
  const auto n = static_cast<Eigen::Index>(candidates.steps.size());
  if (candidates.values.rows() != n || candidates.values.cols() != static_cast<Eigen::Index>(candidates.names.size())) {
    throw Error(Errc::CovariateMismatch, "candidate table shape does not match its names and steps");
  }

  // Time^2 takes part in the screening as an always-fixed column.
  std::vector<std::string> names{std::string(kTimeSquaredName)};
  names.insert(names.end(), candidates.names.begin(), candidates.names.end());
  Eigen::MatrixXd data(n, static_cast<Eigen::Index>(names.size()));
  for (Eigen::Index i = 0; i < n; ++i) {
    const double s = scaled_time(candidates.steps[static_cast<std::size_t>(i)], grid);
    data(i, 0) = s * s;
  }
  data.rightCols(candidates.values.cols()) = candidates.values;
  const Eigen::MatrixXd corr = column_correlation(data, names);

  auto is_fixed = [&](const std::string& name) {
    return name == kTimeSquaredName || std::find(fixed.begin(), fixed.end(), name) != fixed.end();
  };
  std::vector<bool> active(names.size(), true);

  auto aic_without = [&](std::size_t drop) {
    std::vector<std::string> covs;
    for (std::size_t j = 1; j < names.size(); ++j) {
      if (active[j] && j != drop) covs.push_back(names[j]);
    }
    Standardization st;
    const auto X = design_for(candidates, covs, &st, grid);
    // AIC comparisons need the optimum itself, not an early relative-change stop.
    FitOptions opts = options;
    opts.standard_errors = false;
    opts.rel_tol = std::min(options.rel_tol, 1e-14);
    try {
      return fit_regression(X, Y, opts, st).aic;
    } catch (const Error& e) {
      if (e.code() == Errc::RankDeficientDesign) return std::numeric_limits<double>::infinity();
      throw;
    }
  };

  SelectionResult result;
  for (;;) {
    double worst = threshold;
    std::size_t wa = 0;
    std::size_t wb = 0;
    bool found = false;
    for (std::size_t a = 0; a < names.size(); ++a) {
      if (!active[a]) continue;
      for (std::size_t b = a + 1; b < names.size(); ++b) {
        if (!active[b] || (is_fixed(names[a]) && is_fixed(names[b]))) continue;
        const double r = std::abs(corr(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)));
        if (r > worst) {
          worst = r;
          wa = a;
          wb = b;
          found = true;
        }
      }
    }
    if (!found) break;

    SelectionStep step;
    step.first = names[wa];
    step.second = names[wb];
    step.correlation = corr(static_cast<Eigen::Index>(wa), static_cast<Eigen::Index>(wb));
    const double inf = std::numeric_limits<double>::infinity();
    step.aic_without_first = is_fixed(names[wa]) ? inf : aic_without(wa);
    step.aic_without_second = is_fixed(names[wb]) ? inf : aic_without(wb);
    if (std::isinf(step.aic_without_first) && std::isinf(step.aic_without_second)) {
      throw Error(Errc::RankDeficientDesign, "neither '" + names[wa] + "' nor '" + names[wb] +
                                                 "' can be removed to give a feasible fit");
    }
    std::size_t drop = wb;
    const double diff = step.aic_without_first - step.aic_without_second;
    if (std::isfinite(diff) && std::abs(diff) <= tie_tolerance) {
      step.tie = true;
    } else if (diff < 0.0) {
      drop = wa;
    }
    step.dropped = names[drop];
    active[drop] = false;
    result.steps.push_back(std::move(step));
  }
  for (std::size_t j = 0; j < names.size(); ++j) {
    if (active[j]) result.kept.push_back(names[j]);
  }
  return result;
}

// --- Box's M -----------------------------------------------------------------

namespace {

constexpr double kBoxRidge = 1e-8;

Eigen::MatrixXd covariance(const Eigen::MatrixXd& g) {
  const Eigen::MatrixXd centered = g.rowwise() - g.colwise().mean();
  return (centered.transpose() * centered) / static_cast<double>(g.rows() - 1);
}

Eigen::VectorXd eigenvalues(const Eigen::MatrixXd& s) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

bool singular(const Eigen::VectorXd& ev) {
  const double top = std::max(ev.maxCoeff(), 0.0);
  return !(ev.minCoeff() > 1e-12 * top) || !(top > 0.0);
}

double log_det(const Eigen::VectorXd& ev, double ridge) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) sum += std::log(std::max(ev(i), 0.0) + ridge);
  return sum;
}

}  // namespace

BoxMResult boxs_m_test(std::span<const Eigen::MatrixXd> groups) {
  if (groups.size() < 2) throw Error(Errc::DegenerateGroup, "Box's M needs at least two groups");
  const Eigen::Index D = groups[0].cols();
  double N = 0.0;
  for (const auto& g : groups) {
    if (g.rows() < 2) throw Error(Errc::DegenerateGroup, "every group needs at least two observations");
    if (g.cols() != D) throw Error(Errc::DegenerateGroup, "groups have differing dimensions");
    if (!g.allFinite()) throw Error(Errc::DegenerateGroup, "group data is not finite");
    N += static_cast<double>(g.rows());
  }
  const double gcount = static_cast<double>(groups.size());

  std::vector<Eigen::MatrixXd> covs;
  Eigen::MatrixXd pooled = Eigen::MatrixXd::Zero(D, D);
  for (const auto& g : groups) {
    covs.push_back(covariance(g));
    pooled += (static_cast<double>(g.rows() - 1) / (N - gcount)) * covs.back();
  }

  std::vector<Eigen::VectorXd> evs;
  bool any_singular = false;
  for (const auto& c : covs) {
    evs.push_back(eigenvalues(c));
    any_singular = any_singular || singular(evs.back());
  }
  const Eigen::VectorXd pooled_ev = eigenvalues(pooled);
  any_singular = any_singular || singular(pooled_ev);

  BoxMResult r;
  r.dimension = static_cast<int>(D);
  r.ridge_applied = any_singular;
  r.ridge = any_singular ? kBoxRidge : 0.0;
  double M = (N - gcount) * log_det(pooled_ev, r.ridge);
  for (std::size_t i = 0; i < groups.size(); ++i) {
    M -= static_cast<double>(groups[i].rows() - 1) * log_det(evs[i], r.ridge);
  }
  r.M = M;

  const double d = static_cast<double>(D);
  double inv_sum = 0.0;
  for (const auto& g : groups) inv_sum += 1.0 / static_cast<double>(g.rows() - 1);
  r.correction = (2.0 * d * d + 3.0 * d - 1.0) / (6.0 * (d + 1.0) * (gcount - 1.0)) * (inv_sum - 1.0 / (N - gcount));
  r.chi2 = M * (1.0 - r.correction);
  r.df = static_cast<long long>(groups.size() - 1) * static_cast<long long>(D) * static_cast<long long>(D + 1) / 2;
  if (r.chi2 <= 0.0) {
    r.p = 1.0;
  } else {
    const boost::math::chi_squared dist(static_cast<double>(r.df));
    r.p = std::clamp(boost::math::cdf(boost::math::complement(dist, r.chi2)), 0.0, 1.0);
  }
  return r;
}

BoxMResult boxs_m_test(const Eigen::MatrixXd& group_a, const Eigen::MatrixXd& group_b) {
  const std::array<Eigen::MatrixXd, 2> groups = {group_a, group_b};
  return boxs_m_test(groups);
}

// --- Welch t -----------------------------------------------------------------

WelchResult welch_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw Error(Errc::DegenerateGroup, "Welch t-test needs two observations per side");
  auto moments = [](std::span<const double> v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::pair{mean, ss / static_cast<double>(v.size() - 1)};
  };
  const auto [ma, va] = moments(a);
  const auto [mb, vb] = moments(b);
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double qa = va / na;
  const double qb = vb / nb;
  WelchResult r;
  r.mean_a = ma;
  r.mean_b = mb;
  const double se2 = qa + qb;
  if (!(se2 > 0.0)) {
    r.df = na + nb - 2.0;
    if (ma == mb) {
      r.t = 0.0;
      r.p = 1.0;
    } else {
      r.t = ma > mb ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
      r.p = 0.0;
    }
    return r;
  }
  r.t = (ma - mb) / std::sqrt(se2);
  r.df = se2 * se2 / (qa * qa / (na - 1.0) + qb * qb / (nb - 1.0));
  if (r.t == 0.0) {
    r.p = 1.0;
  } else {
    const boost::math::students_t dist(r.df);
    r.p = std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t))), 0.0, 1.0);
  }
  return r;
}

std::vector<WelchResult> t_test_per_component(const Eigen::MatrixXd& group_a, const Eigen::MatrixXd& group_b) {
  if (group_a.cols() != group_b.cols()) throw Error(Errc::DegenerateGroup, "groups have differing component counts");
  std::vector<WelchResult> out;
  for (Eigen::Index c = 0; c < group_a.cols(); ++c) {
    const Eigen::VectorXd a = group_a.col(c);
    const Eigen::VectorXd b = group_b.col(c);
    out.push_back(welch_t_test({a.data(), static_cast<std::size_t>(a.size())}, {b.data(), static_cast<std::size_t>(b.size())}));
  }
  return out;
}

nlohmann::json test_report_json(const TestReport& report) {
  nlohmann::json j;
  j["boxm"] = {{"M", report.boxm.M},
               {"chi2", report.boxm.chi2},
               {"df", report.boxm.df},
               {"p", report.boxm.p},
               {"correction", report.boxm.correction},
               {"dimension", report.boxm.dimension},
               {"ridge_applied", report.boxm.ridge_applied},
               {"ridge", report.boxm.ridge}};
  nlohmann::json tt = nlohmann::json::object();
  for (std::size_t c = 0; c < report.ttests.size(); ++c) {
    const auto& w = report.ttests[c];
    const std::string code = c < kNumCategories ? std::string(category_code(category_at(c))) : "c" + std::to_string(c + 1);
    nlohmann::json entry = {{"p", w.p}, {"df", w.df}, {"mean_test", w.mean_a}, {"mean_predict", w.mean_b}};
    entry["t"] = std::isfinite(w.t) ? nlohmann::json(w.t) : nlohmann::json(w.t > 0 ? "inf" : "-inf");
    tt[code] = std::move(entry);
  }
  j["ttests"] = std::move(tt);
  j["ttest_kind"] = "welch";
  return j;
}

// --- Ternary -----------------------------------------------------------------

std::vector<TernaryPoint> ternary_coordinates(std::span<const Composition> compositions,
                                              const std::array<ActivityCategory, 3>& triple) {
  const double h = std::numbers::sqrt3 / 2.0;
  std::vector<TernaryPoint> out;
  out.reserve(compositions.size());
  for (std::size_t i = 0; i < compositions.size(); ++i) {
    const auto& y = compositions[i];
    std::array<double, 3> v{};
    for (std::size_t k = 0; k < 3; ++k) {
      const auto idx = static_cast<Eigen::Index>(index_of(triple[k]));
      if (idx >= y.size()) throw Error(Errc::AllZeroTriple, "composition too short for the selected triple");
      v[k] = y(idx);
      if (!(v[k] >= 0.0)) throw Error(Errc::OutsideSimplex, "negative share in ternary input");
    }
    const double total = v[0] + v[1] + v[2];
    if (!(total > 0.0)) throw Error(Errc::AllZeroTriple, "point " + std::to_string(i) + " has no mass on the triple");
    TernaryPoint p;
    p.shares = {v[0] / total, v[1] / total, v[2] / total};
    p.x = 0.5 * (2.0 * v[1] + v[2]) / total;
    p.y = h * v[2] / total;
    out.push_back(p);
  }
  return out;
}

std::array<double, 3> ternary_to_shares(double x, double y) {
  const double c = y / (std::numbers::sqrt3 / 2.0);
  const double b = x - 0.5 * c;
  return {1.0 - b - c, b, c};
}

std::string ternary_csv(std::span<const TernaryPoint> points, const std::array<ActivityCategory, 3>& triple) {
  std::string out = "step,x,y";
  for (auto c : triple) out += "," + std::string(category_code(c));
  out += "\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    out += std::to_string(i + 1) + "," + format_double(p.x) + "," + format_double(p.y);
    for (double s : p.shares) out += "," + format_double(s);
    out += "\n";
  }
  return out;
}

}  // namespace tatraj
