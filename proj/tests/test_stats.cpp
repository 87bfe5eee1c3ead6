#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "doctest.h"
#include "support.hpp"
#include "tatraj/error.hpp"
#include "tatraj/stats.hpp"

using namespace tatraj;
using namespace tatraj::testing;
using C = ActivityCategory;

namespace {

double brute_force_inertia(const std::vector<Eigen::VectorXd>& pts, int k) {
  const std::size_t n = pts.size();
  std::size_t combos = 1;
  for (std::size_t i = 0; i < n; ++i) combos *= static_cast<std::size_t>(k);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t code = 0; code < combos; ++code) {
    std::vector<int> label(n);
    std::size_t c = code;
    for (std::size_t i = 0; i < n; ++i, c /= static_cast<std::size_t>(k)) label[i] = static_cast<int>(c % static_cast<std::size_t>(k));
    double inertia = 0.0;
    bool empty = false;
    for (int g = 0; g < k; ++g) {
      Eigen::VectorXd mean = Eigen::VectorXd::Zero(pts[0].size());
      int count = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (label[i] == g) {
          mean += pts[i];
          ++count;
        }
      }
      if (count == 0) {
        empty = true;
        break;
      }
      mean /= count;
      for (std::size_t i = 0; i < n; ++i) {
        if (label[i] == g) inertia += (pts[i] - mean).squaredNorm();
      }
    }
    if (!empty) best = std::min(best, inertia);
  }
  return best;
}

Eigen::MatrixXd sample_cov(const Eigen::MatrixXd& x) {
  const Eigen::MatrixXd c = x.rowwise() - x.colwise().mean();
  return c.transpose() * c / static_cast<double>(x.rows() - 1);
}

}  // namespace

TEST_CASE("diary encoding") {
  const auto sleep = encode_diary(constant_sequence(C::c02), ReductionMap::defaults());
  REQUIRE(sleep.size() == 288);
  for (Eigen::Index t = 0; t < 96; ++t) {
    CHECK(sleep(3 * t + 1) == 1.0);
    CHECK(sleep(3 * t) == 0.0);
  }
  const auto out = encode_diary(constant_sequence(C::c05), ReductionMap::defaults());
  CHECK((sleep - out).norm() == doctest::Approx(std::sqrt(192.0)));
  CHECK(std::sqrt(192.0) == doctest::Approx(13.856).epsilon(1e-4));
  // c03 and c07 both reduce to home-active.
  CHECK(encode_diary(constant_sequence(C::c03), ReductionMap::defaults()) ==
        encode_diary(constant_sequence(C::c07), ReductionMap::defaults()));
  ReductionMap partial = ReductionMap::defaults();
  partial.states[4].reset();
  CHECK_THROWS_AS(encode_diary(constant_sequence(C::c05), partial), Error);
}

TEST_CASE("kmeans") {
  SUBCASE("k = 1 gives the mean") {
    std::vector<Eigen::VectorXd> pts = {Eigen::Vector2d(0, 0), Eigen::Vector2d(2, 0), Eigen::Vector2d(1, 3)};
    const auto r = kmeans(pts, 1, 1);
    CHECK(r.centroids[0].isApprox(Eigen::Vector2d(1, 1)));
    CHECK(r.shares == std::vector<double>{1.0});
  }
  SUBCASE("separated clouds") {
    std::mt19937_64 gen(1);
    std::normal_distribution<double> z(0.0, 0.1);
    std::vector<Eigen::VectorXd> pts;
    for (int i = 0; i < 20; ++i) pts.push_back(Eigen::Vector2d(z(gen), z(gen)));
    for (int i = 0; i < 30; ++i) pts.push_back(Eigen::Vector2d(10 + z(gen), 10 + z(gen)));
    const auto r = kmeans(pts, 2, 7);
    for (int i = 1; i < 20; ++i) CHECK(r.assignments[static_cast<std::size_t>(i)] == r.assignments[0]);
    for (int i = 21; i < 50; ++i) CHECK(r.assignments[static_cast<std::size_t>(i)] == r.assignments[20]);
    CHECK(r.assignments[0] != r.assignments[20]);
    CHECK(r.shares[static_cast<std::size_t>(r.assignments[0] - 1)] == doctest::Approx(0.4));
  }
  SUBCASE("six planar points reach the brute-force optimum") {
    std::mt19937_64 gen(9);
    std::uniform_real_distribution<double> u(0.0, 5.0);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<Eigen::VectorXd> pts;
      for (int i = 0; i < 6; ++i) pts.push_back(Eigen::Vector2d(u(gen), u(gen)));
      const auto r = kmeans(pts, 2, static_cast<std::uint64_t>(trial));
      CHECK(r.inertia == doctest::Approx(brute_force_inertia(pts, 2)).epsilon(1e-12));
    }
  }
  SUBCASE("invariants") {
    std::mt19937_64 gen(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Eigen::VectorXd> pts;
    for (int i = 0; i < 40; ++i) pts.push_back(Eigen::Vector3d(u(gen), u(gen), u(gen)));
    const auto r = kmeans(pts, 4, 3);
    for (std::size_t i = 1; i < r.inertia_trace.size(); ++i) CHECK(r.inertia_trace[i] <= r.inertia_trace[i - 1] + 1e-12);
    // Fixpoint: every point is nearest to its own centroid.
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double own = (pts[i] - r.centroids[static_cast<std::size_t>(r.assignments[i] - 1)]).squaredNorm();
      for (const auto& c : r.centroids) CHECK(own <= (pts[i] - c).squaredNorm() + 1e-12);
    }
    CHECK(kmeans(pts, 40, 1).inertia == doctest::Approx(0.0));
    const auto again = kmeans(pts, 4, 3);
    CHECK(again.assignments == r.assignments);
  }
  SUBCASE("too few points") {
    std::vector<Eigen::VectorXd> pts = {Eigen::Vector2d(0, 0)};
    CHECK_THROWS_AS(kmeans(pts, 2, 1), Error);
  }
}

TEST_CASE("correlation") {
  Eigen::MatrixXd d(5, 2);
  d << 59.34, 0.26, 76.39, 0.36, 68.31, 0.33, 72.57, 0.43, 56.54, 0.29;
  const auto r = column_correlation(d);
  CHECK(r(0, 0) == doctest::Approx(1.0));
  CHECK(std::abs(r(0, 1) - 0.81) <= 0.005);

  Eigen::MatrixXd o(4, 2);
  o << 1, 1, -1, 1, 1, -1, -1, -1;
  CHECK(std::abs(column_correlation(o)(0, 1)) < 1e-15);

  Eigen::MatrixXd flat(3, 2);
  flat << 1, 2, 1, 3, 1, 4;
  CHECK_THROWS_AS(column_correlation(flat), Error);

  std::mt19937_64 gen(4);
  std::normal_distribution<double> z;
  Eigen::MatrixXd m(12, 5);
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = z(gen);
  const auto c = column_correlation(m);
  CHECK(c.isApprox(c.transpose()));
  CHECK(c.diagonal().isApprox(Eigen::VectorXd::Ones(5)));
  CHECK(c.cwiseAbs().maxCoeff() <= 1.0);
}

namespace {

CandidateSet candidate_set(std::size_t communities, const std::vector<std::vector<double>>& per_community,
                           std::vector<std::string> names) {
  CandidateSet c;
  c.names = std::move(names);
  c.values.resize(static_cast<Eigen::Index>(communities * 96), static_cast<Eigen::Index>(c.names.size()));
  for (std::size_t g = 0; g < communities; ++g) {
    for (int t = 1; t <= 96; ++t) {
      const auto r = static_cast<Eigen::Index>(g * 96 + static_cast<std::size_t>(t - 1));
      c.steps.push_back(t);
      for (std::size_t j = 0; j < c.names.size(); ++j) c.values(r, static_cast<Eigen::Index>(j)) = per_community[g][j];
    }
  }
  return c;
}

std::vector<Composition> compositions_for(const CandidateSet& c, std::uint64_t seed) {
  std::vector<DesignRow> X;
  for (Eigen::Index i = 0; i < c.values.rows(); ++i) {
    DesignRow x;
    const double s = scaled_time(c.steps[static_cast<std::size_t>(i)]);
    x.time_sq = s * s;
    X.push_back(x);
  }
  Eigen::MatrixXd beta = Eigen::MatrixXd::Zero(8, 2);
  beta.col(0).setConstant(2.0);
  beta(1, 1) = 1.0;
  beta(4, 1) = -1.0;
  return draw_dirichlet(beta, X, seed);
}

}  // namespace

TEST_CASE("variable selection") {
  SUBCASE("nothing above the threshold keeps everything") {
    const auto c = candidate_set(5, {{1, 3}, {2, 5}, {3, 1}, {4, 4}, {5, 2}}, {"a", "b"});
    const std::vector<std::string> fixed = {"Time^2"};
    const auto r = select_variables(c, compositions_for(c, 1), 0.75, fixed);
    CHECK(r.kept == std::vector<std::string>{"Time^2", "a", "b"});
    CHECK(r.steps.empty());
  }
  SUBCASE("duplicated columns lose exactly one member") {
    const auto c = candidate_set(5, {{1, 1, 3}, {2, 2, 5}, {3, 3, 1}, {4, 4, 4}, {5, 5, 2}}, {"a", "a_copy", "b"});
    const std::vector<std::string> fixed = {"Time^2"};
    const auto r = select_variables(c, compositions_for(c, 2), 0.75, fixed);
    REQUIRE(r.steps.size() == 1);
    CHECK(r.kept.size() == 3);
    CHECK(r.kept[0] == "Time^2");
    CHECK(std::count(r.kept.begin(), r.kept.end(), "b") == 1);
    CHECK(select_variables(c, compositions_for(c, 2), 0.75, fixed).kept == r.kept);
  }
  SUBCASE("fixed names survive") {
    const auto c = candidate_set(5, {{1, 1.1}, {2, 2.2}, {3, 2.9}, {4, 4.2}, {5, 4.8}}, {"a", "b"});
    const std::vector<std::string> fixed = {"Time^2", "b"};
    const auto r = select_variables(c, compositions_for(c, 3), 0.75, fixed);
    CHECK(r.kept == std::vector<std::string>{"Time^2", "b"});
  }
}

TEST_CASE("Box's M") {
  SUBCASE("hand computation for two bivariate samples") {
    Eigen::MatrixXd a(5, 2);
    a << 1.0, 2.0, 2.0, 2.5, 3.0, 3.9, 4.0, 4.1, 5.0, 6.2;
    Eigen::MatrixXd b(5, 2);
    b << 2.0, 1.0, 1.5, 3.0, 3.5, 2.0, 2.5, 5.0, 4.0, 4.5;
    const Eigen::MatrixXd Sa = sample_cov(a);
    const Eigen::MatrixXd Sb = sample_cov(b);
    const Eigen::MatrixXd Sp = (4.0 * Sa + 4.0 * Sb) / 8.0;
    const double M = 8.0 * std::log(Sp.determinant()) - 4.0 * std::log(Sa.determinant()) - 4.0 * std::log(Sb.determinant());
    const double c = (2.0 * 4 + 3.0 * 2 - 1.0) / (6.0 * 3.0 * 1.0) * (0.25 + 0.25 - 1.0 / 8.0);
    const auto r = boxs_m_test(a, b);
    CHECK(r.M == doctest::Approx(M).epsilon(1e-12));
    CHECK(r.correction == doctest::Approx(c).epsilon(1e-14));
    CHECK(r.chi2 == doctest::Approx(M * (1 - c)).epsilon(1e-12));
    CHECK(r.df == 3);
    CHECK_FALSE(r.ridge_applied);
    CHECK(r.p > 0.0);
    CHECK(r.p < 1.0);
    CHECK(boxs_m_test(b, a).M == doctest::Approx(r.M).epsilon(1e-12));
  }
  SUBCASE("identical groups") {
    std::mt19937_64 gen(6);
    std::normal_distribution<double> z;
    Eigen::MatrixXd a(12, 4);
    for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = z(gen);
    const auto r = boxs_m_test(a, a);
    CHECK(std::abs(r.M) <= 1e-9);
    CHECK(r.p >= 0.999);
  }
  SUBCASE("96 variables") {
    std::mt19937_64 gen(7);
    std::normal_distribution<double> z;
    Eigen::MatrixXd a(8, 96);
    Eigen::MatrixXd b(8, 96);
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      a(i) = z(gen);
      b(i) = z(gen);
    }
    const auto r = boxs_m_test(a, b);
    CHECK(r.df == 4656);
    CHECK(r.ridge_applied);
    CHECK(r.M >= -1e-9);
  }
  SUBCASE("degenerate group") {
    CHECK_THROWS_AS(boxs_m_test(Eigen::MatrixXd::Ones(1, 2), Eigen::MatrixXd::Ones(3, 2)), Error);
  }
}

TEST_CASE("Welch t-test") {
  const std::vector<double> a = {0.1, 0.2, 0.3};
  const std::vector<double> b = {0.4, 0.5, 0.6};
  const auto r = welch_t_test(a, b);
  CHECK(r.t == doctest::Approx(-3.674).epsilon(1e-3 / 3.674));
  CHECK(r.df == doctest::Approx(4.0));
  CHECK(r.p == doctest::Approx(0.0214).epsilon(0.01));
  CHECK(welch_t_test(a, a).p == 1.0);
  CHECK(welch_t_test(a, a).t == 0.0);
  const std::vector<double> one = {1.0, 1.0};
  const std::vector<double> two = {2.0, 2.0};
  CHECK(welch_t_test(one, two).p == 0.0);
  CHECK(std::isinf(welch_t_test(one, two).t));

  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> u;
  Eigen::MatrixXd g(20, 8);
  for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = u(gen);
  const auto same = t_test_per_component(g, g);
  REQUIRE(same.size() == 8);
  for (const auto& s : same) CHECK(s.p == 1.0);
}

TEST_CASE("ternary coordinates") {
  const std::array<C, 3> triple = {C::c05, C::c02, C::c07};
  auto comp = [](double a, double b, double c) {
    Composition y = Composition::Zero(8);
    y(4) = a;
    y(1) = b;
    y(6) = c;
    y(0) = 1.0 - a - b - c;
    return y;
  };
  const std::vector<Composition> pts = {comp(1, 0, 0), comp(1.0 / 3, 1.0 / 3, 1.0 / 3), comp(0.35, 0.43, 0.22),
                                        comp(0.07, 0.086, 0.044)};
  const auto t = ternary_coordinates(pts, triple);
  CHECK(t[0].x == 0.0);
  CHECK(t[0].y == 0.0);
  CHECK(t[1].x == doctest::Approx(0.5));
  CHECK(t[1].y == doctest::Approx(std::sqrt(3.0) / 6.0));
  for (std::size_t i : {2u, 3u}) {
    const auto back = ternary_to_shares(t[i].x, t[i].y);
    CHECK(std::abs(back[0] - 0.35) <= 1e-12);
    CHECK(std::abs(back[1] - 0.43) <= 1e-12);
    CHECK(std::abs(back[2] - 0.22) <= 1e-12);
  }
  std::mt19937_64 gen(10);
  std::uniform_real_distribution<double> u;
  for (int i = 0; i < 500; ++i) {
    const double a = u(gen);
    const double b = u(gen) * (1 - a);
    const std::vector<Composition> one = {comp(a, b, (1 - a - b) * u(gen))};
    const auto p = ternary_coordinates(one, triple)[0];
    const auto w = ternary_to_shares(p.x, p.y);
    for (double v : w) {
      CHECK(v >= -1e-12);
      CHECK(v <= 1.0 + 1e-12);
    }
  }
  const std::vector<Composition> none = {comp(0, 0, 0)};
  CHECK_THROWS_AS(ternary_coordinates(none, triple), Error);
  const auto csv = ternary_csv(t, triple);
  CHECK(csv.substr(0, csv.find('\n')) == "step,x,y,c05,c02,c07");
}
