#include <thread>

#include "doctest.h"
#include "support.hpp"
#include "tatraj/error.hpp"
#include "tatraj/markov.hpp"

using namespace tatraj;
using C = ActivityCategory;
using tatraj::testing::constant_sequence;
using tatraj::testing::random_model;
using tatraj::testing::within_binomial_error;

namespace {

TransitionModel identity_model(std::size_t start) {
  TransitionModel m;
  m.initial = Eigen::VectorXd::Unit(8, static_cast<Eigen::Index>(start));
  m.matrices.assign(95, Eigen::MatrixXd::Identity(8, 8));
  return m;
}

}  // namespace

TEST_CASE("constant diaries estimate an absorbing c02 row and uniform elsewhere") {
  std::vector<ActivitySequence> d(5, constant_sequence(C::c02));
  const auto m = estimate_transitions(d, 0.0);
  CHECK(m.initial.isApprox(Eigen::VectorXd::Unit(8, 1)));
  REQUIRE(m.matrices.size() == 95);
  for (const auto& M : m.matrices) {
    CHECK(M.row(1).transpose().isApprox(Eigen::VectorXd::Unit(8, 1)));
    for (Eigen::Index p = 0; p < 8; ++p) {
      if (p != 1) CHECK(M.row(p).isApprox(Eigen::RowVectorXd::Constant(8, 0.125)));
    }
  }
  m.validate();
}

TEST_CASE("hand-counted transitions") {
  auto a = constant_sequence(C::c02);
  auto b = constant_sequence(C::c02);
  for (int t = 10; t < 96; ++t) b.slots[static_cast<std::size_t>(t)] = C::c05;
  std::vector<ActivitySequence> d = {a, b};
  const auto m = estimate_transitions(d, 0.0);
  // step 10 -> 11 is matrices[9]
  CHECK(m.matrices[9](1, 1) == doctest::Approx(0.5));
  CHECK(m.matrices[9](1, 4) == doctest::Approx(0.5));
  CHECK(m.matrices[9].row(1).sum() == doctest::Approx(1.0));
  CHECK(m.matrices[9](1, 0) == 0.0);
}

TEST_CASE("Laplace smoothing by hand") {
  Eigen::VectorXd counts(2);
  counts << 1, 0;
  const auto p = smoothed_distribution(counts, 0.5);
  CHECK(p(0) == doctest::Approx(0.75));
  CHECK(p(1) == doctest::Approx(0.25));
  const auto u = smoothed_distribution(Eigen::VectorXd::Zero(4), 0.0);
  CHECK(u.isApprox(Eigen::VectorXd::Constant(4, 0.25)));
}

TEST_CASE("estimation rejects empty input") {
  CHECK_THROWS_AS(estimate_transitions(std::vector<ActivitySequence>{}), Error);
}

TEST_CASE("analytic profile") {
  SUBCASE("identity chain") {
    const auto p = analytic_profile(identity_model(1));
    for (Eigen::Index t = 0; t < 96; ++t) CHECK(p(t, 1) == 1.0);
  }
  SUBCASE("two-state hand multiplication") {
    TransitionModel m;
    m.initial = Eigen::Vector2d(1, 0);
    Eigen::Matrix2d M;
    M << 0.5, 0.5, 0.0, 1.0;
    m.matrices.assign(3, M);
    const auto p = analytic_profile(m);
    CHECK(p(1, 0) == doctest::Approx(0.5));
    CHECK(p(1, 1) == doctest::Approx(0.5));
    CHECK(p(2, 0) == doctest::Approx(0.25));
    CHECK(p(2, 1) == doctest::Approx(0.75));
  }
  SUBCASE("rows stay stochastic") {
    for (std::uint64_t s = 0; s < 5; ++s) CHECK(analytic_profile(random_model(s)).max_row_sum_error() <= 1e-12);
  }
}

TEST_CASE("simulation") {
  SUBCASE("degenerate model gives a constant trajectory") {
    const auto m = identity_model(1);
    for (std::uint64_t seed : {0ULL, 1ULL, 99ULL}) {
      for (auto c : simulate_trajectory(m, seed).slots) CHECK(c == C::c02);
    }
  }
  SUBCASE("same seed, same sequence") {
    const auto m = random_model(3);
    CHECK(simulate_trajectory(m, 42).slots == simulate_trajectory(m, 42).slots);
    CHECK(simulate_trajectory(m, 42).slots != simulate_trajectory(m, 43).slots);
  }
  SUBCASE("first-slot frequencies match the initial distribution") {
    TransitionModel m = identity_model(0);
    m.initial.setZero();
    m.initial(0) = 0.3;
    m.initial(1) = 0.7;
    int first = 0;
    for (std::uint64_t i = 0; i < 10000; ++i) first += simulate_states(m, 5, i)[0] == 0 ? 1 : 0;
    CHECK(std::abs(first / 10000.0 - 0.3) <= 0.02);
  }
}

TEST_CASE("simulate_profile") {
  SUBCASE("identity chain before replacement") {
    const auto shares = simulated_shares(identity_model(1), 17, 1);
    for (Eigen::Index t = 0; t < 96; ++t) CHECK(shares(t, 1) == 1.0);
  }
  SUBCASE("agrees with forward propagation") {
    const auto m = random_model(11);
    const auto sim = simulate_profile(m, 10000, 2021);
    const auto exact = analytic_profile(m);
    CHECK((sim.values() - exact.values()).cwiseAbs().maxCoeff() <= 0.02);
    CHECK(sim.strictly_positive());
    CHECK(sim.max_row_sum_error() <= 1e-9);
  }
  SUBCASE("independent of the thread count") {
    const auto m = random_model(12);
    const auto a = simulated_shares(m, 999, 8, 1);
    const auto b = simulated_shares(m, 999, 8, 3);
    CHECK(a == b);
    CHECK(simulate_profile(m, 500, 1).values() == simulate_profile(m, 500, 1).values());
  }
  SUBCASE("n must be positive") { CHECK_THROWS_AS(simulate_profile(random_model(1), 0, 1), Error); }
}

TEST_CASE("zero replacement") {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 8);
  m.row(0).setConstant(0.125);
  m(1, 0) = 1.0;
  const auto r = zero_replace(CompositionMatrix(m), 0.001);
  CHECK(r.values().row(0) == m.row(0));
  CHECK(r(1, 0) == doctest::Approx(0.993).epsilon(1e-12));
  for (Eigen::Index k = 1; k < 8; ++k) CHECK(r(1, k) == 0.001);
  CHECK(r.max_row_sum_error() <= 1e-12);
  CHECK_THROWS_AS(zero_replace(CompositionMatrix(m), 0.0), Error);
  CHECK_THROWS_AS(zero_replace(CompositionMatrix(m), 0.0625), Error);
  CHECK(default_epsilon(10000) == doctest::Approx(5e-5));
  CHECK(default_epsilon(10) == doctest::Approx(1e-4));
}

TEST_CASE("simulated shares are tallies of the per-stream trajectories over n") {
  const auto m = random_model(9, 3, 96);
  const std::size_t n = 10;
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(96, 3);
  for (std::size_t i = 0; i < n; ++i) {
    const auto states = simulate_states(m, 31, i);
    for (std::size_t t = 0; t < states.size(); ++t) counts(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(states[t])) += 1;
  }
  const auto shares = simulated_shares(m, n, 31);
  CHECK(shares.isApprox(counts / 10.0, 1e-15));
}

TEST_CASE("estimation consistency against a known model") {
  const auto truth = random_model(21, 8, 96, 0.5);
  std::vector<ActivitySequence> diaries;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    ActivitySequence s;
    for (auto st : simulate_states(truth, 77, i)) s.slots.push_back(category_at(st));
    diaries.push_back(std::move(s));
  }
  const auto est = estimate_transitions(diaries, 0.0);
  const Eigen::MatrixXd visits = count_transitions(diaries).visits();
  int checked = 0;
  for (std::size_t t = 0; t < truth.matrices.size(); ++t) {
    for (Eigen::Index p = 0; p < 8; ++p) {
      if (visits(static_cast<Eigen::Index>(t), p) < 30) continue;
      ++checked;
      CHECK(within_binomial_error(est.matrices[t].row(p), truth.matrices[t].row(p), visits(static_cast<Eigen::Index>(t), p)));
    }
  }
  CHECK(checked > 300);
}

TEST_CASE("model json round trip is exact") {
  const auto m = random_model(4);
  const auto back = model_from_json(nlohmann::json::parse(model_to_json(m).dump()));
  CHECK(back.initial == m.initial);
  REQUIRE(back.matrices.size() == m.matrices.size());
  for (std::size_t t = 0; t < m.matrices.size(); ++t) CHECK(back.matrices[t] == m.matrices[t]);
}

TEST_CASE("invalid models are rejected") {
  auto m = random_model(5);
  m.matrices[3](2, 2) += 0.1;
  CHECK_THROWS_AS(m.validate(), Error);
  CHECK_THROWS_AS(analytic_profile(m), Error);
}
