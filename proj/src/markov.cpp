#include "tatraj/markov.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "tatraj/error.hpp"
#include "tatraj/io.hpp"
#include "tatraj/rng.hpp"

namespace tatraj {

namespace {

void check_distribution(const Eigen::Ref<const Eigen::RowVectorXd>& row, double tolerance, const std::string& what) {
  if (!row.allFinite() || row.minCoeff() < 0.0) throw Error(Errc::InvalidModel, what + " has a negative or non-finite entry");
  if (std::abs(row.sum() - 1.0) > tolerance) {
    throw Error(Errc::InvalidModel, what + " sums to " + format_double(row.sum()));
  }
}

}  // namespace

void TransitionModel::validate(double tolerance) const {
  if (initial.size() == 0) throw Error(Errc::InvalidModel, "model has no states");
  if (matrices.empty()) throw Error(Errc::InvalidModel, "model has no transitions");
  check_distribution(initial.transpose(), tolerance, "initial distribution");
  for (std::size_t t = 0; t < matrices.size(); ++t) {
    const auto& m = matrices[t];
    if (m.rows() != states() || m.cols() != states()) {
      throw Error(Errc::InvalidModel, "matrix " + std::to_string(t) + " has wrong shape");
    }
    for (Eigen::Index p = 0; p < m.rows(); ++p) {
      check_distribution(m.row(p), tolerance, "row " + std::to_string(p) + " of matrix " + std::to_string(t));
    }
  }
  if (!(kappa >= 0.0)) throw Error(Errc::InvalidModel, "kappa must be >= 0");
}

Eigen::MatrixXd TransitionCounts::visits() const {
  Eigen::MatrixXd v(static_cast<Eigen::Index>(transitions.size()), initial.size());
  for (std::size_t t = 0; t < transitions.size(); ++t) {
    v.row(static_cast<Eigen::Index>(t)) = transitions[t].rowwise().sum().transpose();
  }
  return v;
}

TransitionCounts count_transitions(std::span<const ActivitySequence> diaries, const TimeGrid& grid) {
  constexpr auto S = static_cast<Eigen::Index>(kNumCategories);
  const auto steps = static_cast<std::size_t>(grid.steps);
  TransitionCounts counts;
  counts.initial = Eigen::VectorXd::Zero(S);
  counts.transitions.assign(steps - 1, Eigen::MatrixXd::Zero(S, S));
  for (const auto& d : diaries) {
    if (d.slots.size() != steps) {
      throw Error(Errc::InvalidEvent, "diary of '" + d.person_id + "' has " + std::to_string(d.slots.size()) +
                                          " slots, expected " + std::to_string(steps));
    }
    counts.initial(static_cast<Eigen::Index>(index_of(d.slots[0]))) += 1.0;
    for (std::size_t t = 0; t + 1 < steps; ++t) {
      counts.transitions[t](static_cast<Eigen::Index>(index_of(d.slots[t])),
                            static_cast<Eigen::Index>(index_of(d.slots[t + 1]))) += 1.0;
    }
  }
  return counts;
}

Eigen::VectorXd smoothed_distribution(const Eigen::VectorXd& counts, double kappa) {
  const auto n = counts.size();
  const double denom = counts.sum() + static_cast<double>(n) * kappa;
  if (denom <= 0.0) return Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  return (counts.array() + kappa) / denom;
}

TransitionModel estimate_transitions(std::span<const ActivitySequence> diaries, double kappa, const TimeGrid& grid) {
  if (diaries.empty()) throw Error(Errc::EmptyInput, "cannot estimate transitions from zero diaries");
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw Error(Errc::ConfigError, "smoothing kappa must be finite and >= 0");
  const TransitionCounts counts = count_transitions(diaries, grid);

  TransitionModel model;
  model.kappa = kappa;
  model.initial = smoothed_distribution(counts.initial, kappa);
  model.matrices.reserve(counts.transitions.size());
  for (const auto& c : counts.transitions) {
    Eigen::MatrixXd m(c.rows(), c.cols());
    for (Eigen::Index p = 0; p < c.rows(); ++p) {
      m.row(p) = smoothed_distribution(c.row(p).transpose(), kappa).transpose();
    }
    model.matrices.push_back(std::move(m));
  }
  return model;
}

CompositionMatrix analytic_profile(const TransitionModel& model) {
  model.validate();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(model.steps()), model.states());
  Eigen::RowVectorXd row = model.initial.transpose();
  out.row(0) = row;
  for (std::size_t t = 0; t < model.matrices.size(); ++t) {
    row = row * model.matrices[t];
    out.row(static_cast<Eigen::Index>(t + 1)) = row;
  }
  return CompositionMatrix(std::move(out));
}

std::vector<std::size_t> simulate_states(const TransitionModel& model, std::uint64_t seed, std::uint64_t stream_id) {
  RandomStream rng(seed, stream_id);
  std::vector<std::size_t> states(model.steps());
  const auto S = static_cast<std::size_t>(model.states());
  states[0] = rng.categorical({model.initial.data(), S});
  for (std::size_t t = 0; t < model.matrices.size(); ++t) {
    // Eigen is column-major; copy the row for contiguous weights.
    const Eigen::RowVectorXd row = model.matrices[t].row(static_cast<Eigen::Index>(states[t]));
    states[t + 1] = rng.categorical({row.data(), S});
  }
  return states;
}

ActivitySequence simulate_trajectory(const TransitionModel& model, std::uint64_t seed) {
  model.validate();
  if (model.states() != static_cast<Eigen::Index>(kNumCategories)) {
    throw Error(Errc::InvalidModel, "activity trajectories need an 8-state model");
  }
  ActivitySequence seq;
  for (std::size_t s : simulate_states(model, seed, 0)) seq.slots.push_back(category_at(s));
  return seq;
}

Eigen::MatrixXd simulated_shares(const TransitionModel& model, std::size_t n, std::uint64_t seed, unsigned threads) {
  if (n < 1) throw Error(Errc::InvalidN, "number of simulated trajectories must be >= 1");
  model.validate();
  const auto steps = static_cast<Eigen::Index>(model.steps());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));

  // Integer tallies merge exactly, so the split across workers cannot
  // change the result.
  std::vector<Eigen::MatrixXd> partial(threads, Eigen::MatrixXd::Zero(steps, model.states()));
  auto work = [&](unsigned w) {
    for (std::size_t i = w; i < n; i += threads) {
      const auto states = simulate_states(model, seed, i);
      for (Eigen::Index t = 0; t < steps; ++t) partial[w](t, static_cast<Eigen::Index>(states[static_cast<std::size_t>(t)])) += 1.0;
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work, w);
  }
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(steps, model.states());
  for (const auto& p : partial) counts += p;
  return counts / static_cast<double>(n);
}

double default_epsilon(std::size_t n_simulated) {
  return std::min(1.0 / (2.0 * static_cast<double>(std::max<std::size_t>(n_simulated, 1))), 1e-4);
}

CompositionMatrix simulate_profile(const TransitionModel& model, std::size_t n, std::uint64_t seed,
                                   std::optional<double> epsilon, unsigned threads) {
  CompositionMatrix shares(simulated_shares(model, n, seed, threads));
  return zero_replace(shares, epsilon.value_or(default_epsilon(n)));
}

CompositionMatrix zero_replace(const CompositionMatrix& matrix, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0 / 16.0)) {
    throw Error(Errc::EpsilonOutOfRange, "zero-replacement epsilon " + format_double(epsilon) + " not in (0, 1/16)");
  }
  Eigen::MatrixXd out = matrix.values();
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    const auto zeros = (out.row(r).array() == 0.0).count();
    if (zeros == 0) continue;
    const double scale = 1.0 - static_cast<double>(zeros) * epsilon;
    for (Eigen::Index c = 0; c < out.cols(); ++c) {
      out(r, c) = out(r, c) == 0.0 ? epsilon : out(r, c) * scale;
    }
  }
  return CompositionMatrix(std::move(out));
}

nlohmann::json model_to_json(const TransitionModel& model) {
  nlohmann::json j;
  j["initial"] = std::vector<double>(model.initial.data(), model.initial.data() + model.initial.size());
  nlohmann::json mats = nlohmann::json::array();
  for (const auto& m : model.matrices) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index p = 0; p < m.rows(); ++p) {
      std::vector<double> row(static_cast<std::size_t>(m.cols()));
      for (Eigen::Index q = 0; q < m.cols(); ++q) row[static_cast<std::size_t>(q)] = m(p, q);
      rows.push_back(row);
    }
    mats.push_back(std::move(rows));
  }
  j["matrices"] = std::move(mats);
  j["kappa"] = model.kappa;
  return j;
}

TransitionModel model_from_json(const nlohmann::json& j) {
  TransitionModel model;
  try {
    const auto initial = j.at("initial").get<std::vector<double>>();
    model.initial = Eigen::Map<const Eigen::VectorXd>(initial.data(), static_cast<Eigen::Index>(initial.size()));
    const auto S = model.initial.size();
    for (const auto& jm : j.at("matrices")) {
      const auto rows = jm.get<std::vector<std::vector<double>>>();
      if (static_cast<Eigen::Index>(rows.size()) != S) throw Error(Errc::ParseError, "transition matrix has wrong row count");
      Eigen::MatrixXd m(S, S);
      for (Eigen::Index p = 0; p < S; ++p) {
        const auto& row = rows[static_cast<std::size_t>(p)];
        if (static_cast<Eigen::Index>(row.size()) != S) throw Error(Errc::ParseError, "transition row has wrong length");
        for (Eigen::Index q = 0; q < S; ++q) m(p, q) = row[static_cast<std::size_t>(q)];
      }
      model.matrices.push_back(std::move(m));
    }
    model.kappa = j.at("kappa").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ParseError, std::string("transition model JSON: ") + e.what());
  }
  model.validate(1e-9);
  return model;
}

}  // namespace tatraj
