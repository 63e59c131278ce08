#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <variant>

#include "tbs/geometry.hpp"
#include "tbs/random.hpp"
#include "tbs/records.hpp"
#include "tbs/sampling.hpp"

namespace tbs {

/// Pure qubit state held as its Bloch vector.
struct QubitState {
  Direction bloch;

  friend bool operator==(const QubitState&, const QubitState&) = default;
};

/// Orthonormal pair spanning the plane orthogonal to `e`. For e = +z this is
/// (x, y); in general the first vector is Gram-Schmidt of the coordinate axis
/// where |e| has its smallest component (first such axis on ties), and the
/// second is e x first.
inline std::array<Direction, 2> transverse_frame(const Direction& e) {
  const auto& v = e.components();
  std::size_t k = 0;
  for (std::size_t i = 1; i < 3; ++i)
    if (std::abs(v[i]) < std::abs(v[k])) k = i;
  std::array<double, 3> axis{0, 0, 0};
  axis[k] = 1.0;
  const double proj = v[k];
  const Direction u1 = make_direction(axis[0] - proj * v[0], axis[1] - proj * v[1], axis[2] - proj * v[2]);
  const Direction u2 = make_direction(v[1] * u1.z() - v[2] * u1.y(), v[2] * u1.x() - v[0] * u1.z(),
                                      v[0] * u1.y() - v[1] * u1.x());
  return {u1, u2};
}

/// |psi> = s|e+> + sqrt(1 - s^2) e^{i phi} |e->.
inline QubitState from_amplitudes(double s, double phi, const Direction& e) {
  if (!(s >= 0.0 && s <= 1.0)) throw std::domain_error("amplitude s must lie in [0, 1]");
  const double along = 2.0 * s * s - 1.0;
  const double across = 2.0 * s * std::sqrt(1.0 - s * s);
  if (across == 0.0) return {along > 0 ? e : -e};
  const auto [u1, u2] = transverse_frame(e);
  const double c = across * std::cos(phi), d = across * std::sin(phi);
  return {make_direction(along * e.x() + c * u1.x() + d * u2.x(), along * e.y() + c * u1.y() + d * u2.y(),
                         along * e.z() + c * u1.z() + d * u2.z())};
}

inline QubitState eigenstate(const Direction& x, Outcome o) { return {o == Outcome::Plus ? x : -x}; }

/// Born probability of `outcome` when measuring along `x`.
inline double measure_prob(const QubitState& state, const Direction& x, Outcome outcome) {
  return (1.0 + value(outcome) * dot(x, state.bloch)) / 2.0;
}

/// Ideal projective collapse onto the recorded outcome.
inline QubitState collapse(const QubitState& state, const Direction& x, Outcome outcome) {
  if (!(measure_prob(state, x, outcome) > 0.0)) {
    throw std::domain_error("collapse onto a zero-probability outcome");
  }
  return eigenstate(x, outcome);
}

/// Joint probability of (ox along x, then oy along y): the first Born factor
/// times the transition probability out of the collapsed state.
inline double pair_prob_exact(const QubitState& state, const Direction& x, const Direction& y, Outcome ox,
                              Outcome oy) {
  return measure_prob(state, x, ox) * (1.0 + value(ox) * value(oy) * dot(x, y)) / 2.0;
}

/// E(x, y) for two consecutive measurements. Equal to x.y for every state.
inline double expected_value_exact(const QubitState& /*state*/, const Direction& x, const Direction& y) {
  return dot(x, y);
}

/// Eigenstate of one of the configured directions.
struct EigenstatePrep {
  Setting setting = Setting::A;
  Outcome outcome = Outcome::Plus;
  friend bool operator==(const EigenstatePrep&, const EigenstatePrep&) = default;
};

/// How the qubit is prepared before each run.
using StatePrep = std::variant<QubitState, EigenstatePrep>;

inline QubitState resolve(const StatePrep& prep, const Config& cfg) {
  if (const auto* eig = std::get_if<EigenstatePrep>(&prep)) return eigenstate(cfg[eig->setting], eig->outcome);
  return std::get<QubitState>(prep);
}

inline ProbTable quantum_prob_table(const QubitState& state, const Config& cfg) {
  return ProbTable::tabulate(
      [&](SettingPair p, Outcome o1, Outcome o2) { return pair_prob_exact(state, cfg[p.first], cfg[p.second], o1, o2); });
}

/// Sequential-measurement sampler. Between the two measurements the Bloch
/// vector is scaled by `depolarizing` (1 = ideal collapse).
class QuantumRunSampler {
public:
  QuantumRunSampler(const StatePrep& prep, const Config& cfg, double depolarizing = 1.0) : lambda_(depolarizing) {
    if (!(depolarizing >= 0.0 && depolarizing <= 1.0)) throw std::domain_error("depolarizing factor must lie in [0, 1]");
    const QubitState state = resolve(prep, cfg);
    for (Setting s : kSettings) {
      state_dot_[index(s)] = dot(cfg[s], state.bloch);
      for (Setting t : kSettings) pair_dot_[index(s) * 3 + index(t)] = dot(cfg[s], cfg[t]);
    }
  }

  /// Draw order: first outcome, then second outcome; one uniform each.
  RunRecord run(SettingPair pair, Rng& rng) const {
    const double p1 = (1.0 + state_dot_[index(pair.first)]) / 2.0;
    const Outcome o1 = rng.uniform() < p1 ? Outcome::Plus : Outcome::Minus;
    const double p2 = (1.0 + lambda_ * value(o1) * pair_dot_[pair_index(pair)]) / 2.0;
    const Outcome o2 = rng.uniform() < p2 ? Outcome::Plus : Outcome::Minus;
    return {pair, o1, o2, std::nullopt};
  }

private:
  double lambda_;
  std::array<double, 3> state_dot_{};
  std::array<double, 9> pair_dot_{};
};

/// Free runs: setting pair drawn uniformly over nine, then two measurements.
inline RunBatch simulate_quantum_batch(const StatePrep& prep, const Config& cfg, std::uint64_t n_runs,
                                       const SamplingPlan& plan, bool keep_records = false, double depolarizing = 1.0) {
  const QuantumRunSampler sampler(prep, cfg, depolarizing);
  return sample_runs(n_runs, plan, keep_records, [&](Rng& rng) { return sampler.run(draw_setting_pair(rng), rng); });
}

inline CountTable simulate_quantum(const StatePrep& prep, const Config& cfg, std::uint64_t n_runs,
                                   const SamplingPlan& plan, double depolarizing = 1.0) {
  return simulate_quantum_batch(prep, cfg, n_runs, plan, false, depolarizing).table;
}

/// Runs with a fixed setting pair (used by the two-series protocol).
inline RunBatch simulate_quantum_fixed_pair(const StatePrep& prep, const Config& cfg, SettingPair pair,
                                            std::uint64_t n_runs, const SamplingPlan& plan, bool keep_records = false,
                                            double depolarizing = 1.0) {
  const QuantumRunSampler sampler(prep, cfg, depolarizing);
  return sample_runs(n_runs, plan, keep_records, [&](Rng& rng) { return sampler.run(pair, rng); });
}

}  // namespace tbs
