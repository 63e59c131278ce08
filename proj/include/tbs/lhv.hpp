#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "tbs/geometry.hpp"
#include "tbs/random.hpp"
#include "tbs/records.hpp"
#include "tbs/sampling.hpp"

namespace tbs {

/// Normalized weights over the eight joint realities.
class RealityDistribution {
public:
  /// Normalizes `weights`; rejects negative, non-finite or all-zero input.
  explicit RealityDistribution(const std::array<double, kRealityCount>& weights) {
    double sum = 0.0;
    for (double w : weights) {
      if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("reality weights must be finite and >= 0");
      sum += w;
    }
    if (!(sum > 0.0)) throw std::invalid_argument("reality weights sum to zero");
    for (std::size_t i = 0; i < kRealityCount; ++i) weights_[i] = weights[i] / sum;
  }

  static RealityDistribution uniform() {
    std::array<double, kRealityCount> w;
    w.fill(1.0);
    return RealityDistribution(w);
  }

  static RealityDistribution point_mass(JointReality r) {
    std::array<double, kRealityCount> w{};
    w[r.index()] = 1.0;
    return RealityDistribution(w);
  }

  /// Eight independent uniform(0,1) draws, normalized.
  static RealityDistribution random(Rng& rng) {
    std::array<double, kRealityCount> w;
    for (double& x : w) x = rng.uniform();
    return RealityDistribution(w);
  }

  double weight(JointReality r) const { return weights_[r.index()]; }
  const std::array<double, kRealityCount>& weights() const { return weights_; }

private:
  std::array<double, kRealityCount> weights_{};
};

inline JointReality sample_reality(const RealityDistribution& dist, Rng& rng) {
  const double u = rng.uniform();
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < kRealityCount; ++i) {
    const double w = dist.weights()[i];
    if (w <= 0.0) continue;
    last_positive = i;
    cumulative += w;
    if (u < cumulative) return JointReality::from_index(i);
  }
  // u landed in the rounding gap above the final cumulative sum.
  return JointReality::from_index(last_positive);
}

/// Outcomes are read off the reality, so equal settings always agree.
inline RunRecord lhv_run(const JointReality& reality, SettingPair pair) {
  return {pair, reality[pair.first], reality[pair.second], reality};
}

/// Probability of the outcome pair given the setting pair: the total weight
/// of realities consistent with both outcomes.
inline double lhv_pair_prob(const RealityDistribution& dist, SettingPair pair, Outcome first, Outcome second) {
  double p = 0.0;
  for (std::size_t i = 0; i < kRealityCount; ++i) {
    const JointReality r = JointReality::from_index(i);
    if (r[pair.first] == first && r[pair.second] == second) p += dist.weights()[i];
  }
  return p;
}

inline ProbTable lhv_prob_table(const RealityDistribution& dist) {
  return ProbTable::tabulate([&](SettingPair p, Outcome o1, Outcome o2) { return lhv_pair_prob(dist, p, o1, o2); });
}

/// One reality per run, setting pair drawn independently of it.
/// Draw order per run: setting pair, then reality.
inline RunBatch simulate_lhv_batch(const RealityDistribution& dist, std::uint64_t n_runs, const SamplingPlan& plan,
                                   bool keep_records = false) {
  return sample_runs(n_runs, plan, keep_records, [&](Rng& rng) {
    const SettingPair pair = draw_setting_pair(rng);
    return lhv_run(sample_reality(dist, rng), pair);
  });
}

inline CountTable simulate_lhv(const RealityDistribution& dist, std::uint64_t n_runs, const SamplingPlan& plan) {
  return simulate_lhv_batch(dist, n_runs, plan).table;
}

/// Number of runs whose hidden reality carries (first_outcome at `pair.first`,
/// second_outcome at `pair.second`), divided by the number of runs recorded
/// with exactly that setting pair and those outcomes. Tends to 9 when setting
/// pairs are chosen uniformly over the nine ordered pairs.
inline double counting_identity_ratio(const CountTable& table, const RealityTally& tally, SettingPair pair,
                                      Outcome first_outcome, Outcome second_outcome) {
  const std::uint64_t observed = table.at(pair, first_outcome, second_outcome);
  if (observed == 0) {
    throw std::domain_error(std::string("insufficient statistics: no [") + label(pair.first) +
                            sign_char(first_outcome) + ',' + label(pair.second) + sign_char(second_outcome) +
                            "] runs");
  }
  std::uint64_t hidden = 0;
  for (std::size_t i = 0; i < kRealityCount; ++i) {
    const JointReality r = JointReality::from_index(i);
    if (r[pair.first] == first_outcome && r[pair.second] == second_outcome) hidden += tally[i];
  }
  return static_cast<double>(hidden) / static_cast<double>(observed);
}

}  // namespace tbs
