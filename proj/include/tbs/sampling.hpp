#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <stdexcept>
#include <thread>
#include <vector>

#include "tbs/random.hpp"
#include "tbs/records.hpp"

namespace tbs {

/// How a batch of runs is split across workers. Worker w handles a
/// contiguous slice of run indices with its own substream of (seed, stream).
/// Output is identical for a fixed (seed, stream, workers).
struct SamplingPlan {
  std::uint64_t seed = 1;
  std::uint64_t stream = 0;
  unsigned workers = 1;
};

/// Hidden-reality occupation counts, one slot per JointReality index.
using RealityTally = std::array<std::uint64_t, kRealityCount>;

/// Everything a batch of runs produces.
struct RunBatch {
  CountTable table;
  RealityTally tally{};
  std::vector<RunRecord> records;  // filled only when records are kept

  void merge(RunBatch&& other) {
    table += other.table;
    for (std::size_t i = 0; i < tally.size(); ++i) tally[i] += other.tally[i];
    if (records.empty()) {
      records = std::move(other.records);
    } else {
      records.insert(records.end(), other.records.begin(), other.records.end());
    }
  }
};

/// Draws `n_runs` runs with `draw(Rng&) -> RunRecord`, partitioned per `plan`.
template <typename DrawRun>
RunBatch sample_runs(std::uint64_t n_runs, const SamplingPlan& plan, bool keep_records, DrawRun&& draw) {
  const unsigned workers = std::max(1u, plan.workers);
  std::vector<RunBatch> parts(workers);

  auto work = [&](unsigned w) {
    Rng rng = Rng::substream(plan.seed, plan.stream, w);
    const std::uint64_t begin = n_runs * w / workers;
    const std::uint64_t end = n_runs * (w + 1) / workers;
    RunBatch& out = parts[w];
    if (keep_records) out.records.reserve(end - begin);
    for (std::uint64_t i = begin; i < end; ++i) {
      RunRecord r = draw(rng);
      out.table.add(r);
      if (r.hidden_reality) ++out.tally[r.hidden_reality->index()];
      if (keep_records) out.records.push_back(r);
    }
  };

  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> threads;
    threads.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) threads.emplace_back(work, w);
  }

  RunBatch result = std::move(parts[0]);
  for (unsigned w = 1; w < workers; ++w) result.merge(std::move(parts[w]));
  return result;
}

/// Uniform draw over the nine ordered setting pairs, repeats included.
inline SettingPair draw_setting_pair(Rng& rng) {
  return pair_from_index(static_cast<std::size_t>(rng.below(9)));
}

}  // namespace tbs
