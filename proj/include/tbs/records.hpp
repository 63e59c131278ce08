#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tbs/geometry.hpp"

namespace tbs {

/// Predetermined outcomes (alpha, beta, gamma) for settings a, b, c.
struct JointReality {
  Outcome alpha = Outcome::Plus;
  Outcome beta = Outcome::Plus;
  Outcome gamma = Outcome::Plus;

  Outcome operator[](Setting s) const {
    switch (s) {
      case Setting::A: return alpha;
      case Setting::B: return beta;
      default: return gamma;
    }
  }

  /// 0..7 in the order "+++", "++-", "+-+", ..., "---" (a is the most
  /// significant position).
  constexpr std::size_t index() const {
    return tbs::index(alpha) * 4 + tbs::index(beta) * 2 + tbs::index(gamma);
  }

  static constexpr JointReality from_index(std::size_t i) {
    return {outcome_from_index((i >> 2) & 1), outcome_from_index((i >> 1) & 1), outcome_from_index(i & 1)};
  }

  std::string key() const { return {sign_char(alpha), sign_char(beta), sign_char(gamma)}; }

  static JointReality from_key(std::string_view k) {
    if (k.size() != 3) throw std::invalid_argument("reality key must have 3 signs: '" + std::string(k) + "'");
    auto sign = [&](char ch) {
      if (ch == '+') return Outcome::Plus;
      if (ch == '-') return Outcome::Minus;
      throw std::invalid_argument("bad sign in reality key '" + std::string(k) + "'");
    };
    return {sign(k[0]), sign(k[1]), sign(k[2])};
  }

  friend bool operator==(const JointReality&, const JointReality&) = default;
};

inline constexpr std::size_t kRealityCount = 8;

/// One run: two immediately consecutive measurements.
struct RunRecord {
  SettingPair settings;
  Outcome first_outcome = Outcome::Plus;
  Outcome second_outcome = Outcome::Plus;
  std::optional<JointReality> hidden_reality;  // LHV runs only

  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

namespace detail {
constexpr std::size_t cell(SettingPair p, Outcome o1, Outcome o2) {
  return pair_index(p) * 4 + index(o1) * 2 + index(o2);
}
}  // namespace detail

/// Run counts indexed by (first setting, first outcome, second setting,
/// second outcome).
class CountTable {
public:
  void add(const RunRecord& r) {
    ++counts_[detail::cell(r.settings, r.first_outcome, r.second_outcome)];
    ++total_;
  }

  void add(SettingPair p, Outcome o1, Outcome o2, std::uint64_t n = 1) {
    counts_[detail::cell(p, o1, o2)] += n;
    total_ += n;
  }

  std::uint64_t at(SettingPair p, Outcome o1, Outcome o2) const { return counts_[detail::cell(p, o1, o2)]; }

  std::uint64_t pair_total(SettingPair p) const {
    const std::size_t base = pair_index(p) * 4;
    return counts_[base] + counts_[base + 1] + counts_[base + 2] + counts_[base + 3];
  }

  std::uint64_t total_runs() const { return total_; }

  CountTable& operator+=(const CountTable& other) {
    for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
    total_ += other.total_;
    return *this;
  }

  friend bool operator==(const CountTable&, const CountTable&) = default;

private:
  std::array<std::uint64_t, 36> counts_{};
  std::uint64_t total_ = 0;
};

/// Probabilities of an outcome pair conditional on the ordered setting pair.
class ProbTable {
public:
  double at(SettingPair p, Outcome o1, Outcome o2) const { return probs_[detail::cell(p, o1, o2)]; }
  void set(SettingPair p, Outcome o1, Outcome o2, double v) { probs_[detail::cell(p, o1, o2)] = v; }

  /// E(x, y) = P(++) + P(--) - P(+-) - P(-+).
  double expectation(SettingPair p) const {
    return at(p, Outcome::Plus, Outcome::Plus) + at(p, Outcome::Minus, Outcome::Minus) -
           at(p, Outcome::Plus, Outcome::Minus) - at(p, Outcome::Minus, Outcome::Plus);
  }

  /// Builds a table by evaluating `prob(pair, o1, o2)` on all 36 cells.
  template <typename F>
  static ProbTable tabulate(F&& prob) {
    ProbTable t;
    for (std::size_t i = 0; i < 9; ++i) {
      const SettingPair p = pair_from_index(i);
      for (Outcome o1 : kOutcomes)
        for (Outcome o2 : kOutcomes) t.set(p, o1, o2, prob(p, o1, o2));
    }
    return t;
  }

private:
  std::array<double, 36> probs_{};
};

// ---------------------------------------------------------------------------
// CSV

inline void write_count_csv(std::ostream& os, const CountTable& t) {
  os << "first_setting,first_outcome,second_setting,second_outcome,count\n";
  for (std::size_t i = 0; i < 9; ++i) {
    const SettingPair p = pair_from_index(i);
    for (Outcome o1 : kOutcomes)
      for (Outcome o2 : kOutcomes)
        os << label(p.first) << ',' << value(o1) << ',' << label(p.second) << ',' << value(o2) << ','
           << t.at(p, o1, o2) << '\n';
  }
}

/// A named series of runs as persisted: "free", "prepared", or a two-series
/// tag such as "AB+" (pair A then B, first outcome +1 retained).
struct RecordSeries {
  std::string name;
  std::vector<RunRecord> runs;

  friend bool operator==(const RecordSeries&, const RecordSeries&) = default;
};

inline constexpr std::string_view kRecordHeader =
    "run_index,series,first_setting,first_outcome,second_setting,second_outcome,hidden_reality";

/// One row per run; run_index counts across all series in order.
inline void write_records_csv(std::ostream& os, const std::vector<RecordSeries>& all) {
  os << kRecordHeader << '\n';
  std::uint64_t index = 0;
  for (const auto& s : all) {
    for (const auto& r : s.runs) {
      os << index++ << ',' << s.name << ',' << label(r.settings.first) << ',' << value(r.first_outcome) << ','
         << label(r.settings.second) << ',' << value(r.second_outcome) << ',';
      if (r.hidden_reality) os << r.hidden_reality->key();
      os << '\n';
    }
  }
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

/// Inverse of write_records_csv. Consecutive rows with the same series name
/// form one series; run indices must be 0, 1, 2, ...
inline std::vector<RecordSeries> read_records_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("records: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kRecordHeader) throw std::runtime_error("records: unexpected header '" + line + "'");
  std::vector<RecordSeries> all;
  std::size_t lineno = 1;
  std::uint64_t expected_index = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    const std::string where = "records: line " + std::to_string(lineno);
    if (f.size() != 7) throw std::runtime_error(where + " has " + std::to_string(f.size()) + " fields");
    try {
      if (std::stoull(f[0]) != expected_index) throw std::runtime_error(where + ": run_index out of sequence");
      ++expected_index;
      RunRecord r;
      r.settings = {setting_from_label(f[2]), setting_from_label(f[4])};
      r.first_outcome = outcome_from_value(std::stoi(f[3]));
      r.second_outcome = outcome_from_value(std::stoi(f[5]));
      if (!f[6].empty()) r.hidden_reality = JointReality::from_key(f[6]);
      if (all.empty() || all.back().name != f[1]) all.push_back({f[1], {}});
      all.back().runs.push_back(r);
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error(where + ": " + e.what());
    } catch (const std::out_of_range&) {
      throw std::runtime_error(where + ": number out of range");
    }
  }
  return all;
}

}  // namespace tbs
