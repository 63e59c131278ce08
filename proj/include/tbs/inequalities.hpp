#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "tbs/geometry.hpp"
#include "tbs/records.hpp"

namespace tbs {

enum class Variant { Counts6, Prob7, Prob8, Expect10, Quantum16, Quantum18 };

constexpr std::string_view name(Variant v) {
  switch (v) {
    case Variant::Counts6: return "counts-6";
    case Variant::Prob7: return "prob-7";
    case Variant::Prob8: return "prob-8";
    case Variant::Expect10: return "expect-10";
    case Variant::Quantum16: return "quantum-16";
    case Variant::Quantum18: return "quantum-18";
  }
  return "?";
}

/// exact: margin compared against zero. The rest apply to sampled data.
enum class Verdict { Exact, Consistent, Suggestive, Violated, Insufficient };

constexpr std::string_view name(Verdict v) {
  switch (v) {
    case Verdict::Exact: return "exact";
    case Verdict::Consistent: return "consistent";
    case Verdict::Suggestive: return "suggestive";
    case Verdict::Violated: return "violated";
    case Verdict::Insufficient: return "insufficient-statistics";
  }
  return "?";
}

/// Sampled-mode z thresholds: z > violated is a violation, z in
/// [suggestive, violated] is suggestive.
struct Thresholds {
  double violated = 5.0;
  double suggestive = 3.0;
};

/// Exact-mode margins at or below this are treated as satisfying the bound.
inline constexpr double kExactTolerance = 1e-12;

struct InequalityReport {
  Variant variant = Variant::Prob7;
  double lhs = 0.0;
  double bound = 0.0;
  double margin = 0.0;  // lhs - bound; positive means the bound fails
  std::optional<double> std_error;
  std::optional<double> z_score;
  bool violated = false;
  Verdict verdict = Verdict::Exact;
  std::string normalization;  // "counts", "per-pair", "expectation", "closed-form"
  bool degenerate = false;

  friend bool operator==(const InequalityReport&, const InequalityReport&) = default;
};

inline double significance(double margin, double std_error) {
  if (!(std_error > 0.0)) throw std::domain_error("significance: std_error must be > 0");
  return margin / std_error;
}

namespace detail {

inline InequalityReport exact_report(Variant v, double lhs, double bound, std::string normalization) {
  InequalityReport r;
  r.variant = v;
  r.lhs = lhs;
  r.bound = bound;
  r.margin = lhs - bound;
  r.violated = r.margin > kExactTolerance;
  r.verdict = Verdict::Exact;
  r.normalization = std::move(normalization);
  return r;
}

inline InequalityReport sampled_report(Variant v, double lhs, double bound, double std_error, bool enough_data,
                                       const Thresholds& th, std::string normalization) {
  InequalityReport r;
  r.variant = v;
  r.lhs = lhs;
  r.bound = bound;
  r.margin = lhs - bound;
  r.normalization = std::move(normalization);
  r.std_error = std_error;
  if (!enough_data || !(std_error > 0.0)) {
    r.verdict = Verdict::Insufficient;
    return r;
  }
  const double z = significance(r.margin, std_error);
  r.z_score = z;
  if (z > th.violated) {
    r.verdict = Verdict::Violated;
    r.violated = true;
  } else if (z >= th.suggestive) {
    r.verdict = Verdict::Suggestive;
  } else {
    r.verdict = Verdict::Consistent;
  }
  return r;
}

// Cells entering P(x o, y -o) <= P(x o, z -o) + P(z o, y -o) style bounds.
struct Cell {
  SettingPair pair;
  Outcome first;
  Outcome second;
};

struct TriangleCells {
  Cell lhs;
  Cell rhs1;
  Cell rhs2;
};

// (7) for sign = +, (8) for sign = -.
inline TriangleCells triangle_cells(Outcome sign) {
  const Outcome o = sign, m = flip(sign);
  return {{{Setting::A, Setting::C}, o, m}, {{Setting::A, Setting::B}, o, m}, {{Setting::B, Setting::C}, o, m}};
}

inline double cell_fraction(const CountTable& t, const Cell& c) {
  const std::uint64_t n = t.pair_total(c.pair);
  return n == 0 ? 0.0 : static_cast<double>(t.at(c.pair, c.first, c.second)) / static_cast<double>(n);
}

inline double cell_variance(const CountTable& t, const Cell& c) {
  const std::uint64_t n = t.pair_total(c.pair);
  if (n == 0) return 0.0;
  const double p = cell_fraction(t, c);
  return p * (1.0 - p) / static_cast<double>(n);
}

inline InequalityReport eval_triangle(Variant v, const ProbTable& p, Outcome sign) {
  const auto cells = triangle_cells(sign);
  auto at = [&](const Cell& c) { return p.at(c.pair, c.first, c.second); };
  return exact_report(v, at(cells.lhs) - at(cells.rhs1) - at(cells.rhs2), 0.0, "per-pair");
}

inline InequalityReport eval_triangle(Variant v, const CountTable& t, Outcome sign, const Thresholds& th) {
  const auto cells = triangle_cells(sign);
  const bool enough = t.pair_total(cells.lhs.pair) > 0 && t.pair_total(cells.rhs1.pair) > 0 &&
                      t.pair_total(cells.rhs2.pair) > 0;
  const double lhs = cell_fraction(t, cells.lhs) - cell_fraction(t, cells.rhs1) - cell_fraction(t, cells.rhs2);
  const double se = std::sqrt(cell_variance(t, cells.lhs) + cell_variance(t, cells.rhs1) + cell_variance(t, cells.rhs2));
  return sampled_report(v, lhs, 0.0, se, enough, th, "per-pair");
}

}  // namespace detail

/// N[a+,c-] - N[a+,b-] - N[b+,c-] against 0, Poisson error sqrt(N1+N2+N3).
/// Insufficient statistics when any of the three setting pairs has no runs.
inline InequalityReport eval_counts_6(const CountTable& t, const Thresholds& th = {}) {
  const auto cells = detail::triangle_cells(Outcome::Plus);
  auto n = [&](const detail::Cell& c) { return static_cast<double>(t.at(c.pair, c.first, c.second)); };
  const double n1 = n(cells.lhs), n2 = n(cells.rhs1), n3 = n(cells.rhs2);
  const bool enough = t.pair_total(cells.lhs.pair) > 0 && t.pair_total(cells.rhs1.pair) > 0 &&
                      t.pair_total(cells.rhs2.pair) > 0;
  return detail::sampled_report(Variant::Counts6, n1 - n2 - n3, 0.0, std::sqrt(n1 + n2 + n3), enough, th, "counts");
}

/// Exact-mode counterpart of eval_counts_6: expected counts for `n_runs`
/// runs with the nine setting pairs equally likely.
inline InequalityReport eval_counts_6_expected(const ProbTable& p, double n_runs) {
  const auto cells = detail::triangle_cells(Outcome::Plus);
  auto n = [&](const detail::Cell& c) { return n_runs / 9.0 * p.at(c.pair, c.first, c.second); };
  auto r = detail::exact_report(Variant::Counts6, n(cells.lhs) - n(cells.rhs1) - n(cells.rhs2), 0.0, "counts");
  r.violated = r.margin > kExactTolerance * std::max(1.0, n_runs);
  return r;
}

/// P(a+,c-) - P(a+,b-) - P(b+,c-) against 0.
inline InequalityReport eval_prob_7(const ProbTable& p) { return detail::eval_triangle(Variant::Prob7, p, Outcome::Plus); }
inline InequalityReport eval_prob_7(const CountTable& t, const Thresholds& th = {}) {
  return detail::eval_triangle(Variant::Prob7, t, Outcome::Plus, th);
}

/// P(a-,c+) - P(a-,b+) - P(b-,c+) against 0.
inline InequalityReport eval_prob_8(const ProbTable& p) { return detail::eval_triangle(Variant::Prob8, p, Outcome::Minus); }
inline InequalityReport eval_prob_8(const CountTable& t, const Thresholds& th = {}) {
  return detail::eval_triangle(Variant::Prob8, t, Outcome::Minus, th);
}

/// E(a,b) + E(b,c) - E(a,c) against 1.
inline InequalityReport eval_expect_10(double e_ab, double e_bc, double e_ac) {
  for (double e : {e_ab, e_bc, e_ac}) {
    if (!(e >= -1.0 - 1e-12 && e <= 1.0 + 1e-12)) throw std::domain_error("expectation outside [-1, 1]");
  }
  return detail::exact_report(Variant::Expect10, e_ab + e_bc - e_ac, 1.0, "expectation");
}

inline InequalityReport eval_expect_10(const ProbTable& p) {
  return eval_expect_10(p.expectation({Setting::A, Setting::B}), p.expectation({Setting::B, Setting::C}),
                        p.expectation({Setting::A, Setting::C}));
}

/// A sampled expectation value with its standard error.
struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  std::uint64_t runs = 0;
};

/// E estimated from the four cells of one setting pair; variance (1 - E^2)/n.
inline Estimate estimate_expectation(const CountTable& t, SettingPair p) {
  const std::uint64_t n = t.pair_total(p);
  if (n == 0) return {0.0, 0.0, 0};
  const double agree = static_cast<double>(t.at(p, Outcome::Plus, Outcome::Plus) + t.at(p, Outcome::Minus, Outcome::Minus));
  const double disagree = static_cast<double>(t.at(p, Outcome::Plus, Outcome::Minus) + t.at(p, Outcome::Minus, Outcome::Plus));
  const double e = (agree - disagree) / static_cast<double>(n);
  return {e, std::sqrt(std::max(0.0, 1.0 - e * e) / static_cast<double>(n)), n};
}

inline InequalityReport eval_expect_10(const Estimate& ab, const Estimate& bc, const Estimate& ac,
                                       const Thresholds& th = {}) {
  const double se = std::sqrt(ab.std_error * ab.std_error + bc.std_error * bc.std_error + ac.std_error * ac.std_error);
  const bool enough = ab.runs > 0 && bc.runs > 0 && ac.runs > 0;
  return detail::sampled_report(Variant::Expect10, ab.value + bc.value - ac.value, 1.0, se, enough, th, "expectation");
}

inline InequalityReport eval_expect_10(const CountTable& t, const Thresholds& th = {}) {
  return eval_expect_10(estimate_expectation(t, {Setting::A, Setting::B}), estimate_expectation(t, {Setting::B, Setting::C}),
                        estimate_expectation(t, {Setting::A, Setting::C}), th);
}

/// a.b - a.c + b.c: the expectation form with E(x,y) = x.y substituted.
inline double quantum_lhs_16(const DotTriple& d) { return d.ab - d.ac + d.bc; }
inline double quantum_lhs_16(const Config& cfg) { return quantum_lhs_16(dots(cfg)); }

/// b.(a+c) - 2 a.c + (a.b)(b.c): the probability form for a state prepared
/// as |a+>, scaled as 4 * margin + 1.
inline double quantum_lhs_18(const DotTriple& d) { return d.ab + d.bc - 2.0 * d.ac + d.ab * d.bc; }
inline double quantum_lhs_18(const Config& cfg) { return quantum_lhs_18(dots(cfg)); }

inline InequalityReport quantum_report_16(const Config& cfg) {
  auto r = detail::exact_report(Variant::Quantum16, quantum_lhs_16(cfg), 1.0, "closed-form");
  r.degenerate = cfg.degenerate();
  return r;
}

inline InequalityReport quantum_report_18(const Config& cfg) {
  auto r = detail::exact_report(Variant::Quantum18, quantum_lhs_18(cfg), 1.0, "closed-form");
  r.degenerate = cfg.degenerate();
  return r;
}

}  // namespace tbs
