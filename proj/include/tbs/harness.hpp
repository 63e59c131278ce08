#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "tbs/inequalities.hpp"
#include "tbs/json_io.hpp"
#include "tbs/lhv.hpp"
#include "tbs/quantum.hpp"
#include "tbs/records.hpp"
#include "tbs/sampling.hpp"

namespace tbs {

enum class Model { Lhv, Quantum };
enum class Protocol { FreeRuns, TwoSeries, PreparedRuns };

constexpr std::string_view name(Model m) { return m == Model::Lhv ? "lhv" : "quantum"; }
constexpr std::string_view name(Protocol p) {
  switch (p) {
    case Protocol::FreeRuns: return "free-runs";
    case Protocol::TwoSeries: return "two-series";
    case Protocol::PreparedRuns: return "prepared-runs";
  }
  return "?";
}

/// Default quantum initial state when a spec gives none: s = 0.6, phi = 0.3
/// on the +z reference direction.
inline QubitState default_state() { return from_amplitudes(0.6, 0.3, Direction::z_axis()); }

struct OutputPaths {
  std::string dir = ".";
  std::string records = "records.csv";
  std::string report = "report.json";
  std::string counts = "counts.csv";
};

struct ExperimentSpec {
  Model model = Model::Quantum;
  Protocol protocol = Protocol::FreeRuns;
  Config config;
  StatePrep prep = default_state();
  RealityDistribution distribution = RealityDistribution::uniform();
  std::uint64_t n_runs = 1;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  double depolarizing = 1.0;
  Thresholds thresholds;
  OutputPaths output;

  /// Throws ConfigError on any inconsistency.
  void validate() const {
    if (n_runs < 1) throw ConfigError("n_runs must be >= 1");
    if (workers < 1) throw ConfigError("workers must be >= 1");
    if (protocol != Protocol::FreeRuns && model != Model::Quantum)
      throw ConfigError(std::string(name(protocol)) + " requires model = quantum");
    if (protocol == Protocol::PreparedRuns &&
        !(std::holds_alternative<EigenstatePrep>(prep) &&
          std::get<EigenstatePrep>(prep) == EigenstatePrep{Setting::A, Outcome::Plus}))
      throw ConfigError("prepared-runs requires prep {\"eigenstate\": \"A+\"}");
    if (!(depolarizing >= 0.0 && depolarizing <= 1.0)) throw ConfigError("depolarizing must lie in [0, 1]");
    if (!(thresholds.suggestive <= thresholds.violated)) throw ConfigError("thresholds: suggestive must be <= violated");
  }
};

inline Protocol protocol_from_name(const std::string& s) {
  if (s == "free-runs") return Protocol::FreeRuns;
  if (s == "two-series") return Protocol::TwoSeries;
  if (s == "prepared-runs") return Protocol::PreparedRuns;
  throw ConfigError("unknown protocol '" + s + "'");
}

inline Model model_from_name(const std::string& s) {
  if (s == "lhv") return Model::Lhv;
  if (s == "quantum") return Model::Quantum;
  throw ConfigError("unknown model '" + s + "'");
}

inline std::optional<std::uint64_t> seed_from_env() {
  const char* env = std::getenv("TBS_SEED");
  if (env == nullptr || *env == '\0') return std::nullopt;
  try {
    return std::stoull(env);
  } catch (const std::exception&) {
    throw ConfigError(std::string("TBS_SEED is not an unsigned integer: ") + env);
  }
}

inline ExperimentSpec spec_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("spec: expected a JSON object");
  ExperimentSpec s;
  try {
    s.model = model_from_name(j.at("model").get<std::string>());
    s.protocol = protocol_from_name(j.value("protocol", std::string("free-runs")));
    s.config = config_from_json(j.at("config"));
    if (s.model == Model::Quantum) {
      if (j.contains("prep")) {
        s.prep = prep_from_json(j["prep"]);
      } else if (s.protocol == Protocol::PreparedRuns) {
        s.prep = EigenstatePrep{Setting::A, Outcome::Plus};
      }
    } else if (j.contains("prep")) {
      s.distribution = distribution_from_json(j["prep"]);
    }
    const auto n = j.at("n_runs").get<std::int64_t>();
    if (n < 1) throw ConfigError("n_runs must be >= 1");
    s.n_runs = static_cast<std::uint64_t>(n);
    if (j.contains("seed")) {
      s.seed = j["seed"].get<std::uint64_t>();
    } else if (auto env = seed_from_env()) {
      s.seed = *env;
    }
    s.workers = j.value("workers", 1u);
    s.depolarizing = j.value("depolarizing", 1.0);
    if (j.contains("thresholds")) {
      s.thresholds.violated = j["thresholds"].value("violated", s.thresholds.violated);
      s.thresholds.suggestive = j["thresholds"].value("suggestive", s.thresholds.suggestive);
    }
    if (j.contains("output")) {
      const auto& o = j["output"];
      s.output.dir = o.value("dir", s.output.dir);
      s.output.records = o.value("records", s.output.records);
      s.output.report = o.value("report", s.output.report);
      s.output.counts = o.value("counts", s.output.counts);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("spec: ") + e.what());
  }
  s.validate();
  return s;
}

inline json to_json(const ExperimentSpec& s) {
  json j{{"model", std::string(name(s.model))}, {"protocol", std::string(name(s.protocol))}, {"config", to_json(s.config)}};
  j["prep"] = s.model == Model::Quantum ? to_json(s.prep) : to_json(s.distribution);
  j["n_runs"] = s.n_runs;
  j["seed"] = s.seed;
  j["workers"] = s.workers;
  j["depolarizing"] = s.depolarizing;
  j["thresholds"] = json{{"violated", s.thresholds.violated}, {"suggestive", s.thresholds.suggestive}};
  return j;
}

/// Counts and hidden-reality tally for one named series of runs.
struct SeriesData {
  std::string name;
  CountTable table;
  RealityTally tally{};
  bool has_hidden = false;
};

struct ExperimentReport {
  std::optional<ExperimentSpec> spec;
  Protocol protocol = Protocol::FreeRuns;
  Model model = Model::Quantum;
  std::vector<SeriesData> series;
  json estimates = json::object();
  std::vector<InequalityReport> inequalities;
  json prediction;  // null unless the spec is known
  std::optional<double> wall_time_s;
};

/// The output of running a protocol: report plus persisted records.
struct ExperimentOutput {
  ExperimentReport report;
  std::vector<RecordSeries> records;
};

namespace detail {

inline json prob_json(double p, std::uint64_t n) {
  return json{{"value", p}, {"std_error", n == 0 ? 0.0 : std::sqrt(p * (1.0 - p) / static_cast<double>(n))}, {"runs", n}};
}

inline json estimate_json(const Estimate& e) {
  return json{{"value", e.value}, {"std_error", e.std_error}, {"runs", e.runs}};
}

inline std::string pair_name(SettingPair p) { return {label(p.first), label(p.second)}; }

inline std::string cell_name(SettingPair p, Outcome o1, Outcome o2) {
  return std::string("P(") + label(p.first) + sign_char(o1) + ',' + label(p.second) + sign_char(o2) + ')';
}

inline const std::array<SettingPair, 3>& inequality_pairs() {
  static const std::array<SettingPair, 3> pairs{
      SettingPair{Setting::A, Setting::B}, SettingPair{Setting::B, Setting::C}, SettingPair{Setting::A, Setting::C}};
  return pairs;
}

// Probabilities, expectations and perfect-correlation checks from one
// table of free (uniform pair) runs.
inline json free_table_estimates(const SeriesData& s) {
  const CountTable& t = s.table;
  json est = json::object();
  json probs = json::object();
  for (Outcome sign : kOutcomes) {
    const auto cells = triangle_cells(sign);
    for (const Cell& c : {cells.lhs, cells.rhs1, cells.rhs2})
      probs[cell_name(c.pair, c.first, c.second)] = prob_json(cell_fraction(t, c), t.pair_total(c.pair));
  }
  est["probabilities"] = probs;
  json exps = json::object();
  for (SettingPair p : inequality_pairs()) exps["E(" + pair_name(p) + ")"] = estimate_json(estimate_expectation(t, p));
  est["expectations"] = exps;

  std::uint64_t same = 0, disagree = 0;
  for (Setting x : kSettings) {
    const SettingPair p{x, x};
    same += t.pair_total(p);
    disagree += t.at(p, Outcome::Plus, Outcome::Minus) + t.at(p, Outcome::Minus, Outcome::Plus);
  }
  est["perfect_correlation"] = json{{"same_setting_runs", same}, {"disagreements", disagree}};

  if (s.has_hidden) {
    json ratios = json::object();
    for (SettingPair p : inequality_pairs()) {
      const std::string key = std::string("N(") + label(p.first) + "+" + label(p.second) + "-)/N[" + label(p.first) +
                              "+," + label(p.second) + "-]";
      try {
        ratios[key] = counting_identity_ratio(t, s.tally, p, Outcome::Plus, Outcome::Minus);
      } catch (const std::domain_error&) {
        ratios[key] = nullptr;
      }
    }
    est["counting_identity"] = ratios;
    json tally = json::object();
    for (std::size_t i = 0; i < kRealityCount; ++i) tally[JointReality::from_index(i).key()] = s.tally[i];
    est["hidden_tally"] = tally;
  }
  return est;
}

inline std::string two_series_name(SettingPair p, Outcome retained) {
  return pair_name(p) + sign_char(retained);
}

// E(x,y) from a retain-+ series and a retain-- series of fixed-pair runs.
// Each series is normalized by its full length, discarded runs included.
inline Estimate combine_two_series(const CountTable& plus_series, const CountTable& minus_series, SettingPair p,
                                   json& detail_out) {
  const auto n1 = plus_series.total_runs();
  const auto n2 = minus_series.total_runs();
  const double d1 = static_cast<double>(n1), d2 = static_cast<double>(n2);
  const double ppp = n1 ? static_cast<double>(plus_series.at(p, Outcome::Plus, Outcome::Plus)) / d1 : 0.0;
  const double ppm = n1 ? static_cast<double>(plus_series.at(p, Outcome::Plus, Outcome::Minus)) / d1 : 0.0;
  const double pmm = n2 ? static_cast<double>(minus_series.at(p, Outcome::Minus, Outcome::Minus)) / d2 : 0.0;
  const double pmp = n2 ? static_cast<double>(minus_series.at(p, Outcome::Minus, Outcome::Plus)) / d2 : 0.0;
  const std::uint64_t kept1 = plus_series.at(p, Outcome::Plus, Outcome::Plus) + plus_series.at(p, Outcome::Plus, Outcome::Minus);
  const std::uint64_t kept2 = minus_series.at(p, Outcome::Minus, Outcome::Minus) + minus_series.at(p, Outcome::Minus, Outcome::Plus);

  const double m1 = ppp - ppm, m2 = pmm - pmp;
  const double var1 = n1 ? std::max(0.0, ppp + ppm - m1 * m1) / d1 : 0.0;
  const double var2 = n2 ? std::max(0.0, pmm + pmp - m2 * m2) / d2 : 0.0;

  detail_out = json{{cell_name(p, Outcome::Plus, Outcome::Plus), ppp},
                    {cell_name(p, Outcome::Plus, Outcome::Minus), ppm},
                    {cell_name(p, Outcome::Minus, Outcome::Minus), pmm},
                    {cell_name(p, Outcome::Minus, Outcome::Plus), pmp},
                    {"retained_fraction_plus", n1 ? static_cast<double>(kept1) / d1 : 0.0},
                    {"retained_fraction_minus", n2 ? static_cast<double>(kept2) / d2 : 0.0}};
  const bool enough = kept1 > 0 && kept2 > 0;
  return {m1 + m2, std::sqrt(var1 + var2), enough ? std::min(kept1, kept2) : 0};
}

inline const SeriesData* find_series(const std::vector<SeriesData>& all, const std::string& name) {
  for (const auto& s : all)
    if (s.name == name) return &s;
  return nullptr;
}

}  // namespace detail

/// Estimates and inequality reports from series data alone; this is the
/// part of a report that must be recomputable from persisted records.
inline void analyze(ExperimentReport& rep, const Thresholds& th) {
  rep.estimates = json::object();
  rep.inequalities.clear();
  if (rep.protocol == Protocol::TwoSeries) {
    std::array<Estimate, 3> e{};
    json per_pair = json::object();
    for (std::size_t i = 0; i < 3; ++i) {
      const SettingPair p = detail::inequality_pairs()[i];
      const auto* plus = detail::find_series(rep.series, detail::two_series_name(p, Outcome::Plus));
      const auto* minus = detail::find_series(rep.series, detail::two_series_name(p, Outcome::Minus));
      const CountTable empty;
      json d;
      e[i] = detail::combine_two_series(plus ? plus->table : empty, minus ? minus->table : empty, p, d);
      d["E"] = detail::estimate_json(e[i]);
      per_pair[detail::pair_name(p)] = d;
    }
    rep.estimates["series"] = per_pair;
    rep.inequalities.push_back(eval_expect_10(e[0], e[1], e[2], th));
    return;
  }
  if (rep.series.empty()) return;
  const SeriesData& s = rep.series.front();
  rep.estimates = detail::free_table_estimates(s);
  rep.inequalities.push_back(eval_counts_6(s.table, th));
  rep.inequalities.push_back(eval_prob_7(s.table, th));
  rep.inequalities.push_back(eval_prob_8(s.table, th));
  rep.inequalities.push_back(eval_expect_10(s.table, th));
}

/// Exact predictions for the spec's model and preparation.
inline json predict(const ExperimentSpec& spec) {
  const ProbTable exact = spec.model == Model::Lhv ? lhv_prob_table(spec.distribution)
                                                   : quantum_prob_table(resolve(spec.prep, spec.config), spec.config);
  json j = json::object();
  json reps = json::array();
  reps.push_back(to_json(eval_counts_6_expected(exact, static_cast<double>(spec.n_runs))));
  reps.push_back(to_json(eval_prob_7(exact)));
  reps.push_back(to_json(eval_prob_8(exact)));
  auto e10 = eval_expect_10(exact);
  e10.degenerate = spec.config.degenerate();
  reps.push_back(to_json(e10));
  if (spec.model == Model::Quantum) {
    reps.push_back(to_json(quantum_report_16(spec.config)));
    reps.push_back(to_json(quantum_report_18(spec.config)));
  }
  j["exact"] = reps;
  if (spec.protocol == Protocol::PreparedRuns) {
    j["prob7_margin_from_lhs18"] = (quantum_lhs_18(spec.config) - 1.0) / 4.0;
  }
  if (spec.protocol == Protocol::TwoSeries || spec.protocol == Protocol::FreeRuns) {
    j["expect10_lhs_from_lhs16"] = spec.model == Model::Quantum ? json(quantum_lhs_16(spec.config)) : json(nullptr);
  }
  return j;
}

/// Finishes a report: analysis plus, when the spec is known, predictions and
/// the comparison of sampled margins against them.
inline void finalize(ExperimentReport& rep) {
  const Thresholds th = rep.spec ? rep.spec->thresholds : Thresholds{};
  analyze(rep, th);
  for (auto& r : rep.inequalities) r.degenerate = rep.spec ? rep.spec->config.degenerate() : false;
  if (!rep.spec) {
    rep.prediction = nullptr;
    return;
  }
  rep.prediction = predict(*rep.spec);
  if (rep.protocol == Protocol::PreparedRuns) {
    const double expected = rep.prediction["prob7_margin_from_lhs18"].get<double>();
    for (const auto& r : rep.inequalities) {
      if (r.variant != Variant::Prob7 || !r.std_error || !(*r.std_error > 0.0)) continue;
      rep.prediction["prob7_sampled_vs_predicted_z"] = (r.margin - expected) / *r.std_error;
    }
  }
  if (rep.protocol == Protocol::TwoSeries && rep.model == Model::Quantum) {
    const double expected = quantum_lhs_16(rep.spec->config);
    for (const auto& r : rep.inequalities) {
      if (r.variant != Variant::Expect10 || !r.std_error || !(*r.std_error > 0.0)) continue;
      rep.prediction["expect10_sampled_vs_predicted_z"] = (r.lhs - expected) / *r.std_error;
    }
  }
}

inline json to_json(const CountTable& t) {
  json cells = json::array();
  for (std::size_t i = 0; i < 9; ++i) {
    const SettingPair p = pair_from_index(i);
    for (Outcome o1 : kOutcomes)
      for (Outcome o2 : kOutcomes)
        cells.push_back(json{{"first_setting", std::string(1, label(p.first))},
                             {"first_outcome", value(o1)},
                             {"second_setting", std::string(1, label(p.second))},
                             {"second_outcome", value(o2)},
                             {"count", t.at(p, o1, o2)}});
  }
  return cells;
}

inline json to_json(const ExperimentReport& rep) {
  json j = json::object();
  j["spec"] = rep.spec ? to_json(*rep.spec) : json(nullptr);
  j["model"] = std::string(name(rep.model));
  j["protocol"] = std::string(name(rep.protocol));
  j["seed"] = rep.spec ? json(rep.spec->seed) : json(nullptr);
  json series = json::array();
  for (const auto& s : rep.series)
    series.push_back(json{{"name", s.name}, {"runs", s.table.total_runs()}, {"counts", to_json(s.table)}});
  j["series"] = series;
  j["estimates"] = rep.estimates;
  json ineq = json::array();
  for (const auto& r : rep.inequalities) ineq.push_back(to_json(r));
  j["inequalities"] = ineq;
  j["prediction"] = rep.prediction;
  if (rep.wall_time_s) j["wall_time_s"] = *rep.wall_time_s;
  return j;
}

namespace detail {

inline void append_records(std::vector<RecordSeries>& out, const std::string& series, std::vector<RunRecord>&& recs) {
  out.push_back({series, std::move(recs)});
}

inline SeriesData series_from_batch(std::string name, const RunBatch& b, bool hidden) {
  return {std::move(name), b.table, b.tally, hidden};
}

}  // namespace detail

/// Uniform random setting pairs per run, from the spec's LHV distribution or
/// quantum preparation.
inline ExperimentOutput protocol_free_runs(const ExperimentSpec& spec) {
  spec.validate();
  const SamplingPlan plan{spec.seed, 0, spec.workers};
  RunBatch batch = spec.model == Model::Lhv
                       ? simulate_lhv_batch(spec.distribution, spec.n_runs, plan, true)
                       : simulate_quantum_batch(spec.prep, spec.config, spec.n_runs, plan, true, spec.depolarizing);
  ExperimentOutput out;
  out.report.spec = spec;
  out.report.model = spec.model;
  out.report.protocol = spec.protocol;
  const std::string series = spec.protocol == Protocol::PreparedRuns ? "prepared" : "free";
  out.report.series.push_back(detail::series_from_batch(series, batch, spec.model == Model::Lhv));
  detail::append_records(out.records, series, std::move(batch.records));
  finalize(out.report);
  return out;
}

/// Per run: prepare |a+>, then a free two-measurement run.
inline ExperimentOutput protocol_prepared_runs(const ExperimentSpec& spec) {
  if (spec.protocol != Protocol::PreparedRuns) throw ConfigError("spec protocol is not prepared-runs");
  return protocol_free_runs(spec);
}

/// For each of (a,b), (b,c), (a,c): one series of n_runs fixed-pair runs
/// keeping first outcome +1, and one keeping first outcome -1.
inline ExperimentOutput protocol_two_series(const ExperimentSpec& spec) {
  spec.validate();
  if (spec.protocol != Protocol::TwoSeries) throw ConfigError("spec protocol is not two-series");
  ExperimentOutput out;
  out.report.spec = spec;
  out.report.model = spec.model;
  out.report.protocol = spec.protocol;
  std::uint64_t stream = 0;
  for (SettingPair p : detail::inequality_pairs()) {
    for (Outcome retained : kOutcomes) {
      const SamplingPlan plan{spec.seed, stream++, spec.workers};
      RunBatch batch =
          simulate_quantum_fixed_pair(spec.prep, spec.config, p, spec.n_runs, plan, true, spec.depolarizing);
      const std::string name = detail::two_series_name(p, retained);
      out.report.series.push_back(detail::series_from_batch(name, batch, false));
      detail::append_records(out.records, name, std::move(batch.records));
    }
  }
  finalize(out.report);
  return out;
}

inline ExperimentOutput run_experiment(const ExperimentSpec& spec) {
  switch (spec.protocol) {
    case Protocol::TwoSeries: return protocol_two_series(spec);
    case Protocol::PreparedRuns: return protocol_prepared_runs(spec);
    case Protocol::FreeRuns: break;
  }
  return protocol_free_runs(spec);
}

/// Rebuilds a report from persisted records. With a spec, predictions are
/// included and the result matches the simulate-time report exactly.
inline ExperimentReport report_from_records(const std::vector<RecordSeries>& all,
                                            const std::optional<ExperimentSpec>& spec = std::nullopt) {
  ExperimentReport rep;
  rep.spec = spec;
  bool hidden = false;
  for (const auto& rs : all) {
    SeriesData* s = nullptr;
    for (auto& existing : rep.series)
      if (existing.name == rs.name) s = &existing;
    if (s == nullptr) {
      rep.series.push_back({rs.name, {}, {}, false});
      s = &rep.series.back();
    }
    for (const auto& r : rs.runs) {
      s->table.add(r);
      if (r.hidden_reality) {
        ++s->tally[r.hidden_reality->index()];
        s->has_hidden = true;
        hidden = true;
      }
    }
  }
  if (rep.series.empty()) throw ConfigError("records: no runs");
  const std::string& first = rep.series.front().name;
  if (first == "free") {
    rep.protocol = Protocol::FreeRuns;
  } else if (first == "prepared") {
    rep.protocol = Protocol::PreparedRuns;
  } else {
    rep.protocol = Protocol::TwoSeries;
  }
  rep.model = hidden ? Model::Lhv : Model::Quantum;
  if (spec) {
    if (spec->protocol != rep.protocol) throw ConfigError("records were produced by a different protocol than the spec");
    rep.model = spec->model;
    for (auto& s : rep.series) s.has_hidden = spec->model == Model::Lhv;
  }
  finalize(rep);
  return rep;
}

/// Inequality reports as CSV, one row per variant.
inline void write_report_csv(std::ostream& os, const ExperimentReport& rep) {
  os << "variant,lhs,bound,margin,std_error,z_score,violated,verdict,normalization,degenerate\n";
  os.precision(17);
  for (const auto& r : rep.inequalities) {
    os << name(r.variant) << ',' << r.lhs << ',' << r.bound << ',' << r.margin << ',';
    if (r.std_error) os << *r.std_error;
    os << ',';
    if (r.z_score) os << *r.z_score;
    os << ',' << (r.violated ? "true" : "false") << ',' << name(r.verdict) << ',' << r.normalization << ','
       << (r.degenerate ? "true" : "false") << '\n';
  }
}

/// Coplanar sweep: a at 0, b at theta, c at 2 theta, for theta in
/// [0, 180] degrees. Columns: theta_deg, a_dot_b, a_dot_c, lhs16, lhs18.
inline void write_sweep_csv(std::ostream& os, double step_deg) {
  if (!(step_deg > 0.0)) throw ConfigError("sweep step must be > 0");
  os << "theta_deg,a_dot_b,a_dot_c,lhs16,lhs18\n";
  os.precision(17);
  const auto steps = static_cast<std::size_t>(std::floor(180.0 / step_deg + 1e-9));
  for (std::size_t i = 0; i <= steps; ++i) {
    const double deg = static_cast<double>(i) * step_deg;
    const double t = deg * std::numbers::pi / 180.0;
    const Config cfg{Direction::x_axis(), Direction::from_angles(std::numbers::pi / 2, t),
                     Direction::from_angles(std::numbers::pi / 2, 2 * t)};
    const DotTriple d = dots(cfg);
    os << deg << ',' << d.ab << ',' << d.ac << ',' << quantum_lhs_16(d) << ',' << quantum_lhs_18(d) << '\n';
  }
}

}  // namespace tbs
