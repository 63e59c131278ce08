#include <cmath>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "tbs/harness.hpp"
#include "tbs/optimizer.hpp"

namespace {

using tbs::ConfigError;
using tbs::ExperimentSpec;
using tbs::json;
using tbs::Model;
using tbs::Outcome;
using tbs::Protocol;
using tbs::Setting;
using tbs::Variant;

const tbs::InequalityReport& find(const tbs::ExperimentReport& rep, Variant v) {
  for (const auto& r : rep.inequalities)
    if (r.variant == v) return r;
  throw std::runtime_error("variant missing");
}

ExperimentSpec quantum_spec(Protocol protocol, const tbs::Config& cfg, std::uint64_t n, std::uint64_t seed) {
  ExperimentSpec s;
  s.model = Model::Quantum;
  s.protocol = protocol;
  s.config = cfg;
  s.n_runs = n;
  s.seed = seed;
  if (protocol == Protocol::PreparedRuns) s.prep = tbs::EigenstatePrep{Setting::A, Outcome::Plus};
  return s;
}

tbs::Config coplanar(double deg_b, double deg_c) {
  auto at = [](double deg) { return tbs::Direction::from_angles(std::numbers::pi / 2, deg * std::numbers::pi / 180); };
  return {at(0), at(deg_b), at(deg_c)};
}

TEST(SpecParsing, ValidSpec) {
  const json j = json::parse(R"({"model": "quantum", "protocol": "prepared-runs",
      "config": {"a": [1,0,0], "b": [1,1,0], "c": [0,1,0]}, "n_runs": 10, "seed": 3})");
  const auto s = tbs::spec_from_json(j);
  EXPECT_EQ(s.protocol, Protocol::PreparedRuns);
  EXPECT_TRUE(std::holds_alternative<tbs::EigenstatePrep>(s.prep));
  EXPECT_EQ(s.seed, 3u);
  EXPECT_NEAR(s.config.b.x(), std::sqrt(0.5), 1e-15);
}

TEST(SpecParsing, RejectsInvalidSpecs) {
  auto parse = [](const char* text) { return tbs::spec_from_json(json::parse(text)); };
  EXPECT_THROW(parse(R"({"model": "lhv", "protocol": "two-series", "config": {"a":[1,0,0],"b":[0,1,0],"c":[0,0,1]}, "n_runs": 5})"),
               ConfigError);
  EXPECT_THROW(parse(R"({"model": "quantum", "config": {"a":[1,0,0],"b":[0,1,0],"c":[0,0,1]}, "n_runs": 0})"), ConfigError);
  EXPECT_THROW(parse(R"({"model": "quantum", "config": {"a":[0,0,0],"b":[0,1,0],"c":[0,0,1]}, "n_runs": 5})"), ConfigError);
  EXPECT_THROW(parse(R"({"model": "quantum", "config": {"a":[1,0,0],"b":[0,1,0]}, "n_runs": 5})"), ConfigError);
  EXPECT_THROW(parse(R"({"model": "quantum", "protocol": "prepared-runs", "prep": {"eigenstate": "B+"},
                         "config": {"a":[1,0,0],"b":[0,1,0],"c":[0,0,1]}, "n_runs": 5})"),
               ConfigError);
  EXPECT_THROW(parse(R"({"model": "quantum", "prep": {"s": 2}, "config": {"a":[1,0,0],"b":[0,1,0],"c":[0,0,1]}, "n_runs": 5})"),
               ConfigError);
  EXPECT_THROW(parse(R"({"model": "classical", "config": {"a":[1,0,0],"b":[0,1,0],"c":[0,0,1]}, "n_runs": 5})"), ConfigError);
  EXPECT_THROW(parse(R"({"model": "lhv", "prep": {"+++": 1}, "config": {"a":[1,0,0],"b":[0,1,0],"c":[0,0,1]}, "n_runs": 5})"),
               ConfigError);
}

TEST(SpecParsing, SeedFallsBackToEnvironment) {
  ::setenv("TBS_SEED", "4242", 1);
  const auto s = tbs::spec_from_json(json::parse(
      R"({"model": "lhv", "config": {"a":[1,0,0],"b":[0,1,0],"c":[0,0,1]}, "n_runs": 5})"));
  ::unsetenv("TBS_SEED");
  EXPECT_EQ(s.seed, 4242u);
}

TEST(SpecParsing, JsonEchoRoundTrips) {
  auto s = quantum_spec(Protocol::TwoSeries, tbs::paper_config_16(), 100, 5);
  s.prep = tbs::from_amplitudes(0.3, 1.0, tbs::Direction::z_axis());
  const auto back = tbs::spec_from_json(tbs::to_json(s));
  EXPECT_EQ(tbs::to_json(back).dump(), tbs::to_json(s).dump());
}

TEST(FreeRuns, LhvUniformNeverViolates) {
  ExperimentSpec s;
  s.model = Model::Lhv;
  s.config = tbs::paper_config_16();
  s.n_runs = 1'000'000;
  s.seed = 21;
  const auto out = tbs::protocol_free_runs(s);
  ASSERT_EQ(out.report.inequalities.size(), 4u);
  for (const auto& r : out.report.inequalities) {
    EXPECT_FALSE(r.violated) << tbs::name(r.variant);
    ASSERT_TRUE(r.z_score.has_value());
    EXPECT_LT(*r.z_score, 5.0);
  }
  const auto& ratios = out.report.estimates["counting_identity"];
  for (const auto& [k, v] : ratios.items()) EXPECT_NEAR(v.get<double>(), 9.0, 0.3) << k;
}

TEST(FreeRuns, QuantumPreparedStateViolatesProb7) {
  auto s = quantum_spec(Protocol::FreeRuns, tbs::paper_config_18(), 1'000'000, 22);
  s.prep = tbs::EigenstatePrep{Setting::A, Outcome::Plus};
  const auto out = tbs::protocol_free_runs(s);
  const auto& r = find(out.report, Variant::Prob7);
  EXPECT_TRUE(r.violated);
  EXPECT_GE(*r.z_score, 5.0);
  EXPECT_EQ(out.report.estimates["perfect_correlation"]["disagreements"].get<std::uint64_t>(), 0u);
}

TEST(FreeRuns, SingleRunIsInsufficientEverywhere) {
  ExperimentSpec s;
  s.model = Model::Lhv;
  s.n_runs = 1;
  const auto out = tbs::protocol_free_runs(s);
  for (const auto& r : out.report.inequalities)
    EXPECT_EQ(r.verdict, tbs::Verdict::Insufficient) << tbs::name(r.variant);
  auto q = quantum_spec(Protocol::FreeRuns, tbs::paper_config_18(), 1, 3);
  for (const auto& r : tbs::protocol_free_runs(q).report.inequalities)
    EXPECT_EQ(r.verdict, tbs::Verdict::Insufficient) << tbs::name(r.variant);
}

TEST(TwoSeries, PaperConfigurationGivesSqrt2) {
  const auto out = tbs::protocol_two_series(quantum_spec(Protocol::TwoSeries, tbs::paper_config_16(), 1'000'000, 31));
  ASSERT_EQ(out.report.series.size(), 6u);
  const auto& r = find(out.report, Variant::Expect10);
  EXPECT_NEAR(r.lhs, std::numbers::sqrt2, 5 * *r.std_error);
  EXPECT_TRUE(r.violated);
  const auto& ab = out.report.estimates["series"]["AB"];
  EXPECT_GT(ab["retained_fraction_plus"].get<double>(), 0.0);
  EXPECT_LT(ab["retained_fraction_plus"].get<double>(), 1.0);
}

TEST(TwoSeries, CoplanarSixtyDegrees) {
  const auto out = tbs::protocol_two_series(quantum_spec(Protocol::TwoSeries, coplanar(60, 120), 300'000, 32));
  const auto& r = find(out.report, Variant::Expect10);
  EXPECT_NEAR(r.lhs, 1.5, 5 * *r.std_error);
}

TEST(TwoSeries, DegenerateConfigurationStaysAtBound) {
  const tbs::Direction x = tbs::Direction::x_axis();
  const auto out = tbs::protocol_two_series(quantum_spec(Protocol::TwoSeries, {x, x, x}, 100'000, 33));
  const auto& r = find(out.report, Variant::Expect10);
  // The retain-+ and retain-- series are independent ensembles, so lhs is 1
  // only up to sampling noise.
  EXPECT_NEAR(r.lhs, 1.0, 5 * *r.std_error);
  EXPECT_FALSE(r.violated);
  EXPECT_TRUE(r.degenerate);
}

TEST(TwoSeries, EigenstateOfFirstSettingLeavesOneSeriesEmpty) {
  auto s = quantum_spec(Protocol::TwoSeries, tbs::paper_config_16(), 1000, 34);
  s.prep = tbs::EigenstatePrep{Setting::A, Outcome::Plus};
  const auto out = tbs::protocol_two_series(s);
  EXPECT_EQ(find(out.report, Variant::Expect10).verdict, tbs::Verdict::Insufficient);
}

TEST(PreparedRuns, PaperConfigurationMarginMatchesPrediction) {
  const auto out = tbs::protocol_prepared_runs(quantum_spec(Protocol::PreparedRuns, tbs::paper_config_18(), 1'000'000, 41));
  const auto& r = find(out.report, Variant::Prob7);
  EXPECT_GE(*r.z_score, 5.0);
  EXPECT_NEAR(r.margin, (std::numbers::sqrt2 - 0.5) / 4, 5 * *r.std_error);
  EXPECT_LT(std::abs(out.report.prediction["prob7_sampled_vs_predicted_z"].get<double>()), 5.0);
}

TEST(PreparedRuns, OracleOptimumMarginIsOneThird) {
  const double half = std::acos(1.0 / 3.0) * 180 / std::numbers::pi;
  const auto spec = quantum_spec(Protocol::PreparedRuns, coplanar(half, 2 * half), 1'000'000, 42);
  const auto out = tbs::protocol_prepared_runs(spec);
  const auto& r = find(out.report, Variant::Prob7);
  EXPECT_NEAR(r.margin, 1.0 / 3.0, 5 * *r.std_error);
  const auto& p = out.report.estimates["probabilities"];
  EXPECT_NEAR(p["P(A+,C-)"]["value"].get<double>(), 8.0 / 9, 5 * p["P(A+,C-)"]["std_error"].get<double>());
  EXPECT_NEAR(p["P(A+,B-)"]["value"].get<double>(), 1.0 / 3, 5 * p["P(A+,B-)"]["std_error"].get<double>());
  EXPECT_NEAR(p["P(B+,C-)"]["value"].get<double>(), 2.0 / 9, 5 * p["P(B+,C-)"]["std_error"].get<double>());
}

TEST(PreparedRuns, ACoincidesWithCNoViolation) {
  const tbs::Config cfg{tbs::Direction::x_axis(), tbs::Direction::y_axis(), tbs::Direction::x_axis()};
  const auto out = tbs::protocol_prepared_runs(quantum_spec(Protocol::PreparedRuns, cfg, 100'000, 43));
  const auto& r = find(out.report, Variant::Prob7);
  EXPECT_LE(r.margin, 0.0);
  EXPECT_EQ(out.report.estimates["probabilities"]["P(A+,C-)"]["value"].get<double>(), 0.0);
}

TEST(PreparedRuns, RequiresQuantumEigenstatePrep) {
  ExperimentSpec s = quantum_spec(Protocol::PreparedRuns, tbs::paper_config_18(), 10, 1);
  s.prep = tbs::default_state();
  EXPECT_THROW(tbs::protocol_prepared_runs(s), ConfigError);
  s.prep = tbs::EigenstatePrep{Setting::A, Outcome::Plus};
  s.model = Model::Lhv;
  EXPECT_THROW(tbs::protocol_prepared_runs(s), ConfigError);
}

TEST(CrossProtocol, FreeAndPreparedAgreeOnPbc) {
  auto free = quantum_spec(Protocol::FreeRuns, tbs::paper_config_18(), 500'000, 51);
  free.prep = tbs::EigenstatePrep{Setting::A, Outcome::Plus};
  const auto a = tbs::protocol_free_runs(free).report.estimates["probabilities"]["P(B+,C-)"];
  const auto b = tbs::protocol_prepared_runs(quantum_spec(Protocol::PreparedRuns, tbs::paper_config_18(), 500'000, 52))
                     .report.estimates["probabilities"]["P(B+,C-)"];
  const double diff = a["value"].get<double>() - b["value"].get<double>();
  const double se = std::hypot(a["std_error"].get<double>(), b["std_error"].get<double>());
  EXPECT_LT(std::abs(diff), 5 * se);
}

TEST(Persistence, RecordsRoundTripAndReportRecomputes) {
  for (auto spec : {quantum_spec(Protocol::TwoSeries, tbs::paper_config_16(), 5000, 61),
                    quantum_spec(Protocol::PreparedRuns, tbs::paper_config_18(), 20000, 62)}) {
    spec.workers = 3;
    const auto out = tbs::run_experiment(spec);
    std::stringstream csv;
    tbs::write_records_csv(csv, out.records);
    const auto back = tbs::read_records_csv(csv);
    EXPECT_EQ(back, out.records);
    const auto rep = tbs::report_from_records(back, spec);
    EXPECT_EQ(tbs::to_json(rep).dump(), tbs::to_json(out.report).dump());
    const auto bare = tbs::report_from_records(back);
    EXPECT_EQ(bare.inequalities, out.report.inequalities);
    EXPECT_EQ(bare.protocol, spec.protocol);
  }
}

TEST(Persistence, LhvRecordsCarryHiddenReality) {
  ExperimentSpec s;
  s.model = Model::Lhv;
  s.n_runs = 3000;
  s.seed = 63;
  const auto out = tbs::run_experiment(s);
  std::stringstream csv;
  tbs::write_records_csv(csv, out.records);
  const auto rep = tbs::report_from_records(tbs::read_records_csv(csv));
  EXPECT_EQ(rep.model, Model::Lhv);
  EXPECT_EQ(rep.estimates.dump(), out.report.estimates.dump());
}

TEST(Persistence, MalformedRecordsAreRejected) {
  std::stringstream bad_header("a,b,c\n");
  EXPECT_THROW(tbs::read_records_csv(bad_header), std::runtime_error);
  std::stringstream bad_row(std::string(tbs::kRecordHeader) + "\n0,free,A,2,B,1,\n");
  EXPECT_THROW(tbs::read_records_csv(bad_row), std::runtime_error);
  std::stringstream gap(std::string(tbs::kRecordHeader) + "\n0,free,A,1,B,1,\n2,free,A,1,B,1,\n");
  EXPECT_THROW(tbs::read_records_csv(gap), std::runtime_error);
}

TEST(Persistence, Deterministic) {
  auto spec = quantum_spec(Protocol::FreeRuns, tbs::paper_config_16(), 20000, 64);
  spec.workers = 4;
  std::stringstream a, b;
  tbs::write_records_csv(a, tbs::run_experiment(spec).records);
  tbs::write_records_csv(b, tbs::run_experiment(spec).records);
  EXPECT_EQ(a.str(), b.str());
}

TEST(Sweep, CsvShape) {
  std::stringstream ss;
  tbs::write_sweep_csv(ss, 30.0);
  std::string line;
  std::getline(ss, line);
  EXPECT_EQ(line, "theta_deg,a_dot_b,a_dot_c,lhs16,lhs18");
  int rows = 0;
  while (std::getline(ss, line)) ++rows;
  EXPECT_EQ(rows, 7);
}

TEST(CountCsv, Layout) {
  tbs::CountTable t;
  t.add({Setting::B, Setting::C}, Outcome::Plus, Outcome::Minus, 5);
  std::stringstream ss;
  tbs::write_count_csv(ss, t);
  const std::string text = ss.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "first_setting,first_outcome,second_setting,second_outcome,count");
  EXPECT_NE(text.find("B,1,C,-1,5\n"), std::string::npos);
}

}  // namespace
