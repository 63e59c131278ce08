#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <variant>

#include <json.hpp>

#include "tbs/geometry.hpp"
#include "tbs/inequalities.hpp"
#include "tbs/lhv.hpp"
#include "tbs/optimizer.hpp"
#include "tbs/quantum.hpp"

namespace tbs {

using json = nlohmann::ordered_json;

/// Malformed or inconsistent user input.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline json to_json(const Direction& d) { return json::array({d.x(), d.y(), d.z()}); }

inline Direction direction_from_json(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3) throw ConfigError(what + ": expected an array of three numbers");
  try {
    return make_direction(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
  } catch (const json::exception&) {
    throw ConfigError(what + ": components must be numbers");
  } catch (const std::invalid_argument& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

inline json to_json(const Config& cfg) {
  return json{{"a", to_json(cfg.a)}, {"b", to_json(cfg.b)}, {"c", to_json(cfg.c)}};
}

inline Config config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config: expected an object with keys a, b, c");
  for (const char* key : {"a", "b", "c"})
    if (!j.contains(key)) throw ConfigError(std::string("config: missing direction '") + key + "'");
  return {direction_from_json(j["a"], "config.a"), direction_from_json(j["b"], "config.b"),
          direction_from_json(j["c"], "config.c")};
}

/// {"eigenstate": "A+"}, {"s": .., "phi": .., "e": [..]} or {"bloch": [..]}.
inline StatePrep prep_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("prep: expected an object");
  if (j.contains("eigenstate")) {
    const auto text = j["eigenstate"].get<std::string>();
    if (text.size() != 2 || (text[1] != '+' && text[1] != '-'))
      throw ConfigError("prep.eigenstate: expected e.g. \"A+\" or \"C-\"");
    try {
      return EigenstatePrep{setting_from_label(text.substr(0, 1)), text[1] == '+' ? Outcome::Plus : Outcome::Minus};
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("prep.eigenstate: ") + e.what());
    }
  }
  if (j.contains("bloch")) return QubitState{direction_from_json(j["bloch"], "prep.bloch")};
  if (j.contains("s")) {
    const double s = j["s"].get<double>();
    const double phi = j.value("phi", 0.0);
    const Direction e = j.contains("e") ? direction_from_json(j["e"], "prep.e") : Direction::z_axis();
    try {
      return from_amplitudes(s, phi, e);
    } catch (const std::domain_error& err) {
      throw ConfigError(std::string("prep: ") + err.what());
    }
  }
  throw ConfigError("prep: expected one of 'eigenstate', 's', or 'bloch'");
}

inline json to_json(const StatePrep& prep) {
  if (const auto* eig = std::get_if<EigenstatePrep>(&prep)) {
    return json{{"eigenstate", std::string{label(eig->setting), sign_char(eig->outcome)}}};
  }
  return json{{"bloch", to_json(std::get<QubitState>(prep).bloch)}};
}

/// "uniform" or an object with the eight keys "+++" .. "---".
inline RealityDistribution distribution_from_json(const json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "uniform") return RealityDistribution::uniform();
    throw ConfigError("distribution: only the string \"uniform\" is recognized");
  }
  if (!j.is_object()) throw ConfigError("distribution: expected \"uniform\" or an object of 8 weights");
  std::array<double, kRealityCount> w{};
  for (std::size_t i = 0; i < kRealityCount; ++i) {
    const std::string key = JointReality::from_index(i).key();
    if (!j.contains(key)) throw ConfigError("distribution: missing weight '" + key + "'");
    w[i] = j[key].get<double>();
  }
  if (j.size() != kRealityCount) throw ConfigError("distribution: unexpected extra keys");
  try {
    return RealityDistribution(w);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("distribution: ") + e.what());
  }
}

inline json to_json(const RealityDistribution& d) {
  json j = json::object();
  for (std::size_t i = 0; i < kRealityCount; ++i) j[JointReality::from_index(i).key()] = d.weights()[i];
  return j;
}

inline json to_json(const InequalityReport& r) {
  json j{{"variant", std::string(name(r.variant))},
         {"lhs", r.lhs},
         {"bound", r.bound},
         {"margin", r.margin},
         {"std_error", r.std_error ? json(*r.std_error) : json(nullptr)},
         {"z_score", r.z_score ? json(*r.z_score) : json(nullptr)},
         {"violated", r.violated},
         {"verdict", std::string(name(r.verdict))},
         {"normalization", r.normalization},
         {"degenerate", r.degenerate}};
  return j;
}

inline json to_json(const OptimizationResult& r) {
  json trace = json::array();
  for (const auto& e : r.trace) trace.push_back(json{{"iteration", e.iteration}, {"value", e.value}, {"phase", e.phase}});
  json params = json::object();
  for (const auto& [k, v] : r.method_params) params[k] = v;
  return json{{"objective", r.objective},
              {"best_value", r.best_value},
              {"best_config", to_json(r.best_config)},
              {"best_angles_deg",
               json{{"b_polar", r.best_angles.b_polar * 180.0 / std::numbers::pi},
                    {"b_azimuth", r.best_angles.b_azimuth * 180.0 / std::numbers::pi},
                    {"c_polar", r.best_angles.c_polar * 180.0 / std::numbers::pi},
                    {"c_azimuth", r.best_angles.c_azimuth * 180.0 / std::numbers::pi}}},
              {"dots", json{{"ab", dots(r.best_config).ab}, {"ac", dots(r.best_config).ac}, {"bc", dots(r.best_config).bc}}},
              {"converged", r.converged},
              {"warning", r.warning},
              {"method_params", params},
              {"trace", trace}};
}

}  // namespace tbs
