#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tbs {

inline constexpr double kUnitTolerance = 1e-9;

/// Unit 3-vector on the sphere. Construction always normalizes, so every
/// live Direction satisfies |v| = 1 up to rounding.
class Direction {
public:
  /// Defaults to the +z axis, the conventional reference direction.
  constexpr Direction() = default;

  static Direction from_components(double x, double y, double z) {
    const double norm = std::sqrt(x * x + y * y + z * z);
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      throw std::invalid_argument("direction: zero or non-finite vector");
    }
    Direction d;
    // Input that is already unit to rounding is kept bit-for-bit, so that
    // serialized directions read back identically.
    if (std::abs(norm - 1.0) <= 4 * std::numeric_limits<double>::epsilon()) {
      d.v_ = {x, y, z};
    } else {
      d.v_ = {x / norm, y / norm, z / norm};
    }
    return d;
  }

  static Direction x_axis() { return from_components(1, 0, 0); }
  static Direction y_axis() { return from_components(0, 1, 0); }
  static Direction z_axis() { return from_components(0, 0, 1); }

  /// Polar angle from +z and azimuth from +x, both in radians.
  static Direction from_angles(double polar, double azimuth) {
    const double s = std::sin(polar);
    return from_components(s * std::cos(azimuth), s * std::sin(azimuth), std::cos(polar));
  }

  constexpr double x() const { return v_[0]; }
  constexpr double y() const { return v_[1]; }
  constexpr double z() const { return v_[2]; }
  constexpr const std::array<double, 3>& components() const { return v_; }

  Direction operator-() const {
    Direction d;
    d.v_ = {-v_[0], -v_[1], -v_[2]};
    return d;
  }

  friend bool operator==(const Direction&, const Direction&) = default;

private:
  std::array<double, 3> v_{0.0, 0.0, 1.0};
};

inline Direction make_direction(double x, double y, double z) {
  return Direction::from_components(x, y, z);
}

inline std::ostream& operator<<(std::ostream& os, const Direction& d) {
  return os << '(' << d.x() << ", " << d.y() << ", " << d.z() << ')';
}

/// Scalar product, clamped to [-1, 1]; exactly +-1 for identical or
/// antipodal directions.
inline double dot(const Direction& u, const Direction& v) {
  if (u == v) return 1.0;
  if (u == -v) return -1.0;
  const double raw = u.x() * v.x() + u.y() * v.y() + u.z() * v.z();
  return std::clamp(raw, -1.0, 1.0);
}

struct EigenAmplitudes {
  double plus;
  double minus;
};

/// Real amplitudes of |x+> on the {|e+>, |e->} basis. Valid as a state
/// decomposition only for coplanar geometry (no azimuthal phase).
inline EigenAmplitudes eigen_amplitudes(const Direction& x, const Direction& e) {
  const double c = dot(x, e);
  return {std::sqrt((1.0 + c) / 2.0), std::sqrt((1.0 - c) / 2.0)};
}

/// Dichotomic measurement result.
enum class Outcome : std::int8_t { Plus = 1, Minus = -1 };

constexpr int value(Outcome o) { return static_cast<int>(o); }
constexpr Outcome flip(Outcome o) { return o == Outcome::Plus ? Outcome::Minus : Outcome::Plus; }
constexpr std::size_t index(Outcome o) { return o == Outcome::Plus ? 0 : 1; }
constexpr Outcome outcome_from_index(std::size_t i) { return i == 0 ? Outcome::Plus : Outcome::Minus; }
constexpr char sign_char(Outcome o) { return o == Outcome::Plus ? '+' : '-'; }

inline Outcome outcome_from_value(int v) {
  if (v == 1) return Outcome::Plus;
  if (v == -1) return Outcome::Minus;
  throw std::invalid_argument("outcome must be +1 or -1, got " + std::to_string(v));
}

inline constexpr std::array<Outcome, 2> kOutcomes{Outcome::Plus, Outcome::Minus};

enum class Setting : std::uint8_t { A = 0, B = 1, C = 2 };

inline constexpr std::array<Setting, 3> kSettings{Setting::A, Setting::B, Setting::C};

constexpr std::size_t index(Setting s) { return static_cast<std::size_t>(s); }
constexpr char label(Setting s) { return static_cast<char>('A' + static_cast<int>(s)); }

inline Setting setting_from_label(std::string_view text) {
  if (text.size() == 1) {
    switch (text[0]) {
      case 'A': case 'a': return Setting::A;
      case 'B': case 'b': return Setting::B;
      case 'C': case 'c': return Setting::C;
      default: break;
    }
  }
  throw std::invalid_argument("unknown setting label '" + std::string(text) + "'");
}

/// Ordered pair of settings for one run: first measurement, then second.
struct SettingPair {
  Setting first;
  Setting second;
  friend bool operator==(const SettingPair&, const SettingPair&) = default;
};

constexpr std::size_t pair_index(SettingPair p) { return index(p.first) * 3 + index(p.second); }
constexpr SettingPair pair_from_index(std::size_t i) {
  return {static_cast<Setting>(i / 3), static_cast<Setting>(i % 3)};
}

/// The three measurement directions a, b, c.
struct Config {
  Direction a;
  Direction b;
  Direction c;

  const Direction& operator[](Setting s) const {
    switch (s) {
      case Setting::A: return a;
      case Setting::B: return b;
      default: return c;
    }
  }

  /// True when any two directions coincide or are antipodal.
  bool degenerate(double tol = kUnitTolerance) const {
    auto close = [tol](double d) { return std::abs(std::abs(d) - 1.0) <= tol; };
    return close(dot(a, b)) || close(dot(b, c)) || close(dot(a, c));
  }
};

/// Pairwise scalar products of a Config. Every objective in this library
/// depends on a configuration only through these three numbers.
struct DotTriple {
  double ab;
  double ac;
  double bc;
};

inline DotTriple dots(const Config& cfg) {
  return {dot(cfg.a, cfg.b), dot(cfg.a, cfg.c), dot(cfg.b, cfg.c)};
}

/// Proper rotation stored as a row-major 3x3 matrix.
struct Rotation {
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  /// Rotation from a (not necessarily normalized) quaternion.
  static Rotation from_quaternion(double w, double x, double y, double z) {
    const double n = std::sqrt(w * w + x * x + y * y + z * z);
    w /= n; x /= n; y /= n; z /= n;
    Rotation r;
    r.m = {1 - 2 * (y * y + z * z), 2 * (x * y - w * z),     2 * (x * z + w * y),
           2 * (x * y + w * z),     1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
           2 * (x * z - w * y),     2 * (y * z + w * x),     1 - 2 * (x * x + y * y)};
    return r;
  }

  /// Rotation taking `from` onto `to` about their common normal.
  static Rotation aligning(const Direction& from, const Direction& to) {
    const double c = from.x() * to.x() + from.y() * to.y() + from.z() * to.z();
    if (c < -1.0 + 1e-12) {
      // Antipodal: half-turn about any axis orthogonal to `from`.
      const double ax = std::abs(from.x()), ay = std::abs(from.y()), az = std::abs(from.z());
      std::array<double, 3> helper{0, 0, 0};
      if (ax <= ay && ax <= az) helper[0] = 1; else if (ay <= az) helper[1] = 1; else helper[2] = 1;
      const double nx = from.y() * helper[2] - from.z() * helper[1];
      const double ny = from.z() * helper[0] - from.x() * helper[2];
      const double nz = from.x() * helper[1] - from.y() * helper[0];
      return from_quaternion(0.0, nx, ny, nz);
    }
    // Quaternion (1 + c, from x to), normalized inside from_quaternion.
    const double nx = from.y() * to.z() - from.z() * to.y();
    const double ny = from.z() * to.x() - from.x() * to.z();
    const double nz = from.x() * to.y() - from.y() * to.x();
    return from_quaternion(1.0 + c, nx, ny, nz);
  }

  Direction apply(const Direction& d) const {
    return make_direction(m[0] * d.x() + m[1] * d.y() + m[2] * d.z(),
                          m[3] * d.x() + m[4] * d.y() + m[5] * d.z(),
                          m[6] * d.x() + m[7] * d.y() + m[8] * d.z());
  }

  Config apply(const Config& cfg) const { return {apply(cfg.a), apply(cfg.b), apply(cfg.c)}; }
};

/// Polar and azimuthal angle of a direction, radians.
struct SphericalAngles {
  double polar;
  double azimuth;
};

inline SphericalAngles to_angles(const Direction& d) {
  return {std::acos(std::clamp(d.z(), -1.0, 1.0)), std::atan2(d.y(), d.x())};
}

}  // namespace tbs
