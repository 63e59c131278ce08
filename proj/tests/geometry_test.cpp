#include <cmath>
#include <numbers>
#include <stdexcept>

#include <gtest/gtest.h>

#include "tbs/geometry.hpp"
#include "tbs/optimizer.hpp"
#include "tbs/random.hpp"

namespace {

using tbs::Direction;
using tbs::make_direction;

TEST(MakeDirection, NormalizesInput) {
  const Direction z = make_direction(0, 0, 1);
  EXPECT_EQ(z.x(), 0.0);
  EXPECT_EQ(z.z(), 1.0);

  const Direction x = make_direction(2, 0, 0);
  EXPECT_DOUBLE_EQ(x.x(), 1.0);
  EXPECT_DOUBLE_EQ(x.y(), 0.0);

  const Direction d = make_direction(1, 1, 0);
  EXPECT_NEAR(d.x(), std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(d.y(), std::sqrt(0.5), 1e-15);
  EXPECT_EQ(d.z(), 0.0);
}

TEST(MakeDirection, RejectsZeroVector) {
  EXPECT_THROW(make_direction(0, 0, 0), std::invalid_argument);
  EXPECT_THROW(make_direction(NAN, 0, 1), std::invalid_argument);
}

TEST(Dot, BasicValues) {
  const Direction z = Direction::z_axis();
  EXPECT_DOUBLE_EQ(tbs::dot(z, z), 1.0);
  EXPECT_DOUBLE_EQ(tbs::dot(z, Direction::x_axis()), 0.0);
  EXPECT_NEAR(tbs::dot(z, Direction::from_angles(std::numbers::pi / 3, 0.7)), 0.5, 1e-15);
}

TEST(Dot, SymmetricUnitAndClamped) {
  tbs::Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    const Direction u = tbs::random_direction(rng);
    const Direction v = tbs::random_direction(rng);
    EXPECT_EQ(tbs::dot(u, v), tbs::dot(v, u));
    EXPECT_NEAR(tbs::dot(u, u), 1.0, 1e-12);
    EXPECT_LE(tbs::dot(u, u), 1.0);
    EXPECT_GE(tbs::dot(u, -u), -1.0);
  }
}

TEST(EigenAmplitudes, SpecialDirections) {
  const Direction e = Direction::z_axis();
  auto same = tbs::eigen_amplitudes(e, e);
  EXPECT_DOUBLE_EQ(same.plus, 1.0);
  EXPECT_DOUBLE_EQ(same.minus, 0.0);

  auto perp = tbs::eigen_amplitudes(Direction::x_axis(), e);
  EXPECT_NEAR(perp.plus, std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(perp.minus, std::sqrt(0.5), 1e-15);

  auto anti = tbs::eigen_amplitudes(-e, e);
  EXPECT_DOUBLE_EQ(anti.plus, 0.0);
  EXPECT_DOUBLE_EQ(anti.minus, 1.0);
}

TEST(EigenAmplitudes, NormalizedForRandomPairs) {
  tbs::Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const auto amp = tbs::eigen_amplitudes(tbs::random_direction(rng), tbs::random_direction(rng));
    EXPECT_GE(amp.plus, 0.0);
    EXPECT_LE(amp.plus, 1.0);
    EXPECT_GE(amp.minus, 0.0);
    EXPECT_LE(amp.minus, 1.0);
    EXPECT_NEAR(amp.plus * amp.plus + amp.minus * amp.minus, 1.0, 1e-12);
  }
}

TEST(Config, DegenerateFlag) {
  const tbs::Config generic{Direction::x_axis(), Direction::y_axis(), Direction::z_axis()};
  EXPECT_FALSE(generic.degenerate());
  const tbs::Config equal{Direction::x_axis(), Direction::x_axis(), Direction::z_axis()};
  EXPECT_TRUE(equal.degenerate());
  const tbs::Config antipodal{Direction::x_axis(), Direction::y_axis(), -Direction::x_axis()};
  EXPECT_TRUE(antipodal.degenerate());
}

TEST(Rotation, AligningMapsSourceOntoTarget) {
  tbs::Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const Direction from = tbs::random_direction(rng);
    const Direction to = tbs::random_direction(rng);
    EXPECT_NEAR(tbs::dot(tbs::Rotation::aligning(from, to).apply(from), to), 1.0, 1e-12);
  }
  const Direction z = Direction::z_axis();
  EXPECT_NEAR(tbs::dot(tbs::Rotation::aligning(-z, z).apply(-z), z), 1.0, 1e-12);
  EXPECT_NEAR(tbs::dot(tbs::Rotation::aligning(z, z).apply(z), z), 1.0, 1e-15);
}

TEST(Rotation, PreservesDotProducts) {
  tbs::Rng rng(8);
  for (int i = 0; i < 200; ++i) {
    const tbs::Config cfg = tbs::random_config(rng);
    const auto before = tbs::dots(cfg);
    const auto after = tbs::dots(tbs::random_rotation(rng).apply(cfg));
    EXPECT_NEAR(before.ab, after.ab, 1e-12);
    EXPECT_NEAR(before.ac, after.ac, 1e-12);
    EXPECT_NEAR(before.bc, after.bc, 1e-12);
  }
}

TEST(Labels, RoundTrip) {
  for (auto s : tbs::kSettings) EXPECT_EQ(tbs::setting_from_label(std::string(1, tbs::label(s))), s);
  EXPECT_THROW(tbs::setting_from_label("D"), std::invalid_argument);
  EXPECT_THROW(tbs::outcome_from_value(0), std::invalid_argument);
  for (std::size_t i = 0; i < 9; ++i) EXPECT_EQ(tbs::pair_index(tbs::pair_from_index(i)), i);
}

}  // namespace
