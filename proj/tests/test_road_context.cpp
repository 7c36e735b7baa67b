#include "test_support.hpp"

#include <gtest/gtest.h>

#include <numbers>
#include <random>

using namespace immot;
using namespace immot::testing;

namespace {

constexpr double kPi = std::numbers::pi;

ContextVector vec(double x, double y, double heading, const std::string& tpm = "a", double toggle = 1.0) {
  ContextVector v;
  v.position = {x, y};
  v.direction = {std::cos(heading), std::sin(heading)};
  v.tpm_id = tpm;
  v.toggle = toggle;
  return v;
}

Eigen::MatrixXd shifted_tpm(double stay) {
  Eigen::MatrixXd p = Eigen::MatrixXd::Constant(5, 5, (1.0 - stay) / 4.0);
  p.diagonal().setConstant(stay);
  return p;
}

ContextMap make_map(std::vector<ContextVector> vs) {
  return ContextMap(std::move(vs), {{"a", shifted_tpm(0.9)}, {"b", shifted_tpm(0.6)}}, default_tpm());
}

StateVector moving(double heading, double speed = 5.0) {
  StateVector s = StateVector::Zero();
  s(idx::Theta) = wrap_angle(heading);
  s(idx::Vx) = speed * std::cos(heading);
  s(idx::Vy) = speed * std::sin(heading);
  return s;
}

}  // namespace

TEST(Activate, Examples) {
  const ContextMap lone = make_map({vec(3, 4, 0)});
  const auto hit = activate(lone, {3, 4, 0}, 3);
  ASSERT_EQ(hit.size(), 1u);
  EXPECT_EQ(hit[0].position, Eigen::Vector2d(3, 4));

  EXPECT_TRUE(activate(ContextMap{}, {0, 0, 0}, 3).empty());

  // Inserted in scrambled order; the oracle is the sorted distance list.
  const ContextMap five = make_map({vec(4, 0, 0), vec(0, 2, 0), vec(-5, 0, 0), vec(0, -1, 0), vec(3, 0, 0)});
  const auto three = activate(five, {0, 0, 0}, 3);
  ASSERT_EQ(three.size(), 3u);
  EXPECT_DOUBLE_EQ(three[0].position.norm(), 1.0);
  EXPECT_DOUBLE_EQ(three[1].position.norm(), 2.0);
  EXPECT_DOUBLE_EQ(three[2].position.norm(), 3.0);
}

TEST(Activate, RadiusLimitsTheNeighbourhood) {
  const ContextMap m = make_map({vec(10, 0, 0), vec(20, 0, 0), vec(-14.9, 0, 0)});
  EXPECT_EQ(activate(m, {0, 0, 0}, 3).size(), 2u);
  EXPECT_EQ(activate(m, {0, 0, 0}, 3, 5.0).size(), 0u);
  EXPECT_THROW(activate(m, {0, 0, 0}, 0), std::invalid_argument);
}

TEST(Activate, MatchesBruteForceOnRandomMaps) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-60, 60);
  std::vector<ContextVector> vs;
  for (int i = 0; i < 400; ++i) vs.push_back(vec(u(rng), u(rng), 0));
  const ContextMap m = make_map(vs);
  for (int q = 0; q < 300; ++q) {
    const Pose2D p{u(rng), u(rng), 0};
    std::vector<std::pair<double, std::size_t>> all;
    for (std::size_t i = 0; i < vs.size(); ++i) {
      const double d = (vs[i].position - Eigen::Vector2d(p.x, p.y)).norm();
      if (d <= 15.0) all.emplace_back(d, i);
    }
    std::sort(all.begin(), all.end());
    const auto got = m.nearest(p.x, p.y, 3, 15.0);
    ASSERT_EQ(got.size(), std::min<std::size_t>(3, all.size()));
    for (std::size_t k = 0; k < got.size(); ++k) ASSERT_EQ(got[k], all[k].second);
  }
}

TEST(Activate, TiesBrokenByInsertionOrder) {
  const ContextMap m = make_map({vec(0, 2, 0, "b"), vec(2, 0, 0, "a"), vec(-2, 0, 0, "a"), vec(0, -2, 0, "b")});
  const auto first = m.nearest(0, 0, 3, 15.0);
  EXPECT_EQ(first, (std::vector<std::size_t>{0, 1, 2}));
  for (int i = 0; i < 10; ++i) EXPECT_EQ(m.nearest(0, 0, 3, 15.0), first);
}

TEST(ContextLikelihood, Examples) {
  const ContextVector east = vec(0, 0, 0);
  EXPECT_NEAR(context_likelihood(moving(0.0), east, 0.0), 1.0, 1e-15);
  EXPECT_NEAR(context_likelihood(moving(kPi / 2), east, 0.0), 0.0, 1e-15);
  EXPECT_NEAR(context_likelihood(moving(kPi), east, 0.0), 0.0, 1e-15);
  const ContextVector slow = vec(0, 0, 0, "a", 0.5);
  EXPECT_NEAR(context_likelihood(moving(kPi / 3), slow, 0.0), 0.25, 1e-15);
}

TEST(ContextLikelihood, StoppedTargetUsesBoxHeading) {
  StateVector s = StateVector::Zero();
  s(idx::Theta) = kPi / 3;
  EXPECT_NEAR(context_likelihood(s, vec(0, 0, 0), 0.0), 0.5, 1e-15);
}

TEST(ContextLikelihood, FollowsToggleSchedule) {
  ContextVector v = vec(0, 0, 0);
  v.toggle_schedule = {{0.0, 1.0}, {5.0, 0.0}, {10.0, 0.5}};
  EXPECT_EQ(context_likelihood(moving(0), v, 4.9), 1.0);
  EXPECT_EQ(context_likelihood(moving(0), v, 5.0), 0.0);
  EXPECT_EQ(context_likelihood(moving(0), v, 12.0), 0.5);
}

TEST(ContextLikelihood, InvariantUnderJointRotation) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-kPi, kPi);
  for (int i = 0; i < 1000; ++i) {
    const double heading = u(rng), dir = u(rng), rot = u(rng);
    const double a = context_likelihood(moving(heading), vec(0, 0, dir), 0.0);
    const double b = context_likelihood(moving(heading + rot), vec(0, 0, dir + rot), 0.0);
    ASSERT_NEAR(a, b, 1e-9);
    ASSERT_GE(a, 0.0);
    ASSERT_LE(a, 1.0);
  }
}

TEST(BlendTpm, Examples) {
  const ContextMap m = make_map({});
  EXPECT_EQ(blend_tpm(m, {vec(0, 0, 0, "a")}, {1.0}), shifted_tpm(0.9));
  const Eigen::MatrixXd half = blend_tpm(m, {vec(0, 0, 0, "a"), vec(0, 0, 0, "b")}, {0.5, 0.5});
  EXPECT_LT((half - 0.5 * (shifted_tpm(0.9) + shifted_tpm(0.6))).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_TRUE(is_row_stochastic(half));
  EXPECT_EQ(blend_tpm(m, {vec(0, 0, 0, "a"), vec(0, 0, 0, "b")}, {0.0, 0.0}), default_tpm());
  EXPECT_EQ(blend_tpm(m, {}, {}), default_tpm());
}

TEST(BlendTpm, RedLightFallsBackToDefault) {
  const ContextMap m = make_map({vec(0, 0, 0, "a", 0.0), vec(1, 0, 0, "b", 0.0)});
  const ContextTpm c = context_tpm(m, moving(0), 0.0, ContextOptions{});
  EXPECT_TRUE(c.fallback);
  EXPECT_EQ(c.active, 2u);
  EXPECT_EQ(c.tpm, default_tpm());
}

TEST(BlendTpm, ConvexCombinationsStayRowStochastic) {
  std::mt19937_64 rng(10);
  std::map<std::string, Eigen::MatrixXd> lib;
  std::vector<ContextVector> active;
  for (int i = 0; i < 6; ++i) {
    lib["t" + std::to_string(i)] = random_tpm(rng, 5);
    active.push_back(vec(0, 0, 0, "t" + std::to_string(i)));
  }
  const ContextMap m({}, lib, default_tpm());
  for (int trial = 0; trial < 1000; ++trial) {
    const Eigen::VectorXd w = random_simplex(rng, 6);
    const Eigen::MatrixXd p = blend_tpm(m, active, std::vector<double>(w.data(), w.data() + w.size()));
    ASSERT_LT((p.rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-9);
    ASSERT_GE(p.minCoeff(), 0.0);
  }
}

TEST(ContextTpm, WeightsFollowAlignment) {
  // One vector along the heading, one perpendicular: only the aligned TPM contributes.
  const ContextMap m = make_map({vec(0, 0, 0, "a"), vec(1, 0, kPi / 2, "b")});
  const ContextTpm c = context_tpm(m, moving(0), 0.0, ContextOptions{});
  EXPECT_FALSE(c.fallback);
  EXPECT_LT((c.tpm - shifted_tpm(0.9)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ContextMap, RejectsInvalidInput) {
  EXPECT_THROW(make_map({vec(0, 0, 0, "missing")}), ValidationError);
  EXPECT_THROW(make_map({vec(0, 0, 0, "a", 0.7)}), ValidationError);
  ContextVector zero = vec(0, 0, 0);
  zero.direction.setZero();
  EXPECT_THROW(make_map({zero}), ValidationError);
  Eigen::MatrixXd bad = default_tpm();
  bad(0, 0) += 0.1;
  EXPECT_THROW(ContextMap({}, {{"a", bad}}, default_tpm()), ValidationError);
}

TEST(ContextMap, DirectionsAreNormalized) {
  ContextVector v = vec(0, 0, 0);
  v.direction = {3, 4};
  const ContextMap m = make_map({v});
  EXPECT_NEAR(m.vectors()[0].direction.norm(), 1.0, 1e-9);
}
