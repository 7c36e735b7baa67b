#include "test_support.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace immot;
using namespace immot::testing;

namespace {

Gaussian unit_gaussian() {
  Gaussian g;
  g.mean(idx::L) = 4.5;
  g.mean(idx::W) = 1.8;
  g.mean(idx::H) = 1.5;
  return g;
}

std::vector<MotionModel> two_models() {
  return {MotionModel::make(ModelId::CV, 0.1), MotionModel::make(ModelId::CA, 0.1)};
}

}  // namespace

TEST(Defaults, ModePriorAndTpm) {
  const Eigen::VectorXd mu = default_mode_prior();
  ASSERT_EQ(mu.size(), 5);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(mu(i), 0.2);
  Eigen::MatrixXd expected(5, 5);
  expected << 0.85, 0.05, 0.05, 0.05, 0.00,  //
      0.10, 0.85, 0.00, 0.00, 0.05,          //
      0.05, 0.05, 0.80, 0.05, 0.05,          //
      0.05, 0.00, 0.05, 0.80, 0.10,          //
      0.00, 0.05, 0.05, 0.10, 0.80;
  EXPECT_EQ(default_tpm(), expected);
  EXPECT_TRUE(is_row_stochastic(default_tpm()));
}

TEST(Mixing, IdentityTpmGivesIdentity) {
  const ImmState s = make_state(two_models(), unit_gaussian(), Eigen::Vector2d(0.3, 0.7), Eigen::Matrix2d::Identity());
  EXPECT_LT((mixing_probabilities(s) - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Mixing, UniformIsUniform) {
  const ImmState s = make_state(TrackerConfig::default_bank(), unit_gaussian(), Eigen::VectorXd::Constant(5, 0.2),
                                Eigen::MatrixXd::Constant(5, 5, 0.2));
  EXPECT_LT((mixing_probabilities(s).array() - 0.2).abs().maxCoeff(), 1e-15);
}

TEST(Mixing, TwoModeExample) {
  Eigen::Matrix2d tpm;
  tpm << 0.9, 0.1, 0.2, 0.8;
  const ImmState s = make_state(two_models(), unit_gaussian(), Eigen::Vector2d(0.5, 0.5), tpm);
  const Eigen::MatrixXd w = mixing_probabilities(s);
  EXPECT_NEAR(w(0, 0), 0.45 / 0.55, 1e-15);
  EXPECT_NEAR(w(1, 0), 0.10 / 0.55, 1e-15);
  EXPECT_NEAR(w(0, 0), 0.8182, 1e-4);
  EXPECT_NEAR(w(1, 0), 0.1818, 1e-4);
  EXPECT_NEAR(w(0, 1), 0.05 / 0.45, 1e-15);
}

TEST(Mixing, ColumnsSumToOneForRandomStates) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 500; ++i) {
    const ImmState s = make_state(TrackerConfig::default_bank(), unit_gaussian(), random_simplex(rng, 5), random_tpm(rng, 5));
    const Mixing m = compute_mixing(s);
    ASSERT_LT((m.weights.colwise().sum().array() - 1.0).abs().maxCoeff(), 1e-12);
    ASSERT_TRUE(on_simplex(m.predicted_mu));
    ASSERT_FALSE(m.fallback);
  }
}

TEST(Mixing, UnreachableModeFallsBackToUniformColumn) {
  Eigen::Matrix2d tpm;
  tpm << 1.0, 0.0, 1.0, 0.0;
  const ImmState s = make_state(two_models(), unit_gaussian(), Eigen::Vector2d(0.5, 0.5), tpm);
  const Mixing m = compute_mixing(s);
  EXPECT_TRUE(m.fallback);
  EXPECT_DOUBLE_EQ(m.weights(0, 1), 0.5);
  EXPECT_DOUBLE_EQ(m.weights(1, 1), 0.5);
}

TEST(MixEstimates, IdentityAndIdenticalInputs) {
  std::mt19937_64 rng(2);
  ImmState s = make_state(two_models(), unit_gaussian(), Eigen::Vector2d(0.5, 0.5), Eigen::Matrix2d::Identity());
  s.per_model[0].mean(idx::X) = 1.0;
  s.per_model[1].mean(idx::X) = 3.0;
  s.per_model[1].cov = random_spd<kStateDim>(rng);
  const auto same = mix_estimates(s, Eigen::MatrixXd::Identity(2, 2));
  EXPECT_LT((same[0].mean - s.per_model[0].mean).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((same[1].cov - s.per_model[1].cov).cwiseAbs().maxCoeff(), 1e-15);

  ImmState t = make_state(two_models(), s.per_model[1], Eigen::Vector2d(0.5, 0.5), Eigen::Matrix2d::Identity());
  Eigen::Matrix2d mix;
  mix << 0.3, 0.9, 0.7, 0.1;
  for (const Gaussian& g : mix_estimates(t, mix)) {
    EXPECT_LT((g.mean - t.per_model[0].mean).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((g.cov - t.per_model[0].cov).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(MixEstimates, SpreadTermExample) {
  Gaussian a = unit_gaussian(), b = unit_gaussian();
  b.mean(idx::X) = 2.0;
  const Gaussian m = mixture_moments({a, b}, Eigen::Vector2d(0.5, 0.5));
  EXPECT_NEAR(m.mean(idx::X), 1.0, 1e-15);
  EXPECT_NEAR(m.cov(idx::X, idx::X), 2.0, 1e-15);
  EXPECT_NEAR(m.cov(idx::Y, idx::Y), 1.0, 1e-15);
}

TEST(MixEstimates, HeadingAveragedOnTheCircle) {
  Gaussian a = unit_gaussian(), b = unit_gaussian();
  a.mean(idx::Theta) = 3.1;
  b.mean(idx::Theta) = -3.1;
  const Gaussian m = mixture_moments({a, b}, Eigen::Vector2d(0.5, 0.5));
  EXPECT_NEAR(std::abs(m.mean(idx::Theta)), std::numbers::pi, 1e-12);
  // spread of +-0.0416 rad, not +-3.1
  EXPECT_NEAR(m.cov(idx::Theta, idx::Theta), 1.0 + std::pow(std::numbers::pi - 3.1, 2), 1e-12);
}

TEST(MixtureMoments, MatchMonteCarlo) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  std::vector<Gaussian> comps(3);
  for (auto& c : comps) {
    for (int i = 0; i < kStateDim; ++i) c.mean(i) = 2.0 * n(rng);
    c.mean(idx::Theta) = 0.3 * n(rng);
    c.cov = random_spd<kStateDim>(rng);
  }
  const Eigen::VectorXd w = random_simplex(rng, 3);
  const Gaussian g = mixture_moments(comps, w);

  std::discrete_distribution<int> pick(w.data(), w.data() + w.size());
  std::vector<Eigen::LLT<StateMatrix>> chol;
  for (const auto& c : comps) chol.emplace_back(c.cov);
  const int samples = 200'000;
  StateVector sum = StateVector::Zero();
  StateMatrix sq = StateMatrix::Zero();
  for (int s = 0; s < samples; ++s) {
    const int k = pick(rng);
    StateVector e;
    for (int i = 0; i < kStateDim; ++i) e(i) = n(rng);
    const StateVector x = comps[k].mean + chol[k].matrixL() * e;
    sum += x;
    sq += x * x.transpose();
  }
  const StateVector mc_mean = sum / samples;
  const StateMatrix mc_cov = sq / samples - mc_mean * mc_mean.transpose();
  for (int i = 0; i < kStateDim; ++i) {
    EXPECT_NEAR(mc_mean(i), g.mean(i), 0.02 * std::max(1.0, std::abs(g.mean(i))));
    EXPECT_NEAR(mc_cov(i, i), g.cov(i, i), 0.03 * g.cov(i, i));
  }
}

TEST(ImmStep, SingleModelEqualsKalmanFilter) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n;
  const MeasurementModel mm = MeasurementModel::from_sigmas(0.1, 0.3, 0.05);
  const MotionModel cv = MotionModel::make(ModelId::CV, 0.1);
  const BoxMeasurement first{4.5, 1.8, 1.5, 0, 0, 0.75, 0.0, 1};
  Gaussian kf = initial_estimate(first);
  ImmState imm = make_state({cv}, kf, Eigen::VectorXd::Ones(1), Eigen::MatrixXd::Ones(1, 1));
  for (int k = 1; k < 200; ++k) {
    BoxMeasurement z = first;
    z.x = 1.0 * k + 0.3 * n(rng);
    z.y = 0.3 * n(rng);
    kf = update(predict(kf, cv), z, mm).posterior;
    const ImmStepResult r = imm_step(imm, z, mm);
    imm = r.state;
    ASSERT_LT((r.overall.mean - kf.mean).cwiseAbs().maxCoeff(), 1e-9);
    ASSERT_EQ(imm.mu(0), 1.0);
  }
}

TEST(ImmStep, IdenticalModelsReduceToKalmanFilterForAnyTpm) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n;
  const MeasurementModel mm = MeasurementModel::from_sigmas(0.1, 0.3, 0.05);
  const MotionModel ct = MotionModel::make(ModelId::CT, 0.1);
  const BoxMeasurement first{4.5, 1.8, 1.5, 0, 0, 0.75, 0.0, 1};
  Gaussian kf = initial_estimate(first);
  ImmState imm = make_state({ct, ct, ct}, kf, random_simplex(rng, 3), random_tpm(rng, 3));
  for (int k = 1; k < 100; ++k) {
    const BoxMeasurement z{4.5, 1.8, 1.5, 0.8 * k + 0.2 * n(rng), 0.02 * k * k + 0.2 * n(rng), 0.75, 0.1, 1};
    kf = update(predict(kf, ct), z, mm).posterior;
    imm.tpm = random_tpm(rng, 3);
    const ImmStepResult r = imm_step(imm, z, mm);
    imm = r.state;
    ASSERT_LT((r.overall.mean - kf.mean).cwiseAbs().maxCoeff(), 1e-9);
    ASSERT_LT((r.overall.cov - kf.cov).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(ImmStep, ModeProbabilitiesStayOnSimplex) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> n;
  const MeasurementModel mm = MeasurementModel::from_sigmas(0.1, 0.3, 0.05);
  ImmState s = default_state(initial_estimate({4.5, 1.8, 1.5, 0, 0, 0.75, 0, 1}));
  for (int k = 1; k < 300; ++k) {
    const BoxMeasurement z{4.5, 1.8, 1.5, 10 * std::sin(0.05 * k) + 0.3 * n(rng), 0.5 * k + 0.3 * n(rng), 0.75,
                           wrap_angle(0.05 * k), 1};
    s = imm_step(s, z, mm).state;
    ASSERT_TRUE(on_simplex(s.mu));
    ASSERT_TRUE(is_row_stochastic(s.tpm));
  }
}

TEST(ImmStep, PureConstantVelocitySequenceSelectsCv) {
  const MeasurementModel mm = MeasurementModel::from_sigmas(0.1, 0.3, 0.05);
  int cv_wins = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Scenario sc;
    sc.seed = seed;
    sc.duration = 4.9;  // 50 frames
    sc.vehicles = {straight_route(8.0, 100.0)};
    const SimulationOutput sim = generate(sc);
    ImmState s = default_state(initial_estimate(sim.detections[0].detections[0]));
    for (std::size_t k = 1; k < sim.detections.size(); ++k) s = imm_step(s, sim.detections[k].detections[0], mm).state;
    cv_wins += s.best_model() == 0;
  }
  EXPECT_EQ(cv_wins, 20);
}

TEST(ImmStep, OutlierUnderflowKeepsPredictedModeProbabilities) {
  const MeasurementModel mm = MeasurementModel::from_sigmas(0.1, 0.3, 0.05);
  const ImmState s = default_state(initial_estimate({4.5, 1.8, 1.5, 0, 0, 0.75, 0, 1}));
  const ImmPrediction p = imm_predict(s, mm);
  const ModePosterior post = mode_posterior(p, BoxMeasurement{4.5, 1.8, 1.5, 1e4, 1e4, 0.75, 0, 1});
  EXPECT_TRUE(post.underflow);
  EXPECT_LT((post.mu - p.predicted_mu).cwiseAbs().maxCoeff(), 1e-15);
  const ImmStepResult r = imm_update(s, p, BoxMeasurement{4.5, 1.8, 1.5, 1e4, 1e4, 0.75, 0, 1}, mm);
  EXPECT_TRUE(r.underflow);
  EXPECT_TRUE(on_simplex(r.state.mu));
}

TEST(HybridPrediction, OneHotAndConstantMixtures) {
  Gaussian g = unit_gaussian();
  g.mean(idx::Vx) = 2.0;
  g.mean(idx::Ax) = 1.0;
  g.mean(idx::Omega) = 0.3;
  const ImmState before = default_state(g);
  ImmState after = before;
  after.mu = Eigen::VectorXd::Unit(5, 0);
  const StateVector cv = predict_state(before.models[0], g.mean);
  EXPECT_LT((posterior_hybrid_prediction(after, before) - cv).cwiseAbs().maxCoeff(), 1e-15);

  ImmState same = make_state({before.models[0], before.models[0]}, g, Eigen::Vector2d(0.5, 0.5), Eigen::Matrix2d::Identity());
  ImmState w = same;
  w.mu = Eigen::Vector2d(0.13, 0.87);
  EXPECT_LT((posterior_hybrid_prediction(w, same) - cv).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(HybridPrediction, WeightedMeanExample) {
  Gaussian a = unit_gaussian(), b = unit_gaussian();
  b.mean(idx::X) = 2.0;
  const MotionModel cv = MotionModel::make(ModelId::CV, 0.1);
  ImmState before = make_state({cv, cv}, a, Eigen::Vector2d(0.9, 0.1), Eigen::Matrix2d::Identity());
  before.per_model[1] = b;
  ImmState after = before;
  after.mu = Eigen::Vector2d(0.5, 0.5);
  EXPECT_NEAR(posterior_hybrid_prediction(after, before)(idx::X), 1.0, 1e-15);
}
