#pragma once

#include "immot/core_types.hpp"
#include "immot/kalman.hpp"
#include "immot/motion_models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace immot {

inline constexpr double kSimplexTol = 1e-9;
inline constexpr double kLikelihoodFloor = 1e-30;

/// Uniform initial mode probabilities over the five-model bank.
inline Eigen::VectorXd default_mode_prior() { return Eigen::VectorXd::Constant(5, 0.2); }

/// Default time-invariant TPM over (CV, CA, CT, CTV, CTA); row j holds Pr(next = i | current = j).
inline Eigen::MatrixXd default_tpm() {
  Eigen::MatrixXd p(5, 5);
  p << 0.85, 0.05, 0.05, 0.05, 0.00,
       0.10, 0.85, 0.00, 0.00, 0.05,
       0.05, 0.05, 0.80, 0.05, 0.05,
       0.05, 0.00, 0.05, 0.80, 0.10,
       0.00, 0.05, 0.05, 0.10, 0.80;
  return p;
}

inline bool is_row_stochastic(const Eigen::MatrixXd& p, double tol = kSimplexTol) {
  if (p.rows() != p.cols() || p.rows() == 0 || !p.allFinite()) return false;
  if ((p.array() < 0.0).any()) return false;
  return ((p.rowwise().sum().array() - 1.0).abs() <= tol).all();
}

inline bool on_simplex(const Eigen::VectorXd& mu, double tol = kSimplexTol) {
  if (mu.size() == 0 || !mu.allFinite() || (mu.array() < 0.0).any()) return false;
  return std::abs(mu.sum() - 1.0) <= tol;
}

/// Per-track bank of model-conditioned estimates with mode probabilities and the current TPM.
struct ImmState {
  std::vector<Gaussian> per_model;
  Eigen::VectorXd mu;
  Eigen::MatrixXd tpm;
  std::vector<MotionModel> models;

  [[nodiscard]] std::size_t size() const { return models.size(); }

  void validate() const {
    const auto m = static_cast<Eigen::Index>(models.size());
    if (m == 0 || static_cast<Eigen::Index>(per_model.size()) != m || mu.size() != m ||
        tpm.rows() != m || tpm.cols() != m) {
      throw ValidationError("ImmState: inconsistent model count");
    }
    if (!on_simplex(mu)) throw ValidationError("ImmState: mode probabilities off the simplex");
    if (!is_row_stochastic(tpm)) throw ValidationError("ImmState: TPM is not row-stochastic");
  }

  [[nodiscard]] std::size_t best_model() const {
    Eigen::Index i = 0;
    mu.maxCoeff(&i);
    return static_cast<std::size_t>(i);
  }
};

// ============================================================
// Moment matching
// ============================================================

/// Weighted mean of states with a circular mean for the heading.
inline StateVector weighted_mean(const std::vector<StateVector>& xs, const Eigen::VectorXd& w) {
  StateVector mean = StateVector::Zero();
  double s = 0.0;
  double c = 0.0;
  for (std::size_t j = 0; j < xs.size(); ++j) {
    const double wj = w(static_cast<Eigen::Index>(j));
    mean += wj * xs[j];
    s += wj * std::sin(xs[j](idx::Theta));
    c += wj * std::cos(xs[j](idx::Theta));
  }
  mean(idx::Theta) = (s == 0.0 && c == 0.0) ? xs.front()(idx::Theta) : wrap_angle(std::atan2(s, c));
  return mean;
}

/// Gaussian-mixture moment match: mean and covariance including the spread of the means.
inline Gaussian mixture_moments(const std::vector<Gaussian>& comps, const Eigen::VectorXd& w) {
  std::vector<StateVector> means;
  means.reserve(comps.size());
  for (const auto& g : comps) means.push_back(g.mean);
  Gaussian out;
  out.mean = weighted_mean(means, w);
  out.cov.setZero();
  for (std::size_t j = 0; j < comps.size(); ++j) {
    StateVector d = comps[j].mean - out.mean;
    d(idx::Theta) = wrap_angle(d(idx::Theta));
    out.cov += w(static_cast<Eigen::Index>(j)) * (comps[j].cov + d * d.transpose());
  }
  symmetrize(out.cov);
  return out;
}

// ============================================================
// Mixing
// ============================================================

struct Mixing {
  Eigen::MatrixXd weights;      // (j, i): Pr(previous mode j | current mode i)
  Eigen::VectorXd predicted_mu;  // sum_j Pr_ji mu_j
  bool fallback = false;         // some mode was unreachable; its column was set uniform
};

inline Mixing compute_mixing(const ImmState& state) {
  const Eigen::Index m = state.mu.size();
  Mixing out;
  out.predicted_mu = state.tpm.transpose() * state.mu;
  out.weights.resize(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double denom = out.predicted_mu(i);
    if (denom > 0.0) {
      for (Eigen::Index j = 0; j < m; ++j) out.weights(j, i) = state.tpm(j, i) * state.mu(j) / denom;
    } else {
      out.weights.col(i).setConstant(1.0 / static_cast<double>(m));
      out.fallback = true;
    }
  }
  return out;
}

inline Eigen::MatrixXd mixing_probabilities(const ImmState& state) { return compute_mixing(state).weights; }

/// Mixed initial conditions for each model-conditioned filter.
inline std::vector<Gaussian> mix_estimates(const ImmState& state, const Eigen::MatrixXd& mix) {
  const std::size_t m = state.size();
  std::vector<Gaussian> out;
  out.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    out.push_back(mixture_moments(state.per_model, mix.col(static_cast<Eigen::Index>(i))));
  }
  return out;
}

// ============================================================
// Filter cycle
// ============================================================

/// Everything that depends on the previous state but not on the measurement,
/// computed once per frame and shared by every candidate measurement.
struct ImmPrediction {
  std::vector<Gaussian> predicted;      // per-model prediction of the mixed estimates
  Eigen::VectorXd predicted_mu;         // prior mode probabilities
  std::vector<StateVector> propagated;  // f_i applied to the previous per-model posteriors
  std::vector<MeasVector> z_pred;       // H x_i
  std::vector<MeasMatrix> S;            // H P_i H^T + R
  std::vector<Eigen::LLT<MeasMatrix>> S_llt;
  std::vector<double> log_norm;         // -0.5 (log det S_i + k log 2 pi)
  bool mixing_fallback = false;
};

inline ImmPrediction imm_predict(const ImmState& state, const MeasurementModel& mm) {
  const Mixing mix = compute_mixing(state);
  const std::vector<Gaussian> mixed = mix_estimates(state, mix.weights);
  ImmPrediction p;
  p.predicted_mu = mix.predicted_mu;
  p.mixing_fallback = mix.fallback;
  const std::size_t m = state.size();
  p.predicted.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    const MotionModel& model = state.models[i];
    p.predicted.push_back(predict(mixed[i], model));
    p.propagated.push_back(predict_state(model, state.per_model[i].mean));
    const Gaussian& g = p.predicted.back();
    p.z_pred.emplace_back(mm.H * g.mean);
    MeasMatrix S = mm.H * g.cov * mm.H.transpose() + mm.R;
    symmetrize(S);
    Eigen::LLT<MeasMatrix> llt(S);
    if (llt.info() != Eigen::Success) {
      S.diagonal().array() += kInnovationJitter;
      llt.compute(S);
      if (llt.info() != Eigen::Success) throw NumericalError("imm_predict: innovation covariance is singular");
    }
    p.log_norm.push_back(-0.5 * (2.0 * llt.matrixLLT().diagonal().array().log().sum() +
                                 kMeasDim * std::log(2.0 * std::numbers::pi)));
    p.S.push_back(S);
    p.S_llt.push_back(std::move(llt));
  }
  return p;
}

struct ModePosterior {
  Eigen::VectorXd mu;
  Eigen::VectorXd log_likelihood;  // per model, before flooring
  bool underflow = false;          // every model hit the likelihood floor; mu = predicted_mu
};

/// Mode probabilities after conditioning on `z`, normalized in log space.
inline ModePosterior mode_posterior(const ImmPrediction& p, const BoxMeasurement& z) {
  const auto m = static_cast<Eigen::Index>(p.predicted.size());
  const MeasVector zv = z.as_vector();
  const double log_floor = std::log(kLikelihoodFloor);
  ModePosterior out;
  out.log_likelihood.resize(m);
  Eigen::VectorXd log_post(m);
  bool all_floored = true;
  for (Eigen::Index i = 0; i < m; ++i) {
    MeasVector nu = zv - p.z_pred[static_cast<std::size_t>(i)];
    nu(idx::Theta) = wrap_angle(nu(idx::Theta));
    const double ll = p.log_norm[static_cast<std::size_t>(i)] -
                      0.5 * p.S_llt[static_cast<std::size_t>(i)].matrixL().solve(nu).squaredNorm();
    out.log_likelihood(i) = ll;
    if (ll > log_floor) all_floored = false;
    const double prior = p.predicted_mu(i);
    log_post(i) = prior > 0.0 ? std::max(ll, log_floor) + std::log(prior)
                              : -std::numeric_limits<double>::infinity();
  }
  if (all_floored) {
    out.mu = p.predicted_mu / p.predicted_mu.sum();
    out.underflow = true;
    return out;
  }
  const double top = log_post.maxCoeff();
  out.mu = (log_post.array() - top).exp();
  out.mu /= out.mu.sum();
  return out;
}

struct ImmStepResult {
  ImmState state;
  Gaussian overall;
  bool underflow = false;
};

/// Per-model KF updates, mode probability update and the overall moment-matched estimate.
inline ImmStepResult imm_update(const ImmState& before, const ImmPrediction& p, const BoxMeasurement& z,
                                const MeasurementModel& mm) {
  ImmStepResult r;
  r.state.models = before.models;
  r.state.tpm = before.tpm;
  r.state.per_model.reserve(before.size());
  for (const Gaussian& g : p.predicted) r.state.per_model.push_back(update(g, z, mm).posterior);
  ModePosterior post = mode_posterior(p, z);
  r.state.mu = std::move(post.mu);
  r.underflow = post.underflow;
  r.overall = mixture_moments(r.state.per_model, r.state.mu);
  return r;
}

/// Propagation without a measurement: per-model predictions and prior mode probabilities.
inline ImmStepResult imm_coast(const ImmState& before, const ImmPrediction& p) {
  ImmStepResult r;
  r.state.models = before.models;
  r.state.tpm = before.tpm;
  r.state.per_model = p.predicted;
  r.state.mu = p.predicted_mu / p.predicted_mu.sum();
  r.overall = mixture_moments(r.state.per_model, r.state.mu);
  return r;
}

inline ImmStepResult imm_step(const ImmState& state, const BoxMeasurement& z, const MeasurementModel& mm) {
  return imm_update(state, imm_predict(state, mm), z, mm);
}

/// sum_i w_i f_i(x_i) over the previous per-model posteriors.
inline StateVector hybrid_prediction(const ImmState& before, const Eigen::VectorXd& weights) {
  std::vector<StateVector> preds;
  preds.reserve(before.size());
  for (std::size_t i = 0; i < before.size(); ++i) {
    preds.push_back(predict_state(before.models[i], before.per_model[i].mean));
  }
  return weighted_mean(preds, weights);
}

/// Hybrid one-step prediction weighted by the mode probabilities obtained after the update.
inline StateVector posterior_hybrid_prediction(const ImmState& state_after, const ImmState& state_before) {
  return hybrid_prediction(state_before, state_after.mu);
}

}  // namespace immot
