#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <utility>

#include "poco/core.hpp"
#include "poco/forecaster.hpp"

namespace poco {

enum class GateReason { NormGateFailed, DirectionTooShort, ArmijoExhausted, Fired };

inline const char* to_string(GateReason reason) {
  switch (reason) {
    case GateReason::NormGateFailed: return "norm-gate-failed";
    case GateReason::DirectionTooShort: return "direction-too-short";
    case GateReason::ArmijoExhausted: return "armijo-exhausted";
    case GateReason::Fired: return "fired";
  }
  return "unknown";
}

/// Outcome of a gate evaluation. When the gate does not fire the candidate is
/// exactly the OCO output, and step is 0.
template <typename Scalar = double>
struct GateVerdict {
  bool fired = false;
  GateReason reason = GateReason::NormGateFailed;
  Scalar step = Scalar(0);   // > 0 iff fired
  Vector<Scalar> candidate;  // decision to play
  Vector<Scalar> direction;  // trial direction d (empty if never formed)
};

/// Parameters of the fixed-step admissibility test for losses with an
/// L-Lipschitz gradient.
template <typename Scalar = double>
struct FixedStepGateConfig {
  Scalar epsilon;    // forecast error bound, > 0
  Scalar delta;      // desired per-round improvement, > 0
  Scalar lipschitz;  // gradient Lipschitz constant L, > 0
  Scalar beta;       // predictive step, 0 < beta <= 1/L

  void validate() const {
    if (!(epsilon > Scalar(0)))
      throw std::invalid_argument("FixedStepGateConfig: epsilon must be positive");
    if (!(delta > Scalar(0)))
      throw std::invalid_argument("FixedStepGateConfig: delta must be positive");
    if (!(lipschitz > Scalar(0)))
      throw std::invalid_argument("FixedStepGateConfig: lipschitz must be positive");
    if (!(beta > Scalar(0)) ||
        beta > Scalar(1) / lipschitz * (Scalar(1) + Scalar(16) * std::numeric_limits<Scalar>::epsilon()))
      throw std::invalid_argument("FixedStepGateConfig: beta must lie in (0, 1/L]");
  }
};

/// Parameters of the backtracking line search. When local_time_variation is
/// set, the acceptance test charges Delta_loc(trial) + Delta_loc(x_bar)
/// instead of the global 2 * time_lipschitz.
template <typename Scalar = double>
struct BacktrackConfig {
  Scalar zeta;             // trial-projection step, > 0
  Scalar beta;             // contraction factor in (0, 1)
  int max_exponent = 100;  // M >= 1
  Scalar epsilon;          // forecast error bound, > 0
  Scalar time_lipschitz;   // Delta >= 0
  std::function<Scalar(const Vector<Scalar>&)> local_time_variation{};

  void validate() const {
    if (!(zeta > Scalar(0)))
      throw std::invalid_argument("BacktrackConfig: zeta must be positive");
    if (!(beta > Scalar(0)) || !(beta < Scalar(1)))
      throw std::invalid_argument("BacktrackConfig: beta must lie in (0, 1)");
    if (max_exponent < 1)
      throw std::invalid_argument("BacktrackConfig: max exponent must be at least 1");
    if (!(epsilon > Scalar(0)))
      throw std::invalid_argument("BacktrackConfig: epsilon must be positive");
    if (time_lipschitz < Scalar(0))
      throw std::invalid_argument("BacktrackConfig: time Lipschitz bound must be nonnegative");
  }
};

/// Counter of rounds where the predictive step moved the decision by at least
/// delta; nu() is the observed ratio over the rounds seen.
template <typename Scalar = double>
struct PredictiveCounter {
  long count = 0;  // c_t, nondecreasing
  Scalar delta = Scalar(0);
  long rounds_seen = 0;

  Scalar nu() const {
    return rounds_seen > 0 ? Scalar(count) / Scalar(rounds_seen) : Scalar(0);
  }
};

/// The predictive trial point Pi(x_bar - step g) and its offset d from x_bar.
template <typename Scalar>
std::pair<Vector<Scalar>, Vector<Scalar>> predictive_candidate(
    const Vector<Scalar>& x_bar, const ForecastGradient<Scalar>& g, Scalar step,
    const BoxSet<Scalar>& set) {
  if (!(step > Scalar(0)))
    throw std::invalid_argument("predictive_candidate: step must be positive");
  if (x_bar.size() != g.estimate.size())
    throw std::invalid_argument("predictive_candidate: dimension mismatch");
  Vector<Scalar> candidate = project(set, x_bar - step * g.estimate);
  Vector<Scalar> direction = candidate - x_bar;
  return {std::move(candidate), std::move(direction)};
}

/// Minimum trial-direction length certifying an improvement of at least delta
/// under an L-Lipschitz gradient: eps/L + sqrt(eps^2/L^2 + 2 delta/L).
template <typename Scalar>
Scalar fixed_step_threshold(const FixedStepGateConfig<Scalar>& cfg) {
  if (!(cfg.lipschitz > Scalar(0)))
    throw std::invalid_argument("fixed_step_threshold: lipschitz must be positive");
  if (cfg.epsilon < Scalar(0) || cfg.delta < Scalar(0))
    throw std::invalid_argument("fixed_step_threshold: epsilon and delta must be nonnegative");
  const Scalar ratio = cfg.epsilon / cfg.lipschitz;
  return ratio + std::sqrt(ratio * ratio + 2 * cfg.delta / cfg.lipschitz);
}

/// Fixed-step admissibility test. Fires iff the norm gate passes and the
/// projected trial direction at step beta reaches the threshold; the fired
/// candidate is then guaranteed to improve the next round's loss by at least
/// cfg.delta.
template <typename Scalar>
GateVerdict<Scalar> fixed_step_gate(const Vector<Scalar>& x_bar,
                                    const ForecastGradient<Scalar>& g,
                                    const FixedStepGateConfig<Scalar>& cfg,
                                    const BoxSet<Scalar>& set) {
  cfg.validate();
  GateVerdict<Scalar> verdict;
  verdict.candidate = x_bar;
  if (!descent_check(g)) {
    verdict.reason = GateReason::NormGateFailed;
    return verdict;
  }
  auto [candidate, direction] = predictive_candidate(x_bar, g, cfg.beta, set);
  verdict.direction = direction;
  if (direction.norm() >= fixed_step_threshold(cfg)) {
    verdict.fired = true;
    verdict.reason = GateReason::Fired;
    verdict.step = cfg.beta;
    verdict.candidate = std::move(candidate);
  } else {
    verdict.reason = GateReason::DirectionTooShort;
  }
  return verdict;
}

/// Backtracking line search over d = Pi(x_bar - zeta g) - x_bar. Accepts the
/// smallest exponent m in {0..M} whose sufficient-decrease condition on the
/// previous (already revealed) loss holds:
///   f(x_bar + beta^m d) <= f(x_bar) + beta^m (g.d - eps ||d||) - 2 Delta.
/// Every quantity is available at decision time. Callers are expected to have
/// verified the norm gate ||g|| > eps. Returns step 0 with reason
/// armijo-exhausted when all exponents fail.
template <typename Scalar>
GateVerdict<Scalar> backtracking_search(const LossRound<Scalar>& prev_loss,
                                        const Vector<Scalar>& x_bar,
                                        const ForecastGradient<Scalar>& g,
                                        const BacktrackConfig<Scalar>& cfg,
                                        const BoxSet<Scalar>& set) {
  cfg.validate();
  if (!prev_loss.value)
    throw std::invalid_argument("backtracking_search: loss has no value function");
  GateVerdict<Scalar> verdict;
  verdict.candidate = x_bar;
  auto [trial_point, direction] = predictive_candidate(x_bar, g, cfg.zeta, set);
  static_cast<void>(trial_point);
  verdict.direction = direction;
  if (direction.isZero(Scalar(0))) {
    verdict.reason = GateReason::DirectionTooShort;
    return verdict;
  }
  const Scalar f_bar = prev_loss.value(x_bar);
  const Scalar slope = g.estimate.dot(direction) - cfg.epsilon * direction.norm();
  Scalar step(1);
  for (int m = 0; m <= cfg.max_exponent; ++m) {
    const Vector<Scalar> trial = x_bar + step * direction;
    const Scalar time_budget =
        cfg.local_time_variation
            ? cfg.local_time_variation(trial) + cfg.local_time_variation(x_bar)
            : 2 * cfg.time_lipschitz;
    if (prev_loss.value(trial) <= f_bar + step * slope - time_budget) {
      verdict.fired = true;
      verdict.reason = GateReason::Fired;
      verdict.step = step;
      verdict.candidate = trial;
      return verdict;
    }
    step *= cfg.beta;
  }
  verdict.reason = GateReason::ArmijoExhausted;
  return verdict;
}

/// The accepted update x_bar + step * d for step in (0, 1]. The endpoint
/// x_bar + d must be feasible; convexity of the set then keeps every partial
/// step feasible.
template <typename Scalar>
Vector<Scalar> pocob_update(const Vector<Scalar>& x_bar, const Vector<Scalar>& d,
                            Scalar step, const BoxSet<Scalar>& set) {
  if (!(step > Scalar(0)) || step > Scalar(1))
    throw std::invalid_argument("pocob_update: step must lie in (0, 1]");
  if (x_bar.size() != d.size())
    throw std::invalid_argument("pocob_update: dimension mismatch");
  const Scalar tol = Scalar(64) * std::numeric_limits<Scalar>::epsilon() *
                     (Scalar(1) + norm_bound(set));
  if (!set.contains(x_bar + d, tol))
    throw std::invalid_argument("pocob_update: endpoint x_bar + d is infeasible");
  return x_bar + step * d;
}

/// Advances the counter after a round: the count grows iff the played point
/// moved at least delta away from the OCO output.
template <typename Scalar>
PredictiveCounter<Scalar> update_counter(PredictiveCounter<Scalar> counter,
                                         const Vector<Scalar>& x_final,
                                         const Vector<Scalar>& x_bar) {
  if (!(counter.delta > Scalar(0)))
    throw std::invalid_argument("update_counter: counter threshold must be positive");
  if (x_final.size() != x_bar.size())
    throw std::invalid_argument("update_counter: dimension mismatch");
  ++counter.rounds_seen;
  if ((x_final - x_bar).norm() >= counter.delta) ++counter.count;
  return counter;
}

/// Checks the feasible-descent inequality g.d <= -(1/step) ||d||^2 for a
/// nonzero direction produced by predictive_candidate. The comparison allows
/// a few ULPs of slack: with an inactive projection the exact-arithmetic
/// inequality holds with zero margin, so rounding alone could flip it.
template <typename Scalar>
bool feasible_descent_inequality_check(const Vector<Scalar>& g, const Vector<Scalar>& d,
                                       Scalar step) {
  if (!(step > Scalar(0)))
    throw std::invalid_argument("feasible_descent_inequality_check: step must be positive");
  if (g.size() != d.size())
    throw std::invalid_argument("feasible_descent_inequality_check: dimension mismatch");
  if (d.isZero(Scalar(0)))
    throw std::invalid_argument("feasible_descent_inequality_check: direction must be nonzero");
  const Scalar lhs = g.dot(d);
  const Scalar d_norm = d.norm();
  const Scalar rhs = -d.squaredNorm() / step;
  const Scalar slack = Scalar(64) * std::numeric_limits<Scalar>::epsilon() *
                       (g.norm() + d_norm / step) * std::max(d_norm, Scalar(1));
  return lhs <= rhs + slack;
}

}  // namespace poco
