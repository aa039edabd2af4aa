#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "poco/core.hpp"

namespace poco {

/// A round's minimizer as reported by the optimum oracle. residual is the
/// fixed-point gap of the projected-gradient map at the minimizer; converged
/// is false when the iteration budget ran out (the best iterate is still
/// returned).
template <typename Scalar = double>
struct RoundOptimum {
  Vector<Scalar> minimizer;
  Scalar value = Scalar(0);
  Scalar residual = std::numeric_limits<Scalar>::infinity();
  bool converged = false;
  int iterations = 0;
};

/// Per-round optimum oracle: projected gradient with Nesterov momentum and
/// gradient-based restarts, stopped on the fixed-point residual
/// ||x - Pi(x - grad f(x)/L)|| <= tol. Uses the loss's Lipschitz hint for the
/// step when present; otherwise the curvature estimate grows by
/// sufficient-decrease backtracking.
template <typename Scalar>
RoundOptimum<Scalar> round_optimum(const LossRound<Scalar>& loss, const BoxSet<Scalar>& set,
                                   Scalar tol = Scalar(1e-9), int max_iters = 100000,
                                   const Vector<Scalar>* warm_start = nullptr) {
  if (!(tol > Scalar(0))) throw std::invalid_argument("round_optimum: tol must be positive");
  if (max_iters < 1) throw std::invalid_argument("round_optimum: max_iters must be positive");
  if (!loss.value || !loss.gradient)
    throw std::invalid_argument("round_optimum: loss must provide value and gradient");

  const bool fixed_curvature = loss.gradient_lipschitz.has_value();
  Scalar curvature = fixed_curvature ? *loss.gradient_lipschitz : Scalar(1);
  if (!(curvature > Scalar(0)))
    throw std::invalid_argument("round_optimum: Lipschitz hint must be positive");

  Vector<Scalar> x = warm_start != nullptr
                         ? project(set, *warm_start)
                         : Vector<Scalar>((set.lower() + set.upper()) / Scalar(2));
  Vector<Scalar> y = x;
  Vector<Scalar> x_prev = x;
  Scalar theta(1);

  RoundOptimum<Scalar> best;
  best.minimizer = x;
  best.value = loss.value(x);
  best.residual = std::numeric_limits<Scalar>::infinity();

  for (int k = 0; k < max_iters; ++k) {
    const Vector<Scalar> grad_y = loss.gradient(y);
    Vector<Scalar> x_new = project(set, y - grad_y / curvature);
    if (!fixed_curvature) {
      // Grow the curvature estimate until the quadratic upper model holds.
      const Scalar f_y = loss.value(y);
      for (int doubling = 0; doubling < 200; ++doubling) {
        const Vector<Scalar> offset = x_new - y;
        const Scalar model = f_y + grad_y.dot(offset) +
                             curvature / 2 * offset.squaredNorm();
        if (loss.value(x_new) <= model + Scalar(1e-12) * (Scalar(1) + std::abs(model))) break;
        curvature *= 2;
        x_new = project(set, y - grad_y / curvature);
      }
    }

    const Vector<Scalar> grad_new = loss.gradient(x_new);
    const Scalar residual = (x_new - project(set, x_new - grad_new / curvature)).norm();
    if (residual < best.residual) {
      best.minimizer = x_new;
      best.residual = residual;
      best.iterations = k + 1;
    }
    if (residual <= tol) {
      best.value = loss.value(best.minimizer);
      best.converged = true;
      best.iterations = k + 1;
      return best;
    }

    // Nesterov momentum with a gradient-based restart.
    if ((y - x_new).dot(x_new - x_prev) > Scalar(0)) {
      theta = Scalar(1);
      y = x_new;
    } else {
      const Scalar theta_next = (Scalar(1) + std::sqrt(Scalar(1) + 4 * theta * theta)) / 2;
      y = x_new + ((theta - Scalar(1)) / theta_next) * (x_new - x_prev);
      theta = theta_next;
    }
    x_prev = x_new;
  }

  best.value = loss.value(best.minimizer);
  best.converged = false;
  return best;
}

/// Dynamic-regret accounting for one optimizer path: cumulative regret and
/// per-round increments per algorithm name, plus the path variation V_T of
/// the per-round minimizers. Owned and updated by a single runner.
template <typename Scalar = double>
class RegretLedger {
 public:
  /// Adds f_t(played) - f_t(x*) to the named series (unknown names
  /// auto-register) and returns the increment. The first accumulate call for
  /// a new round index also extends V_T.
  Scalar accumulate(const std::string& name, const LossRound<Scalar>& loss,
                    const Vector<Scalar>& played, const RoundOptimum<Scalar>& optimum) {
    if (!loss.value) throw std::invalid_argument("RegretLedger: loss has no value function");
    const Scalar increment = loss.value(played) - optimum.value;
    cumulative_[name] += increment;
    increments_[name].push_back(increment);
    if (!has_round_ || loss.round != last_round_) {
      if (has_round_ && previous_optimum_.size() == optimum.minimizer.size())
        path_variation_ += (optimum.minimizer - previous_optimum_).norm();
      previous_optimum_ = optimum.minimizer;
      last_round_ = loss.round;
      has_round_ = true;
    }
    return increment;
  }

  Scalar cumulative(const std::string& name) const {
    auto it = cumulative_.find(name);
    return it == cumulative_.end() ? Scalar(0) : it->second;
  }

  const std::vector<Scalar>& increments(const std::string& name) const {
    static const std::vector<Scalar> empty;
    auto it = increments_.find(name);
    return it == increments_.end() ? empty : it->second;
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    out.reserve(cumulative_.size());
    for (const auto& [name, value] : cumulative_) out.push_back(name);
    return out;
  }

  Scalar path_variation() const { return path_variation_; }

 private:
  std::map<std::string, Scalar> cumulative_;
  std::map<std::string, std::vector<Scalar>> increments_;
  Scalar path_variation_ = Scalar(0);
  Vector<Scalar> previous_optimum_;
  int last_round_ = 0;
  bool has_round_ = false;
};

/// Predictive-OGD regret bound (7 X^2/4 + G^2/2 + X V_T - delta) sqrt(T).
template <typename Scalar>
Scalar pogd_bound(Scalar norm_bound_x, Scalar gradient_bound, Scalar path_variation,
                  Scalar delta, long rounds) {
  if (norm_bound_x < Scalar(0) || gradient_bound < Scalar(0) ||
      path_variation < Scalar(0) || delta < Scalar(0) || rounds < 0)
    throw std::invalid_argument("pogd_bound: inputs must be nonnegative");
  return (Scalar(7) * norm_bound_x * norm_bound_x / Scalar(4) +
          gradient_bound * gradient_bound / Scalar(2) +
          norm_bound_x * path_variation - delta) *
         std::sqrt(Scalar(rounds));
}

/// Fixed-step predictive regret bound: the base algorithm's regret less
/// T nu delta.
template <typename Scalar>
Scalar poco_bound(Scalar oco_bound, long rounds, Scalar nu, Scalar delta) {
  if (nu < Scalar(0) || nu > Scalar(1))
    throw std::invalid_argument("poco_bound: nu must lie in [0, 1]");
  if (!(delta > Scalar(0)))
    throw std::invalid_argument("poco_bound: delta must be positive");
  return oco_bound - Scalar(rounds) * nu * delta;
}

/// Backtracking predictive regret bound: the base algorithm's regret less
/// 2 T nu Delta.
template <typename Scalar>
Scalar pocob_bound(Scalar oco_bound, long rounds, Scalar nu, Scalar time_lipschitz) {
  if (nu < Scalar(0) || nu > Scalar(1))
    throw std::invalid_argument("pocob_bound: nu must lie in [0, 1]");
  if (time_lipschitz < Scalar(0))
    throw std::invalid_argument("pocob_bound: time Lipschitz bound must be nonnegative");
  return oco_bound - 2 * Scalar(rounds) * nu * time_lipschitz;
}

}  // namespace poco
