#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>

#include "poco/core.hpp"

namespace poco {

/// Step-size parameter of projected online gradient descent.
template <typename Scalar = double>
struct OgdParams {
  Scalar eta;  // > 0; proportional to T^{-1/2} for the sublinear-regret setup
};

/// The usual constant eta = D / (G sqrt(T)) built from the set diameter and a
/// gradient bound.
template <typename Scalar>
Scalar ogd_default_step(const BoxSet<Scalar>& set, Scalar gradient_bound, long rounds) {
  if (gradient_bound <= Scalar(0))
    throw std::invalid_argument("ogd_default_step: gradient bound must be positive");
  if (rounds <= 0)
    throw std::invalid_argument("ogd_default_step: rounds must be positive");
  return diameter(set) / (gradient_bound * std::sqrt(Scalar(rounds)));
}

/// Projected gradient update Pi(x - eta grad) from the just-revealed gradient.
template <typename Scalar, typename DerivedX, typename DerivedG>
Vector<Scalar> ogd_step(const Eigen::MatrixBase<DerivedX>& x,
                        const Eigen::MatrixBase<DerivedG>& grad,
                        const OgdParams<Scalar>& params, const BoxSet<Scalar>& set) {
  if (params.eta <= Scalar(0))
    throw std::invalid_argument("ogd_step: step size must be positive");
  if (x.size() != grad.size())
    throw std::invalid_argument("ogd_step: dimension mismatch");
  return project(set, x.derived() - params.eta * grad.derived());
}

/// Parameters of the strongly-convex OGD variant: the played point moves a
/// fraction eta toward the projected target computed with curvature gamma.
template <typename Scalar = double>
struct SigmaOgdParams {
  Scalar eta;    // mixing weight in (0, 1]
  Scalar gamma;  // inner-step curvature, 0 < gamma <= L when L is known
  Scalar sigma;  // strong-convexity modulus of the losses
};

/// x + eta (Pi(x - grad / gamma) - x), evaluated as the convex combination
/// (1 - eta) x + eta Pi(...) so that eta == 1 returns the projected target
/// exactly.
template <typename Scalar, typename DerivedX, typename DerivedG>
Vector<Scalar> sigma_ogd_step(const Eigen::MatrixBase<DerivedX>& x,
                              const Eigen::MatrixBase<DerivedG>& grad,
                              const SigmaOgdParams<Scalar>& params,
                              const BoxSet<Scalar>& set) {
  if (params.gamma <= Scalar(0))
    throw std::invalid_argument("sigma_ogd_step: gamma must be positive");
  if (params.eta <= Scalar(0) || params.eta > Scalar(1))
    throw std::invalid_argument("sigma_ogd_step: eta must lie in (0, 1]");
  if (x.size() != grad.size())
    throw std::invalid_argument("sigma_ogd_step: dimension mismatch");
  const Vector<Scalar> target = project(set, x.derived() - grad.derived() / params.gamma);
  return (Scalar(1) - params.eta) * x.derived() + params.eta * target;
}

/// State of the optimistic mirror-descent baseline with Euclidean mirror map:
/// a secondary iterate driven by revealed gradients, from which the played
/// decision is offset along the gradient hint.
template <typename Scalar = double>
struct OmdState {
  Vector<Scalar> secondary;  // feasible after every step
  Scalar eta;
};

/// One optimistic update. The secondary iterate absorbs the revealed gradient
/// of the finished round; the played decision additionally steps along the
/// hint for the next round. Returns (played decision, next state).
template <typename Scalar>
std::pair<Vector<Scalar>, OmdState<Scalar>> omd_step(const OmdState<Scalar>& state,
                                                     const Vector<Scalar>& revealed_grad,
                                                     const Vector<Scalar>& hint_grad,
                                                     const BoxSet<Scalar>& set) {
  if (state.eta <= Scalar(0))
    throw std::invalid_argument("omd_step: step size must be positive");
  if (revealed_grad.size() != state.secondary.size() ||
      hint_grad.size() != state.secondary.size())
    throw std::invalid_argument("omd_step: dimension mismatch");
  OmdState<Scalar> next{project(set, state.secondary - state.eta * revealed_grad),
                        state.eta};
  Vector<Scalar> played = project(set, next.secondary - state.eta * hint_grad);
  return {std::move(played), std::move(next)};
}

}  // namespace poco
