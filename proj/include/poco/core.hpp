#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <stdexcept>
#include <utility>

namespace poco {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using VectorXd = Vector<double>;

/// Compact box decision set {x : lower <= x <= upper}. Degenerate coordinates
/// (lower == upper) are allowed and stay pinned under projection. Immutable
/// after construction.
template <typename Scalar = double>
class BoxSet {
 public:
  using VectorType = Vector<Scalar>;

  BoxSet(VectorType lower, VectorType upper)
      : lower_(std::move(lower)), upper_(std::move(upper)) {
    if (lower_.size() == 0 || lower_.size() != upper_.size())
      throw std::invalid_argument("BoxSet: bounds must be non-empty and of equal length");
    if ((lower_.array() > upper_.array()).any())
      throw std::invalid_argument("BoxSet: lower bound exceeds upper bound");
  }

  /// The symmetric box [-half_width, half_width]^n.
  static BoxSet symmetric(Scalar half_width, Eigen::Index n) {
    if (half_width < Scalar(0))
      throw std::invalid_argument("BoxSet: negative half width");
    return BoxSet(VectorType::Constant(n, -half_width),
                  VectorType::Constant(n, half_width));
  }

  Eigen::Index dimension() const { return lower_.size(); }
  const VectorType& lower() const { return lower_; }
  const VectorType& upper() const { return upper_; }

  bool contains(const VectorType& x, Scalar tol = Scalar(0)) const {
    if (x.size() != dimension()) return false;
    return (x.array() >= lower_.array() - tol).all() &&
           (x.array() <= upper_.array() + tol).all();
  }

 private:
  VectorType lower_;
  VectorType upper_;
};

/// Euclidean projection onto a box: the elementwise clamp. Idempotent and
/// non-expansive.
template <typename Scalar, typename Derived>
Vector<Scalar> project(const BoxSet<Scalar>& set, const Eigen::MatrixBase<Derived>& point) {
  if (point.size() != set.dimension())
    throw std::invalid_argument("project: point dimension does not match the set");
  return point.derived().cwiseMax(set.lower()).cwiseMin(set.upper());
}

/// Euclidean diameter ||upper - lower||; for a box this is the supremum
/// distance between feasible pairs.
template <typename Scalar>
Scalar diameter(const BoxSet<Scalar>& set) {
  return (set.upper() - set.lower()).norm();
}

/// Largest Euclidean norm of a feasible point, i.e. the constant X with
/// ||x|| <= X over the box.
template <typename Scalar>
Scalar norm_bound(const BoxSet<Scalar>& set) {
  return set.lower().cwiseAbs().cwiseMax(set.upper().cwiseAbs()).norm();
}

/// One round's differentiable convex loss: value and exact gradient, revealed
/// to the player only after the round's decision is committed. The bound
/// hints B (value), G (gradient norm) and L (gradient Lipschitz constant) are
/// optional; they are spot-checked by sampling in tests, not proven.
template <typename Scalar = double>
struct LossRound {
  using VectorType = Vector<Scalar>;

  int round = 0;  // t
  std::function<Scalar(const VectorType&)> value;
  std::function<VectorType(const VectorType&)> gradient;
  std::optional<Scalar> value_bound{};         // B
  std::optional<Scalar> gradient_bound{};      // G
  std::optional<Scalar> gradient_lipschitz{};  // L
};

/// Central-difference gradient, the reference oracle for gradient
/// implementations. The point must be interior to the probing stencil.
template <typename Scalar>
Vector<Scalar> finite_difference_gradient(const LossRound<Scalar>& loss,
                                          const Vector<Scalar>& x, Scalar step) {
  if (step <= Scalar(0))
    throw std::invalid_argument("finite_difference_gradient: step must be positive");
  if (!loss.value)
    throw std::invalid_argument("finite_difference_gradient: loss has no value function");
  Vector<Scalar> g(x.size());
  Vector<Scalar> probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe(i) = x(i) + step;
    const Scalar up = loss.value(probe);
    probe(i) = x(i) - step;
    const Scalar down = loss.value(probe);
    probe(i) = x(i);
    g(i) = (up - down) / (2 * step);
  }
  return g;
}

}  // namespace poco
