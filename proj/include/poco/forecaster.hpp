#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <utility>

#include "poco/core.hpp"

namespace poco {

enum class NoiseMode { Zero, UniformBall, FixedRadiusSphere };

struct NoiseSpec {
  NoiseMode mode = NoiseMode::FixedRadiusSphere;
  std::uint64_t seed = 0;
};

/// An estimate of the next round's gradient at the OCO output, together with
/// the error bound of the forecaster that produced it:
/// ||estimate - grad f_{t+1}(evaluated_at)|| <= epsilon.
template <typename Scalar = double>
struct ForecastGradient {
  Vector<Scalar> estimate;      // g_t
  Scalar epsilon = Scalar(0);   // error bound, > 0
  Vector<Scalar> evaluated_at;  // the OCO output the estimate refers to
};

/// Norm gate shared by both predictive variants: the estimate is a usable
/// descent direction only if ||g|| strictly exceeds epsilon.
template <typename Scalar>
bool descent_check(const ForecastGradient<Scalar>& g) {
  return g.estimate.norm() > g.epsilon;
}

/// One noise draw in scale-free form, so the same draw can be applied to the
/// gradients of several algorithms and to several epsilon values (paired
/// comparisons).
template <typename Scalar = double>
struct NoiseDraw {
  Vector<Scalar> direction;            // unit vector; zero in Zero mode
  Scalar radius_fraction = Scalar(0);  // noise norm / epsilon, in [0, 1]
};

/// Simulated epsilon-forecaster: perturbs the true next-round gradient inside
/// the epsilon ball. Owns its RNG; a fixed seed fixes the whole draw
/// sequence. Externally produced forecasts can instead be placed in a
/// ForecastGradient directly, in which case epsilon is taken on trust.
template <typename Scalar = double>
class GradientForecaster {
 public:
  explicit GradientForecaster(NoiseSpec spec) : spec_(spec), engine_(spec.seed) {}

  /// Draws a unit direction and a radius fraction. UniformBall draws the
  /// radius from the volume-uniform law r = epsilon U^{1/dim};
  /// FixedRadiusSphere always uses the full radius.
  NoiseDraw<Scalar> next_draw(Eigen::Index dim) {
    NoiseDraw<Scalar> draw;
    draw.direction = Vector<Scalar>::Zero(dim);
    if (spec_.mode == NoiseMode::Zero) return draw;
    std::normal_distribution<double> gauss(0.0, 1.0);
    Scalar norm(0);
    do {
      for (Eigen::Index i = 0; i < dim; ++i) draw.direction(i) = Scalar(gauss(engine_));
      norm = draw.direction.norm();
    } while (norm < Scalar(1e-12));
    draw.direction /= norm;
    if (spec_.mode == NoiseMode::FixedRadiusSphere) {
      draw.radius_fraction = Scalar(1);
    } else {
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      draw.radius_fraction = Scalar(std::pow(unit(engine_), 1.0 / double(dim)));
    }
    return draw;
  }

  ForecastGradient<Scalar> forecast(const Vector<Scalar>& true_next_grad, Scalar epsilon,
                                    Vector<Scalar> evaluated_at = {}) {
    return apply(next_draw(true_next_grad.size()), true_next_grad, epsilon,
                 std::move(evaluated_at));
  }

  /// Builds the estimate g = true + epsilon * radius_fraction * direction from
  /// an existing draw.
  static ForecastGradient<Scalar> apply(const NoiseDraw<Scalar>& draw,
                                        const Vector<Scalar>& true_next_grad,
                                        Scalar epsilon,
                                        Vector<Scalar> evaluated_at = {}) {
    if (epsilon <= Scalar(0))
      throw std::invalid_argument("forecast: epsilon must be positive");
    if (draw.direction.size() != true_next_grad.size())
      throw std::invalid_argument("forecast: draw dimension mismatch");
    ForecastGradient<Scalar> g;
    g.estimate = true_next_grad + (epsilon * draw.radius_fraction) * draw.direction;
    g.epsilon = epsilon;
    g.evaluated_at = std::move(evaluated_at);
    return g;
  }

  const NoiseSpec& spec() const { return spec_; }

 private:
  NoiseSpec spec_;
  std::mt19937_64 engine_;
};

/// Single-shot forecast with a fresh RNG seeded from the spec.
template <typename Scalar>
ForecastGradient<Scalar> forecast(const Vector<Scalar>& true_next_grad, Scalar epsilon,
                                  const NoiseSpec& noise) {
  GradientForecaster<Scalar> forecaster(noise);
  return forecaster.forecast(true_next_grad, epsilon);
}

}  // namespace poco
