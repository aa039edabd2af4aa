#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "poco/core.hpp"

namespace poco {

/// Aggregated flexible-load fleet. The decision variable is the per-step
/// energy throughput of each load in kWh, so per-load power limits in kW are
/// scaled by h/3600. State of charge is tracked in kWh.
template <typename Scalar = double>
struct Fleet {
  Vector<Scalar> energy_upper;     // per-step upper bound, kWh
  Vector<Scalar> energy_lower;     // per-step lower bound (= -energy_upper)
  Vector<Scalar> capacity;         // c, kWh
  Vector<Scalar> state_of_charge;  // s_t, kWh
  Scalar step_seconds = Scalar(30);  // h
  Scalar recovery = Scalar(1);       // alpha >= 1, used by curtailment dynamics

  Eigen::Index size() const { return capacity.size(); }
  BoxSet<Scalar> decision_set() const { return BoxSet<Scalar>(energy_lower, energy_upper); }
};

/// Sampling ranges for a fleet: per-load power uniform in
/// [power_min_kw, power_max_kw], capacity uniform in
/// [capacity_min_kwh, capacity_max_kwh].
struct FleetParams {
  int loads = 25;
  double step_seconds = 30.0;
  double power_min_kw = 1.0;
  double power_max_kw = 3.0;
  double capacity_min_kwh = 10.0;
  double capacity_max_kwh = 15.0;
  double recovery = 1.0;  // alpha

  void validate() const {
    if (loads < 1) throw std::invalid_argument("FleetParams: need at least one load");
    if (!(step_seconds > 0)) throw std::invalid_argument("FleetParams: step length must be positive");
    if (!(power_min_kw > 0) || power_max_kw < power_min_kw)
      throw std::invalid_argument("FleetParams: invalid power range");
    if (!(capacity_min_kwh > 0) || capacity_max_kwh < capacity_min_kwh)
      throw std::invalid_argument("FleetParams: invalid capacity range");
    if (recovery < 1.0)
      throw std::invalid_argument("FleetParams: recovery coefficient must be >= 1");
  }
};

/// Draws a fleet; deterministic per seed. Initial state of charge is half the
/// capacity, and lower bounds mirror the upper bounds.
template <typename Scalar = double>
Fleet<Scalar> sample_fleet(const FleetParams& params, std::uint64_t seed) {
  params.validate();
  std::mt19937_64 engine(seed);
  std::uniform_real_distribution<double> power(params.power_min_kw, params.power_max_kw);
  std::uniform_real_distribution<double> cap(params.capacity_min_kwh, params.capacity_max_kwh);

  Fleet<Scalar> fleet;
  const Eigen::Index n = params.loads;
  fleet.energy_upper.resize(n);
  fleet.capacity.resize(n);
  const Scalar hours = Scalar(params.step_seconds) / Scalar(3600);
  for (Eigen::Index i = 0; i < n; ++i) fleet.energy_upper(i) = Scalar(power(engine)) * hours;
  for (Eigen::Index i = 0; i < n; ++i) fleet.capacity(i) = Scalar(cap(engine));
  fleet.energy_lower = -fleet.energy_upper;
  fleet.state_of_charge = fleet.capacity / Scalar(2);
  fleet.step_seconds = Scalar(params.step_seconds);
  fleet.recovery = Scalar(params.recovery);
  return fleet;
}

enum class SignalKind { Regulation, Curtailment };

/// Signal generator parameters; variances of 0 disable the noise term.
struct SignalParams {
  double regulation_amplitude = 0.2;
  double regulation_noise_variance = 0.01;
  double curtailment_scale = 0.04;
  double curtailment_exponent = 0.3;
  double rise_noise_variance = 0.01;      // rounds up to T/4
  double plateau_noise_variance = 0.001;  // rounds after T/4

  void validate() const {
    if (regulation_noise_variance < 0 || rise_noise_variance < 0 || plateau_noise_variance < 0)
      throw std::invalid_argument("SignalParams: variances must be nonnegative");
  }
};

/// Reference signal series: a noisy sinusoidal power imbalance for
/// regulation, or a curtailment request rising as 0.04 t^0.3 and plateauing
/// after T/4. The whole series is drawn at construction, so lookups are pure
/// and deterministic per seed.
template <typename Scalar = double>
class SignalModel {
 public:
  SignalModel(SignalKind kind, int horizon, std::uint64_t seed, SignalParams params = {})
      : kind_(kind), horizon_(horizon) {
    if (horizon < 1) throw std::invalid_argument("SignalModel: horizon must be positive");
    params.validate();
    std::mt19937_64 engine(seed);
    series_.resize(static_cast<std::size_t>(horizon) + 1, Scalar(0));
    if (kind == SignalKind::Regulation) {
      std::normal_distribution<double> noise(0.0, std::sqrt(params.regulation_noise_variance));
      const double two_pi = 2.0 * M_PI;
      for (int t = 1; t <= horizon; ++t) {
        const double base = params.regulation_amplitude * std::sin(two_pi * t / horizon);
        const double w = params.regulation_noise_variance > 0 ? noise(engine) : 0.0;
        series_[static_cast<std::size_t>(t)] = Scalar(base + w);
      }
    } else {
      std::normal_distribution<double> rise(0.0, std::sqrt(params.rise_noise_variance));
      std::normal_distribution<double> plateau(0.0, std::sqrt(params.plateau_noise_variance));
      const double quarter = horizon / 4.0;
      const double plateau_base =
          params.curtailment_scale * std::pow(quarter, params.curtailment_exponent);
      for (int t = 1; t <= horizon; ++t) {
        double value;
        if (t <= quarter) {
          const double w = params.rise_noise_variance > 0 ? rise(engine) : 0.0;
          value = params.curtailment_scale * std::pow(double(t), params.curtailment_exponent) + w;
        } else {
          const double w = params.plateau_noise_variance > 0 ? plateau(engine) : 0.0;
          value = plateau_base + w;
        }
        series_[static_cast<std::size_t>(t)] = Scalar(value);
      }
    }
  }

  Scalar operator()(int t) const {
    if (t < 1 || t > horizon_)
      throw std::out_of_range("SignalModel: round index out of range");
    return series_[static_cast<std::size_t>(t)];
  }

  SignalKind kind() const { return kind_; }
  int horizon() const { return horizon_; }

 private:
  SignalKind kind_;
  int horizon_;
  std::vector<Scalar> series_;
};

template <typename Scalar>
Scalar generate_signal(const SignalModel<Scalar>& model, int t) {
  return model(t);
}

/// Regulation-tracking loss
///   f(x) = (r - 1'x)^2 + sigma ||s + x - c/2||^2
/// built on the fleet's current state of charge. sigma-strongly convex with
/// gradient Lipschitz constant 2 N + 2 sigma (attached as the L hint).
template <typename Scalar>
LossRound<Scalar> regulation_loss(const Fleet<Scalar>& fleet, Scalar signal, Scalar sigma,
                                  int round = 1) {
  if (!(sigma > Scalar(0)))
    throw std::invalid_argument("regulation_loss: sigma must be positive");
  const Eigen::Index n = fleet.size();
  const Vector<Scalar> anchor = fleet.state_of_charge - fleet.capacity / Scalar(2);

  LossRound<Scalar> loss;
  loss.round = round;
  loss.value = [signal, sigma, anchor](const Vector<Scalar>& x) {
    const Scalar mismatch = signal - x.sum();
    return mismatch * mismatch + sigma * (anchor + x).squaredNorm();
  };
  loss.gradient = [signal, sigma, anchor, n](const Vector<Scalar>& x) {
    const Scalar mismatch = signal - x.sum();
    return Vector<Scalar>(Vector<Scalar>::Constant(n, -2 * mismatch) +
                          2 * sigma * (anchor + x));
  };
  loss.gradient_lipschitz = 2 * Scalar(n) + 2 * sigma;

  const Scalar throughput = fleet.energy_upper.cwiseAbs().cwiseMax(fleet.energy_lower.cwiseAbs()).sum();
  const Scalar reach = anchor.norm() + norm_bound(fleet.decision_set());
  const Scalar worst_mismatch = std::abs(signal) + throughput;
  loss.value_bound = worst_mismatch * worst_mismatch + sigma * reach * reach;
  loss.gradient_bound =
      2 * worst_mismatch * std::sqrt(Scalar(n)) + 2 * sigma * reach;
  return loss;
}

/// Curtailment loss with a one-sided shortfall penalty and recovery-weighted
/// state anchor:
///   f(x) = ([p - 1'x]^+)^2 + sigma ||alpha s + x - c/2||^2.
/// Over-curtailment is free; the hinge gradient is taken as 0 exactly at the
/// kink. No gradient-Lipschitz certificate is attached, so only the
/// backtracking predictive variant applies to this loss.
template <typename Scalar>
LossRound<Scalar> curtailment_loss(const Fleet<Scalar>& fleet, Scalar signal, Scalar sigma,
                                   int round = 1) {
  if (!(sigma > Scalar(0)))
    throw std::invalid_argument("curtailment_loss: sigma must be positive");
  if (fleet.recovery < Scalar(1))
    throw std::invalid_argument("curtailment_loss: recovery coefficient must be >= 1");
  const Eigen::Index n = fleet.size();
  const Vector<Scalar> anchor =
      fleet.recovery * fleet.state_of_charge - fleet.capacity / Scalar(2);

  LossRound<Scalar> loss;
  loss.round = round;
  loss.value = [signal, sigma, anchor](const Vector<Scalar>& x) {
    const Scalar shortfall = std::max(Scalar(0), signal - x.sum());
    return shortfall * shortfall + sigma * (anchor + x).squaredNorm();
  };
  loss.gradient = [signal, sigma, anchor, n](const Vector<Scalar>& x) {
    const Scalar shortfall = signal - x.sum();
    const Scalar hinge_slope = shortfall > Scalar(0) ? -2 * shortfall : Scalar(0);
    return Vector<Scalar>(Vector<Scalar>::Constant(n, hinge_slope) +
                          2 * sigma * (anchor + x));
  };

  const Scalar throughput = fleet.energy_upper.cwiseAbs().cwiseMax(fleet.energy_lower.cwiseAbs()).sum();
  const Scalar reach = anchor.norm() + norm_bound(fleet.decision_set());
  const Scalar worst_shortfall = std::max(Scalar(0), signal + throughput);
  loss.value_bound = worst_shortfall * worst_shortfall + sigma * reach * reach;
  loss.gradient_bound =
      2 * worst_shortfall * std::sqrt(Scalar(n)) + 2 * sigma * reach;
  return loss;
}

/// State-of-charge transition once x_t has been dispatched: pure accumulation
/// for regulation, recovery-weighted accumulation for curtailment.
template <typename Scalar>
Fleet<Scalar> advance_state(Fleet<Scalar> fleet, const Vector<Scalar>& dispatched,
                            SignalKind kind) {
  if (dispatched.size() != fleet.size())
    throw std::invalid_argument("advance_state: dispatch dimension mismatch");
  if (kind == SignalKind::Regulation)
    fleet.state_of_charge += dispatched;
  else
    fleet.state_of_charge = fleet.recovery * fleet.state_of_charge + dispatched;
  return fleet;
}

}  // namespace poco
