#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "poco/core.hpp"
#include "poco/demand_response.hpp"
#include "poco/forecaster.hpp"
#include "poco/oco.hpp"
#include "poco/predictive.hpp"
#include "poco/regret.hpp"

namespace poco {

enum class Scenario { Regulation, Curtailment, SyntheticQuadratic };

inline const char* to_string(Scenario scenario) {
  switch (scenario) {
    case Scenario::Regulation: return "regulation";
    case Scenario::Curtailment: return "curtailment";
    case Scenario::SyntheticQuadratic: return "synthetic-quadratic";
  }
  return "unknown";
}

inline Scenario scenario_from_string(const std::string& name) {
  if (name == "regulation") return Scenario::Regulation;
  if (name == "curtailment") return Scenario::Curtailment;
  if (name == "synthetic-quadratic" || name == "synthetic") return Scenario::SyntheticQuadratic;
  throw std::invalid_argument("unknown scenario: " + name);
}

inline const char* to_string(NoiseMode mode) {
  switch (mode) {
    case NoiseMode::Zero: return "zero";
    case NoiseMode::UniformBall: return "uniform-ball";
    case NoiseMode::FixedRadiusSphere: return "fixed-radius-sphere";
  }
  return "unknown";
}

inline NoiseMode noise_mode_from_string(const std::string& name) {
  if (name == "zero") return NoiseMode::Zero;
  if (name == "uniform-ball") return NoiseMode::UniformBall;
  if (name == "fixed-radius-sphere") return NoiseMode::FixedRadiusSphere;
  throw std::invalid_argument("unknown noise mode: " + name);
}

/// Synthetic time-varying quadratic: f_t(x) = ||x - theta_t||^2 on a
/// symmetric box, theta_t driven by a sinusoid plus per-coordinate noise.
struct SyntheticParams {
  int dimension = 2;
  double amplitude = 0.5;
  double noise_std = 0.05;
  double half_width = 1.0;

  void validate() const {
    if (dimension < 1) throw std::invalid_argument("SyntheticParams: dimension must be >= 1");
    if (noise_std < 0) throw std::invalid_argument("SyntheticParams: noise std must be >= 0");
    if (!(half_width > 0)) throw std::invalid_argument("SyntheticParams: half width must be > 0");
  }
};

/// Full description of one experiment. Optional fields fall back to the
/// scenario's own rule (eta, gamma = L and beta = 1/L come from the loss
/// curvature; curtailment eta defaults to 1/(10 sqrt(T))).
struct ExperimentConfig {
  Scenario scenario = Scenario::Regulation;
  int rounds = 1000;  // T
  std::uint64_t seed = 1;
  std::vector<double> epsilons{0.1, 0.05, 0.01};
  double improvement_delta = 1e-6;  // delta: gate improvement + counter threshold
  double time_lipschitz = 1e-4;     // Delta for the backtracking condition
  double sigma = 0.005;             // state-of-charge weight
  std::optional<double> eta{};      // sigma-OGD mixing weight or OGD step
  std::optional<double> gamma{};    // sigma-OGD curvature; default L
  std::optional<double> fixed_beta{};  // fixed predictive step; default 1/L
  double zeta = 0.5;                // backtracking trial-projection step
  double contraction = 0.9;         // backtracking contraction factor
  int max_exponent = 100;           // M
  FleetParams fleet{};
  SignalParams signal{};
  SyntheticParams synthetic{};
  NoiseMode noise_mode = NoiseMode::FixedRadiusSphere;
  std::string out_path;
  bool check_guarantees = true;
  double oracle_tol = 1e-9;
  int oracle_max_iters = 100000;
  std::optional<double> sigma_ogd_bound_constant{};  // C for the C (V_T + 1) line

  void validate() const {
    if (rounds < 0) throw std::invalid_argument("config: rounds must be nonnegative");
    if (epsilons.empty()) throw std::invalid_argument("config: epsilon list must be non-empty");
    for (double eps : epsilons)
      if (!(eps > 0)) throw std::invalid_argument("config: every epsilon must be positive");
    if (!(improvement_delta > 0)) throw std::invalid_argument("config: delta must be positive");
    if (time_lipschitz < 0) throw std::invalid_argument("config: Delta must be nonnegative");
    if (!(sigma > 0)) throw std::invalid_argument("config: sigma must be positive");
    if (eta && !(*eta > 0)) throw std::invalid_argument("config: eta must be positive");
    if ((scenario == Scenario::Regulation) && eta && *eta > 1)
      throw std::invalid_argument("config: regulation eta must lie in (0, 1]");
    if (gamma && !(*gamma > 0)) throw std::invalid_argument("config: gamma must be positive");
    if (fixed_beta && !(*fixed_beta > 0))
      throw std::invalid_argument("config: beta must be positive");
    if (!(zeta > 0)) throw std::invalid_argument("config: zeta must be positive");
    if (!(contraction > 0) || !(contraction < 1))
      throw std::invalid_argument("config: contraction factor must lie in (0, 1)");
    if (max_exponent < 1) throw std::invalid_argument("config: M must be >= 1");
    if (!(oracle_tol > 0)) throw std::invalid_argument("config: oracle tol must be positive");
    if (oracle_max_iters < 1) throw std::invalid_argument("config: oracle max iters must be >= 1");
    fleet.validate();
    signal.validate();
    synthetic.validate();
  }
};

/// Scenario presets mirroring the experiment tables.
inline ExperimentConfig default_config(Scenario scenario) {
  ExperimentConfig cfg;
  cfg.scenario = scenario;
  switch (scenario) {
    case Scenario::Regulation:
      break;  // struct defaults are the regulation table
    case Scenario::Curtailment:
      cfg.epsilons = {0.1, 0.01, 0.001};
      cfg.sigma = 5e-5;
      cfg.fleet.recovery = 1.001;
      cfg.time_lipschitz = 1e-4;
      break;
    case Scenario::SyntheticQuadratic:
      cfg.epsilons = {0.01};
      break;
  }
  return cfg;
}

/// One CSV row. gate_reason, counter, nu and improvement describe the run's
/// predictive algorithm; the reason and improvement refer to the verdict that
/// produced this round's decision.
struct RoundTrace {
  int round = 0;
  double signal = 0;
  std::vector<double> losses;   // per algorithm, in column order
  std::vector<double> regrets;  // cumulative, per algorithm
  std::string gate_reason;
  long counter = 0;
  double nu = 0;
  double path_variation = 0;
  double improvement = 0;
};

/// Outcome counters for the runtime-checkable guarantees. Violations should
/// always be zero; they are tallied instead of thrown so a run can finish and
/// report.
struct GuaranteeReport {
  long fired = 0;
  long norm_gate_failures = 0;
  long short_directions = 0;
  long exhausted = 0;

  long improvement_checks = 0;       // fixed step: next loss improves >= delta
  long improvement_violations = 0;
  double worst_improvement_margin = std::numeric_limits<double>::infinity();

  long descent_checks = 0;           // g.d <= -(1/step)||d||^2 on fired rounds
  long descent_violations = 0;

  long armijo_rechecks = 0;          // accepted exponent re-satisfies the condition
  long armijo_recheck_violations = 0;

  long min_decrease_checks = 0;      // f_t(xbar) - f_t(x) > 2 Delta
  long min_decrease_violations = 0;
  double worst_min_decrease_margin = std::numeric_limits<double>::infinity();

  long next_armijo_checks = 0;       // sufficient decrease vs the revealed next loss,
  long next_armijo_violations = 0;   // asserted only when Delta bounds the observed
  long next_armijo_skipped = 0;      // one-round variation at both probe points

  long oracle_failures = 0;          // round optima that hit the iteration cap
};

struct RunResult {
  Scenario scenario = Scenario::Regulation;
  double epsilon = 0;
  std::uint64_t seed = 0;
  int rounds = 0;
  std::vector<std::string> algorithms;
  std::string baseline_algorithm;
  std::string predictive_algorithm;
  std::vector<RoundTrace> trace;
  std::map<std::string, double> final_regret;
  std::map<std::string, double> path_variation;
  long counter = 0;  // c_T
  double nu = 0;     // c_T / T
  GuaranteeReport guarantees;
  double set_diameter = 0;           // D
  double norm_bound_x = 0;           // X
  double observed_gradient_bound = 0;  // max ||grad f_t(x_t)|| on the baseline
  double regret_bound_vs_baseline = 0;  // baseline regret less the predictive credit
  std::string csv_path;
};

namespace detail {

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string format_short(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace detail

inline std::string render_csv(const std::vector<RoundTrace>& trace,
                              const std::vector<std::string>& algorithms) {
  std::string out = "t,signal";
  for (const std::string& name : algorithms) out += "," + name + "_loss," + name + "_regret";
  out += ",gate_reason,c_t,nu,v_t,improvement\n";
  for (const RoundTrace& row : trace) {
    if (row.losses.size() != algorithms.size() || row.regrets.size() != algorithms.size())
      throw std::invalid_argument("render_csv: row width does not match algorithm list");
    out += std::to_string(row.round) + "," + detail::format_double(row.signal);
    for (std::size_t i = 0; i < algorithms.size(); ++i)
      out += "," + detail::format_double(row.losses[i]) + "," +
             detail::format_double(row.regrets[i]);
    out += "," + row.gate_reason + "," + std::to_string(row.counter) + "," +
           detail::format_double(row.nu) + "," + detail::format_double(row.path_variation) +
           "," + detail::format_double(row.improvement) + "\n";
  }
  return out;
}

/// Writes the trace as locale-independent decimal text: a header row, then one
/// row per round. The whole file is rendered before anything is written.
inline void emit_csv(const std::vector<RoundTrace>& trace,
                     const std::vector<std::string>& algorithms, const std::string& path) {
  const std::string body = render_csv(trace, algorithms);
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw std::runtime_error("emit_csv: cannot open " + path);
  file << body;
  file.flush();
  if (!file) throw std::runtime_error("emit_csv: write failed for " + path);
}

inline std::string csv_output_path(const ExperimentConfig& cfg, double epsilon, bool sweep) {
  std::string base = cfg.out_path.empty()
                         ? std::string("poco_") + to_string(cfg.scenario) + ".csv"
                         : cfg.out_path;
  if (!sweep) return base;
  char tag[32];
  std::snprintf(tag, sizeof(tag), "_eps%g", epsilon);
  const std::size_t dot = base.rfind(".csv");
  if (dot != std::string::npos && dot == base.size() - 4)
    return base.substr(0, dot) + tag + ".csv";
  return base + tag;
}

namespace detail {

enum class LaneKind { Baseline, FixedPredictive, BacktrackPredictive, Omd };

struct Lane {
  LaneKind kind = LaneKind::Baseline;
  std::string name;
  VectorXd x;
  OmdState<double> omd{};
  Fleet<double> fleet{};
  PredictiveCounter<double> counter{};
  RegretLedger<double> ledger{};
  std::optional<RoundOptimum<double>> previous_optimum{};
  double observed_gradient_bound = 0;

  // cached per round
  LossRound<double> current_loss{};
  VectorXd current_gradient;

  // verdict that produced the upcoming decision (reported on the next row)
  std::string next_row_reason = "init";

  // deferred checks against the next revealed loss
  bool pending = false;
  bool pending_fired = false;
  VectorXd pending_x_bar;
  VectorXd pending_direction;
  double pending_step = 0;
  LossRound<double> pending_prev_loss{};  // loss used by the search (curtailment)
};

}  // namespace detail

/// Runs one scenario instance for a single epsilon: baseline, predictive and
/// optimistic lanes consume the same signal and the same forecaster noise
/// stream, each tracking its own state, regret ledger and round optima.
inline RunResult run_single(const ExperimentConfig& cfg, double epsilon) {
  cfg.validate();
  if (!(epsilon > 0)) throw std::invalid_argument("run_single: epsilon must be positive");

  using detail::Lane;
  using detail::LaneKind;

  const int rounds = cfg.rounds;
  const std::uint64_t signal_seed = detail::derive_seed(cfg.seed, 1);
  const std::uint64_t fleet_seed = detail::derive_seed(cfg.seed, 2);
  const std::uint64_t forecast_seed = detail::derive_seed(cfg.seed, 3);
  const std::uint64_t synthetic_seed = detail::derive_seed(cfg.seed, 4);

  // Scenario assembly: decision set, signal series, losses and base stepper.
  const bool demand_response = cfg.scenario != Scenario::SyntheticQuadratic;
  const SignalKind signal_kind =
      cfg.scenario == Scenario::Curtailment ? SignalKind::Curtailment : SignalKind::Regulation;

  Fleet<double> initial_fleet;
  std::optional<SignalModel<double>> signal;
  std::vector<double> driver(static_cast<std::size_t>(rounds) + 2, 0.0);
  std::vector<VectorXd> synthetic_target;

  std::optional<BoxSet<double>> set;
  double lipschitz = 0;  // gradient Lipschitz constant of the round losses, if certified

  if (demand_response) {
    FleetParams fleet_params = cfg.fleet;
    if (cfg.scenario == Scenario::Regulation) fleet_params.recovery = 1.0;
    initial_fleet = sample_fleet<double>(fleet_params, fleet_seed);
    set.emplace(initial_fleet.decision_set());
    if (rounds > 0) {
      signal.emplace(signal_kind, rounds, signal_seed, cfg.signal);
      for (int t = 1; t <= rounds; ++t) driver[static_cast<std::size_t>(t)] = (*signal)(t);
    }
    if (cfg.scenario == Scenario::Regulation)
      lipschitz = 2.0 * initial_fleet.size() + 2.0 * cfg.sigma;
  } else {
    set.emplace(BoxSet<double>::symmetric(cfg.synthetic.half_width, cfg.synthetic.dimension));
    lipschitz = 2.0;
    synthetic_target.assign(static_cast<std::size_t>(rounds) + 1, VectorXd());
    std::mt19937_64 engine(synthetic_seed);
    std::normal_distribution<double> noise(0.0, cfg.synthetic.noise_std > 0 ? cfg.synthetic.noise_std : 1.0);
    for (int t = 1; t <= rounds; ++t) {
      const double base = cfg.synthetic.amplitude * std::sin(2.0 * M_PI * t / rounds);
      driver[static_cast<std::size_t>(t)] = base;
      VectorXd theta = VectorXd::Constant(cfg.synthetic.dimension, base);
      if (cfg.synthetic.noise_std > 0)
        for (Eigen::Index i = 0; i < theta.size(); ++i) theta(i) += noise(engine);
      synthetic_target[static_cast<std::size_t>(t)] = std::move(theta);
    }
  }

  const Eigen::Index dim = set->dimension();

  // Step-size resolution.
  double eta = 0;
  double gamma = 0;
  double beta_fixed = 0;
  switch (cfg.scenario) {
    case Scenario::Regulation:
      eta = cfg.eta.value_or(1.0);
      gamma = cfg.gamma.value_or(lipschitz);
      beta_fixed = cfg.fixed_beta.value_or(1.0 / lipschitz);
      break;
    case Scenario::Curtailment:
      eta = cfg.eta.value_or(rounds > 0 ? 1.0 / (10.0 * std::sqrt(double(rounds))) : 1.0);
      break;
    case Scenario::SyntheticQuadratic: {
      double reach = norm_bound(*set);
      for (int t = 1; t <= rounds; ++t)
        reach = std::max(reach, synthetic_target[static_cast<std::size_t>(t)].norm());
      const double gradient_bound = 2.0 * (norm_bound(*set) + reach);
      eta = cfg.eta.value_or(rounds > 0 ? ogd_default_step(*set, gradient_bound, rounds) : 0.1);
      beta_fixed = cfg.fixed_beta.value_or(1.0 / lipschitz);
      break;
    }
  }

  auto make_loss = [&](Lane& lane, int t) -> LossRound<double> {
    switch (cfg.scenario) {
      case Scenario::Regulation:
        return regulation_loss(lane.fleet, driver[static_cast<std::size_t>(t)], cfg.sigma, t);
      case Scenario::Curtailment:
        return curtailment_loss(lane.fleet, driver[static_cast<std::size_t>(t)], cfg.sigma, t);
      case Scenario::SyntheticQuadratic: {
        const VectorXd theta = synthetic_target[static_cast<std::size_t>(t)];
        LossRound<double> loss;
        loss.round = t;
        loss.value = [theta](const VectorXd& x) { return (x - theta).squaredNorm(); };
        loss.gradient = [theta](const VectorXd& x) { return VectorXd(2.0 * (x - theta)); };
        loss.gradient_lipschitz = 2.0;
        const double reach = norm_bound(*set) + theta.norm();
        loss.value_bound = reach * reach;
        loss.gradient_bound = 2.0 * reach;
        return loss;
      }
    }
    throw std::logic_error("make_loss: unreachable");
  };

  auto advance_lane = [&](Lane& lane, const VectorXd& played) {
    if (demand_response) lane.fleet = advance_state(lane.fleet, played, signal_kind);
  };

  auto base_step = [&](const Lane& lane, const VectorXd& grad) -> VectorXd {
    if (cfg.scenario == Scenario::Regulation)
      return sigma_ogd_step(lane.x, grad, SigmaOgdParams<double>{eta, gamma, cfg.sigma}, *set);
    return ogd_step(lane.x, grad, OgdParams<double>{eta}, *set);
  };

  // Lane roster. Every lane starts from the box midpoint with the same state.
  const VectorXd start = VectorXd(((set->lower() + set->upper()) / 2.0));
  const double omd_eta = cfg.scenario == Scenario::Regulation ? 1.0 / gamma : eta;

  std::vector<Lane> lanes(3);
  lanes[0].kind = LaneKind::Baseline;
  lanes[0].name = cfg.scenario == Scenario::Regulation ? "sigma_ogd" : "ogd";
  lanes[1].kind = cfg.scenario == Scenario::Curtailment ? LaneKind::BacktrackPredictive
                                                        : LaneKind::FixedPredictive;
  lanes[1].name = cfg.scenario == Scenario::Curtailment ? "pocob" : "poco";
  lanes[2].kind = LaneKind::Omd;
  lanes[2].name = "omd";
  for (Lane& lane : lanes) {
    lane.x = start;
    lane.fleet = initial_fleet;
    lane.counter = PredictiveCounter<double>{0, cfg.improvement_delta, 0};
    lane.omd = OmdState<double>{start, omd_eta};
  }
  Lane& predictive_lane = lanes[1];

  GradientForecaster<double> forecaster(NoiseSpec{cfg.noise_mode, forecast_seed});

  RunResult result;
  result.scenario = cfg.scenario;
  result.epsilon = epsilon;
  result.seed = cfg.seed;
  result.rounds = rounds;
  for (const Lane& lane : lanes) result.algorithms.push_back(lane.name);
  result.baseline_algorithm = lanes[0].name;
  result.predictive_algorithm = predictive_lane.name;
  result.set_diameter = diameter(*set);
  result.norm_bound_x = norm_bound(*set);
  result.trace.reserve(static_cast<std::size_t>(rounds));

  GuaranteeReport& report = result.guarantees;
  const auto improvement_slack = [](double reference) {
    return 1e-10 * std::max(1.0, std::abs(reference));
  };

  for (int t = 1; t <= rounds; ++t) {
    RoundTrace row;
    row.round = t;
    row.signal = driver[static_cast<std::size_t>(t)];
    row.gate_reason = predictive_lane.next_row_reason;

    // Phase A: reveal f_t, settle deferred checks, account regret, advance state.
    for (Lane& lane : lanes) {
      lane.current_loss = make_loss(lane, t);
      const LossRound<double>& loss = lane.current_loss;

      if (lane.pending) {
        const double value_at_bar = loss.value(lane.pending_x_bar);
        const double value_at_play = loss.value(lane.x);
        row.improvement = value_at_bar - value_at_play;
        if (lane.pending_fired && cfg.check_guarantees) {
          if (lane.kind == LaneKind::FixedPredictive) {
            ++report.improvement_checks;
            const double margin = row.improvement - cfg.improvement_delta;
            report.worst_improvement_margin = std::min(report.worst_improvement_margin, margin);
            if (margin < -improvement_slack(value_at_bar)) ++report.improvement_violations;
          } else if (lane.kind == LaneKind::BacktrackPredictive) {
            // Sufficient decrease vs the now-revealed loss, asserted only when
            // the configured Delta bounds the observed one-round variation at
            // both probe points.
            const double prev_at_bar = lane.pending_prev_loss.value(lane.pending_x_bar);
            const double prev_at_play = lane.pending_prev_loss.value(lane.x);
            const bool premise = std::abs(value_at_bar - prev_at_bar) <= cfg.time_lipschitz &&
                                 std::abs(value_at_play - prev_at_play) <= cfg.time_lipschitz;
            if (premise) {
              ++report.next_armijo_checks;
              const VectorXd grad_bar = loss.gradient(lane.pending_x_bar);
              const double rhs = value_at_bar +
                                 lane.pending_step * grad_bar.dot(lane.pending_direction);
              if (value_at_play > rhs + improvement_slack(value_at_bar))
                ++report.next_armijo_violations;
            } else {
              ++report.next_armijo_skipped;
            }
          }
        }
        lane.pending = false;
      }

      lane.current_gradient = loss.gradient(lane.x);
      lane.observed_gradient_bound =
          std::max(lane.observed_gradient_bound, lane.current_gradient.norm());

      const Vector<double>* warm =
          lane.previous_optimum ? &lane.previous_optimum->minimizer : nullptr;
      RoundOptimum<double> optimum =
          round_optimum(loss, *set, cfg.oracle_tol, cfg.oracle_max_iters, warm);
      if (!optimum.converged) ++report.oracle_failures;
      lane.ledger.accumulate(lane.name, loss, lane.x, optimum);
      lane.previous_optimum = std::move(optimum);

      row.losses.push_back(loss.value(lane.x));
      row.regrets.push_back(lane.ledger.cumulative(lane.name));

      advance_lane(lane, lane.x);
    }

    row.counter = predictive_lane.counter.count;
    row.nu = rounds > 0 ? double(predictive_lane.counter.count) / double(rounds) : 0.0;
    row.path_variation = predictive_lane.ledger.path_variation();
    result.trace.push_back(row);

    if (t == rounds) break;

    // Phase B: one shared noise draw, then each lane commits x_{t+1}.
    const NoiseDraw<double> draw = forecaster.next_draw(dim);

    for (Lane& lane : lanes) {
      switch (lane.kind) {
        case LaneKind::Baseline: {
          lane.x = base_step(lane, lane.current_gradient);
          break;
        }
        case LaneKind::Omd: {
          const VectorXd secondary_next =
              project(*set, lane.omd.secondary - lane.omd.eta * lane.current_gradient);
          LossRound<double> next_loss = make_loss(lane, t + 1);
          const ForecastGradient<double> hint = GradientForecaster<double>::apply(
              draw, next_loss.gradient(secondary_next), epsilon, secondary_next);
          auto [played, next_state] =
              omd_step(lane.omd, lane.current_gradient, hint.estimate, *set);
          lane.omd = std::move(next_state);
          lane.x = std::move(played);
          break;
        }
        case LaneKind::FixedPredictive: {
          const VectorXd x_bar = base_step(lane, lane.current_gradient);
          LossRound<double> next_loss = make_loss(lane, t + 1);
          const ForecastGradient<double> forecast_grad = GradientForecaster<double>::apply(
              draw, next_loss.gradient(x_bar), epsilon, x_bar);
          const FixedStepGateConfig<double> gate_cfg{
              epsilon, cfg.improvement_delta, next_loss.gradient_lipschitz.value(), beta_fixed};
          const GateVerdict<double> verdict = fixed_step_gate(x_bar, forecast_grad, gate_cfg, *set);
          switch (verdict.reason) {
            case GateReason::Fired: ++report.fired; break;
            case GateReason::NormGateFailed: ++report.norm_gate_failures; break;
            case GateReason::DirectionTooShort: ++report.short_directions; break;
            case GateReason::ArmijoExhausted: ++report.exhausted; break;
          }
          if (verdict.fired && cfg.check_guarantees) {
            ++report.descent_checks;
            if (!feasible_descent_inequality_check(forecast_grad.estimate, verdict.direction,
                                                   verdict.step))
              ++report.descent_violations;
          }
          lane.counter = update_counter(lane.counter, verdict.candidate, x_bar);
          lane.pending = true;
          lane.pending_fired = verdict.fired;
          lane.pending_x_bar = x_bar;
          lane.pending_direction = verdict.direction;
          lane.pending_step = verdict.step;
          lane.next_row_reason = to_string(verdict.reason);
          lane.x = verdict.candidate;
          break;
        }
        case LaneKind::BacktrackPredictive: {
          const VectorXd x_bar = base_step(lane, lane.current_gradient);
          LossRound<double> next_loss = make_loss(lane, t + 1);
          const ForecastGradient<double> forecast_grad = GradientForecaster<double>::apply(
              draw, next_loss.gradient(x_bar), epsilon, x_bar);
          GateVerdict<double> verdict;
          verdict.candidate = x_bar;
          if (!descent_check(forecast_grad)) {
            verdict.reason = GateReason::NormGateFailed;
          } else {
            const BacktrackConfig<double> bt_cfg{cfg.zeta, cfg.contraction, cfg.max_exponent,
                                                 epsilon, cfg.time_lipschitz, {}};
            verdict = backtracking_search(lane.current_loss, x_bar, forecast_grad, bt_cfg, *set);
          }
          switch (verdict.reason) {
            case GateReason::Fired: ++report.fired; break;
            case GateReason::NormGateFailed: ++report.norm_gate_failures; break;
            case GateReason::DirectionTooShort: ++report.short_directions; break;
            case GateReason::ArmijoExhausted: ++report.exhausted; break;
          }
          VectorXd x_next = x_bar;
          if (verdict.fired) {
            x_next = pocob_update(x_bar, verdict.direction, verdict.step, *set);
            if (cfg.check_guarantees) {
              ++report.descent_checks;
              if (!feasible_descent_inequality_check(forecast_grad.estimate, verdict.direction,
                                                     cfg.zeta))
                ++report.descent_violations;

              // The accepted exponent must satisfy the search condition verbatim.
              ++report.armijo_rechecks;
              const double f_bar = lane.current_loss.value(x_bar);
              const double slope = forecast_grad.estimate.dot(verdict.direction) -
                                   epsilon * verdict.direction.norm();
              const double lhs = lane.current_loss.value(x_bar + verdict.step * verdict.direction);
              if (!(lhs <= f_bar + verdict.step * slope - 2.0 * cfg.time_lipschitz))
                ++report.armijo_recheck_violations;

              ++report.min_decrease_checks;
              const double decrease = f_bar - lane.current_loss.value(x_next);
              const double margin = decrease - 2.0 * cfg.time_lipschitz;
              report.worst_min_decrease_margin =
                  std::min(report.worst_min_decrease_margin, margin);
              if (!(decrease > 2.0 * cfg.time_lipschitz)) ++report.min_decrease_violations;
            }
          }
          lane.counter = update_counter(lane.counter, x_next, x_bar);
          lane.pending = true;
          lane.pending_fired = verdict.fired;
          lane.pending_x_bar = x_bar;
          lane.pending_direction = verdict.direction;
          lane.pending_step = verdict.step;
          lane.pending_prev_loss = lane.current_loss;
          lane.next_row_reason = to_string(verdict.reason);
          lane.x = std::move(x_next);
          break;
        }
      }
    }
  }

  for (Lane& lane : lanes) {
    result.final_regret[lane.name] = lane.ledger.cumulative(lane.name);
    result.path_variation[lane.name] = lane.ledger.path_variation();
  }
  result.counter = predictive_lane.counter.count;
  result.nu = rounds > 0 ? double(predictive_lane.counter.count) / double(rounds) : 0.0;
  result.observed_gradient_bound = lanes[0].observed_gradient_bound;
  const double baseline_regret = result.final_regret[result.baseline_algorithm];
  result.regret_bound_vs_baseline =
      cfg.scenario == Scenario::Curtailment
          ? pocob_bound(baseline_regret, rounds, result.nu, cfg.time_lipschitz)
          : poco_bound(baseline_regret, rounds, result.nu, cfg.improvement_delta);
  return result;
}

/// Runs the configured epsilon sweep and writes one CSV per epsilon. The
/// configuration is validated before any work; no file is written until its
/// run has completed.
inline std::vector<RunResult> run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<RunResult> results;
  results.reserve(cfg.epsilons.size());
  const bool sweep = cfg.epsilons.size() > 1;
  for (double epsilon : cfg.epsilons) {
    RunResult result = run_single(cfg, epsilon);
    result.csv_path = csv_output_path(cfg, epsilon, sweep);
    emit_csv(result.trace, result.algorithms, result.csv_path);
    results.push_back(std::move(result));
  }
  return results;
}

/// Key/value summary of a sweep, one block per epsilon.
inline std::string summarize(const std::vector<RunResult>& results) {
  std::ostringstream out;
  if (results.empty()) return "no runs\n";
  const RunResult& first = results.front();
  out << "scenario: " << to_string(first.scenario) << "\n";
  out << "rounds: " << first.rounds << "\n";
  out << "seed: " << first.seed << "\n";
  out << "set_diameter_D: " << detail::format_short(first.set_diameter) << "\n";
  out << "norm_bound_X: " << detail::format_short(first.norm_bound_x) << "\n";
  for (const RunResult& run : results) {
    out << "run epsilon=" << detail::format_short(run.epsilon) << ":\n";
    if (!run.csv_path.empty()) out << "  csv: " << run.csv_path << "\n";
    for (const std::string& name : run.algorithms) {
      out << "  final_regret " << name << ": "
          << detail::format_double(run.final_regret.at(name)) << "\n";
    }
    const double base = run.final_regret.at(run.baseline_algorithm);
    const double pred = run.final_regret.at(run.predictive_algorithm);
    if (base > 0)
      out << "  regret_reduction_vs_" << run.baseline_algorithm << ": "
          << detail::format_short(100.0 * (base - pred) / base) << "%\n";
    out << "  counter_c_T: " << run.counter << "\n";
    out << "  nu: " << detail::format_short(run.nu) << "\n";
    out << "  path_variation_V_T: "
        << detail::format_short(run.path_variation.at(run.predictive_algorithm)) << "\n";
    out << "  observed_gradient_bound: "
        << detail::format_short(run.observed_gradient_bound) << "\n";
    out << "  regret_bound_vs_baseline: "
        << detail::format_double(run.regret_bound_vs_baseline) << "\n";
    const GuaranteeReport& g = run.guarantees;
    out << "  gate: fired=" << g.fired << " norm_failed=" << g.norm_gate_failures
        << " short_direction=" << g.short_directions << " armijo_exhausted=" << g.exhausted
        << "\n";
    out << "  guarantee_violations: improvement=" << g.improvement_violations
        << " descent=" << g.descent_violations << " armijo=" << g.armijo_recheck_violations
        << " min_decrease=" << g.min_decrease_violations
        << " next_armijo=" << g.next_armijo_violations << "\n";
  }
  return out.str();
}

/// Loads a JSON configuration. Table parameters are accepted under their
/// symbol or a spelled-out alias; gamma and beta also accept the literal
/// strings "L" and "1/L" to follow the loss curvature.
inline ExperimentConfig load_config(const std::string& path,
                                    std::optional<std::string> scenario_override = {}) {
  std::ifstream file(path);
  if (!file) throw std::runtime_error("config: cannot open " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(file, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& error) {
    throw std::runtime_error("config: " + path + ": " + error.what());
  }
  if (!doc.is_object()) throw std::runtime_error("config: " + path + ": expected an object");

  auto find = [&doc](std::initializer_list<const char*> keys) -> const nlohmann::json* {
    for (const char* key : keys)
      if (auto it = doc.find(key); it != doc.end()) return &*it;
    return nullptr;
  };

  std::string scenario_name;
  if (scenario_override) {
    scenario_name = *scenario_override;
  } else if (const auto* node = find({"scenario"})) {
    scenario_name = node->get<std::string>();
  } else {
    throw std::runtime_error("config: " + path + ": missing scenario");
  }
  ExperimentConfig cfg = default_config(scenario_from_string(scenario_name));

  auto get_double = [](const nlohmann::json& node, const char* what) -> double {
    if (!node.is_number()) throw std::runtime_error(std::string("config: ") + what + " must be a number");
    return node.get<double>();
  };

  if (const auto* node = find({"T", "rounds"})) cfg.rounds = node->get<int>();
  if (const auto* node = find({"seed"})) cfg.seed = node->get<std::uint64_t>();
  if (const auto* node = find({"epsilon", "forecast_error"})) {
    cfg.epsilons.clear();
    if (node->is_array())
      for (const auto& value : *node) cfg.epsilons.push_back(get_double(value, "epsilon"));
    else
      cfg.epsilons.push_back(get_double(*node, "epsilon"));
  }
  if (const auto* node = find({"delta", "improvement_delta"}))
    cfg.improvement_delta = get_double(*node, "delta");
  if (const auto* node = find({"Delta", "time_lipschitz"}))
    cfg.time_lipschitz = get_double(*node, "Delta");
  if (const auto* node = find({"sigma", "state_weight"})) cfg.sigma = get_double(*node, "sigma");
  if (const auto* node = find({"eta", "step_scale"})) cfg.eta = get_double(*node, "eta");
  if (const auto* node = find({"gamma", "curvature"})) {
    if (node->is_string()) {
      if (node->get<std::string>() != "L")
        throw std::runtime_error("config: gamma must be a number or \"L\"");
    } else {
      cfg.gamma = get_double(*node, "gamma");
    }
  }
  if (const auto* node = find({"beta"})) {
    if (cfg.scenario == Scenario::Curtailment) {
      cfg.contraction = get_double(*node, "beta");
    } else if (node->is_string()) {
      if (node->get<std::string>() != "1/L")
        throw std::runtime_error("config: beta must be a number or \"1/L\"");
    } else {
      cfg.fixed_beta = get_double(*node, "beta");
    }
  }
  if (const auto* node = find({"predictive_step"})) cfg.fixed_beta = get_double(*node, "predictive_step");
  if (const auto* node = find({"contraction", "contraction_factor"}))
    cfg.contraction = get_double(*node, "contraction");
  if (const auto* node = find({"M", "max_backtracks"})) cfg.max_exponent = node->get<int>();
  if (const auto* node = find({"zeta", "trial_step"})) cfg.zeta = get_double(*node, "zeta");
  if (const auto* node = find({"alpha", "recovery", "recovery_coefficient"}))
    cfg.fleet.recovery = get_double(*node, "alpha");
  if (const auto* node = find({"N", "loads"})) cfg.fleet.loads = node->get<int>();
  if (const auto* node = find({"h", "step_seconds"}))
    cfg.fleet.step_seconds = get_double(*node, "h");
  if (const auto* node = find({"power_kw", "power_range_kw"})) {
    if (!node->is_array() || node->size() != 2)
      throw std::runtime_error("config: power_kw must be [min, max]");
    cfg.fleet.power_min_kw = get_double((*node)[0], "power_kw");
    cfg.fleet.power_max_kw = get_double((*node)[1], "power_kw");
  }
  if (const auto* node = find({"c_kwh", "capacity_range_kwh"})) {
    if (!node->is_array() || node->size() != 2)
      throw std::runtime_error("config: c_kwh must be [min, max]");
    cfg.fleet.capacity_min_kwh = get_double((*node)[0], "c_kwh");
    cfg.fleet.capacity_max_kwh = get_double((*node)[1], "c_kwh");
  }
  if (const auto* node = find({"noise_mode"}))
    cfg.noise_mode = noise_mode_from_string(node->get<std::string>());
  if (const auto* node = find({"out", "output"})) cfg.out_path = node->get<std::string>();
  if (const auto* node = find({"check_guarantees"})) cfg.check_guarantees = node->get<bool>();
  if (const auto* node = find({"oracle_tol"})) cfg.oracle_tol = get_double(*node, "oracle_tol");
  if (const auto* node = find({"oracle_max_iters"})) cfg.oracle_max_iters = node->get<int>();
  if (const auto* node = find({"sigma_ogd_bound_constant", "bound_constant"}))
    cfg.sigma_ogd_bound_constant = get_double(*node, "bound_constant");
  if (const auto* node = find({"signal"})) {
    const nlohmann::json& s = *node;
    auto set_if = [&s, &get_double](const char* key, double& field) {
      if (auto it = s.find(key); it != s.end()) field = get_double(*it, key);
    };
    set_if("regulation_amplitude", cfg.signal.regulation_amplitude);
    set_if("regulation_noise_variance", cfg.signal.regulation_noise_variance);
    set_if("curtailment_scale", cfg.signal.curtailment_scale);
    set_if("curtailment_exponent", cfg.signal.curtailment_exponent);
    set_if("rise_noise_variance", cfg.signal.rise_noise_variance);
    set_if("plateau_noise_variance", cfg.signal.plateau_noise_variance);
  }
  if (const auto* node = find({"synthetic"})) {
    const nlohmann::json& s = *node;
    if (auto it = s.find("dimension"); it != s.end()) cfg.synthetic.dimension = it->get<int>();
    if (auto it = s.find("amplitude"); it != s.end()) cfg.synthetic.amplitude = it->get<double>();
    if (auto it = s.find("noise_std"); it != s.end()) cfg.synthetic.noise_std = it->get<double>();
    if (auto it = s.find("half_width"); it != s.end()) cfg.synthetic.half_width = it->get<double>();
  }
  cfg.validate();
  return cfg;
}

}  // namespace poco
