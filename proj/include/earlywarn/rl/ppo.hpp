#pragma once

// Online reinforcement learning for alarm raising: one episode per case, a
// PPO actor-critic updated after every case from that case's trajectory.
//
// State: (delta, rho, tau, d, v). Actions: raise an alarm or continue. The
// only non-zero reward is the terminal one (see curiosity.hpp); with
// gamma = 1 every step's return equals it.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "earlywarn/costmodel.hpp"
#include "earlywarn/errors.hpp"
#include "earlywarn/metrics.hpp"
#include "earlywarn/policies.hpp"
#include "earlywarn/random.hpp"
#include "earlywarn/rl/curiosity.hpp"
#include "earlywarn/rl/network.hpp"
#include "earlywarn/stream.hpp"

namespace earlywarn::rl {

inline constexpr int kStateSize = 5;
inline constexpr int kActionCount = 2;
inline constexpr std::size_t kAlarmIndex = 0;
inline constexpr std::size_t kNoAlarmIndex = 1;
inline constexpr double kProbabilityFloor = 1e-8;
inline constexpr std::size_t kLearningCurveWindow = 100;

struct RlState {
  double delta = 0.0;
  double rho = 1.0;
  double tau = 1.0;
  double adaptation_rate = 0.0;  // d
  double npv = 0.0;              // v

  std::array<double, kStateSize> features() const noexcept {
    return {delta, rho, tau, adaptation_rate, npv};
  }

  bool operator==(const RlState&) const = default;
};

struct HyperParameters {
  double gamma = 1.0;
  double clip_epsilon = 0.2;
  double learning_rate = 3e-4;
  int update_epochs = 4;
  int hidden_width = 64;
  int hidden_layers = 2;
  double entropy_coef = 0.0;
  double max_grad_norm = 0.5;  // <= 0 disables clipping

  bool operator==(const HyperParameters&) const = default;
};

inline void validate(const HyperParameters& h) {
  if (h.gamma != 1.0) throw ConfigError("discount factor gamma is fixed at 1");
  if (!(h.clip_epsilon > 0.0 && h.clip_epsilon < 1.0)) {
    throw ConfigError("clip epsilon must lie in (0, 1)");
  }
  if (!(h.learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (h.update_epochs < 1) throw ConfigError("update epochs must be >= 1");
  if (h.hidden_width < 1 || h.hidden_layers < 1) throw ConfigError("hidden layers must be non-empty");
  if (!(h.entropy_coef >= 0.0)) throw ConfigError("entropy coefficient must be >= 0");
}

struct ActionProbabilities {
  double alarm = 0.5;
  double no_alarm = 0.5;

  double of(AlarmDecision a) const noexcept {
    return a == AlarmDecision::kRaiseAlarm ? alarm : no_alarm;
  }
};

struct PolicyOutput {
  ActionProbabilities probs;
  double value = 0.0;
};

/// Actor and critic weights with their optimizer state.
struct AgentParameters {
  Mlp actor;
  Mlp critic;
  Adam actor_optimizer;
  Adam critic_optimizer;

  bool operator==(const AgentParameters&) const = default;
};

inline std::vector<int> layer_sizes(const HyperParameters& h, int outputs) {
  std::vector<int> sizes{kStateSize};
  for (int k = 0; k < h.hidden_layers; ++k) sizes.push_back(h.hidden_width);
  sizes.push_back(outputs);
  return sizes;
}

/// Fresh agent whose initial policy is uniform and value estimate is zero.
inline AgentParameters make_agent_parameters(const HyperParameters& h, Rng& rng) {
  validate(h);
  AgentParameters p{Mlp(layer_sizes(h, kActionCount)), Mlp(layer_sizes(h, 1)), {}, {}};
  p.actor.initialize(rng);
  p.critic.initialize(rng);
  p.actor_optimizer = Adam(p.actor.parameter_count());
  p.critic_optimizer = Adam(p.critic.parameter_count());
  return p;
}

inline std::array<double, kActionCount> softmax(std::span<const double> logits) {
  const double hi = std::max(logits[0], logits[1]);
  const double e0 = std::exp(logits[0] - hi);
  const double e1 = std::exp(logits[1] - hi);
  const double s = e0 + e1;
  return {e0 / s, e1 / s};
}

inline PolicyOutput policy_forward(const AgentParameters& params, const RlState& state) {
  const auto x = state.features();
  for (double v : x) {
    if (!std::isfinite(v)) throw DomainError("non-finite RL state component");
  }
  const auto logits = params.actor.forward(x);
  const auto pi = softmax(logits);
  const auto value = params.critic.forward(x);
  return {{pi[kAlarmIndex], pi[kNoAlarmIndex]}, value[0]};
}

inline AlarmDecision select_action(const ActionProbabilities& probs, Rng& rng) {
  return uniform01(rng) < probs.alarm ? AlarmDecision::kRaiseAlarm : AlarmDecision::kContinue;
}

inline double floored_log(double p) { return std::log(std::max(p, kProbabilityFloor)); }

struct Step {
  RlState state;
  AlarmDecision action = AlarmDecision::kContinue;
  double log_prob = 0.0;  // under the policy that acted
  double value = 0.0;     // critic estimate when acting
  double reward = 0.0;
};

struct Trajectory {
  std::vector<Step> steps;
};

/// min(r A, clip(r, 1 - eps, 1 + eps) A)
inline double clipped_surrogate(double ratio, double advantage, double eps) {
  const double clipped = std::clamp(ratio, 1.0 - eps, 1.0 + eps);
  return std::min(ratio * advantage, clipped * advantage);
}

/// A step ready for the loss: return-to-go and advantage against the critic
/// estimate recorded while acting.
struct PreparedStep {
  std::array<double, kStateSize> features{};
  std::size_t action = kNoAlarmIndex;
  double old_log_prob = 0.0;
  double ret = 0.0;
  double advantage = 0.0;
};

inline std::vector<PreparedStep> prepare_batch(std::span<const Trajectory> batch, double gamma) {
  std::vector<PreparedStep> out;
  for (const auto& t : batch) {
    const std::size_t first = out.size();
    out.resize(first + t.steps.size());
    double ret = 0.0;
    for (std::size_t k = t.steps.size(); k-- > 0;) {
      const auto& s = t.steps[k];
      ret = s.reward + gamma * ret;
      auto& p = out[first + k];
      p.features = s.state.features();
      p.action = s.action == AlarmDecision::kRaiseAlarm ? kAlarmIndex : kNoAlarmIndex;
      p.old_log_prob = s.log_prob;
      p.ret = ret;
      p.advantage = ret - s.value;
    }
  }
  return out;
}

/// Mean clipped-surrogate loss (negated, minus the entropy bonus). Adds the
/// gradient to grad when it is non-empty.
inline double actor_objective(const Mlp& actor, std::span<const PreparedStep> steps, double eps,
                              double entropy_coef, std::span<double> grad) {
  if (steps.empty()) return 0.0;
  const double scale = 1.0 / static_cast<double>(steps.size());
  Mlp::Cache cache;
  double loss = 0.0;
  for (const auto& s : steps) {
    actor.forward(s.features, cache);
    const auto pi = softmax(cache.activations.back());
    const double pa = pi[s.action];
    const double log_pa = floored_log(pa);
    const double ratio = std::exp(log_pa - s.old_log_prob);
    const double clipped = std::clamp(ratio, 1.0 - eps, 1.0 + eps);
    double entropy = 0.0;
    for (double p : pi) {
      if (p > 0.0) entropy -= p * std::log(p);
    }
    loss += scale * (-std::min(ratio * s.advantage, clipped * s.advantage) - entropy_coef * entropy);
    if (grad.empty()) continue;

    std::array<double, kActionCount> g{0.0, 0.0};
    // Only the unclipped branch depends on the weights.
    if (ratio * s.advantage <= clipped * s.advantage && pa >= kProbabilityFloor) {
      const double d_ratio = -s.advantage * ratio;
      for (std::size_t k = 0; k < kActionCount; ++k) {
        g[k] += d_ratio * ((k == s.action ? 1.0 : 0.0) - pi[k]);
      }
    }
    if (entropy_coef != 0.0) {
      for (std::size_t k = 0; k < kActionCount; ++k) {
        if (pi[k] > 0.0) g[k] += entropy_coef * pi[k] * (std::log(pi[k]) + entropy);
      }
    }
    for (auto& x : g) x *= scale;
    actor.backward(cache, g, grad);
  }
  return loss;
}

/// Mean of 0.5 (V(s) - return)^2. Adds the gradient to grad when non-empty.
inline double critic_objective(const Mlp& critic, std::span<const PreparedStep> steps,
                               std::span<double> grad) {
  if (steps.empty()) return 0.0;
  const double scale = 1.0 / static_cast<double>(steps.size());
  Mlp::Cache cache;
  double loss = 0.0;
  for (const auto& s : steps) {
    critic.forward(s.features, cache);
    const double err = cache.activations.back()[0] - s.ret;
    loss += scale * 0.5 * err * err;
    if (grad.empty()) continue;
    const std::array<double, 1> g{scale * err};
    critic.backward(cache, g, grad);
  }
  return loss;
}

namespace detail {

inline void clip_and_check(std::span<double> grad, double max_norm, const char* which) {
  double sq = 0.0;
  for (double g : grad) sq += g * g;
  if (!std::isfinite(sq)) {
    throw UpdateError(std::string("non-finite ") + which + " gradient in PPO update");
  }
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double f = max_norm / norm;
    for (auto& g : grad) g *= f;
  }
}

}  // namespace detail

/// Clipped-surrogate actor update and value regression for update_epochs passes.
inline void ppo_update(AgentParameters& params, std::span<const Trajectory> batch,
                       const HyperParameters& h) {
  const auto steps = prepare_batch(batch, h.gamma);
  if (steps.empty()) return;
  std::vector<double> ga(params.actor.parameter_count());
  std::vector<double> gc(params.critic.parameter_count());
  for (int epoch = 0; epoch < h.update_epochs; ++epoch) {
    std::fill(ga.begin(), ga.end(), 0.0);
    std::fill(gc.begin(), gc.end(), 0.0);
    actor_objective(params.actor, steps, h.clip_epsilon, h.entropy_coef, ga);
    critic_objective(params.critic, steps, gc);
    detail::clip_and_check(ga, h.max_grad_norm, "actor");
    detail::clip_and_check(gc, h.max_grad_norm, "critic");
    params.actor_optimizer.step(params.actor.params(), ga, h.learning_rate);
    params.critic_optimizer.step(params.critic.params(), gc, h.learning_rate);
  }
}

inline void ppo_update(AgentParameters& params, const Trajectory& trajectory,
                       const HyperParameters& h) {
  ppo_update(params, std::span<const Trajectory>(&trajectory, 1), h);
}

struct CaseRun {
  std::optional<int> alarm_prefix;
  Trajectory trajectory;
  double reward = 0.0;
};

/// Plays one episode over the case. d and v are read once at the start of the
/// case; the tracker is updated once at its end.
inline CaseRun run_case(const CaseRecord& c, const AgentParameters& params,
                        CuriosityTracker& tracker, Rng& rng) {
  CaseRun run;
  const double d = tracker.adaptation_rate();
  const double v = tracker.negative_predictive_value();
  const int l = c.length();
  run.trajectory.steps.reserve(static_cast<std::size_t>(l));
  for (const auto& p : c.points) {
    const RlState state{p.delta, p.rho, p.tau, d, v};
    const auto out = policy_forward(params, state);
    const auto action = select_action(out.probs, rng);
    run.trajectory.steps.push_back({state, action, floored_log(out.probs.of(action)), out.value, 0.0});
    if (action == AlarmDecision::kRaiseAlarm) {
      run.alarm_prefix = p.prefix;
      break;
    }
  }
  const bool adapted = run.alarm_prefix.has_value();
  const double b = adapted ? earliness_coef_b(*run.alarm_prefix, l) : 1.0;
  run.reward = terminal_reward(adapted, c.deviation, b, curiosity_c(v, d), d);
  run.trajectory.steps.back().reward = run.reward;
  tracker.observe(adapted, c.deviation);
  return run;
}

/// Everything that evolves during an online run.
struct AgentState {
  HyperParameters hyper;
  AgentParameters params;
  CuriosityTracker tracker;

  bool operator==(const AgentState&) const = default;
};

inline AgentState make_agent(const HyperParameters& h, Rng& rng) {
  return {h, make_agent_parameters(h, rng), {}};
}

struct LearningCurvePoint {
  std::size_t case_index = 0;  // 1-based position in the processed stream
  double rolling_reward = 0.0;
  double rolling_alarm_rate = 0.0;
  double rolling_accurate_alarm_rate = 0.0;  // share of alarms on deviating cases
  double rolling_earliness = 0.0;            // mean over alarmed cases
};

struct StreamRun {
  std::vector<CaseEvaluation> evaluations;
  std::vector<double> rewards;
  std::vector<LearningCurvePoint> curve;
};

/// Rolling averages over the last kLearningCurveWindow cases.
class LearningCurveTracker {
 public:
  LearningCurveTracker() : window_(kLearningCurveWindow) {}

  LearningCurvePoint push(std::size_t case_index, double reward, const CaseEvaluation& e) {
    window_.push({reward, e.alarm_prefix.has_value(), e.alarm_prefix && e.deviation,
                  e.alarm_prefix ? earliness(*e.alarm_prefix, e.length) : 0.0});
    LearningCurvePoint p;
    p.case_index = case_index;
    std::size_t alarms = 0;
    std::size_t accurate = 0;
    double reward_sum = 0.0;
    double early = 0.0;
    for (const auto& r : window_.values()) {
      reward_sum += r.reward;
      alarms += r.alarm ? 1 : 0;
      accurate += r.accurate ? 1 : 0;
      early += r.earliness;
    }
    const double n = static_cast<double>(window_.size());
    p.rolling_reward = reward_sum / n;
    p.rolling_alarm_rate = static_cast<double>(alarms) / n;
    if (alarms > 0) {
      p.rolling_accurate_alarm_rate = static_cast<double>(accurate) / static_cast<double>(alarms);
      p.rolling_earliness = early / static_cast<double>(alarms);
    }
    return p;
  }

 private:
  struct Record {
    double reward;
    bool alarm;
    bool accurate;
    double earliness;
    bool operator==(const Record&) const = default;
  };
  RollingWindow<Record> window_;
};

/// Processes the cases in arrival order, updating the agent after each case.
inline StreamRun run_stream(const PredictionStream& stream, AgentState& agent, Rng& rng,
                            const CostParameters& cost_params) {
  StreamRun out;
  out.evaluations.reserve(stream.size());
  out.rewards.reserve(stream.size());
  out.curve.reserve(stream.size());
  LearningCurveTracker curve;
  for (std::size_t k = 0; k < stream.size(); ++k) {
    const auto& c = stream[k];
    auto run = run_case(c, agent.params, agent.tracker, rng);
    ppo_update(agent.params, run.trajectory, agent.hyper);
    out.evaluations.push_back(make_evaluation(c, run.alarm_prefix, cost_params));
    out.rewards.push_back(run.reward);
    out.curve.push_back(curve.push(k + 1, run.reward, out.evaluations.back()));
  }
  return out;
}

}  // namespace earlywarn::rl
