#pragma once

// Non-learning alarm policies (first positive prediction, static prediction
// point, empirical thresholding) and the one-alarm-per-case evaluation loop.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "earlywarn/costmodel.hpp"
#include "earlywarn/errors.hpp"
#include "earlywarn/metrics.hpp"
#include "earlywarn/stream.hpp"

namespace earlywarn {

enum class AlarmDecision { kContinue, kRaiseAlarm };

/// Threshold above every attainable reliability: the policy never alarms.
inline const double kNeverAlarmThreshold = std::nextafter(1.0, 2.0);

inline constexpr int kDefaultStaticMinSupport = 30;
inline constexpr double kDefaultStaticTheta = 0.9;

struct FittedThreshold {
  double threshold = kNeverAlarmThreshold;
  double training_cost = 0.0;
};

struct StaticPointConfig {
  double theta = kDefaultStaticTheta;  // required fraction of the peak MCC
  int prefix = 1;                      // j*_fix
};

struct CaseEvaluation {
  std::string case_id;
  std::optional<int> alarm_prefix;
  int length = 1;
  bool deviation = false;
  double cost = 0.0;
  bool correct = false;  // alarm on a deviation, or silence on a clean case

  bool operator==(const CaseEvaluation&) const = default;
};

inline AlarmDecision first_positive_decide(const PredictionPoint& point) noexcept {
  return point.delta > 0.0 ? AlarmDecision::kRaiseAlarm : AlarmDecision::kContinue;
}

inline AlarmDecision static_decide(const PredictionPoint& point,
                                   const StaticPointConfig& config) noexcept {
  return point.prefix == config.prefix && point.delta > 0.0 ? AlarmDecision::kRaiseAlarm
                                                            : AlarmDecision::kContinue;
}

inline AlarmDecision threshold_decide(const PredictionPoint& point, double threshold) noexcept {
  return point.delta > 0.0 && point.rho >= threshold ? AlarmDecision::kRaiseAlarm
                                                     : AlarmDecision::kContinue;
}

inline CaseEvaluation make_evaluation(const CaseRecord& c, std::optional<int> alarm_prefix,
                                      const CostParameters& params) {
  CaseEvaluation e;
  e.case_id = c.case_id;
  e.alarm_prefix = alarm_prefix;
  e.length = c.length();
  e.deviation = c.deviation;
  e.cost = expected_cost(c.deviation, alarm_prefix, c.length(), params);
  e.correct = alarm_prefix.has_value() == c.deviation;
  return e;
}

/// Walks every case in order; the first kRaiseAlarm ends the case.
template <typename Decide>
std::vector<CaseEvaluation> evaluate_policy(const PredictionStream& stream,
                                            const CostParameters& params, Decide&& decide) {
  std::vector<CaseEvaluation> out;
  out.reserve(stream.size());
  for (const auto& c : stream) {
    std::optional<int> alarm;
    for (const auto& p : c.points) {
      if (decide(p) == AlarmDecision::kRaiseAlarm) {
        alarm = p.prefix;
        break;
      }
    }
    out.push_back(make_evaluation(c, alarm, params));
  }
  return out;
}

/// Aggregate behaviour of a policy over one evaluation.
struct PolicySummary {
  double mean_cost = 0.0;
  double alarm_rate = 0.0;           // alarms per case
  double accurate_alarm_rate = 0.0;  // share of alarms raised on deviating cases
  double mean_earliness = 0.0;       // over alarmed cases, 0 without alarms
};

inline double mean_cost(const std::vector<CaseEvaluation>& evals) {
  if (evals.empty()) throw DomainError("mean cost of an empty evaluation");
  double sum = 0.0;
  for (const auto& e : evals) sum += e.cost;
  return sum / static_cast<double>(evals.size());
}

inline PolicySummary summarize_evaluations(const std::vector<CaseEvaluation>& evals) {
  PolicySummary s;
  s.mean_cost = mean_cost(evals);
  std::size_t alarms = 0;
  std::size_t accurate = 0;
  double early = 0.0;
  for (const auto& e : evals) {
    if (!e.alarm_prefix) continue;
    ++alarms;
    accurate += e.deviation ? 1 : 0;
    early += earliness(*e.alarm_prefix, e.length);
  }
  s.alarm_rate = static_cast<double>(alarms) / static_cast<double>(evals.size());
  if (alarms > 0) {
    s.accurate_alarm_rate = static_cast<double>(accurate) / static_cast<double>(alarms);
    s.mean_earliness = early / static_cast<double>(alarms);
  }
  return s;
}

/// Earliest prefix whose MCC reaches theta times the peak MCC among prefixes
/// supported by at least min_support cases.
inline int choose_static_point(const std::map<int, PrefixAccuracy>& curve, double theta,
                               long long min_support = kDefaultStaticMinSupport) {
  if (!(theta > 0.0 && theta <= 1.0)) throw ConfigError("static theta must lie in (0, 1]");
  std::optional<double> peak;
  for (const auto& [j, acc] : curve) {
    if (acc.support >= min_support) peak = std::max(peak.value_or(acc.mcc), acc.mcc);
  }
  if (!peak) {
    throw ConfigError("static point fitting: no prefix reached by at least " +
                      std::to_string(min_support) + " cases");
  }
  for (const auto& [j, acc] : curve) {
    if (acc.support >= min_support && acc.mcc >= theta * *peak) return j;
  }
  // A negative peak can sit below theta * peak; fall back to the earliest peak.
  for (const auto& [j, acc] : curve) {
    if (acc.support >= min_support && acc.mcc == *peak) return j;
  }
  throw ConfigError("static point fitting failed");
}

inline StaticPointConfig fit_static_point(const PredictionStream& fitting, double theta,
                                          long long min_support = kDefaultStaticMinSupport) {
  return {theta, choose_static_point(per_prefix_accuracy(fitting), theta, min_support)};
}

/// Sorted distinct reliabilities of the stream plus 0.5 and the never-alarm sentinel.
inline std::vector<double> threshold_candidates(const PredictionStream& stream) {
  std::vector<double> out{0.5, kNeverAlarmThreshold};
  for (const auto& c : stream) {
    for (const auto& p : c.points) out.push_back(p.rho);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

/// Picks the candidate threshold with the lowest mean expected cost on the
/// fitting stream; ties go to the smaller threshold.
inline FittedThreshold fit_threshold(const PredictionStream& fitting,
                                     const CostParameters& params) {
  // For a case, the alarm under threshold t is the first positive point with
  // rho >= t. Only points that raise the running maximum of rho over positive
  // points can ever be that first point, so each case reduces to an ascending
  // list of (rho, cost) steps.
  struct Step {
    double rho;
    double cost;
  };
  struct CaseSteps {
    std::vector<Step> steps;
    double silent_cost;
  };
  std::vector<CaseSteps> cases;
  cases.reserve(fitting.size());
  for (const auto& c : fitting) {
    CaseSteps cs{{}, expected_cost(c.deviation, std::nullopt, c.length(), params)};
    double running = -1.0;
    for (const auto& p : c.points) {
      if (p.delta > 0.0 && p.rho > running) {
        running = p.rho;
        cs.steps.push_back({p.rho, expected_cost(c.deviation, p.prefix, c.length(), params)});
      }
    }
    cases.push_back(std::move(cs));
  }

  const auto candidates = threshold_candidates(fitting);
  std::vector<std::size_t> cursor(cases.size(), 0);
  FittedThreshold best{kNeverAlarmThreshold, std::numeric_limits<double>::infinity()};
  const double n = static_cast<double>(cases.size());
  for (double t : candidates) {
    double sum = 0.0;
    for (std::size_t k = 0; k < cases.size(); ++k) {
      const auto& cs = cases[k];
      auto& i = cursor[k];
      while (i < cs.steps.size() && cs.steps[i].rho < t) ++i;
      sum += i < cs.steps.size() ? cs.steps[i].cost : cs.silent_cost;
    }
    const double mean = sum / n;
    if (mean < best.training_cost) best = {t, mean};
  }
  return best;
}

}  // namespace earlywarn
