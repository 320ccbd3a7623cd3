#include <gtest/gtest.h>

#include <limits>
#include <map>
#include <optional>
#include <vector>

#include "earlywarn/policies.hpp"
#include "earlywarn/synthgen.hpp"
#include "test_support.hpp"

namespace ew = earlywarn;
using ew::AlarmDecision;
using ew::testing::make_case;

namespace {

ew::CostParameters params(double lambda, double kappa, double alpha_min) {
  ew::CostParameters p;
  p.lambda = lambda;
  p.kappa = kappa;
  p.alpha_min = alpha_min;
  return p;
}

ew::PredictionPoint point(int j, double delta, double rho = 1.0) { return {j, delta, rho, 1.0}; }

std::map<int, ew::PrefixAccuracy> curve(const std::vector<double>& mccs, long long support = 100) {
  std::map<int, ew::PrefixAccuracy> out;
  for (std::size_t i = 0; i < mccs.size(); ++i) out[static_cast<int>(i + 1)] = {mccs[i], support};
  return out;
}

// Independent scan: evaluates every candidate with the generic loop.
ew::FittedThreshold exhaustive_fit(const ew::PredictionStream& s, const ew::CostParameters& p) {
  std::vector<double> candidates{0.5, std::nextafter(1.0, 2.0)};
  for (const auto& c : s) {
    for (const auto& pt : c.points) candidates.push_back(pt.rho);
  }
  std::sort(candidates.begin(), candidates.end());
  ew::FittedThreshold best{0.0, std::numeric_limits<double>::infinity()};
  for (double t : candidates) {
    const auto evals = ew::evaluate_policy(
        s, p, [t](const ew::PredictionPoint& pt) { return ew::threshold_decide(pt, t); });
    const double c = ew::mean_cost(evals);
    if (c < best.training_cost) best = {t, c};
  }
  return best;
}

}  // namespace

TEST(FirstPositive, Examples) {
  EXPECT_EQ(ew::first_positive_decide(point(1, 0.3)), AlarmDecision::kRaiseAlarm);
  EXPECT_EQ(ew::first_positive_decide(point(1, 0.0)), AlarmDecision::kContinue);
  EXPECT_EQ(ew::first_positive_decide(point(1, -0.5)), AlarmDecision::kContinue);
}

TEST(StaticPoint, DecideExamples) {
  const ew::StaticPointConfig cfg{0.9, 3};
  EXPECT_EQ(ew::static_decide(point(3, 0.2), cfg), AlarmDecision::kRaiseAlarm);
  EXPECT_EQ(ew::static_decide(point(2, 0.9), cfg), AlarmDecision::kContinue);
  EXPECT_EQ(ew::static_decide(point(3, -0.1), cfg), AlarmDecision::kContinue);
}

TEST(StaticPoint, ChooseExamples) {
  EXPECT_EQ(ew::choose_static_point(curve({0.2, 0.5, 0.9, 0.92}), 0.9), 3);
  EXPECT_EQ(ew::choose_static_point(curve({0.4, 0.4, 0.4}), 0.7), 1);
  EXPECT_EQ(ew::choose_static_point(curve({0.1, 0.2, 0.3, 0.4}), 1.0), 4);
}

TEST(StaticPoint, UnsupportedPrefixesAreNotCandidates) {
  auto c = curve({0.2, 0.5, 0.6});
  c[4] = {0.99, 29};
  EXPECT_EQ(ew::choose_static_point(c, 1.0), 3);
  EXPECT_THROW(ew::choose_static_point(curve({0.5}, 10), 0.9), ew::ConfigError);
  EXPECT_THROW(ew::choose_static_point(curve({0.5}), 0.0), ew::ConfigError);
}

TEST(StaticPoint, NegativePeakFallsBackToEarliestPeak) {
  EXPECT_EQ(ew::choose_static_point(curve({-0.5, -0.2, -0.2}), 0.9), 2);
}

TEST(StaticPoint, ShortCasesNeverAlarm) {
  const ew::PredictionStream s({make_case("short", {0.5, 0.5}, {}, true)});
  const auto evals = ew::evaluate_policy(s, params(0.1, 0, 1), [](const ew::PredictionPoint& p) {
    return ew::static_decide(p, {0.9, 3});
  });
  EXPECT_FALSE(evals[0].alarm_prefix.has_value());
  EXPECT_EQ(evals[0].cost, 100.0);
}

TEST(Threshold, DecideExamples) {
  EXPECT_EQ(ew::threshold_decide(point(1, 0.4, 0.96), 0.95), AlarmDecision::kRaiseAlarm);
  EXPECT_EQ(ew::threshold_decide(point(1, 0.4, 0.90), 0.95), AlarmDecision::kContinue);
  EXPECT_EQ(ew::threshold_decide(point(1, -0.2, 1.0), 0.5), AlarmDecision::kContinue);
  EXPECT_EQ(ew::threshold_decide(point(1, 0.2, 1.0), ew::kNeverAlarmThreshold), AlarmDecision::kContinue);
}

TEST(EvaluatePolicy, Examples) {
  ew::Rng rng(2);
  const auto s = ew::testing::random_stream(rng, 200, 7);
  const auto never = ew::evaluate_policy(s, params(0.25, 0.5, 0.5),
                                         [](const ew::PredictionPoint&) { return AlarmDecision::kContinue; });
  EXPECT_DOUBLE_EQ(ew::mean_cost(never), ew::deviation_rate(s) * 100.0);
  const auto always = ew::evaluate_policy(s, params(0.25, 0.0, 0.5),
                                          [](const ew::PredictionPoint&) { return AlarmDecision::kRaiseAlarm; });
  EXPECT_DOUBLE_EQ(ew::mean_cost(always), 25.0);
  for (const auto& e : always) EXPECT_EQ(e.alarm_prefix, 1);
}

TEST(EvaluatePolicy, OneAlarmAtFirstRaise) {
  const ew::PredictionStream s({make_case("a", {-0.1, 0.2, 0.3, 0.4}, {}, true)});
  const auto evals = ew::evaluate_policy(s, params(0.1, 0, 1), ew::first_positive_decide);
  ASSERT_EQ(evals.size(), 1u);
  EXPECT_EQ(evals[0].alarm_prefix, 2);
  EXPECT_TRUE(evals[0].correct);
  EXPECT_EQ(evals[0].cost, 10.0);
}

TEST(EvaluatePolicy, Summary) {
  const ew::PredictionStream s({make_case("a", {0.1, 0.1, 0.1}, {}, true),
                                make_case("b", {-0.1, -0.1, 0.1}, {}, false),
                                make_case("c", {-0.1}, {}, false), make_case("d", {-0.1}, {}, true)});
  const auto summary = ew::summarize_evaluations(ew::evaluate_policy(s, params(0, 0, 1), ew::first_positive_decide));
  EXPECT_EQ(summary.alarm_rate, 0.5);
  EXPECT_EQ(summary.accurate_alarm_rate, 0.5);
  EXPECT_EQ(summary.mean_earliness, 0.5);
  EXPECT_EQ(summary.mean_cost, 25.0);
}

TEST(Threshold, FirstPositiveEqualsThresholdOneHalf) {
  ew::Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto s = ew::testing::random_stream(rng, 50, 10);
    const auto p = params(ew::uniform01(rng), ew::uniform01(rng), ew::uniform01(rng));
    EXPECT_EQ(ew::evaluate_policy(s, p, ew::first_positive_decide),
              ew::evaluate_policy(s, p, [](const ew::PredictionPoint& pt) { return ew::threshold_decide(pt, 0.5); }));
  }
}

TEST(Threshold, RaisingThresholdNeverAlarmsEarlier) {
  ew::Rng rng(4);
  const auto s = ew::testing::random_stream(rng, 100, 12);
  const auto candidates = ew::threshold_candidates(s);
  std::vector<std::optional<int>> previous(s.size(), 0);
  for (double t : candidates) {
    const auto evals = ew::evaluate_policy(s, params(0.1, 0.1, 0.5), [t](const ew::PredictionPoint& pt) {
      return ew::threshold_decide(pt, t);
    });
    for (std::size_t k = 0; k < s.size(); ++k) {
      const auto& now = evals[k].alarm_prefix;
      if (!previous[k].has_value()) {
        EXPECT_FALSE(now.has_value());
      } else if (now.has_value()) {
        EXPECT_GE(*now, *previous[k]);
      }
      previous[k] = now;
    }
  }
  for (const auto& p : previous) EXPECT_FALSE(p.has_value());
}

TEST(FitThreshold, MatchesExhaustiveScan) {
  ew::Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const auto s = ew::testing::random_stream(rng, ew::uniform_int(rng, 1, 80), 10, ew::uniform_int(rng, 1, 12));
    const auto p = params(ew::uniform01(rng), ew::uniform01(rng), ew::uniform01(rng));
    const auto fit = ew::fit_threshold(s, p);
    const auto oracle = exhaustive_fit(s, p);
    EXPECT_EQ(fit.threshold, oracle.threshold);
    EXPECT_EQ(fit.training_cost, oracle.training_cost);
  }
}

TEST(FitThreshold, OracleStreamAlarmsAtFirstPoint) {
  ew::synth::GeneratorConfig cfg;
  cfg.n_cases = 500;
  cfg.curve = ew::synth::Monotone{1.0, 1.0};
  cfg.ensemble_size = 5;
  const auto s = ew::synth::generate_stream(cfg);
  const auto fit = ew::fit_threshold(s, params(0.25, 0.3, 0.0));
  EXPECT_LE(fit.threshold, 1.0);
  EXPECT_DOUBLE_EQ(fit.training_cost, ew::deviation_rate(s) * 25.0);
  // rho is 1 everywhere, so 0.5 and 1.0 tie and the smaller one wins.
  EXPECT_EQ(fit.threshold, 0.5);
}

TEST(FitThreshold, NeverAlarmWhenAdaptationDominates) {
  ew::synth::GeneratorConfig cfg;
  cfg.n_cases = 300;
  cfg.curve = ew::synth::Monotone{0.7, 0.7};
  const auto s = ew::synth::generate_stream(cfg);
  const auto fit = ew::fit_threshold(s, params(1.0, 1.0, 0.0));
  EXPECT_EQ(fit.threshold, ew::kNeverAlarmThreshold);
  EXPECT_DOUBLE_EQ(fit.training_cost, ew::deviation_rate(s) * 100.0);
}

TEST(FitThreshold, SingleReliabilityValue) {
  const ew::PredictionStream s({make_case("a", {0.5}, {1.0}, true), make_case("b", {0.5}, {1.0}, false)});
  // Alarming costs 10 + 10 + 0 = 20 over two cases vs 100 for silence.
  EXPECT_EQ(ew::fit_threshold(s, params(0.1, 0.1, 1.0)).threshold, 0.5);
  EXPECT_EQ(ew::fit_threshold(s, params(1.0, 1.0, 1.0)).threshold, ew::kNeverAlarmThreshold);
}

TEST(FitThreshold, CandidatesIncludeSentinels) {
  const ew::PredictionStream s({make_case("a", {0.5, 0.1}, {0.7, 0.9}, true)});
  const auto c = ew::threshold_candidates(s);
  ASSERT_EQ(c.size(), 4u);
  EXPECT_EQ(c.front(), 0.5);
  EXPECT_EQ(c.back(), ew::kNeverAlarmThreshold);
  EXPECT_GT(ew::kNeverAlarmThreshold, 1.0);
}
