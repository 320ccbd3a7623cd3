#pragma once

// Terminal reward with artificial curiosity.
//
//                   adaptation           no adaptation
//   deviation       b (1 - c) - 2 d      -1
//   no deviation    b (1 - c) - 2 d      +1.5
//
// b: earliness coefficient, 1 at the first prefix down to 1/2 at the last.
// d: adaptation rate over the last 30 cases.
// c: curiosity modifier, clamp((21 - 30 v)(d - 1/2), 0, 3), where v is the
//    negative predictive value over the last 100 non-adapted cases.
// Adapted cases never consult the actual outcome.

#include <algorithm>
#include <cstddef>
#include <deque>

namespace earlywarn::rl {

inline constexpr std::size_t kAdaptationWindow = 30;
inline constexpr std::size_t kNpvWindow = 100;
/// v keeps its cold-start value until this many non-adapted cases are seen.
inline constexpr std::size_t kNpvMinSamples = 10;
inline constexpr double kCorrectSilenceReward = 1.5;
inline constexpr double kMissedDeviationReward = -1.0;

/// Each factor is floored at 0 before the product, so c stays 0 once v >= 0.7
/// or d <= 0.5 (two negative factors would otherwise multiply to a positive c).
inline double curiosity_c(double npv, double adaptation_rate) {
  const double trust = std::max(0.0, -30.0 * npv + 21.0);
  const double excess = std::max(0.0, adaptation_rate - 0.5);
  return std::min(trust * excess, 3.0);
}

inline double earliness_coef_b(int prefix, int length) {
  if (length <= 1) return 1.0;
  return 1.0 - static_cast<double>(prefix - 1) / (2.0 * static_cast<double>(length - 1));
}

inline double terminal_reward(bool adapted, bool deviation, double b, double c, double d) {
  if (adapted) return b * (1.0 - c) - 2.0 * d;
  return deviation ? kMissedDeviationReward : kCorrectSilenceReward;
}

/// Sliding windows behind d and v.
class CuriosityTracker {
 public:
  void observe(bool adapted, bool deviation) {
    adaptations_.push_back(adapted);
    if (adaptations_.size() > kAdaptationWindow) adaptations_.pop_front();
    if (!adapted) {
      // true = true negative, false = false negative
      silences_.push_back(!deviation);
      if (silences_.size() > kNpvWindow) silences_.pop_front();
    }
  }

  /// Share of adapted cases in the window; 0 when empty.
  double adaptation_rate() const noexcept {
    if (adaptations_.empty()) return 0.0;
    const auto n = std::count(adaptations_.begin(), adaptations_.end(), true);
    return static_cast<double>(n) / static_cast<double>(adaptations_.size());
  }

  /// TN / (TN + FN) over the window; 0 below kNpvMinSamples entries. One or two
  /// lucky early silences would otherwise switch curiosity off for good.
  double negative_predictive_value() const noexcept {
    if (silences_.size() < kNpvMinSamples) return 0.0;
    const auto tn = std::count(silences_.begin(), silences_.end(), true);
    return static_cast<double>(tn) / static_cast<double>(silences_.size());
  }

  const std::deque<bool>& adaptations() const noexcept { return adaptations_; }
  const std::deque<bool>& silences() const noexcept { return silences_; }

  void restore(std::deque<bool> adaptations, std::deque<bool> silences) {
    while (adaptations.size() > kAdaptationWindow) adaptations.pop_front();
    while (silences.size() > kNpvWindow) silences.pop_front();
    adaptations_ = std::move(adaptations);
    silences_ = std::move(silences);
  }

  bool operator==(const CuriosityTracker&) const = default;

 private:
  std::deque<bool> adaptations_;
  std::deque<bool> silences_;
};

}  // namespace earlywarn::rl
