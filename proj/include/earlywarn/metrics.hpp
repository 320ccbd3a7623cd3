#pragma once

#include <cmath>
#include <cstddef>
#include <deque>
#include <map>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "earlywarn/errors.hpp"
#include "earlywarn/stream.hpp"

namespace earlywarn {

struct ContingencyCounts {
  long long tp = 0;
  long long fp = 0;
  long long tn = 0;
  long long fn = 0;

  void add(bool predicted_deviation, bool actual_deviation) noexcept {
    if (predicted_deviation) {
      (actual_deviation ? tp : fp) += 1;
    } else {
      (actual_deviation ? fn : tn) += 1;
    }
  }

  long long total() const noexcept { return tp + fp + tn + fn; }

  bool operator==(const ContingencyCounts&) const = default;
};

/// Matthews correlation coefficient; 0 when any marginal is empty.
inline double mcc(const ContingencyCounts& c) {
  const double tp = static_cast<double>(c.tp);
  const double fp = static_cast<double>(c.fp);
  const double tn = static_cast<double>(c.tn);
  const double fn = static_cast<double>(c.fn);
  const double denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
  if (denom == 0.0) return 0.0;
  return (tp * tn - fp * fn) / std::sqrt(denom);
}

/// Mean absolute error of a case's predictions against its outcome.
inline double mae(std::span<const double> predictions, double outcome) {
  if (predictions.empty()) throw DomainError("MAE of an empty prediction list");
  double sum = 0.0;
  for (double p : predictions) sum += std::abs(p - outcome);
  return sum / static_cast<double>(predictions.size());
}

/// Relative savings of c_x against the never-adapt cost.
inline double cost_savings(double never_cost, double cost) {
  if (!(never_cost > 0.0)) {
    throw DomainError("cost savings undefined when the never-adapt cost is not positive");
  }
  return (never_cost - cost) / never_cost;
}

/// 1 at the first prefix, 0 at the last.
inline double earliness(int alarm_prefix, int length) {
  if (alarm_prefix < 1 || alarm_prefix > length) {
    throw DomainError("alarm prefix " + std::to_string(alarm_prefix) + " outside 1.." +
                      std::to_string(length));
  }
  if (length == 1) return 1.0;
  return 1.0 - static_cast<double>(alarm_prefix - 1) / static_cast<double>(length - 1);
}

struct PrefixAccuracy {
  double mcc = 0.0;
  long long support = 0;  // cases reaching the prefix

  bool operator==(const PrefixAccuracy&) const = default;
};

/// MCC of the "delta > 0" classifier at every prefix reached by at least one case.
inline std::map<int, PrefixAccuracy> per_prefix_accuracy(const PredictionStream& stream) {
  std::map<int, ContingencyCounts> counts;
  for (const auto& c : stream) {
    for (const auto& p : c.points) counts[p.prefix].add(p.delta > 0.0, c.deviation);
  }
  std::map<int, PrefixAccuracy> out;
  for (const auto& [j, cc] : counts) out.emplace(j, PrefixAccuracy{mcc(cc), cc.total()});
  return out;
}

/// Per-case MAE of the recovered predictions y_hat = A (1 + delta), in arrival order.
inline std::vector<std::pair<std::size_t, double>> per_case_mae_series(
    const PredictionStream& stream) {
  const double a = stream.expected_outcome();
  std::vector<std::pair<std::size_t, double>> out;
  out.reserve(stream.size());
  std::vector<double> y_hat;
  for (std::size_t k = 0; k < stream.size(); ++k) {
    const auto& c = stream[k];
    y_hat.clear();
    for (const auto& p : c.points) y_hat.push_back(a * (1.0 + p.delta));
    out.emplace_back(k, mae(y_hat, c.outcome));
  }
  return out;
}

/// Fixed-capacity FIFO of values; the oldest value is evicted on overflow.
template <typename T>
class RollingWindow {
 public:
  explicit RollingWindow(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ == 0) throw DomainError("rolling window capacity must be positive");
  }

  void push(T value) {
    values_.push_back(std::move(value));
    if (values_.size() > capacity_) values_.pop_front();
  }

  std::size_t size() const noexcept { return values_.size(); }
  std::size_t capacity() const noexcept { return capacity_; }
  bool empty() const noexcept { return values_.empty(); }
  bool full() const noexcept { return values_.size() == capacity_; }
  const std::deque<T>& values() const noexcept { return values_; }

  double mean() const {
    if (values_.empty()) throw DomainError("mean of an empty window");
    double sum = 0.0;
    for (const auto& v : values_) sum += static_cast<double>(v);
    return sum / static_cast<double>(values_.size());
  }

  bool operator==(const RollingWindow&) const = default;

 private:
  std::size_t capacity_;
  std::deque<T> values_;
};

}  // namespace earlywarn
