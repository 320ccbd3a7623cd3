#pragma once

// Data model for prefix-wise prediction streams and the ensemble aggregation
// that turns base-model predictions into (delta, rho, tau) points.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "earlywarn/errors.hpp"

namespace earlywarn {

/// Expected outcome used for categorical logs (non-violation 0.0, violation 1.0).
inline constexpr double kCategoricalExpectedOutcome = 0.5;

struct PredictionPoint {
  int prefix = 1;      // j, 1-based event count
  double delta = 0.0;  // relative predicted deviation
  double rho = 1.0;    // reliability estimate in [0.5, 1]
  double tau = 1.0;    // relative prefix length j / l

  bool operator==(const PredictionPoint&) const = default;
};

struct CaseRecord {
  std::string case_id;
  std::vector<PredictionPoint> points;  // j = 1..l
  double outcome = 0.0;                 // y
  bool deviation = false;

  int length() const noexcept { return static_cast<int>(points.size()); }

  bool operator==(const CaseRecord&) const = default;
};

/// Ground truth attached to a case when aggregating base-model predictions.
struct CaseTruth {
  double outcome = 0.0;
  bool deviation = false;
};

/// Raw predictions of an ensemble of m base models for every prefix of a case.
struct BasePredictionMatrix {
  std::string case_id;
  double expected_outcome = kCategoricalExpectedOutcome;
  std::vector<std::vector<double>> predictions;  // [j - 1][model index]

  int length() const noexcept { return static_cast<int>(predictions.size()); }
  int ensemble_size() const noexcept {
    return predictions.empty() ? 0 : static_cast<int>(predictions.front().size());
  }
};

inline double compute_delta(double y_hat, double expected_outcome) {
  if (expected_outcome == 0.0) {
    throw DomainError("relative deviation undefined for expected outcome A = 0");
  }
  return (y_hat - expected_outcome) / expected_outcome;
}

/// Majority share of the ensemble: max(|{delta > 0}|, |{delta <= 0}|) / m.
inline double compute_rho(std::span<const double> base_deltas) {
  if (base_deltas.empty()) throw DomainError("reliability of an empty ensemble");
  const auto positive = std::count_if(base_deltas.begin(), base_deltas.end(),
                                      [](double d) { return d > 0.0; });
  const auto m = static_cast<std::ptrdiff_t>(base_deltas.size());
  return static_cast<double>(std::max(positive, m - positive)) / static_cast<double>(m);
}

inline double compute_tau(int prefix, int length) {
  if (prefix < 1 || prefix > length) {
    throw DomainError("prefix " + std::to_string(prefix) + " outside 1.." +
                      std::to_string(length));
  }
  return static_cast<double>(prefix) / static_cast<double>(length);
}

/// Throws ValidationError when the case breaks a data-model invariant.
inline void validate_case(const CaseRecord& c, double expected_outcome) {
  auto fail = [&](const std::string& field, const std::string& what) {
    throw ValidationError("case '" + c.case_id + "' field " + field + ": " + what);
  };
  if (c.case_id.empty()) throw ValidationError("case with empty case_id");
  if (c.points.empty()) fail("points", "case has no prediction points");
  if (!std::isfinite(c.outcome)) fail("y", "non-finite outcome");
  if (expected_outcome == kCategoricalExpectedOutcome &&
      (c.outcome == 0.0 || c.outcome == 1.0) && c.deviation != (c.outcome == 1.0)) {
    fail("deviation", "categorical outcome disagrees with deviation flag");
  }
  const int l = c.length();
  for (int k = 0; k < l; ++k) {
    const auto& p = c.points[static_cast<std::size_t>(k)];
    if (p.prefix != k + 1) {
      fail("j", "expected prefix " + std::to_string(k + 1) + ", found " +
                    std::to_string(p.prefix));
    }
    if (!std::isfinite(p.delta)) fail("delta", "non-finite at j=" + std::to_string(p.prefix));
    if (!(p.rho >= 0.5 && p.rho <= 1.0)) {
      fail("rho", "outside [0.5, 1] at j=" + std::to_string(p.prefix));
    }
    if (p.tau != compute_tau(p.prefix, l)) {
      fail("tau", "not equal to j/l at j=" + std::to_string(p.prefix));
    }
  }
}

/// Ordered, validated collection of cases. Immutable once constructed.
class PredictionStream {
 public:
  PredictionStream(std::vector<CaseRecord> cases,
                   double expected_outcome = kCategoricalExpectedOutcome)
      : cases_(std::move(cases)), expected_outcome_(expected_outcome) {
    if (cases_.empty()) throw ValidationError("empty stream");
    if (!std::isfinite(expected_outcome_) || expected_outcome_ == 0.0) {
      throw ValidationError("expected outcome A must be finite and non-zero");
    }
    std::unordered_set<std::string> seen;
    for (const auto& c : cases_) {
      validate_case(c, expected_outcome_);
      if (!seen.insert(c.case_id).second) {
        throw ValidationError("case '" + c.case_id + "' field case_id: duplicate");
      }
    }
  }

  const std::vector<CaseRecord>& cases() const noexcept { return cases_; }
  const CaseRecord& operator[](std::size_t i) const { return cases_[i]; }
  std::size_t size() const noexcept { return cases_.size(); }
  double expected_outcome() const noexcept { return expected_outcome_; }

  auto begin() const noexcept { return cases_.begin(); }
  auto end() const noexcept { return cases_.end(); }

  /// Cases [first, last) in arrival order.
  PredictionStream slice(std::size_t first, std::size_t last) const {
    if (first >= last || last > cases_.size()) {
      throw ValidationError("empty stream");
    }
    return PredictionStream(
        std::vector<CaseRecord>(cases_.begin() + static_cast<std::ptrdiff_t>(first),
                                cases_.begin() + static_cast<std::ptrdiff_t>(last)),
        expected_outcome_);
  }

  bool operator==(const PredictionStream&) const = default;

 private:
  std::vector<CaseRecord> cases_;
  double expected_outcome_;
};

/// Collapses an ensemble matrix into prediction points. delta is taken of the
/// mean prediction; rho counts the signs of the per-model deltas.
inline CaseRecord aggregate_ensemble(const BasePredictionMatrix& matrix, const CaseTruth& truth) {
  const int l = matrix.length();
  const int m = matrix.ensemble_size();
  if (l == 0) throw DomainError("case '" + matrix.case_id + "' has no prefixes");
  if (m == 0) throw DomainError("case '" + matrix.case_id + "' has an empty ensemble");

  CaseRecord out;
  out.case_id = matrix.case_id;
  out.outcome = truth.outcome;
  out.deviation = truth.deviation;
  out.points.reserve(static_cast<std::size_t>(l));

  std::vector<double> deltas(static_cast<std::size_t>(m));
  for (int j = 1; j <= l; ++j) {
    const auto& row = matrix.predictions[static_cast<std::size_t>(j - 1)];
    if (static_cast<int>(row.size()) != m) {
      throw DomainError("case '" + matrix.case_id + "' ensemble size changes at j=" +
                        std::to_string(j));
    }
    double sum = 0.0;
    for (int i = 0; i < m; ++i) {
      const double y_hat = row[static_cast<std::size_t>(i)];
      sum += y_hat;
      deltas[static_cast<std::size_t>(i)] = compute_delta(y_hat, matrix.expected_outcome);
    }
    const double mean = sum / static_cast<double>(m);
    out.points.push_back({j, compute_delta(mean, matrix.expected_outcome), compute_rho(deltas),
                          compute_tau(j, l)});
  }
  return out;
}

/// Nearest-rank q-quantile of the case lengths: the ceil(q N)-th order statistic.
inline int length_quantile(const PredictionStream& stream, double q) {
  if (!(q > 0.0 && q <= 1.0)) throw DomainError("quantile must lie in (0, 1]");
  std::vector<int> lengths;
  lengths.reserve(stream.size());
  for (const auto& c : stream) lengths.push_back(c.length());
  std::sort(lengths.begin(), lengths.end());
  const double n = static_cast<double>(lengths.size());
  // Guard against q * N landing a hair above an integer (0.99 * 100).
  auto rank = static_cast<std::size_t>(std::ceil(q * n - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, lengths.size());
  return lengths[rank - 1];
}

/// Cuts every case to at most the q-quantile of case lengths; tau is recomputed
/// against the shortened length.
inline PredictionStream truncate_to_quantile(const PredictionStream& stream, double q) {
  const int cap = length_quantile(stream, q);
  std::vector<CaseRecord> cases;
  cases.reserve(stream.size());
  for (const auto& c : stream) {
    CaseRecord t = c;
    if (t.length() > cap) {
      t.points.resize(static_cast<std::size_t>(cap));
      for (auto& p : t.points) p.tau = compute_tau(p.prefix, cap);
    }
    cases.push_back(std::move(t));
  }
  return PredictionStream(std::move(cases), stream.expected_outcome());
}

/// Empirical share of deviating cases.
inline double deviation_rate(const PredictionStream& stream) {
  std::size_t n = 0;
  for (const auto& c : stream) n += c.deviation ? 1 : 0;
  return static_cast<double>(n) / static_cast<double>(stream.size());
}

}  // namespace earlywarn
