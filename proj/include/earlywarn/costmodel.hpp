#pragma once

// Expected per-case cost of an alarm decision.
//
//                      alarm at j (effective w.p. alpha(j))   no alarm
//   deviation          C_a + (1 - alpha) C_p                  C_p
//   no deviation       C_a + alpha C_c                        0
//
// with C_a = lambda C_p, C_c = kappa C_p and alpha falling linearly from
// alpha_max at the first prefix to alpha_min at the last.

#include <algorithm>
#include <optional>
#include <string>

#include "earlywarn/errors.hpp"
#include "earlywarn/random.hpp"

namespace earlywarn {

struct CostParameters {
  double penalty = 100.0;   // C_p
  double lambda = 0.0;      // C_a / C_p
  double kappa = 0.0;       // C_c / C_p
  double alpha_min = 1.0;
  double alpha_max = 1.0;

  double adaptation_cost() const noexcept { return lambda * penalty; }
  double compensation_cost() const noexcept { return kappa * penalty; }

  bool operator==(const CostParameters&) const = default;
};

inline void validate(const CostParameters& p) {
  auto unit = [](double x) { return x >= 0.0 && x <= 1.0; };
  if (!(p.penalty > 0.0)) throw ConfigError("penalty cost C_p must be positive");
  if (!unit(p.lambda)) throw ConfigError("lambda must lie in [0, 1]");
  if (!unit(p.kappa)) throw ConfigError("kappa must lie in [0, 1]");
  if (!unit(p.alpha_min)) throw ConfigError("alpha_min must lie in [0, 1]");
  if (p.alpha_max != 1.0) throw ConfigError("alpha_max is fixed at 1");
}

/// Half-width of the uniform perturbation applied to the fitting parameters.
struct EnvelopeSpec {
  double xi = 0.0;
};

/// Adaptation effectiveness at prefix j of a length-l case.
inline double alpha_at(int prefix, int length, const CostParameters& p) {
  if (prefix < 1 || prefix > length) {
    throw DomainError("alarm prefix " + std::to_string(prefix) + " outside 1.." +
                      std::to_string(length));
  }
  if (length == 1) return p.alpha_max;
  return p.alpha_max - (p.alpha_max - p.alpha_min) * static_cast<double>(prefix - 1) /
                           static_cast<double>(length - 1);
}

/// Expectation over adaptation effectiveness; nothing is sampled.
inline double expected_cost(bool deviation, std::optional<int> alarm_prefix, int length,
                            const CostParameters& p) {
  if (!alarm_prefix) return deviation ? p.penalty : 0.0;
  const double alpha = alpha_at(*alarm_prefix, length, p);
  if (deviation) return p.adaptation_cost() + (1.0 - alpha) * p.penalty;
  return p.adaptation_cost() + alpha * p.compensation_cost();
}

/// Resamples lambda, kappa and alpha_min uniformly within +-xi, clamped to [0, 1].
inline CostParameters sample_envelope(const CostParameters& p, EnvelopeSpec spec, Rng& rng) {
  if (spec.xi < 0.0) throw ConfigError("envelope half-width xi must be >= 0");
  if (spec.xi == 0.0) return p;
  auto draw = [&](double x) { return std::clamp(uniform(rng, x - spec.xi, x + spec.xi), 0.0, 1.0); };
  CostParameters out = p;
  out.lambda = draw(p.lambda);
  out.kappa = draw(p.kappa);
  out.alpha_min = draw(p.alpha_min);
  return out;
}

}  // namespace earlywarn
