#pragma once

// Seeded generator of base-model prediction matrices with a controllable
// per-prefix accuracy curve and concept-drift segments.
//
// For case k: draw the length l, draw y in {0, 1} with P(y = 1) = deviation
// rate, then for every prefix j and base model i the prediction has the
// correct sign with probability p = clamp(curve(j / l) + drift(k), 0, 1).
// A prediction anchored at class s in {-1, +1} is
//   y_hat = A (1 + s (1 - 2u)),  u ~ U[0, noise_amplitude),
// so its relative deviation has sign s and magnitude in (1 - 2 noise, 1].
// Every case draws from its own engine seeded by (seed, k).

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "earlywarn/errors.hpp"
#include "earlywarn/random.hpp"
#include "earlywarn/stream.hpp"
#include "earlywarn/stream_io.hpp"
#include "earlywarn/text.hpp"

namespace earlywarn::synth {

struct Monotone {
  double p_start = 0.5;
  double p_end = 0.9;
};
struct DropRecover {
  double p_hi = 0.9;
  double p_lo = 0.5;
  double drop_at = 0.3;
  double recover_at = 0.6;
};
struct DropNoRecover {
  double p_hi = 0.9;
  double p_lo = 0.4;
  double drop_at = 0.56;
};
struct Zigzag {
  double p_hi = 0.8;
  double p_lo = 0.5;
};

using AccuracyCurve = std::variant<Monotone, DropRecover, DropNoRecover, Zigzag>;

struct DriftSegment {
  std::size_t start_case = 0;  // inclusive, 0-based arrival index
  std::size_t end_case = 0;    // exclusive
  double accuracy_offset = 0.0;
};

struct ConstantLength {
  int length = 10;
};
struct UniformLength {
  int min_length = 1;
  int max_length = 10;
};
using LengthLaw = std::variant<ConstantLength, UniformLength>;

struct GeneratorConfig {
  std::size_t n_cases = 1000;
  double deviation_rate = 0.3;
  LengthLaw length_law = UniformLength{5, 15};
  int ensemble_size = 20;
  AccuracyCurve curve = Monotone{};
  std::vector<DriftSegment> drift;
  double noise_amplitude = 0.4;
  std::uint64_t seed = 1;
  double expected_outcome = kCategoricalExpectedOutcome;
};

/// Probability that a base model predicts the correct sign at relative
/// position tau (prefix is used by the zigzag shape only).
inline double curve_eval(const AccuracyCurve& curve, double tau, int prefix = 1) {
  struct Visitor {
    double tau;
    int prefix;
    double operator()(const Monotone& c) const { return c.p_start + (c.p_end - c.p_start) * tau; }
    double operator()(const DropRecover& c) const {
      if (tau < c.drop_at) return c.p_hi;
      if (tau < c.recover_at || c.recover_at >= 1.0) return c.p_lo;
      return c.p_lo + (c.p_hi - c.p_lo) * (tau - c.recover_at) / (1.0 - c.recover_at);
    }
    double operator()(const DropNoRecover& c) const { return tau < c.drop_at ? c.p_hi : c.p_lo; }
    double operator()(const Zigzag& c) const { return prefix % 2 == 1 ? c.p_hi : c.p_lo; }
  };
  return std::visit(Visitor{tau, prefix}, curve);
}

inline double drift_offset(const std::vector<DriftSegment>& drift, std::size_t case_index) {
  for (const auto& s : drift) {
    if (case_index >= s.start_case && case_index < s.end_case) return s.accuracy_offset;
  }
  return 0.0;
}

inline void validate(const GeneratorConfig& c) {
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  auto pos = [](double t) { return t > 0.0 && t <= 1.0; };
  if (c.n_cases < 1) throw ConfigError("n_cases must be positive");
  if (!prob(c.deviation_rate)) throw ConfigError("deviation_rate must lie in [0, 1]");
  if (c.ensemble_size < 1) throw ConfigError("ensemble_size must be positive");
  if (!(c.noise_amplitude > 0.0 && c.noise_amplitude <= 0.5)) {
    throw ConfigError("noise_amplitude must lie in (0, 0.5]");
  }
  if (!(c.expected_outcome > 0.0)) throw ConfigError("expected outcome A must be positive");
  if (const auto* u = std::get_if<UniformLength>(&c.length_law)) {
    if (u->min_length < 1 || u->max_length < u->min_length) {
      throw ConfigError("uniform length law needs 1 <= l_min <= l_max");
    }
  } else if (std::get<ConstantLength>(c.length_law).length < 1) {
    throw ConfigError("constant length must be positive");
  }
  const bool curve_ok = std::visit(
      [&](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, Monotone>) return prob(k.p_start) && prob(k.p_end);
        if constexpr (std::is_same_v<T, DropRecover>) {
          return prob(k.p_hi) && prob(k.p_lo) && pos(k.drop_at) && pos(k.recover_at) &&
                 k.drop_at <= k.recover_at;
        }
        if constexpr (std::is_same_v<T, DropNoRecover>) {
          return prob(k.p_hi) && prob(k.p_lo) && pos(k.drop_at);
        }
        if constexpr (std::is_same_v<T, Zigzag>) return prob(k.p_hi) && prob(k.p_lo);
      },
      c.curve);
  if (!curve_ok) throw ConfigError("accuracy curve parameters out of range");
  auto segments = c.drift;
  std::sort(segments.begin(), segments.end(),
            [](const auto& a, const auto& b) { return a.start_case < b.start_case; });
  for (std::size_t k = 0; k < segments.size(); ++k) {
    if (segments[k].start_case >= segments[k].end_case) {
      throw ConfigError("drift segment must satisfy start < end");
    }
    if (k > 0 && segments[k].start_case < segments[k - 1].end_case) {
      throw ConfigError("drift segments overlap");
    }
  }
}

/// Case identifiers are zero-padded arrival indices.
inline std::string case_name(std::size_t k) {
  std::string digits = std::to_string(k + 1);
  if (digits.size() < 6) digits.insert(0, 6 - digits.size(), '0');
  return "case-" + digits;
}

inline BaseMatrixSet generate(const GeneratorConfig& config) {
  validate(config);
  BaseMatrixSet out;
  out.matrices.reserve(config.n_cases);
  out.truths.reserve(config.n_cases);
  const double a = config.expected_outcome;
  for (std::size_t k = 0; k < config.n_cases; ++k) {
    Rng rng(derive_seed({config.seed, k}));
    const int l = std::visit(
        [&](const auto& law) {
          using T = std::decay_t<decltype(law)>;
          if constexpr (std::is_same_v<T, ConstantLength>) {
            return law.length;
          } else {
            return uniform_int(rng, law.min_length, law.max_length);
          }
        },
        config.length_law);
    const bool deviation = bernoulli(rng, config.deviation_rate);
    const double true_sign = deviation ? 1.0 : -1.0;
    const double offset = drift_offset(config.drift, k);

    BasePredictionMatrix m;
    m.case_id = case_name(k);
    m.expected_outcome = a;
    m.predictions.assign(static_cast<std::size_t>(l),
                         std::vector<double>(static_cast<std::size_t>(config.ensemble_size)));
    for (int j = 1; j <= l; ++j) {
      const double p = std::clamp(curve_eval(config.curve, compute_tau(j, l), j) + offset, 0.0, 1.0);
      for (auto& y_hat : m.predictions[static_cast<std::size_t>(j - 1)]) {
        const double sign = bernoulli(rng, p) ? true_sign : -true_sign;
        const double u = uniform(rng, 0.0, config.noise_amplitude);
        y_hat = a * (1.0 + sign * (1.0 - 2.0 * u));
      }
    }
    out.matrices.push_back(std::move(m));
    out.truths.push_back({deviation ? 1.0 : 0.0, deviation});
  }
  return out;
}

inline PredictionStream generate_stream(const GeneratorConfig& config) {
  return aggregate_stream(generate(config), config.expected_outcome);
}

// ---------------------------------------------------------------------------
// Presets shaped after four public process-monitoring regimes: deviation
// rates 25/41/58/31 % and maximal prefix lengths 48/71/5/21.

inline const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"bpic12-like", "bpic17rf-like", "traffic-rf-like",
                                              "cargo-like"};
  return names;
}

inline GeneratorConfig preset(const std::string& name) {
  GeneratorConfig c;
  if (name == "bpic12-like") {
    c.deviation_rate = 0.25;
    c.length_law = UniformLength{10, 48};
    c.curve = Monotone{0.55, 0.9};
  } else if (name == "bpic17rf-like") {
    c.deviation_rate = 0.41;
    c.length_law = UniformLength{20, 71};
    c.curve = DropNoRecover{0.85, 0.55, 40.0 / 71.0};
  } else if (name == "traffic-rf-like") {
    c.deviation_rate = 0.58;
    c.length_law = UniformLength{3, 5};
    c.curve = DropRecover{0.8, 0.55, 0.4, 0.6};
  } else if (name == "cargo-like") {
    c.deviation_rate = 0.31;
    c.length_law = UniformLength{8, 21};
    c.curve = Zigzag{0.8, 0.6};
  } else {
    throw ConfigError("unknown generator preset '" + name + "'");
  }
  return c;
}

// ---------------------------------------------------------------------------
// Text forms used by config files and command-line flags.

/// "monotone:0.55,0.95", "drop_recover:hi,lo,drop,recover",
/// "drop_no_recover:hi,lo,drop", "zigzag:hi,lo"
inline AccuracyCurve parse_curve(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw ConfigError("curve '" + s + "' lacks ':'");
  const std::string kind(text::trim(std::string_view(s).substr(0, colon)));
  std::vector<double> v;
  for (auto part : text::split(std::string_view(s).substr(colon + 1), ',')) {
    const auto x = text::parse_double(part);
    if (!x) throw ConfigError("curve '" + s + "' has a malformed number");
    v.push_back(*x);
  }
  auto need = [&](std::size_t n) {
    if (v.size() != n) {
      throw ConfigError("curve '" + kind + "' expects " + std::to_string(n) + " values");
    }
  };
  if (kind == "monotone") {
    need(2);
    return Monotone{v[0], v[1]};
  }
  if (kind == "drop_recover") {
    need(4);
    return DropRecover{v[0], v[1], v[2], v[3]};
  }
  if (kind == "drop_no_recover") {
    need(3);
    return DropNoRecover{v[0], v[1], v[2]};
  }
  if (kind == "zigzag") {
    need(2);
    return Zigzag{v[0], v[1]};
  }
  throw ConfigError("unknown curve shape '" + kind + "'");
}

/// "start:end:offset"
inline DriftSegment parse_drift(const std::string& s) {
  const auto f = text::split(s, ':');
  if (f.size() != 3) throw ConfigError("drift segment '" + s + "' must be start:end:offset");
  const auto a = text::parse_int(f[0]);
  const auto b = text::parse_int(f[1]);
  const auto o = text::parse_double(f[2]);
  if (!a || !b || !o || *a < 0 || *b < 0) throw ConfigError("malformed drift segment '" + s + "'");
  return {static_cast<std::size_t>(*a), static_cast<std::size_t>(*b), *o};
}

/// Applies one key = value setting to a generator config.
inline void apply_setting(GeneratorConfig& c, const std::string& key, const std::string& value) {
  auto num = [&]() {
    const auto x = text::parse_double(value);
    if (!x) throw ConfigError("key '" + key + "': malformed number '" + value + "'");
    return *x;
  };
  auto integer = [&]() {
    const auto x = text::parse_int(value);
    if (!x || *x < 0) throw ConfigError("key '" + key + "': malformed integer '" + value + "'");
    return *x;
  };
  if (key == "preset") {
    const auto seed = c.seed;
    const auto n = c.n_cases;
    c = preset(value);
    c.seed = seed;
    c.n_cases = n;
  } else if (key == "n_cases") {
    c.n_cases = static_cast<std::size_t>(integer());
  } else if (key == "deviation_rate") {
    c.deviation_rate = num();
  } else if (key == "length") {
    c.length_law = ConstantLength{static_cast<int>(integer())};
  } else if (key == "length_range") {
    const auto f = text::split(value, ',');
    const auto lo = f.size() == 2 ? text::parse_int(f[0]) : std::nullopt;
    const auto hi = f.size() == 2 ? text::parse_int(f[1]) : std::nullopt;
    if (!lo || !hi) throw ConfigError("length_range expects 'min,max'");
    c.length_law = UniformLength{static_cast<int>(*lo), static_cast<int>(*hi)};
  } else if (key == "ensemble_size") {
    c.ensemble_size = static_cast<int>(integer());
  } else if (key == "curve") {
    c.curve = parse_curve(value);
  } else if (key == "drift") {
    c.drift.clear();
    for (auto part : text::split(value, ';')) {
      if (!text::trim(part).empty()) c.drift.push_back(parse_drift(std::string(text::trim(part))));
    }
  } else if (key == "noise_amplitude") {
    c.noise_amplitude = num();
  } else if (key == "seed") {
    c.seed = static_cast<std::uint64_t>(integer());
  } else if (key == "A") {
    c.expected_outcome = num();
  } else {
    throw ConfigError("unknown generator key '" + key + "'");
  }
}

}  // namespace earlywarn::synth
