#pragma once

// Experiment orchestration: fit/measure split, the cost-parameter grid,
// repetitions, policy dispatch on a worker pool, results CSV and summaries.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include "earlywarn/config.hpp"
#include "earlywarn/costmodel.hpp"
#include "earlywarn/errors.hpp"
#include "earlywarn/metrics.hpp"
#include "earlywarn/policies.hpp"
#include "earlywarn/random.hpp"
#include "earlywarn/rl/ppo.hpp"
#include "earlywarn/stream.hpp"
#include "earlywarn/text.hpp"

namespace earlywarn {

enum class Policy { kNever, kFirstPositive, kStatic, kThreshold, kOnlineRl };

inline const std::vector<Policy>& all_policies() {
  static const std::vector<Policy> p{Policy::kNever, Policy::kFirstPositive, Policy::kStatic,
                                     Policy::kThreshold, Policy::kOnlineRl};
  return p;
}

inline std::string policy_name(Policy p) {
  switch (p) {
    case Policy::kNever: return "never";
    case Policy::kFirstPositive: return "first_positive";
    case Policy::kStatic: return "static";
    case Policy::kThreshold: return "threshold";
    case Policy::kOnlineRl: return "online_rl";
  }
  return "?";
}

inline Policy parse_policy(std::string_view name) {
  for (auto p : all_policies()) {
    if (policy_name(p) == text::trim(name)) return p;
  }
  throw ConfigError("unknown policy '" + std::string(name) + "'");
}

struct ExperimentConfig {
  std::vector<double> lambda_values{0.0, 0.25, 0.75, 1.0};
  std::vector<double> kappa_values{0.0, 0.25, 0.75, 1.0};
  std::vector<double> alpha_min_values{0.0, 0.25, 0.75, 1.0};
  std::vector<double> xi_values{0.025, 0.1, 0.175, 0.25};  // used with threshold_xi_sweep
  double threshold_xi = 0.1;
  bool threshold_xi_sweep = false;
  int repetitions = 10;
  double fit_fraction = 0.33;
  std::vector<Policy> policies = all_policies();
  std::optional<std::uint64_t> master_seed;
  double penalty = 100.0;
  double static_theta = kDefaultStaticTheta;
  long long static_min_support = kDefaultStaticMinSupport;
  rl::HyperParameters rl;
  int workers = 0;  // 0: hardware concurrency

  std::size_t cell_count() const noexcept {
    return lambda_values.size() * kappa_values.size() * alpha_min_values.size();
  }
};

inline void validate(const ExperimentConfig& c) {
  if (c.lambda_values.empty() || c.kappa_values.empty() || c.alpha_min_values.empty()) {
    throw ConfigError("cost grid lists must be non-empty");
  }
  for (double x : c.xi_values) {
    if (x < 0.0) throw ConfigError("xi values must be >= 0");
  }
  if (c.threshold_xi < 0.0) throw ConfigError("policy.threshold.xi must be >= 0");
  if (c.repetitions < 1) throw ConfigError("repetitions must be >= 1");
  if (!(c.fit_fraction > 0.0 && c.fit_fraction < 1.0)) {
    throw ConfigError("fit_fraction must lie in (0, 1)");
  }
  if (c.policies.empty()) throw ConfigError("no policies selected");
  if (!(c.static_theta > 0.0 && c.static_theta <= 1.0)) {
    throw ConfigError("policy.static.theta must lie in (0, 1]");
  }
  for (double l : c.lambda_values) {
    for (double k : c.kappa_values) {
      for (double a : c.alpha_min_values) validate(CostParameters{c.penalty, l, k, a, 1.0});
    }
  }
  rl::validate(c.rl);
}

/// Every configuration key, in documentation order.
inline const std::vector<std::string>& experiment_keys() {
  static const std::vector<std::string> keys{
      "lambda_values",        "kappa_values",          "alpha_min_values",
      "xi_values",            "repetitions",           "fit_fraction",
      "policies",             "seed",                  "workers",
      "cost.penalty",         "policy.static.theta",   "policy.static.min_support",
      "policy.threshold.xi",  "policy.threshold.xi_sweep",
      "rl.clip_epsilon",      "rl.learning_rate",      "rl.update_epochs",
      "rl.hidden_width",      "rl.hidden_layers",      "rl.entropy_coef",
      "rl.max_grad_norm"};
  return keys;
}

inline void apply_setting(ExperimentConfig& c, const std::string& key, const std::string& value) {
  auto num = [&]() {
    const auto x = text::parse_double(value);
    if (!x) throw ConfigError("key '" + key + "': malformed number '" + value + "'");
    return *x;
  };
  auto integer = [&]() {
    const auto x = text::parse_int(value);
    if (!x) throw ConfigError("key '" + key + "': malformed integer '" + value + "'");
    return *x;
  };
  if (key == "lambda_values") {
    c.lambda_values = parse_double_list(key, value);
  } else if (key == "kappa_values") {
    c.kappa_values = parse_double_list(key, value);
  } else if (key == "alpha_min_values") {
    c.alpha_min_values = parse_double_list(key, value);
  } else if (key == "xi_values") {
    c.xi_values = parse_double_list(key, value);
  } else if (key == "repetitions") {
    c.repetitions = static_cast<int>(integer());
  } else if (key == "fit_fraction") {
    c.fit_fraction = num();
  } else if (key == "policies") {
    c.policies.clear();
    for (auto part : text::split(value, ',')) c.policies.push_back(parse_policy(part));
    std::sort(c.policies.begin(), c.policies.end());
    c.policies.erase(std::unique(c.policies.begin(), c.policies.end()), c.policies.end());
  } else if (key == "seed") {
    const auto x = integer();
    if (x < 0) throw ConfigError("seed must be non-negative");
    c.master_seed = static_cast<std::uint64_t>(x);
  } else if (key == "workers") {
    c.workers = static_cast<int>(integer());
  } else if (key == "cost.penalty") {
    c.penalty = num();
  } else if (key == "policy.static.theta") {
    c.static_theta = num();
  } else if (key == "policy.static.min_support") {
    c.static_min_support = integer();
  } else if (key == "policy.threshold.xi") {
    c.threshold_xi = num();
  } else if (key == "policy.threshold.xi_sweep") {
    const auto b = text::parse_bool(value);
    if (!b) throw ConfigError("key '" + key + "': expected true/false");
    c.threshold_xi_sweep = *b;
  } else if (key == "rl.clip_epsilon") {
    c.rl.clip_epsilon = num();
  } else if (key == "rl.learning_rate") {
    c.rl.learning_rate = num();
  } else if (key == "rl.update_epochs") {
    c.rl.update_epochs = static_cast<int>(integer());
  } else if (key == "rl.hidden_width") {
    c.rl.hidden_width = static_cast<int>(integer());
  } else if (key == "rl.hidden_layers") {
    c.rl.hidden_layers = static_cast<int>(integer());
  } else if (key == "rl.entropy_coef") {
    c.rl.entropy_coef = num();
  } else if (key == "rl.max_grad_norm") {
    c.rl.max_grad_norm = num();
  } else {
    throw ConfigError("unknown configuration key '" + key + "'");
  }
}

inline void apply_settings(ExperimentConfig& c, const KeyValues& kv) {
  for (const auto& [k, v] : kv) apply_setting(c, k, v);
}

/// Contiguous split at round(fit_fraction N); arrival order is preserved.
inline std::pair<PredictionStream, PredictionStream> split_stream(const PredictionStream& stream,
                                                                  double fit_fraction) {
  if (!(fit_fraction > 0.0 && fit_fraction < 1.0)) {
    throw ConfigError("fit_fraction must lie in (0, 1)");
  }
  const std::size_t n = stream.size();
  const auto cut = static_cast<std::size_t>(std::llround(fit_fraction * static_cast<double>(n)));
  if (cut == 0 || cut >= n) {
    throw ConfigError("split of " + std::to_string(n) + " cases at fraction " +
                      text::format_double(fit_fraction) + " leaves an empty slice");
  }
  return {stream.slice(0, cut), stream.slice(cut, n)};
}

struct RunResult {
  Policy policy = Policy::kNever;
  double lambda = 0.0;
  double kappa = 0.0;
  double alpha_min = 0.0;
  std::optional<double> xi;
  int repetition = 0;
  PolicySummary summary;
  double cost_savings = std::numeric_limits<double>::quiet_NaN();
  bool failed = false;
  std::string error;
};

/// One online RL pass over the whole stream: the first fit_count cases warm
/// the agent up, the remaining ones are measured while learning continues.
struct OnlineRlOutcome {
  rl::StreamRun run;
  PolicySummary measured;
};

inline OnlineRlOutcome run_online_rl(const PredictionStream& stream, std::size_t fit_count,
                                     const CostParameters& cost, const rl::HyperParameters& hyper,
                                     std::uint64_t seed) {
  if (fit_count >= stream.size()) throw ConfigError("online RL needs a non-empty measure slice");
  Rng rng(seed);
  auto agent = rl::make_agent(hyper, rng);
  OnlineRlOutcome out;
  out.run = rl::run_stream(stream, agent, rng, cost);
  const std::vector<CaseEvaluation> measured(
      out.run.evaluations.begin() + static_cast<std::ptrdiff_t>(fit_count),
      out.run.evaluations.end());
  out.measured = summarize_evaluations(measured);
  return out;
}

inline void write_learning_curve(const std::vector<rl::LearningCurvePoint>& curve,
                                 const std::string& path) {
  auto out = text::open_for_write(path);
  out << "case_index,rolling_reward,rolling_alarm_rate,rolling_accurate_alarm_rate,"
         "rolling_earliness\n";
  for (const auto& p : curve) {
    out << p.case_index << ',' << text::format_double(p.rolling_reward) << ','
        << text::format_double(p.rolling_alarm_rate) << ','
        << text::format_double(p.rolling_accurate_alarm_rate) << ','
        << text::format_double(p.rolling_earliness) << '\n';
  }
  text::finish_write(out, path);
}

struct GridOptions {
  std::optional<std::string> curves_dir;  // learning curve per online RL run
};

inline std::string curve_file_name(double lambda, double kappa, double alpha_min, int repetition) {
  return "curve_lambda" + text::format_double(lambda) + "_kappa" + text::format_double(kappa) +
         "_alphamin" + text::format_double(alpha_min) + "_rep" + std::to_string(repetition) +
         ".csv";
}

/// Runs every (cell, policy, xi, repetition) combination. Output order is
/// canonical: cell (lambda, kappa, alpha_min in list order), policy, xi,
/// repetition, independent of the worker schedule.
inline std::vector<RunResult> run_grid(const PredictionStream& stream,
                                       const ExperimentConfig& config,
                                       const GridOptions& options = {}) {
  validate(config);
  if (!config.master_seed) throw ConfigError("a master seed is required");
  const std::uint64_t master = *config.master_seed;
  const auto [fit, measure] = split_stream(stream, config.fit_fraction);

  auto has = [&](Policy p) {
    return std::find(config.policies.begin(), config.policies.end(), p) != config.policies.end();
  };
  std::optional<StaticPointConfig> static_point;
  std::string static_error;
  if (has(Policy::kStatic)) {
    try {
      static_point = fit_static_point(fit, config.static_theta, config.static_min_support);
    } catch (const Error& e) {
      static_error = e.what();
    }
  }
  if (options.curves_dir) std::filesystem::create_directories(*options.curves_dir);

  struct Cell {
    CostParameters params;
    double never_cost;
  };
  std::vector<Cell> cells;
  for (double l : config.lambda_values) {
    for (double k : config.kappa_values) {
      for (double a : config.alpha_min_values) {
        const CostParameters p{config.penalty, l, k, a, 1.0};
        cells.push_back({p, mean_cost(evaluate_policy(measure, p, [](const PredictionPoint&) {
                           return AlarmDecision::kContinue;
                         }))});
      }
    }
  }

  struct Item {
    std::size_t cell;
    Policy policy;
    std::optional<std::size_t> xi_index;
    int repetition;
  };
  std::vector<Item> items;
  const std::vector<double> xis =
      config.threshold_xi_sweep ? config.xi_values : std::vector<double>{config.threshold_xi};
  for (std::size_t c = 0; c < cells.size(); ++c) {
    for (auto p : config.policies) {
      switch (p) {
        case Policy::kNever:
        case Policy::kFirstPositive:
        case Policy::kStatic:
          items.push_back({c, p, std::nullopt, 0});
          break;
        case Policy::kThreshold:
          for (std::size_t x = 0; x < xis.size(); ++x) {
            for (int r = 0; r < config.repetitions; ++r) items.push_back({c, p, x, r});
          }
          break;
        case Policy::kOnlineRl:
          for (int r = 0; r < config.repetitions; ++r) items.push_back({c, p, std::nullopt, r});
          break;
      }
    }
  }

  std::vector<RunResult> results(items.size());
  auto execute = [&](std::size_t idx) {
    const auto& item = items[idx];
    const auto& cell = cells[item.cell];
    RunResult& r = results[idx];
    r.policy = item.policy;
    r.lambda = cell.params.lambda;
    r.kappa = cell.params.kappa;
    r.alpha_min = cell.params.alpha_min;
    r.repetition = item.repetition;
    if (item.xi_index) r.xi = xis[*item.xi_index];
    const std::uint64_t seed =
        derive_seed({master, item.cell, static_cast<std::uint64_t>(item.policy),
                     item.xi_index.value_or(0), static_cast<std::uint64_t>(item.repetition)});
    try {
      switch (item.policy) {
        case Policy::kNever:
          r.summary = summarize_evaluations(evaluate_policy(
              measure, cell.params, [](const PredictionPoint&) { return AlarmDecision::kContinue; }));
          break;
        case Policy::kFirstPositive:
          r.summary = summarize_evaluations(evaluate_policy(measure, cell.params, first_positive_decide));
          break;
        case Policy::kStatic: {
          if (!static_point) throw ConfigError(static_error);
          const auto sp = *static_point;
          r.summary = summarize_evaluations(evaluate_policy(
              measure, cell.params, [&](const PredictionPoint& p) { return static_decide(p, sp); }));
          break;
        }
        case Policy::kThreshold: {
          Rng rng(seed);
          const auto fitted = fit_threshold(fit, sample_envelope(cell.params, {*r.xi}, rng));
          r.summary = summarize_evaluations(evaluate_policy(
              measure, cell.params,
              [&](const PredictionPoint& p) { return threshold_decide(p, fitted.threshold); }));
          break;
        }
        case Policy::kOnlineRl: {
          auto outcome = run_online_rl(stream, fit.size(), cell.params, config.rl, seed);
          r.summary = outcome.measured;
          if (options.curves_dir) {
            write_learning_curve(
                outcome.run.curve,
                (std::filesystem::path(*options.curves_dir) /
                 curve_file_name(r.lambda, r.kappa, r.alpha_min, r.repetition))
                    .string());
          }
          break;
        }
      }
      if (cell.never_cost > 0.0) r.cost_savings = cost_savings(cell.never_cost, r.summary.mean_cost);
    } catch (const std::exception& e) {
      r.failed = true;
      r.error = e.what();
      const double nan = std::numeric_limits<double>::quiet_NaN();
      r.summary = {nan, nan, nan, nan};
      r.cost_savings = nan;
    }
  };

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t n_workers = std::min<std::size_t>(
      items.size(), config.workers > 0 ? static_cast<std::size_t>(config.workers) : hw);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < items.size(); i = next++) execute(i);
  };
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }
  return results;
}

// ---------------------------------------------------------------------------
// Results CSV

inline constexpr const char* kResultsHeader =
    "policy,lambda,kappa,alpha_min,xi,repetition,mean_cost,alarm_rate,accurate_alarm_rate,"
    "mean_earliness,cost_savings";

inline void write_results(const std::vector<RunResult>& results, std::ostream& out) {
  using text::format_double;
  out << kResultsHeader << '\n';
  for (const auto& r : results) {
    out << policy_name(r.policy) << ',' << format_double(r.lambda) << ','
        << format_double(r.kappa) << ',' << format_double(r.alpha_min) << ','
        << (r.xi ? format_double(*r.xi) : std::string()) << ',' << r.repetition << ','
        << format_double(r.summary.mean_cost) << ',' << format_double(r.summary.alarm_rate) << ','
        << format_double(r.summary.accurate_alarm_rate) << ','
        << format_double(r.summary.mean_earliness) << ',' << format_double(r.cost_savings) << '\n';
  }
}

inline void write_results(const std::vector<RunResult>& results, const std::string& path) {
  auto out = text::open_for_write(path);
  write_results(results, out);
  text::finish_write(out, path);
}

inline std::vector<RunResult> load_results(const std::string& path) {
  auto in = text::open_for_read(path);
  std::string line;
  std::size_t line_no = 0;
  std::vector<RunResult> out;
  bool header = false;
  auto number = [&](std::string_view s) {
    if (text::trim(s) == "nan") return std::numeric_limits<double>::quiet_NaN();
    const auto x = text::parse_double(s);
    if (!x) throw ParseError(path, line_no, "malformed number '" + std::string(s) + "'");
    return *x;
  };
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = text::trim(line);
    if (t.empty()) continue;
    if (!header) {
      if (t != kResultsHeader) throw ParseError(path, line_no, "unexpected results header");
      header = true;
      continue;
    }
    const auto f = text::split(t, ',');
    if (f.size() != 11) throw ParseError(path, line_no, "expected 11 columns");
    RunResult r;
    try {
      r.policy = parse_policy(f[0]);
    } catch (const ConfigError& e) {
      throw ParseError(path, line_no, e.what());
    }
    r.lambda = number(f[1]);
    r.kappa = number(f[2]);
    r.alpha_min = number(f[3]);
    if (!text::trim(f[4]).empty()) r.xi = number(f[4]);
    const auto rep = text::parse_int(f[5]);
    if (!rep) throw ParseError(path, line_no, "malformed repetition");
    r.repetition = static_cast<int>(*rep);
    r.summary = {number(f[6]), number(f[7]), number(f[8]), number(f[9])};
    r.cost_savings = number(f[10]);
    r.failed = std::isnan(r.summary.mean_cost);
    out.push_back(std::move(r));
  }
  if (out.empty()) throw ValidationError("results file '" + path + "' has no rows");
  return out;
}

// ---------------------------------------------------------------------------
// Summaries

struct PolicyCellSummary {
  std::string label;  // policy name, plus [xi=..] when several xi were run
  Policy policy = Policy::kNever;
  int runs = 0;
  int failed = 0;
  double mean_cost = 0.0;
  double std_cost = 0.0;  // sample standard deviation over repetitions
  double alarm_rate = 0.0;
  double accurate_alarm_rate = 0.0;
  double mean_earliness = 0.0;
  double cost_savings = 0.0;
};

struct CellSummary {
  double lambda = 0.0;
  double kappa = 0.0;
  double alpha_min = 0.0;
  std::vector<PolicyCellSummary> policies;
  std::optional<std::string> best;  // cheapest proactive policy
  bool proactive_pays_off = false;  // best beats never-adapt
  bool incomplete = false;          // some repetition failed
};

struct PolicyTotals {
  std::string label;
  int cells_won = 0;
  double fraction_won = 0.0;  // over cells where proactive adaptation pays off
  double mean_savings = 0.0;  // over the same cells
};

struct Report {
  std::vector<CellSummary> cells;
  std::vector<PolicyTotals> totals;
  int paying_cells = 0;
};

/// Per cell: averages over repetitions and the winning proactive policy
/// (lowest mean cost; ties go to the higher mean earliness, then to the
/// lexicographically smaller label). Cells where no policy beats never-adapt
/// are left out of the win fractions.
inline Report summarize(const std::vector<RunResult>& results) {
  if (results.empty()) throw ValidationError("no results to summarize");
  std::map<Policy, std::set<double>> xis_per_policy;
  for (const auto& r : results) {
    if (r.xi) xis_per_policy[r.policy].insert(*r.xi);
  }
  auto label_of = [&](const RunResult& r) {
    std::string s = policy_name(r.policy);
    if (r.xi && xis_per_policy[r.policy].size() > 1) s += "[xi=" + text::format_double(*r.xi) + "]";
    return s;
  };

  using CellKey = std::tuple<double, double, double>;
  std::vector<CellKey> cell_order;
  std::map<CellKey, std::vector<std::string>> label_order;
  std::map<std::pair<CellKey, std::string>, std::vector<const RunResult*>> groups;
  for (const auto& r : results) {
    const CellKey key{r.lambda, r.kappa, r.alpha_min};
    if (!label_order.count(key)) cell_order.push_back(key);
    const auto label = label_of(r);
    auto& labels = label_order[key];
    if (std::find(labels.begin(), labels.end(), label) == labels.end()) labels.push_back(label);
    groups[{key, label}].push_back(&r);
  }

  Report report;
  std::map<std::string, PolicyTotals> totals;
  std::vector<std::string> total_order;
  std::map<std::string, double> savings_sum;
  for (const auto& key : cell_order) {
    CellSummary cell;
    std::tie(cell.lambda, cell.kappa, cell.alpha_min) = key;
    for (const auto& label : label_order[key]) {
      const auto& runs = groups[{key, label}];
      PolicyCellSummary s;
      s.label = label;
      s.policy = runs.front()->policy;
      std::vector<double> costs;
      double alarm = 0.0, accurate = 0.0, early = 0.0, savings = 0.0;
      for (const auto* r : runs) {
        ++s.runs;
        if (r->failed) {
          ++s.failed;
          continue;
        }
        costs.push_back(r->summary.mean_cost);
        alarm += r->summary.alarm_rate;
        accurate += r->summary.accurate_alarm_rate;
        early += r->summary.mean_earliness;
        savings += r->cost_savings;
      }
      const double n = static_cast<double>(costs.size());
      if (costs.empty()) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        s.mean_cost = s.std_cost = s.alarm_rate = s.accurate_alarm_rate = s.mean_earliness =
            s.cost_savings = nan;
      } else {
        double sum = 0.0;
        for (double c : costs) sum += c;
        s.mean_cost = sum / n;
        double sq = 0.0;
        for (double c : costs) sq += (c - s.mean_cost) * (c - s.mean_cost);
        s.std_cost = costs.size() > 1 ? std::sqrt(sq / (n - 1.0)) : 0.0;
        s.alarm_rate = alarm / n;
        s.accurate_alarm_rate = accurate / n;
        s.mean_earliness = early / n;
        s.cost_savings = savings / n;
      }
      cell.incomplete = cell.incomplete || s.failed > 0;
      if (!totals.count(label) && s.policy != Policy::kNever) {
        totals[label].label = label;
        total_order.push_back(label);
      }
      cell.policies.push_back(std::move(s));
    }

    const PolicyCellSummary* best = nullptr;
    for (const auto& s : cell.policies) {
      if (s.policy == Policy::kNever || std::isnan(s.mean_cost)) continue;
      if (best == nullptr || s.mean_cost < best->mean_cost ||
          (s.mean_cost == best->mean_cost &&
           (s.mean_earliness > best->mean_earliness ||
            (s.mean_earliness == best->mean_earliness && s.label < best->label)))) {
        best = &s;
      }
    }
    if (best != nullptr) {
      cell.best = best->label;
      cell.proactive_pays_off = best->cost_savings > 0.0;
    }
    if (cell.proactive_pays_off) {
      ++report.paying_cells;
      totals[*cell.best].cells_won += 1;
      for (const auto& s : cell.policies) {
        if (s.policy != Policy::kNever && !std::isnan(s.cost_savings)) {
          savings_sum[s.label] += s.cost_savings;
        }
      }
    }
    report.cells.push_back(std::move(cell));
  }
  for (const auto& label : total_order) {
    auto t = totals[label];
    if (report.paying_cells > 0) {
      t.fraction_won = static_cast<double>(t.cells_won) / report.paying_cells;
      t.mean_savings = savings_sum[label] / report.paying_cells;
    }
    report.totals.push_back(std::move(t));
  }
  return report;
}

/// Writes summary.csv, winners.csv, winner_matrix.csv and policy_totals.csv.
inline void write_report(const Report& report, const std::string& dir) {
  using text::format_double;
  std::filesystem::create_directories(dir);
  const auto path = [&](const char* name) { return (std::filesystem::path(dir) / name).string(); };

  {
    const auto p = path("summary.csv");
    auto out = text::open_for_write(p);
    out << "lambda,kappa,alpha_min,policy,runs,failed,mean_cost,std_cost,alarm_rate,"
           "accurate_alarm_rate,mean_earliness,cost_savings,best\n";
    for (const auto& c : report.cells) {
      for (const auto& s : c.policies) {
        out << format_double(c.lambda) << ',' << format_double(c.kappa) << ','
            << format_double(c.alpha_min) << ',' << s.label << ',' << s.runs << ',' << s.failed
            << ',' << format_double(s.mean_cost) << ',' << format_double(s.std_cost) << ','
            << format_double(s.alarm_rate) << ',' << format_double(s.accurate_alarm_rate) << ','
            << format_double(s.mean_earliness) << ',' << format_double(s.cost_savings) << ','
            << (c.best == s.label ? "true" : "false") << '\n';
      }
    }
    text::finish_write(out, p);
  }
  {
    const auto p = path("winners.csv");
    auto out = text::open_for_write(p);
    out << "lambda,kappa,alpha_min,best,proactive_pays_off,incomplete\n";
    for (const auto& c : report.cells) {
      out << format_double(c.lambda) << ',' << format_double(c.kappa) << ','
          << format_double(c.alpha_min) << ',' << c.best.value_or("") << ','
          << (c.proactive_pays_off ? "true" : "false") << ','
          << (c.incomplete ? "true" : "false") << '\n';
    }
    text::finish_write(out, p);
  }
  {
    // Rows: (alpha_min, lambda); columns: kappa. "never" marks cells where
    // no proactive policy beats never-adapt.
    std::vector<double> kappas;
    std::vector<std::pair<double, double>> rows;
    std::map<std::tuple<double, double, double>, std::string> winner;
    for (const auto& c : report.cells) {
      if (std::find(kappas.begin(), kappas.end(), c.kappa) == kappas.end()) kappas.push_back(c.kappa);
      const std::pair<double, double> row{c.alpha_min, c.lambda};
      if (std::find(rows.begin(), rows.end(), row) == rows.end()) rows.push_back(row);
      winner[{c.alpha_min, c.lambda, c.kappa}] =
          c.proactive_pays_off ? c.best.value_or("") : std::string("never");
    }
    std::sort(kappas.begin(), kappas.end());
    std::sort(rows.begin(), rows.end());
    const auto p = path("winner_matrix.csv");
    auto out = text::open_for_write(p);
    out << "alpha_min,lambda";
    for (double k : kappas) out << ",kappa=" << format_double(k);
    out << '\n';
    for (const auto& [a, l] : rows) {
      out << format_double(a) << ',' << format_double(l);
      for (double k : kappas) {
        const auto it = winner.find({a, l, k});
        out << ',' << (it == winner.end() ? std::string() : it->second);
      }
      out << '\n';
    }
    text::finish_write(out, p);
  }
  {
    const auto p = path("policy_totals.csv");
    auto out = text::open_for_write(p);
    out << "policy,cells_won,fraction_won,mean_savings,paying_cells\n";
    for (const auto& t : report.totals) {
      out << t.label << ',' << t.cells_won << ',' << format_double(t.fraction_won) << ','
          << format_double(t.mean_savings) << ',' << report.paying_cells << '\n';
    }
    text::finish_write(out, p);
  }
}

}  // namespace earlywarn
