// earlywarn: batch command line for generating prediction streams, running
// the alarm-policy experiment grid and summarizing its results.

#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "earlywarn/config.hpp"
#include "earlywarn/harness.hpp"
#include "earlywarn/metrics.hpp"
#include "earlywarn/stream.hpp"
#include "earlywarn/stream_io.hpp"
#include "earlywarn/synthgen.hpp"
#include "earlywarn/text.hpp"

namespace {

using namespace earlywarn;

const std::vector<std::string> kGeneratorKeys{"preset",        "n_cases",       "deviation_rate",
                                              "length",        "length_range",  "ensemble_size",
                                              "curve",         "drift",         "noise_amplitude",
                                              "seed",          "A"};

/// One string option per configuration key; only flags actually given override
/// the file.
struct KeyFlags {
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;

  void add(CLI::App& app, const std::vector<std::string>& keys) {
    for (const auto& k : keys) options[k] = app.add_option("--" + k, values[k], "override '" + k + "'");
  }

  KeyValues given() const {
    KeyValues out;
    for (const auto& [k, opt] : options) {
      if (opt->count() > 0) out.emplace_back(k, values.at(k));
    }
    return out;
  }
};

void write_accuracy(const PredictionStream& stream, const std::string& path) {
  auto out = text::open_for_write(path);
  out << "j,mcc,support\n";
  for (const auto& [j, acc] : per_prefix_accuracy(stream)) {
    out << j << ',' << text::format_double(acc.mcc) << ',' << acc.support << '\n';
  }
  text::finish_write(out, path);
}

void write_drift(const PredictionStream& stream, const std::string& path) {
  auto out = text::open_for_write(path);
  out << "case_index,case_id,mae\n";
  for (const auto& [k, e] : per_case_mae_series(stream)) {
    out << k + 1 << ',' << stream[k].case_id << ',' << text::format_double(e) << '\n';
  }
  text::finish_write(out, path);
}

/// Averages every curve_*.csv in dir column-wise by case index.
void write_mean_curve(const std::string& dir, const std::string& path) {
  std::map<long long, std::vector<double>> sums;
  std::map<long long, int> counts;
  int files = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (name.rfind("curve_", 0) != 0 || entry.path().extension() != ".csv") continue;
    ++files;
    auto in = text::open_for_read(entry.path().string());
    std::string line;
    std::getline(in, line);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      const auto f = text::split(text::trim(line), ',');
      if (f.size() != 5) continue;
      const auto idx = text::parse_int(f[0]);
      if (!idx) throw ParseError(entry.path().string(), line_no, "malformed case_index");
      auto& s = sums[*idx];
      s.resize(4, 0.0);
      for (std::size_t c = 0; c < 4; ++c) {
        const auto v = text::parse_double(f[c + 1]);
        if (!v) throw ParseError(entry.path().string(), line_no, "malformed value");
        s[c] += *v;
      }
      counts[*idx] += 1;
    }
  }
  if (files == 0) throw IoError("no learning curves found in '" + dir + "'");
  auto out = text::open_for_write(path);
  out << "case_index,rolling_reward,rolling_alarm_rate,rolling_accurate_alarm_rate,"
         "rolling_earliness,runs\n";
  for (const auto& [idx, s] : sums) {
    const double n = counts[idx];
    out << idx;
    for (double v : s) out << ',' << text::format_double(v / n);
    out << ',' << counts[idx] << '\n';
  }
  text::finish_write(out, path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Alarm policies for prescriptive process monitoring"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "Generate a synthetic base-model prediction matrix");
  std::string gen_config, gen_matrix, gen_truth, gen_stream;
  KeyFlags gen_flags;
  gen->add_option("--config", gen_config, "key = value generator config file");
  gen->add_option("--matrix", gen_matrix, "output base-matrix CSV")->required();
  gen->add_option("--truth", gen_truth, "output truth sidecar CSV")->required();
  gen->add_option("--stream", gen_stream, "also write the aggregated stream (.jsonl or .csv)");
  gen_flags.add(*gen, kGeneratorKeys);

  // aggregate
  auto* agg = app.add_subcommand("aggregate", "Aggregate a base-model matrix into a stream");
  std::string agg_matrix, agg_truth, agg_out, agg_format;
  double agg_a = kCategoricalExpectedOutcome;
  double agg_quantile = 1.0;
  agg->add_option("--matrix", agg_matrix, "base-matrix CSV")->required();
  agg->add_option("--truth", agg_truth, "truth sidecar CSV")->required();
  agg->add_option("--out", agg_out, "output stream")->required();
  agg->add_option("--format", agg_format, "jsonl or csv (default: from extension)");
  agg->add_option("--A", agg_a, "expected outcome A")->capture_default_str();
  agg->add_option("--quantile", agg_quantile, "truncate cases to this length quantile")
      ->capture_default_str();

  // run
  auto* run = app.add_subcommand("run", "Run the policy grid on a stream");
  std::string run_config, run_stream, run_out, run_curves;
  long long run_seed = 0;
  KeyFlags run_flags;
  run->add_option("--config", run_config, "key = value experiment config file");
  run->add_option("--stream", run_stream, "input stream (.jsonl or .csv)")->required();
  run->add_option("--out", run_out, "results CSV")->required();
  run->add_option("--seed", run_seed, "master seed")->required();
  run->add_option("--curves-dir", run_curves, "write one learning curve per online RL run");
  std::vector<std::string> run_keys;
  for (const auto& k : experiment_keys()) {
    if (k != "seed") run_keys.push_back(k);
  }
  run_flags.add(*run, run_keys);

  // report
  auto* rep = app.add_subcommand("report", "Summarize a results CSV");
  std::string rep_results, rep_out = ".", rep_stream, rep_curves;
  rep->add_option("--results", rep_results, "results CSV from 'run'")->required();
  rep->add_option("--out-dir", rep_out, "output directory")->capture_default_str();
  rep->add_option("--stream", rep_stream, "also write per-prefix accuracy and drift series");
  rep->add_option("--curves-dir", rep_curves, "also average the learning curves found here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*gen) {
      synth::GeneratorConfig cfg;
      KeyValues kv;
      if (!gen_config.empty()) kv = load_key_values(gen_config);
      for (auto& p : gen_flags.given()) kv.push_back(p);
      for (const auto& [k, v] : kv) synth::apply_setting(cfg, k, v);
      const auto set = synth::generate(cfg);
      write_base_matrices(set, gen_matrix, gen_truth);
      if (!gen_stream.empty()) write_stream(aggregate_stream(set, cfg.expected_outcome), gen_stream);
      std::cout << "generated " << set.matrices.size() << " cases\n";
    } else if (*agg) {
      const auto set = load_base_matrices(agg_matrix, agg_truth, agg_a);
      auto stream = aggregate_stream(set, agg_a);
      if (agg_quantile < 1.0) stream = truncate_to_quantile(stream, agg_quantile);
      const auto format = agg_format.empty() ? format_for_path(agg_out) : parse_stream_format(agg_format);
      write_stream(stream, agg_out, format);
      std::cout << "wrote " << stream.size() << " cases to " << agg_out << '\n';
    } else if (*run) {
      ExperimentConfig cfg;
      if (!run_config.empty()) apply_settings(cfg, load_key_values(run_config));
      apply_settings(cfg, run_flags.given());
      if (run_seed < 0) throw ConfigError("seed must be non-negative");
      cfg.master_seed = static_cast<std::uint64_t>(run_seed);
      const auto stream = load_stream(run_stream);
      GridOptions options;
      if (!run_curves.empty()) options.curves_dir = run_curves;
      const auto results = run_grid(stream, cfg, options);
      write_results(results, run_out);
      std::size_t failed = 0;
      for (const auto& r : results) {
        if (r.failed) {
          ++failed;
          std::cerr << "warning: " << policy_name(r.policy) << " repetition " << r.repetition
                    << " failed: " << r.error << '\n';
        }
      }
      std::cout << "wrote " << results.size() << " runs to " << run_out;
      if (failed > 0) std::cout << " (" << failed << " failed)";
      std::cout << '\n';
    } else if (*rep) {
      const auto report = summarize(load_results(rep_results));
      write_report(report, rep_out);
      if (!rep_stream.empty()) {
        const auto stream = load_stream(rep_stream);
        write_accuracy(stream, (std::filesystem::path(rep_out) / "accuracy.csv").string());
        write_drift(stream, (std::filesystem::path(rep_out) / "drift.csv").string());
      }
      if (!rep_curves.empty()) {
        write_mean_curve(rep_curves, (std::filesystem::path(rep_out) / "curves_mean.csv").string());
      }
      for (const auto& t : report.totals) {
        std::cout << t.label << ": won " << t.cells_won << " of " << report.paying_cells
                  << " paying cells, mean savings " << text::format_double(t.mean_savings) << '\n';
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
