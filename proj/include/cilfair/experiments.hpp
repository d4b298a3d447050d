#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cilfair/config.hpp"
#include "cilfair/train.hpp"

namespace cilfair {

std::string version_string();

struct CliOptions {
  std::optional<std::string> out_dir;  // overrides the config's out_dir
  bool force = false;                  // allow writing into a nonempty directory
  std::size_t jobs = 1;                // parallel (method, seed) workers
};

// One probe measurement: a condition label, the seed it ran under, and the
// final-step metrics of that run.
struct ProbeRow {
  std::string condition;
  std::uint64_t seed = 0;
  double acc = 0.0;
  double cwv = 0.0;
  double mcd = 0.0;
  double coverage = 0.0;
};

// Root-cause probes. Each returns one row per (condition, seed) measurement;
// rows are in deterministic condition-major order.
std::vector<ProbeRow> probe_imbalance(const ExperimentConfig& cfg);
std::vector<ProbeRow> probe_memory(const ExperimentConfig& cfg);
std::vector<ProbeRow> probe_mask(const ExperimentConfig& cfg);
std::vector<ProbeRow> probe_distill(const ExperimentConfig& cfg);
std::vector<ProbeRow> probe_hard_sample(const ExperimentConfig& cfg);

struct CoverageBiasResult {
  std::vector<ProbeRow> rows;  // one per resampling run
  double pearson_r = 0.0;      // coverage vs CWV across the runs
};
CoverageBiasResult probe_coverage_bias(const ExperimentConfig& cfg);

// One sweep measurement: parameter values (label -> value, in column order),
// the seed, final-step metrics, and the all-step / except-first-step means.
struct SweepRow {
  std::vector<std::pair<std::string, std::string>> params;
  std::uint64_t seed = 0;
  double acc = 0.0;
  double cwv = 0.0;
  double mcd = 0.0;
  double acc_mean_all = 0.0;
  double cwv_mean_all = 0.0;
  double acc_mean_except_first = 0.0;
  double cwv_mean_except_first = 0.0;
};

std::vector<SweepRow> sweep_eta(const ExperimentConfig& cfg);
std::vector<SweepRow> sweep_coverage_thresholds(const ExperimentConfig& cfg);
std::vector<SweepRow> sweep_divergence_metric(const ExperimentConfig& cfg);
std::vector<SweepRow> sweep_class_split(const ExperimentConfig& cfg);

// CLI entry points; they throw (ParamError/ParseError for usage and config
// problems, other errors for runtime failures) and the main() wrapper maps
// exceptions to exit codes.
void cmd_run(const ExperimentConfig& cfg, const CliOptions& opts);
void cmd_probe(const std::string& kind, const ExperimentConfig& cfg,
               const CliOptions& opts);
void cmd_sweep(const std::string& param, const ExperimentConfig& cfg,
               const CliOptions& opts);

}  // namespace cilfair
