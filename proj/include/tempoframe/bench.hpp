#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tempoframe/dataset.hpp"
#include "tempoframe/interpret.hpp"
#include "tempoframe/metrics.hpp"
#include "tempoframe/plugin.hpp"
#include "tempoframe/treatment.hpp"

namespace tempoframe::bench {

struct Fold {
  std::size_t index = 0;
  Dataset train;
  Dataset test;
};

/// Seeded permutation of the samples cut into k contiguous folds; the first
/// N mod k folds get one extra sample. Each side keeps dataset sample order.
/// Throws TooFewSamples (k < 2 or N < k).
std::vector<Fold> kfold_split(const Dataset& ds, std::size_t k, std::uint64_t seed);

struct ImportanceConfig {
  std::string metric = "auto";
  std::size_t repeats = 5;
  std::uint64_t seed = 0;
};

struct BenchConfig {
  std::string bundle;  // resolved against the config file's directory
  Task task = Task::Forecast;
  std::vector<PipelineStep> pipeline;
  std::vector<std::string> metrics;
  std::size_t folds = 5;
  std::uint64_t seed = 0;
  std::string output;                   // empty: no report file
  std::optional<std::size_t> holdout;   // forecast: trailing target points held out per test sample
  std::string truth;                    // treatment: CSV of sample_id,tau
  std::optional<ImportanceConfig> importance;
  bool timing = true;                   // false: every fold reports 0 seconds
  nlohmann::ordered_json source;        // the config as written
  std::uint64_t hash = 0;               // FNV-1a of the config text
};

/// Parses config JSON text. Relative paths are resolved against `base_dir`.
/// Throws ConfigError / UnknownMetric.
BenchConfig parse_config(const std::string& text, const std::string& base_dir = ".");
BenchConfig load_config(const std::string& path);

/// Checks plugins, parameters, task/pipeline and task/metric compatibility
/// without touching data. Throws ConfigError, MetricMismatch, UnknownPlugin,
/// UnknownParam, ParamOutOfBounds, BadPipelineShape.
void validate_config(const BenchConfig& config, const Registry& registry);

struct MetricValue {
  std::string metric;
  double value = 0;
};

struct FoldResult {
  std::size_t index = 0;
  std::size_t train_samples = 0;
  std::size_t test_samples = 0;
  std::vector<MetricValue> metrics;
  double seconds = 0;
  std::optional<interpret::ImportanceReport> importance;
};

struct MetricSummary {
  std::string metric;
  double mean = 0;
  double stddev = 0;  // population
};

struct BenchReport {
  std::string version;
  std::uint64_t config_hash = 0;
  nlohmann::ordered_json config;
  std::vector<FoldResult> folds;
  std::vector<MetricSummary> summary;
};

/// Validates, then for each fold fits the pipeline on train and scores the
/// test side. Errors carry the fold index. Writes `config.output` if set.
BenchReport run_benchmark(const BenchConfig& config, const Registry& registry = builtin_registry());

/// Report as JSON text: fixed key order, floats with 17 significant digits.
std::string format_report(const BenchReport& report);

/// Reads `sample_id,tau` rows. Throws IoError / ParseError.
std::vector<std::pair<std::string, double>> read_effects(const std::string& path);

/// Writes a synthetic treatment bundle to `dir` plus `dir/truth.csv`.
void write_synthetic(const treatment::SynthSpec& spec, const std::string& dir);

}  // namespace tempoframe::bench
