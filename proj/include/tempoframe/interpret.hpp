#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tempoframe/dataset.hpp"
#include "tempoframe/metrics.hpp"
#include "tempoframe/plugin.hpp"

namespace tempoframe::interpret {

struct FeatureImportance {
  std::string feature;  // dataset feature id
  double importance = 0;  // mean degradation over repeats; larger = more important
  double spread = 0;      // population stddev of the per-repeat degradations
  std::vector<double> per_repeat;
  bool operator==(const FeatureImportance&) const = default;
};

struct ImportanceReport {
  std::string metric;
  std::size_t repeats = 0;
  std::uint64_t seed = 0;
  double baseline = 0;
  std::vector<FeatureImportance> features;
  bool operator==(const ImportanceReport&) const = default;
};

/// Shuffles one covariate feature at a time across samples and reports how
/// much the metric degrades. Static cells, whole temporal sequences and event
/// records move between samples; `inner` is only ever asked to predict.
/// `truth` holds the targets to score against (defaults to `ds`).
/// Throws MetricMismatch, TooFewSamples.
ImportanceReport permutation_importance(const FittedEstimator& inner, const Dataset& ds, const Metric& metric,
                                        std::size_t repeats, std::uint64_t seed,
                                        const std::optional<Dataset>& truth = std::nullopt);

/// Dataset whose `feature` values are taken from sample perm[i] for sample i.
Dataset permute_feature(const Dataset& ds, std::string_view feature, std::span<const std::size_t> perm);

/// Importance query on an estimator wrapped by `interpret.perm_importance`
/// (possibly under further wrappers). Throws IncompatibleInner otherwise.
ImportanceReport importance(const FittedEstimator& wrapped, const Dataset& ds,
                            const std::optional<Dataset>& truth = std::nullopt);

void register_plugins(Registry& registry);

}  // namespace tempoframe::interpret
