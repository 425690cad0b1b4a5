#pragma once

#include <map>
#include <string>
#include <vector>

#include "tempoframe/dataset.hpp"

namespace tempoframe {
class Registry;
}

namespace tempoframe::preprocessing {

/// Per-feature fill value; Missing when the feature had no observations.
using FillMap = std::map<std::string, CellValue, std::less<>>;

/// Training fill values for every static and temporal feature: mean for
/// Continuous, rounded mean for Integer, mode for Categorical (ties go to the
/// lexicographically smallest label).
FillMap training_fill_values(const Dataset& ds);

/// Replaces Missing static cells and temporal points by `fill`. Event
/// containers are never touched. Throws AllMissingFeature when a needed fill
/// value is absent.
Dataset mean_impute(const Dataset& ds, const FillMap& fill);

/// Carries the last observed value forward within each sequence; leading gaps
/// take `fallback`. Only the temporal container changes.
Dataset locf_impute(const Dataset& ds, const FillMap& fallback);

struct ScaleStats {
  double mean = 0;
  double stddev = 0;  // population
  std::size_t count = 0;
  bool operator==(const ScaleStats&) const = default;
};
using ScalerState = std::map<std::string, ScaleStats, std::less<>>;

/// Statistics over observed values of Continuous static and temporal features.
/// Target features are skipped unless `include_targets`.
ScalerState fit_zscore(const Dataset& ds, bool include_targets);

/// x -> (x - mean) / stddev for features in `state`; zero stddev maps to 0.
Dataset zscore(const Dataset& ds, const ScalerState& state);

/// Replaces each categorical static/temporal feature listed in `categories`
/// by one Integer 0/1 feature per category, named `<feature>=<category>`.
/// Throws UnseenCategory for a value outside the listed categories.
Dataset one_hot_encode(const Dataset& ds, const std::map<std::string, std::vector<std::string>, std::less<>>& categories);

/// Per-sequence regular grid t_min + k*step up to t_max; each grid point takes
/// the last observed value at or before it. Throws InvalidStep for step <= 0.
TimeSeriesSamples resample_regular(const TimeSeriesSamples& ts, double step);

void register_plugins(Registry& registry);

}  // namespace tempoframe::preprocessing
