#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "tempoframe/containers.hpp"

namespace tempoframe {

/// Right-continuous step function. S(t) = 1 before the first breakpoint and
/// S(t) = values[k] for breakpoints[k] <= t < breakpoints[k+1].
struct SurvivalCurve {
  std::vector<double> breakpoints;
  std::vector<double> values;

  double at(double t) const;
  bool operator==(const SurvivalCurve&) const = default;
};

struct StaticOutput {
  StaticSamples values;
  bool operator==(const StaticOutput&) const = default;
};

struct ForecastOutput {
  TimeSeriesSamples values;
  bool operator==(const ForecastOutput&) const = default;
};

struct SurvivalOutput {
  std::vector<std::string> sample_ids;
  std::vector<double> risks;
  std::vector<SurvivalCurve> curves;  // empty when the model emits risks only
  bool operator==(const SurvivalOutput&) const = default;
};

/// outcomes[a] holds every sample's predicted targets under alternatives[a].
struct CounterfactualOutput {
  std::vector<std::string> sample_ids;
  std::vector<CellValue> alternatives;
  std::vector<StaticSamples> outcomes;
  bool operator==(const CounterfactualOutput&) const = default;
};

using Predictions = std::variant<StaticOutput, ForecastOutput, SurvivalOutput, CounterfactualOutput>;

std::vector<std::string> sample_ids_of(const Predictions& p);

}  // namespace tempoframe
