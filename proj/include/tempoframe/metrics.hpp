#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "tempoframe/dataset.hpp"
#include "tempoframe/plugin.hpp"
#include "tempoframe/predictions.hpp"

namespace tempoframe {

enum class Task { Forecast, Classify, Survival, Treatment };

std::string_view to_string(Task t) noexcept;
std::optional<Task> task_from_string(std::string_view text) noexcept;

/// Task an estimator's predictions serve, or nullopt for transforms.
std::optional<Task> task_of(Category category, OutputShape output);

/// A parsed metric name: `rmse`, `accuracy`, `c_index`, `brier@<t>`, `pehe`.
struct Metric {
  std::string name;
  bool higher_is_better = false;
  double horizon = 0;  // brier only

  static Metric parse(std::string_view text);  // throws UnknownMetric
};

/// forecast: rmse; classify: accuracy, rmse; survival: c_index, brier@t;
/// treatment: pehe, rmse (of factual predictions).
bool applicable(const Metric& metric, Task task);

/// The metric used when none is named.
Metric default_metric(Task task);

/// Scores `pred` against the targets in `truth`, matching samples by id.
/// `true_effects` (aligned with truth's samples) is needed by pehe only.
/// Throws MetricMismatch when the prediction shape does not fit the metric.
double evaluate(const Metric& metric, const Predictions& pred, const Dataset& truth,
                std::span<const double> true_effects = {});

}  // namespace tempoframe
