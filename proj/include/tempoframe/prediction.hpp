#pragma once

#include <map>
#include <string>
#include <vector>

#include "tempoframe/dataset.hpp"
#include "tempoframe/predictions.hpp"

namespace tempoframe {
class Registry;
}

namespace tempoframe::prediction {

/// Last observed value of each temporal target repeated at t_last + k*step,
/// k = 1..horizon. Throws EmptyTargetSeries.
ForecastOutput persistence_forecast(const Dataset& ds, std::size_t horizon, double step);

struct ArCoefficients {
  double intercept = 0;
  std::vector<double> phi;  // phi[k-1] multiplies value_{t-k}
  bool operator==(const ArCoefficients&) const = default;
};

struct ArModel {
  std::size_t order = 1;
  double step = 1;
  std::map<std::string, ArCoefficients, std::less<>> targets;
  bool operator==(const ArModel&) const = default;
};

/// Pooled least squares over every lag window of every target sequence, via
/// normal equations with 1e-9 added to the diagonal. Sequences must be
/// regular with spacing `step`. Sequences with <= order points contribute
/// nothing; InsufficientHistory when no window exists at all.
ArModel fit_ar(const Dataset& ds, std::size_t order, double step);

/// Recursive one-step forecasts fed back for `horizon` steps.
ForecastOutput forecast_ar(const ArModel& model, const Dataset& ds, std::size_t horizon);

struct LogisticModel {
  std::string target;
  std::vector<std::string> features;
  std::vector<double> weights;
  double bias = 0;
};

/// Full-batch gradient descent on mean log-loss from zero weights.
LogisticModel fit_logistic(const Dataset& ds, double lr, std::size_t iters);

/// P(positive) per sample as a Continuous feature named after the target.
StaticOutput predict_proba(const LogisticModel& model, const Dataset& ds);

/// The single static binary target: positive is 1 for Integer targets and
/// the second declared category for two-category targets.
const FeatureSpec& binary_static_target(const Dataset& ds);
/// 0/1 label of `v` under `kind`; throws NonBinaryTarget.
double binary_label(const ValueKind& kind, const CellValue& v);

/// Root mean square error over aligned points. Truth is matched by sample
/// id, feature id and (temporal) exact time; anything unmatched in `pred` is
/// an AlignmentError. Binary categorical truth is compared as 0/1.
double rmse(const StaticSamples& pred, const StaticSamples& truth);
double rmse(const TimeSeriesSamples& pred, const TimeSeriesSamples& truth);

/// Fraction of samples whose thresholded probability equals the label.
double accuracy(const StaticSamples& pred, const StaticSamples& truth, double threshold = 0.5);

void register_plugins(Registry& registry);

}  // namespace tempoframe::prediction
