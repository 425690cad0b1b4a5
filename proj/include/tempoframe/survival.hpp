#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tempoframe/dataset.hpp"
#include "tempoframe/predictions.hpp"

namespace tempoframe {
class Registry;
}

namespace tempoframe::survival {

struct EventOutcome {
  double time = 0;
  bool occurred = false;  // false = censored at `time`
  bool operator==(const EventOutcome&) const = default;
};

/// Per-sample outcome of the single event Target, in dataset sample order.
/// Throws MultipleTargets, or MissingInTarget for a sample with no record.
std::vector<EventOutcome> event_outcomes(const Dataset& ds);

/// Product-limit estimate; censorings at an event time stay in that time's
/// risk set. Throws EmptyInput.
SurvivalCurve kaplan_meier(std::span<const EventOutcome> outcomes);

struct CoxModel {
  std::vector<std::string> features;
  Eigen::VectorXd beta;
  Eigen::VectorXd reference;  // training row subtracted before the partial likelihood
  std::vector<double> breakpoints;       // distinct training event times
  std::vector<double> baseline_cumhaz;   // Breslow H0 at each breakpoint
  std::vector<double> trace;             // penalized log partial likelihood per iteration, plus final
  double gradient_norm = 0;              // at the final beta
};

struct CoxOptions {
  std::size_t iters = 500;
  double step_size = 0.1;
  double ridge = 1e-6;
};

/// Gradient ascent from zero on l(beta) - ridge*|beta|^2; each step moves by
/// step_size times the gradient divided by the number of events.
/// Throws NoEvents.
CoxModel fit_cox(const Eigen::MatrixXd& x, std::span<const EventOutcome> outcomes, const CoxOptions& options);
CoxModel fit_cox(const Dataset& ds, const CoxOptions& options);

/// Risk beta.z per sample and exp(-H0(t) * exp(beta.(z - reference))) curves.
SurvivalOutput predict_risk(const CoxModel& model, const Eigen::MatrixXd& x, std::vector<std::string> sample_ids);
SurvivalOutput predict_risk(const CoxModel& model, const Dataset& ds);

/// Harrell's C over pairs t_i < t_j with i an event; tied risks count 1/2.
/// Throws NoComparablePairs.
double concordance_index(std::span<const double> risks, std::span<const EventOutcome> outcomes);

/// Unweighted mean of (S_i(horizon) - 1{t_i > horizon})^2 over samples whose
/// status at `horizon` is known. Throws NoEvaluableSamples.
double brier_score(std::span<const SurvivalCurve> curves, std::span<const EventOutcome> outcomes, double horizon);

void register_plugins(Registry& registry);

}  // namespace tempoframe::survival
