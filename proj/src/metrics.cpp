#include "tempoframe/metrics.hpp"

#include "tempoframe/error.hpp"
#include "tempoframe/prediction.hpp"
#include "tempoframe/survival.hpp"
#include "tempoframe/treatment.hpp"

namespace tempoframe {

std::string_view to_string(Task t) noexcept {
  switch (t) {
    case Task::Forecast: return "forecast";
    case Task::Classify: return "classify";
    case Task::Survival: return "survival";
    case Task::Treatment: return "treatment";
  }
  return "forecast";
}

std::optional<Task> task_from_string(std::string_view text) noexcept {
  for (Task t : {Task::Forecast, Task::Classify, Task::Survival, Task::Treatment}) {
    if (to_string(t) == text) return t;
  }
  return std::nullopt;
}

std::optional<Task> task_of(Category category, OutputShape output) {
  switch (category) {
    case Category::Predictor:
      return output == OutputShape::Forecast ? Task::Forecast : Task::Classify;
    case Category::Survival:
      return Task::Survival;
    case Category::Treatment:
      return Task::Treatment;
    default:
      return std::nullopt;
  }
}

Metric Metric::parse(std::string_view text) {
  if (text == "rmse" || text == "pehe") return {std::string(text), false, 0};
  if (text == "accuracy" || text == "c_index") return {std::string(text), true, 0};
  if (text.starts_with("brier@")) {
    if (auto t = parse_real(text.substr(6))) return {std::string(text), false, *t};
  }
  fail(ErrorCode::UnknownMetric, "unknown metric '" + std::string(text) + "'");
}

bool applicable(const Metric& metric, Task task) {
  const std::string_view base = metric.name.starts_with("brier@") ? "brier" : std::string_view(metric.name);
  switch (task) {
    case Task::Forecast: return base == "rmse";
    case Task::Classify: return base == "accuracy" || base == "rmse";
    case Task::Survival: return base == "c_index" || base == "brier";
    case Task::Treatment: return base == "pehe" || base == "rmse";
  }
  return false;
}

Metric default_metric(Task task) {
  switch (task) {
    case Task::Forecast: return Metric::parse("rmse");
    case Task::Classify: return Metric::parse("accuracy");
    case Task::Survival: return Metric::parse("c_index");
    case Task::Treatment: return Metric::parse("pehe");
  }
  return Metric::parse("rmse");
}

namespace {

[[noreturn]] void mismatch(const Metric& m) {
  fail(ErrorCode::MetricMismatch, "metric '" + m.name + "' does not apply to these predictions");
}

std::vector<survival::EventOutcome> outcomes_for(const Dataset& truth, std::span<const std::string> ids) {
  const auto all = survival::event_outcomes(truth);
  std::vector<survival::EventOutcome> out;
  for (std::size_t i : truth.events()->sample_positions(ids)) out.push_back(all[i]);
  return out;
}

}  // namespace

double evaluate(const Metric& metric, const Predictions& pred, const Dataset& truth,
                std::span<const double> true_effects) {
  if (metric.name == "rmse") {
    if (const auto* s = std::get_if<StaticOutput>(&pred)) {
      if (!truth.static_samples()) fail(ErrorCode::AlignmentError, "truth has no static targets");
      return prediction::rmse(s->values, *truth.static_samples());
    }
    if (const auto* f = std::get_if<ForecastOutput>(&pred)) {
      if (!truth.temporal()) fail(ErrorCode::AlignmentError, "truth has no temporal targets");
      return prediction::rmse(f->values, *truth.temporal());
    }
    mismatch(metric);
  }
  if (metric.name == "accuracy") {
    const auto* s = std::get_if<StaticOutput>(&pred);
    if (!s) mismatch(metric);
    if (!truth.static_samples()) fail(ErrorCode::AlignmentError, "truth has no static targets");
    return prediction::accuracy(s->values, *truth.static_samples());
  }
  if (metric.name == "c_index" || metric.name.starts_with("brier@")) {
    const auto* s = std::get_if<SurvivalOutput>(&pred);
    if (!s) mismatch(metric);
    const auto outcomes = outcomes_for(truth, s->sample_ids);
    if (metric.name == "c_index") return survival::concordance_index(s->risks, outcomes);
    if (s->curves.size() != outcomes.size()) mismatch(metric);
    return survival::brier_score(s->curves, outcomes, metric.horizon);
  }
  if (metric.name == "pehe") {
    const auto* c = std::get_if<CounterfactualOutput>(&pred);
    if (!c) mismatch(metric);
    const auto refs = truth.features(Role::Treatment);
    if (refs.size() != 1) fail(ErrorCode::AlignmentError, "truth must name exactly one treatment feature");
    if (true_effects.size() != truth.num_samples()) {
      fail(ErrorCode::AlignmentError, "pehe needs one true effect per truth sample");
    }
    const auto est = treatment::effect_estimates(*c, refs.front().spec->kind);
    std::vector<double> tau;
    for (std::size_t i : truth.static_samples()->sample_positions(c->sample_ids)) tau.push_back(true_effects[i]);
    return treatment::pehe(est, tau);
  }
  mismatch(metric);
}

}  // namespace tempoframe
