#include "tempoframe/survival.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "json_util.hpp"
#include "tempoframe/error.hpp"
#include "tempoframe/features.hpp"
#include "tempoframe/kernels.hpp"
#include "tempoframe/plugin.hpp"

namespace tempoframe::survival {

using detail::ojson;

std::vector<EventOutcome> event_outcomes(const Dataset& ds) {
  const auto refs = ds.features(Role::Target, Modality::Event);
  if (refs.empty()) fail(ErrorCode::RequirementUnmet, "no event target", "missing_event_target");
  if (refs.size() > 1) fail(ErrorCode::MultipleTargets, "survival analysis supports exactly one event target");
  const auto& ev = *ds.events();
  const std::size_t f = refs.front().index;
  std::vector<EventOutcome> out;
  for (std::size_t i = 0; i < ev.num_samples(); ++i) {
    const auto& e = ev.entry(i, f);
    if (!e) {
      fail(ErrorCode::MissingInTarget,
           "sample '" + ev.sample_ids()[i] + "' has no '" + ev.feature(f).id + "' event or censoring record");
    }
    out.push_back({e->time, !e->censored()});
  }
  return out;
}

SurvivalCurve kaplan_meier(std::span<const EventOutcome> outcomes) {
  if (outcomes.empty()) fail(ErrorCode::EmptyInput, "Kaplan-Meier needs at least one sample");
  std::map<double, std::size_t> deaths;
  for (const auto& o : outcomes) {
    if (o.occurred) ++deaths[o.time];
  }
  std::vector<double> times;
  times.reserve(outcomes.size());
  for (const auto& o : outcomes) times.push_back(o.time);
  std::sort(times.begin(), times.end());

  SurvivalCurve curve;
  double s = 1.0;
  for (const auto& [t, d] : deaths) {
    const auto at_risk = static_cast<std::size_t>(times.end() - std::lower_bound(times.begin(), times.end(), t));
    s *= 1.0 - static_cast<double>(d) / static_cast<double>(at_risk);
    curve.breakpoints.push_back(t);
    curve.values.push_back(s);
  }
  return curve;
}

namespace {

void split_outcomes(std::span<const EventOutcome> outcomes, std::vector<double>& times,
                    std::vector<std::uint8_t>& occurred) {
  times.clear();
  occurred.clear();
  for (const auto& o : outcomes) {
    times.push_back(o.time);
    occurred.push_back(o.occurred ? 1 : 0);
  }
}

double penalized(const kernels::CoxTerms& terms, const Eigen::VectorXd& beta, double ridge) {
  return terms.loglik - ridge * beta.squaredNorm();
}

}  // namespace

CoxModel fit_cox(const Eigen::MatrixXd& x, std::span<const EventOutcome> outcomes, const CoxOptions& options) {
  if (static_cast<std::size_t>(x.rows()) != outcomes.size()) {
    fail(ErrorCode::AlignmentError, "covariate rows and outcomes differ in count");
  }
  std::vector<double> times;
  std::vector<std::uint8_t> occurred;
  split_outcomes(outcomes, times, occurred);
  const auto events = static_cast<std::size_t>(std::count(occurred.begin(), occurred.end(), 1));
  if (events == 0) fail(ErrorCode::NoEvents, "every sample is censored; the partial likelihood is empty");

  CoxModel model;
  // Shifting by a training row leaves the partial likelihood unchanged and
  // makes constant columns exactly zero.
  model.reference = x.row(0).transpose();
  const Eigen::MatrixXd xc = x.rowwise() - model.reference.transpose();
  model.beta = Eigen::VectorXd::Zero(x.cols());
  const double scale = options.step_size / static_cast<double>(events);
  for (std::size_t it = 0; it < options.iters; ++it) {
    const auto terms = kernels::cox_terms(xc, model.beta, times, occurred);
    model.trace.push_back(penalized(terms, model.beta, options.ridge));
    const Eigen::VectorXd grad = terms.gradient - 2.0 * options.ridge * model.beta;
    model.beta += scale * grad;
  }
  const auto terms = kernels::cox_terms(xc, model.beta, times, occurred);
  model.trace.push_back(penalized(terms, model.beta, options.ridge));
  model.gradient_norm = (terms.gradient - 2.0 * options.ridge * model.beta).norm();

  // Breslow baseline cumulative hazard at each distinct event time.
  std::vector<double> eta(outcomes.size());
  kernels::linear_scores(xc, model.beta, 0.0, eta);
  std::map<double, std::size_t> deaths;
  for (const auto& o : outcomes) {
    if (o.occurred) ++deaths[o.time];
  }
  double h = 0;
  for (const auto& [t, d] : deaths) {
    double denom = 0;
    for (std::size_t j = 0; j < outcomes.size(); ++j) {
      if (outcomes[j].time >= t) denom += std::exp(eta[j]);
    }
    h += static_cast<double>(d) / denom;
    model.breakpoints.push_back(t);
    model.baseline_cumhaz.push_back(h);
  }
  return model;
}

CoxModel fit_cox(const Dataset& ds, const CoxOptions& options) {
  const auto outcomes = event_outcomes(ds);
  auto fm = featurize(ds);
  auto model = fit_cox(fm.values, outcomes, options);
  model.features = std::move(fm.names);
  return model;
}

SurvivalOutput predict_risk(const CoxModel& model, const Eigen::MatrixXd& x, std::vector<std::string> sample_ids) {
  SurvivalOutput out;
  out.sample_ids = std::move(sample_ids);
  out.risks.resize(static_cast<std::size_t>(x.rows()));
  kernels::linear_scores(x, model.beta, 0.0, out.risks);
  std::vector<double> eta(out.risks.size());
  kernels::linear_scores(x.rowwise() - model.reference.transpose(), model.beta, 0.0, eta);
  for (double e : eta) {
    SurvivalCurve c;
    c.breakpoints = model.breakpoints;
    const double r = std::exp(e);
    for (double h : model.baseline_cumhaz) c.values.push_back(std::exp(-h * r));
    out.curves.push_back(std::move(c));
  }
  return out;
}

SurvivalOutput predict_risk(const CoxModel& model, const Dataset& ds) {
  auto fm = featurize(ds);
  if (fm.names != model.features) {
    fail(ErrorCode::FingerprintMismatch, "query covariates differ from the features the Cox model was fitted on");
  }
  const auto ids = ds.sample_ids();
  return predict_risk(model, fm.values, {ids.begin(), ids.end()});
}

double concordance_index(std::span<const double> risks, std::span<const EventOutcome> outcomes) {
  if (risks.size() != outcomes.size()) fail(ErrorCode::AlignmentError, "risks and outcomes differ in count");
  std::vector<double> times;
  std::vector<std::uint8_t> occurred;
  split_outcomes(outcomes, times, occurred);
  const auto counts = kernels::concordance_counts(risks, times, occurred);
  if (counts.comparable == 0) {
    fail(ErrorCode::NoComparablePairs, "no pair has an event strictly before another sample's time");
  }
  return static_cast<double>(counts.half_concordant) / (2.0 * static_cast<double>(counts.comparable));
}

double brier_score(std::span<const SurvivalCurve> curves, std::span<const EventOutcome> outcomes, double horizon) {
  if (curves.size() != outcomes.size()) fail(ErrorCode::AlignmentError, "curves and outcomes differ in count");
  double sum = 0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < curves.size(); ++i) {
    const auto& o = outcomes[i];
    const bool survived = o.time > horizon;
    if (!survived && !o.occurred) continue;  // censored before the horizon: status unknown
    const double e = curves[i].at(horizon) - (survived ? 1.0 : 0.0);
    sum += e * e;
    ++count;
  }
  if (count == 0) fail(ErrorCode::NoEvaluableSamples, "no sample has a known status at t=" + format_real(horizon));
  return sum / static_cast<double>(count);
}

// --- plugin -----------------------------------------------------------------

namespace {

ojson vec_to_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vec_from_json(const ojson& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

class FittedCox final : public FittedModel {
 public:
  explicit FittedCox(CoxModel model) : model_(std::move(model)) {}
  Predictions predict(const Dataset& ds) const override { return predict_risk(model_, ds); }
  ojson state() const override {
    return {{"features", model_.features},
            {"beta", vec_to_json(model_.beta)},
            {"reference", vec_to_json(model_.reference)},
            {"breakpoints", model_.breakpoints},
            {"baseline_cumhaz", model_.baseline_cumhaz},
            {"gradient_norm", model_.gradient_norm}};
  }
  static std::shared_ptr<const FittedModel> load(const ojson& j) {
    CoxModel m;
    m.features = j.at("features").get<std::vector<std::string>>();
    m.beta = vec_from_json(j.at("beta"));
    m.reference = vec_from_json(j.at("reference"));
    m.breakpoints = j.at("breakpoints").get<std::vector<double>>();
    m.baseline_cumhaz = j.at("baseline_cumhaz").get<std::vector<double>>();
    m.gradient_norm = j.at("gradient_norm").get<double>();
    return std::make_shared<FittedCox>(std::move(m));
  }

 private:
  CoxModel model_;
};

class CoxLearner final : public Learner {
 public:
  explicit CoxLearner(CoxOptions options) : options_(options) {}
  std::shared_ptr<const FittedModel> fit(const Dataset& ds) const override {
    return std::make_shared<FittedCox>(fit_cox(ds, options_));
  }

 private:
  CoxOptions options_;
};

}  // namespace

void register_plugins(Registry& registry) {
  registry.register_plugin({
      .name = "survival.cox",
      .category = Category::Survival,
      .schema = {HyperparamDef::integer("iters", 500, 0, 100000000), HyperparamDef::real("step_size", 0.1, 1e-12, 1e6),
                 HyperparamDef::real("ridge", 1e-6, 0, 1e6)},
      .output = OutputShape::Survival,
      .description = "Cox proportional hazards (Breslow ties) with Breslow baseline survival curves",
      .make = [](const Params& p) {
        return std::make_unique<CoxLearner>(
            CoxOptions{static_cast<std::size_t>(p.integer("iters")), p.real("step_size"), p.real("ridge")});
      },
      .load = [](const ojson& j, const Params&, const Registry&) { return FittedCox::load(j); },
  });
}

}  // namespace tempoframe::survival
