#include "tempoframe/interpret.hpp"

#include <cmath>
#include <limits>

#include "json_util.hpp"
#include "tempoframe/error.hpp"
#include "tempoframe/rng.hpp"

namespace tempoframe::interpret {

using detail::ojson;

namespace {

template <class Container, class Cell>
std::vector<Cell> permuted_cells(const Container& c, std::size_t f, std::span<const std::size_t> perm,
                                 auto&& get) {
  std::vector<Cell> out;
  for (std::size_t i = 0; i < c.num_samples(); ++i) {
    for (std::size_t g = 0; g < c.num_features(); ++g) out.push_back(get(g == f ? perm[i] : i, g));
  }
  return out;
}

template <class Container>
std::vector<std::string> ids_of(const Container& c) {
  return {c.sample_ids().begin(), c.sample_ids().end()};
}

template <class Container>
std::vector<FeatureSpec> specs_of(const Container& c) {
  return {c.features().begin(), c.features().end()};
}

}  // namespace

Dataset permute_feature(const Dataset& ds, std::string_view feature, std::span<const std::size_t> perm) {
  const auto ref = ds.find_feature(feature);
  if (!ref) fail(ErrorCode::UnknownFeature, "no feature '" + std::string(feature) + "'");
  if (perm.size() != ds.num_samples()) fail(ErrorCode::AlignmentError, "permutation length differs from sample count");
  switch (ref->modality) {
    case Modality::Static: {
      const auto& s = *ds.static_samples();
      auto cells = permuted_cells<StaticSamples, CellValue>(
          s, ref->index, perm, [&](std::size_t i, std::size_t g) { return s.at(i, g); });
      return with_static(ds, StaticSamples(ids_of(s), specs_of(s), std::move(cells)), ds.roles());
    }
    case Modality::Temporal: {
      const auto& ts = *ds.temporal();
      auto series = permuted_cells<TimeSeriesSamples, std::vector<TimePoint>>(
          ts, ref->index, perm, [&](std::size_t i, std::size_t g) {
            const auto s = ts.series(i, g);
            return std::vector<TimePoint>(s.begin(), s.end());
          });
      return with_temporal(ds, TimeSeriesSamples(ids_of(ts), specs_of(ts), std::move(series)), ds.roles());
    }
    case Modality::Event: {
      const auto& ev = *ds.events();
      auto entries = permuted_cells<EventSamples, std::optional<EventEntry>>(
          ev, ref->index, perm, [&](std::size_t i, std::size_t g) { return ev.entry(i, g); });
      return with_events(ds, EventSamples(ids_of(ev), specs_of(ev), std::move(entries)), ds.roles());
    }
  }
  return ds;
}

ImportanceReport permutation_importance(const FittedEstimator& inner, const Dataset& ds, const Metric& metric,
                                        std::size_t repeats, std::uint64_t seed, const std::optional<Dataset>& truth) {
  const auto category = inner.effective_category();
  if (category != Category::Predictor && category != Category::Survival) {
    fail(ErrorCode::IncompatibleInner, "permutation importance needs a predictor or survival estimator");
  }
  const auto task = task_of(category, inner.output());
  if (!task || !applicable(metric, *task)) {
    fail(ErrorCode::MetricMismatch, "metric '" + metric.name + "' does not apply to a " +
                                        std::string(to_string(*task)) + " estimator");
  }
  if (ds.num_samples() < 2) fail(ErrorCode::TooFewSamples, "permutation importance needs at least two samples");
  if (repeats == 0) fail(ErrorCode::ParamOutOfBounds, "repeats must be at least 1");

  const Dataset& reference = truth ? *truth : ds;
  // Orient every degradation so that larger means more important.
  const double sign = metric.higher_is_better ? -1.0 : 1.0;
  ImportanceReport report{metric.name, repeats, seed, evaluate(metric, inner.predict(ds), reference), {}};
  const auto covariates = ds.features(Role::Covariate);
  for (std::size_t k = 0; k < covariates.size(); ++k) {
    FeatureImportance fi{covariates[k].spec->id, 0, 0, {}};
    for (std::size_t r = 0; r < repeats; ++r) {
      const auto perm = seeded_permutation(ds.num_samples(), derive_seed(seed, k, r));
      const Dataset shuffled = permute_feature(ds, fi.feature, perm);
      const double score = evaluate(metric, inner.predict(shuffled), reference);
      fi.per_repeat.push_back(sign * (score - report.baseline));
    }
    double sum = 0;
    for (double v : fi.per_repeat) sum += v;
    fi.importance = sum / static_cast<double>(repeats);
    double ss = 0;
    for (double v : fi.per_repeat) ss += (v - fi.importance) * (v - fi.importance);
    fi.spread = std::sqrt(ss / static_cast<double>(repeats));
    report.features.push_back(std::move(fi));
  }
  return report;
}

// --- wrapper plugin ---------------------------------------------------------

namespace {

class PermImportanceModel final : public WrappedModelBase {
 public:
  PermImportanceModel(FittedEstimator inner, std::string metric, std::size_t repeats, std::uint64_t seed)
      : WrappedModelBase(std::move(inner)), metric_(std::move(metric)), repeats_(repeats), seed_(seed) {}

  ImportanceReport run(const Dataset& ds, const std::optional<Dataset>& truth) const {
    const auto category = inner().effective_category();
    const Metric m = metric_ == "auto" ? default_metric(*task_of(category, inner().output())) : Metric::parse(metric_);
    return permutation_importance(inner(), ds, m, repeats_, seed_, truth);
  }

  ojson state() const override { return {{"inner", fitted_state_json(inner())}}; }

 private:
  std::string metric_;
  std::size_t repeats_;
  std::uint64_t seed_;
};

std::shared_ptr<const FittedModel> make_model(FittedEstimator inner, const Params& p) {
  return std::make_shared<PermImportanceModel>(std::move(inner), p.choice("metric"),
                                               static_cast<std::size_t>(p.integer("repeats")),
                                               static_cast<std::uint64_t>(p.integer("seed")));
}

}  // namespace

ImportanceReport importance(const FittedEstimator& wrapped, const Dataset& ds, const std::optional<Dataset>& truth) {
  const FittedEstimator* current = &wrapped;
  while (current->fitted() && current->category() == Category::Wrapper) {
    if (const auto* m = dynamic_cast<const PermImportanceModel*>(&current->model())) return m->run(ds, truth);
    const auto* w = dynamic_cast<const WrappedModelBase*>(&current->model());
    if (!w) break;
    current = &w->inner();
  }
  fail(ErrorCode::IncompatibleInner, "estimator is not wrapped for permutation importance");
}

void register_plugins(Registry& registry) {
  registry.register_plugin({
      .name = "interpret.perm_importance",
      .category = Category::Wrapper,
      .schema = {HyperparamDef::categorical("metric", "auto", {"auto", "rmse", "accuracy", "c_index"}),
                 HyperparamDef::integer("repeats", 5, 1, 100000),
                 HyperparamDef::integer("seed", 0, 0, std::numeric_limits<std::int64_t>::max())},
      .output = OutputShape::None,
      .description = "permutation feature importance around a fitted predictor or survival model",
      .load = [](const ojson& j, const Params& p, const Registry& r) {
        return make_model(r.fitted_from_json(j.at("inner")), p);
      },
      .wrap = [](const FittedEstimator& inner, const Params& p) { return make_model(inner, p); },
      .accepts = {Category::Predictor, Category::Survival},
  });
}

}  // namespace tempoframe::interpret
