#include <doctest.h>

#include <algorithm>

#include "tempoframe/plugin.hpp"
#include "tempoframe/treatment.hpp"
#include "test_util.hpp"

using namespace tempoframe;

namespace {

class IdentityModel final : public FittedModel {
 public:
  Dataset transform(const Dataset& ds) const override { return ds; }
  nlohmann::ordered_json state() const override { return nlohmann::ordered_json::object(); }
};

class IdentityLearner final : public Learner {
 public:
  std::shared_ptr<const FittedModel> fit(const Dataset&) const override { return std::make_shared<IdentityModel>(); }
};

EstimatorSpec identity_spec(std::string name = "test.identity") {
  return {
      .name = std::move(name),
      .category = Category::Transform,
      .schema = {HyperparamDef::integer("seed", 0, 0, 1000)},
      .description = "returns its input",
      .make = [](const Params&) { return std::make_unique<IdentityLearner>(); },
      .load = [](const nlohmann::ordered_json&, const Params&, const Registry&) {
        return std::make_shared<IdentityModel>();
      },
  };
}

Dataset classify_dataset() {
  std::vector<StaticRow> rows;
  const std::vector<double> x = {-2, -1.5, -1, -0.2, 0.3, 1, 1.4, 2.2};
  for (std::size_t i = 0; i < x.size(); ++i) {
    const std::string id = "c" + std::to_string(i);
    rows.push_back({id, "x", real(x[i])});
    rows.push_back({id, "label", integer(i % 3 == 0 ? x[i] < 0 : x[i] > 0)});
  }
  return assemble_dataset(build_static_samples(rows, {{"x", ValueKind::continuous()}, {"label", ValueKind::integer()}}),
                          std::nullopt, std::nullopt, RoleMap{{"x", Role::Covariate}, {"label", Role::Target}});
}

Dataset survival_fixture() {
  return tftest::survival_dataset({{0.5, 1}, {1.5, 0}, {-0.3, 1}, {2.0, 0}, {0.1, 1}, {-1.0, 0}},
                                  {4, 1, 6, 2, 3, 5}, {true, true, false, true, true, true});
}

Predictions manual_apply(const std::vector<PipelineStep>& steps, const Dataset& train, const Dataset& query,
                         Dataset* transformed) {
  const auto& reg = builtin_registry();
  Dataset running = train;
  Dataset q = query;
  for (std::size_t k = 0; k + 1 < steps.size(); ++k) {
    const auto f = reg.create(steps[k].plugin, steps[k].params).fit(running);
    running = f.transform(running);
    q = f.transform(q);
  }
  const auto last = reg.create(steps.back().plugin, steps.back().params).fit(running);
  if (last.category() == Category::Transform) {
    *transformed = last.transform(q);
    return {};
  }
  return last.predict(q);
}

}  // namespace

TEST_CASE("registry registration and listing") {
  Registry reg;
  reg.register_plugin(identity_spec());
  CHECK(reg.contains("test.identity"));
  CHECK(reg.list(Category::Transform) == std::vector<std::string>{"test.identity"});
  CHECK(reg.list(Category::Predictor).empty());
  CHECK_ERROR_CODE(reg.register_plugin(identity_spec()), ErrorCode::DuplicatePlugin);
  CHECK_ERROR_CODE(reg.register_plugin(identity_spec("nodots")), ErrorCode::InvalidSpec);
  CHECK_ERROR_CODE(reg.spec("test.missing"), ErrorCode::UnknownPlugin);
  CHECK_FALSE(category_from_string("clusterings").has_value());
  CHECK(category_from_string("survival") == Category::Survival);
}

TEST_CASE("builtin registry lists every shipped plugin in order") {
  const auto names = builtin_registry().list();
  CHECK(names == std::vector<std::string>{"impute.locf", "impute.mean", "scale.zscore", "encode.onehot",
                                          "resample.regular", "forecast.persistence", "forecast.ar",
                                          "classify.logistic", "survival.cox", "treatment.t_learner",
                                          "interpret.perm_importance"});
  CHECK(builtin_registry().list(Category::Wrapper) == std::vector<std::string>{"interpret.perm_importance"});
  CHECK(builtin_registry().list(Category::Clustering).empty());
}

TEST_CASE("create merges defaults and validates parameters") {
  const auto& reg = builtin_registry();
  const auto locf = reg.create("impute.locf");
  CHECK(locf.category() == Category::Transform);
  const auto ar = reg.create("forecast.ar", {{"horizon", std::int64_t{4}}});
  CHECK(ar.params().integer("horizon") == 4);
  CHECK(ar.params().integer("order") >= 1);
  CHECK_ERROR_CODE(reg.create("forecast.ar", {{"order", std::int64_t{0}}}), ErrorCode::ParamOutOfBounds);
  CHECK_ERROR_CODE(reg.create("forecast.ar", {{"oder", std::int64_t{2}}}), ErrorCode::UnknownParam);
  CHECK_ERROR_CODE(reg.create("forecast.ar", {{"order", std::string("two")}}), ErrorCode::ParamOutOfBounds);
  CHECK_ERROR_CODE(reg.create("forecast.arima"), ErrorCode::UnknownPlugin);
  CHECK_ERROR_CODE(reg.create("interpret.perm_importance"), ErrorCode::RequirementUnmet);
}

TEST_CASE("hyperparameter schemas reject bad defaults and duplicates") {
  CHECK_ERROR_CODE(HyperparamSchema({HyperparamDef::real("a", 5, 0, 1)}), ErrorCode::ParamOutOfBounds);
  CHECK_ERROR_CODE(HyperparamSchema({HyperparamDef::real("a", 0.5, 0, 1), HyperparamDef::boolean("a", true)}),
                   ErrorCode::InvalidSpec);
  const HyperparamSchema s{HyperparamDef::categorical("mode", "x", {"x", "y"})};
  CHECK_ERROR_CODE(Params::resolve(s, {{"mode", std::string("z")}}), ErrorCode::ParamOutOfBounds);
  CHECK(Params::resolve(s, {{"mode", std::string("y")}}).choice("mode") == "y");
}

TEST_CASE("fit checks category requirements") {
  const auto& reg = builtin_registry();
  const auto series = tftest::series_target_dataset({{1, 2, 3, 4}});
  try {
    (void)reg.create("survival.cox").fit(series);
    FAIL("expected RequirementUnmet");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::RequirementUnmet);
    CHECK(e.reason() == "missing_event_target");
  }
  CHECK_ERROR_CODE(reg.create("treatment.t_learner").fit(series), ErrorCode::RequirementUnmet);

  // Transforms fit on covariates-only data.
  std::vector<StaticRow> rows = {{"a", "x", real(1)}, {"b", "x", CellValue{}}};
  const auto covariates_only = assemble_dataset(build_static_samples(rows, {{"x", ValueKind::continuous()}}),
                                                std::nullopt, std::nullopt, RoleMap{{"x", Role::Covariate}});
  const auto filled = reg.create("impute.mean").fit(covariates_only).transform(covariates_only);
  CHECK(filled.static_samples()->at(1, 0) == real(1));
}

TEST_CASE("fitting twice gives identical predictions and blobs") {
  const auto& reg = builtin_registry();
  const auto ds = classify_dataset();
  const auto a = reg.create("classify.logistic", {{"seed", std::int64_t{3}}}).fit(ds);
  const auto b = reg.create("classify.logistic", {{"seed", std::int64_t{3}}}).fit(ds);
  CHECK(a.predict(ds) == b.predict(ds));
  CHECK(reg.save_fitted(a) == reg.save_fitted(b));
}

TEST_CASE("identity transform returns its input") {
  Registry reg;
  reg.register_plugin(identity_spec());
  const auto ds = tftest::random_dataset(12);
  const auto f = reg.create("test.identity").fit(ds);
  CHECK(f.transform(ds) == ds);
  CHECK(reg.load_fitted(reg.save_fitted(f)).transform(ds) == ds);
}

TEST_CASE("transform and predict guard their inputs") {
  const auto& reg = builtin_registry();
  const auto ds = tftest::series_target_dataset({{1, 2, 3, 4}, {2, 3, 5, 6}});
  const auto scaler = reg.create("scale.zscore").fit(ds);

  std::vector<StaticRow> srows = {{"p0", "years", real(40)}, {"p1", "years", real(41)}};
  std::vector<TimedRow> trows;
  for (const auto& r : ds.temporal()->to_rows()) trows.push_back(r);
  const auto renamed =
      assemble_dataset(build_static_samples(srows, {{"years", ValueKind::continuous()}}),
                       build_time_series_samples(trows, {{"y", ValueKind::continuous()}}), std::nullopt,
                       RoleMap{{"years", Role::Covariate}, {"y", Role::Target}});
  CHECK_ERROR_CODE(scaler.transform(renamed), ErrorCode::FingerprintMismatch);

  const auto persistence = reg.create("forecast.persistence").fit(ds);
  CHECK_ERROR_CODE(persistence.transform(ds), ErrorCode::NotATransform);
  CHECK_ERROR_CODE(scaler.predict(ds), ErrorCode::NotAPredictor);
  CHECK_ERROR_CODE(persistence.predict_counterfactuals(ds, std::vector<CellValue>{integer(1)}),
                   ErrorCode::RequirementUnmet);

  const FittedEstimator unfitted;
  CHECK_FALSE(unfitted.fitted());
  CHECK_ERROR_CODE(unfitted.predict(ds), ErrorCode::NotFitted);
  CHECK_ERROR_CODE(unfitted.transform(ds), ErrorCode::NotFitted);
  CHECK_ERROR_CODE(unfitted.predict_counterfactuals(ds, std::vector<CellValue>{integer(1)}), ErrorCode::NotFitted);
  CHECK_ERROR_CODE(reg.save_fitted(unfitted), ErrorCode::NotFitted);
}

TEST_CASE("outputs follow the query sample order under permutation") {
  const auto& reg = builtin_registry();
  const auto synth = treatment::synth_treatment_data({.n = 20, .seed = 9, .sigma = 0.2});
  struct Case {
    std::string plugin;
    Dataset ds;
  };
  const std::vector<Case> cases = {
      {"forecast.persistence", tftest::series_target_dataset({{1, 2}, {3, 4, 5}, {6}, {7, 8}})},
      {"classify.logistic", classify_dataset()},
      {"survival.cox", survival_fixture()},
      {"treatment.t_learner", synth.data},
      {"impute.locf", tftest::random_dataset(4)},
  };
  for (const auto& c : cases) {
    const auto f = reg.create(c.plugin).fit(c.ds);
    const auto ids = c.ds.sample_ids();
    const auto whole = f.category() == Category::Transform ? Predictions{} : f.predict(c.ds);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto perm = seeded_permutation(ids.size(), seed);
      std::vector<std::string> order;
      for (auto k : perm) order.push_back(ids[k]);
      const auto q = select_samples(c.ds, order);
      if (f.category() == Category::Transform) {
        const auto out = f.transform(q);
        CHECK(std::vector<std::string>(out.sample_ids().begin(), out.sample_ids().end()) == order);
        CHECK(out == select_samples(f.transform(c.ds), order));
        continue;
      }
      const auto out = f.predict(q);
      CHECK_MESSAGE(sample_ids_of(out) == order, c.plugin);
      if (const auto* s = std::get_if<SurvivalOutput>(&out)) {
        const auto& w = std::get<SurvivalOutput>(whole);
        for (std::size_t i = 0; i < order.size(); ++i) {
          CHECK(s->risks[i] == w.risks[perm[i]]);
          CHECK(s->curves[i] == w.curves[perm[i]]);
        }
      } else if (const auto* st = std::get_if<StaticOutput>(&out)) {
        const auto& w = std::get<StaticOutput>(whole);
        for (std::size_t i = 0; i < order.size(); ++i) CHECK(st->values.at(i, 0) == w.values.at(perm[i], 0));
      } else if (const auto* fc = std::get_if<ForecastOutput>(&out)) {
        const auto& w = std::get<ForecastOutput>(whole);
        for (std::size_t i = 0; i < order.size(); ++i) {
          const auto a = fc->values.series(i, 0);
          const auto b = w.values.series(perm[i], 0);
          CHECK(std::equal(a.begin(), a.end(), b.begin(), b.end()));
        }
      }
    }
  }
}

TEST_CASE("counterfactual predictions through the estimator interface") {
  const auto& reg = builtin_registry();
  const auto synth = treatment::synth_treatment_data({.n = 30, .seed = 5, .sigma = 0.1});
  const auto f = reg.create("treatment.t_learner").fit(synth.data);
  const std::vector<CellValue> both = {integer(0), integer(1)};
  const auto two = std::get<CounterfactualOutput>(f.predict_counterfactuals(synth.data, both));
  CHECK(two.outcomes.size() == 2);
  for (const auto& o : two.outcomes) CHECK(o.num_samples() == synth.data.num_samples());
  CHECK_ERROR_CODE(f.predict_counterfactuals(synth.data, std::vector<CellValue>{}), ErrorCode::InvalidAlternative);

  // Factual assignment only: matches predict on the factual arm.
  const auto factual = std::get<StaticOutput>(f.predict(synth.data));
  const std::size_t a = *synth.data.static_samples()->feature_index("a");
  for (std::size_t i = 0; i < synth.data.num_samples(); ++i) {
    const auto arm = static_cast<std::size_t>(as_double(*synth.data.static_samples()->at(i, a)));
    CHECK(two.outcomes[arm].at(i, 0) == factual.values.at(i, 0));
  }
}

TEST_CASE("pipeline equals manual composition") {
  const auto& reg = builtin_registry();
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto ds = tftest::pipeline_dataset(seed);
    auto steps = tftest::random_pipeline(seed);
    if (seed == 0) {
      steps = {{"impute.locf", {}}, {"scale.zscore", {}}, {"forecast.ar", {{"order", std::int64_t{2}}}}};
    }
    const auto fitted = reg.build_pipeline(steps).fit(ds);
    Dataset manual_ds;
    const auto manual = manual_apply(steps, ds, ds, &manual_ds);
    if (fitted.category() == Category::Transform) {
      CHECK(fitted.transform(ds) == manual_ds);
    } else {
      CHECK(fitted.predict(ds) == manual);
    }
    CHECK(reg.load_fitted(reg.save_fitted(fitted)).name() == fitted.name());
  }
}

TEST_CASE("pipeline shape and step error context") {
  const auto& reg = builtin_registry();
  const std::vector<PipelineStep> bad = {{"forecast.ar", {}}, {"impute.locf", {}}};
  CHECK_ERROR_CODE(reg.build_pipeline(bad), ErrorCode::BadPipelineShape);
  CHECK_ERROR_CODE(reg.build_pipeline(std::vector<PipelineStep>{}), ErrorCode::BadPipelineShape);
  const std::vector<PipelineStep> wrapper = {{"impute.locf", {}}, {"interpret.perm_importance", {}}};
  CHECK_ERROR_CODE(reg.build_pipeline(wrapper), ErrorCode::BadPipelineShape);

  const std::vector<PipelineStep> steps = {{"impute.locf", {}}, {"forecast.ar", {{"order", std::int64_t{5}}}}};
  try {
    (void)reg.build_pipeline(steps).fit(tftest::series_target_dataset({{1, 2}}));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InsufficientHistory);
    CHECK(std::string(e.what()).find("step 1 'forecast.ar'") != std::string::npos);
  }
}

TEST_CASE("wrapping delegates and checks the inner category") {
  const auto& reg = builtin_registry();
  const auto ds = classify_dataset();
  const auto inner = reg.create("classify.logistic").fit(ds);
  const auto once = reg.wrap(inner, "interpret.perm_importance");
  CHECK(once.category() == Category::Wrapper);
  CHECK(once.effective_category() == Category::Predictor);
  CHECK(once.predict(ds) == inner.predict(ds));
  const auto twice = reg.wrap(once, "interpret.perm_importance", {{"repeats", std::int64_t{2}}});
  CHECK(twice.predict(ds) == inner.predict(ds));

  const auto scaler = reg.create("scale.zscore").fit(ds);
  CHECK_ERROR_CODE(reg.wrap(scaler, "interpret.perm_importance"), ErrorCode::IncompatibleInner);
  CHECK_ERROR_CODE(reg.wrap(inner, "scale.zscore"), ErrorCode::IncompatibleInner);
  CHECK_ERROR_CODE(reg.wrap(FittedEstimator{}, "interpret.perm_importance"), ErrorCode::NotFitted);

  const auto loaded = reg.load_fitted(reg.save_fitted(twice));
  CHECK(loaded.predict(ds) == inner.predict(ds));
  CHECK(reg.save_fitted(loaded) == reg.save_fitted(twice));
}

TEST_CASE("saved estimators reload with identical outputs") {
  const auto& reg = builtin_registry();
  const auto ds = tftest::random_dataset(21, false);
  const auto scaler = reg.create("scale.zscore").fit(ds);
  const auto blob = reg.save_fitted(scaler);
  const auto loaded = reg.load_fitted(blob);
  CHECK(loaded.transform(ds) == scaler.transform(ds));
  CHECK(loaded.fingerprint() == scaler.fingerprint());
  CHECK(loaded.params() == scaler.params());

  CHECK_ERROR_CODE(reg.load_fitted(blob.substr(0, blob.size() / 2)), ErrorCode::CorruptBlob);
  CHECK_ERROR_CODE(reg.load_fitted(""), ErrorCode::CorruptBlob);
  CHECK_ERROR_CODE(reg.load_fitted("hello\n{}"), ErrorCode::CorruptBlob);
  std::string altered = blob;
  altered[altered.size() - 3] = altered[altered.size() - 3] == '1' ? '2' : '1';
  CHECK_ERROR_CODE(reg.load_fitted(altered), ErrorCode::CorruptBlob);

  Registry custom;
  custom.register_plugin(identity_spec("custom.identity"));
  const auto other = custom.save_fitted(custom.create("custom.identity").fit(ds));
  CHECK_ERROR_CODE(reg.load_fitted(other), ErrorCode::UnknownPluginInBlob);
}
