#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "tempoframe/plugin.hpp"
#include "tempoframe/prediction.hpp"
#include "test_util.hpp"

using namespace tempoframe;
using namespace tempoframe::prediction;
using tftest::series_target_dataset;

namespace {

std::vector<double> forecast_values(const ForecastOutput& out, std::size_t sample) {
  std::vector<double> v;
  for (const auto& p : out.values.series(sample, 0)) v.push_back(as_double(*p.value));
  return v;
}

Dataset labelled(const std::vector<double>& x, const std::vector<std::int64_t>& y) {
  std::vector<StaticRow> rows;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const std::string id = "p" + std::to_string(i);
    rows.push_back({id, "x", real(x[i])});
    rows.push_back({id, "label", integer(y[i])});
  }
  return assemble_dataset(build_static_samples(rows, {{"x", ValueKind::continuous()}, {"label", ValueKind::integer()}}),
                          std::nullopt, std::nullopt, RoleMap{{"x", Role::Covariate}, {"label", Role::Target}});
}

StaticSamples column(const std::vector<double>& v) {
  std::vector<StaticRow> rows;
  for (std::size_t i = 0; i < v.size(); ++i) rows.push_back({"p" + std::to_string(i), "y", real(v[i])});
  return build_static_samples(rows, {{"y", ValueKind::continuous()}});
}

}  // namespace

TEST_CASE("persistence forecast") {
  auto ds = series_target_dataset({{1, 4, 7}, {2}});
  auto out = persistence_forecast(ds, 3, 1.0);
  CHECK(forecast_values(out, 0) == std::vector<double>{7, 7, 7});
  CHECK(out.values.series(0, 0)[2].time == 5.0);
  CHECK(forecast_values(persistence_forecast(ds, 1, 1.0), 1) == std::vector<double>{2});

  auto empty = series_target_dataset({{1, 2}, {}});
  CHECK_ERROR_CODE(persistence_forecast(empty, 1, 1.0), ErrorCode::EmptyTargetSeries);
}

TEST_CASE("AR fit recovers a noiseless generator") {
  std::vector<double> x = {1.0};
  for (int k = 0; k < 19; ++k) x.push_back(0.5 * x.back());
  auto model = fit_ar(series_target_dataset({x}), 1, 1.0);
  const auto& c = model.targets.at("y");
  CHECK(std::abs(c.phi[0] - 0.5) <= 1e-9);
  CHECK(std::abs(c.intercept) <= 1e-9);
}

TEST_CASE("AR on a constant series predicts the constant") {
  auto ds = series_target_dataset({std::vector<double>(10, 3.0)});
  auto model = fit_ar(ds, 1, 1.0);
  auto out = forecast_ar(model, ds, 1);
  CHECK(std::abs(forecast_values(out, 0)[0] - 3.0) <= 1e-9);
}

TEST_CASE("AR history requirements") {
  CHECK_ERROR_CODE(fit_ar(series_target_dataset({{1, 2}}), 2, 1.0), ErrorCode::InsufficientHistory);
  CHECK_ERROR_CODE(fit_ar(series_target_dataset({{1, 2, 3}}, 1.0), 1, 0.5), ErrorCode::IrregularSeries);

  auto holes = series_target_dataset({{1, 2, 3}});
  std::vector<TimedRow> rows = {{"p0", "y", 0, real(1)}, {"p0", "y", 1, Missing}, {"p0", "y", 2, real(3)}};
  holes = with_temporal(holes, build_time_series_samples(rows, {{"y", ValueKind::continuous()}}), holes.roles());
  CHECK_ERROR_CODE(fit_ar(holes, 1, 1.0), ErrorCode::MissingInTarget);

  ArModel m{2, 1.0, {{"y", {0, {0.5, 0.1}}}}};
  CHECK_ERROR_CODE(forecast_ar(m, series_target_dataset({{4}}), 1), ErrorCode::InsufficientHistory);
}

TEST_CASE("AR recursive forecast") {
  ArModel m{1, 1.0, {{"y", {0.0, {0.5}}}}};
  auto out = forecast_ar(m, series_target_dataset({{3, 8}}), 2);
  CHECK(forecast_values(out, 0) == std::vector<double>{4, 2});
  CHECK(out.values.series(0, 0)[0].time == 2.0);
  CHECK(out.values.series(0, 0)[1].time == 3.0);
}

TEST_CASE("AR with phi = 1 is persistence") {
  ArModel m{1, 0.5, {{"y", {0.0, {1.0}}}}};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Lcg rng(seed);
    std::vector<std::vector<double>> series(3);
    for (auto& s : series) {
      const std::size_t len = 1 + rng.below(6);
      for (std::size_t k = 0; k < len; ++k) s.push_back(rng.uniform(-100, 100));
    }
    auto ds = series_target_dataset(series, 0.5, rng.uniform(-3, 3));
    CHECK(forecast_ar(m, ds, 4) == persistence_forecast(ds, 4, 0.5));
  }
}

TEST_CASE("horizon must be at least one") {
  CHECK_ERROR_CODE(builtin_registry().create("forecast.ar", {{"horizon", std::int64_t{0}}}), ErrorCode::ParamOutOfBounds);
  CHECK_ERROR_CODE(builtin_registry().create("forecast.persistence", {{"horizon", std::int64_t{0}}}),
                   ErrorCode::ParamOutOfBounds);
}

TEST_CASE("AR recovers random stable generators") {
  for (std::size_t p = 1; p <= 3; ++p) {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      const auto g = tftest::stable_ar(seed * 7 + p, p);
      const auto x = tftest::generate_ar(g, 50, seed);
      const auto model = fit_ar(series_target_dataset({x}), p, 1.0);
      const auto& c = model.targets.at("y");
      double err = std::abs(c.intercept - g.intercept);
      for (std::size_t k = 0; k < p; ++k) err = std::max(err, std::abs(c.phi[k] - g.phi[k]));
      CHECK_MESSAGE(err <= 1e-6, "p=" << p << " seed=" << seed << " err=" << err);
    }
  }
}

TEST_CASE("forecasts scale with the data") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto g = tftest::stable_ar(seed, 2);
    const auto x = tftest::generate_ar(g, 30, seed + 100);
    const double a = 0.5 + static_cast<double>(seed);
    std::vector<double> scaled;
    for (double v : x) scaled.push_back(a * v);
    const auto ds = series_target_dataset({x});
    const auto sds = series_target_dataset({scaled});
    const auto base = forecast_values(forecast_ar(fit_ar(ds, 2, 1.0), ds, 3), 0);
    const auto scaled_out = forecast_values(forecast_ar(fit_ar(sds, 2, 1.0), sds, 3), 0);
    const auto pers = forecast_values(persistence_forecast(ds, 2, 1.0), 0);
    const auto spers = forecast_values(persistence_forecast(sds, 2, 1.0), 0);
    for (std::size_t h = 0; h < 3; ++h) CHECK(std::abs(scaled_out[h] - a * base[h]) <= 1e-7 * a * (1 + std::abs(base[h])));
    for (std::size_t h = 0; h < 2; ++h) CHECK(spers[h] == a * pers[h]);
  }
}

TEST_CASE("logistic regression on separable data") {
  std::vector<double> x;
  std::vector<std::int64_t> y;
  for (int i = 0; i < 20; ++i) {
    x.push_back(i % 2 ? 1.0 : -1.0);
    y.push_back(i % 2);
  }
  const auto ds = labelled(x, y);
  const auto model = fit_logistic(ds, 0.1, 500);
  const auto out = predict_proba(model, ds);
  CHECK(accuracy(out.values, *ds.static_samples()) == 1.0);
  CHECK(model.weights[0] > 0);
}

TEST_CASE("logistic regression with identical features") {
  const auto ds = labelled(std::vector<double>(10, 2.5), {0, 1, 0, 1, 0, 1, 0, 1, 0, 1});
  const auto out = predict_proba(fit_logistic(ds, 0.1, 500), ds);
  for (std::size_t i = 0; i < 10; ++i) CHECK(std::abs(as_double(*out.values.at(i, 0)) - 0.5) <= 1e-6);
}

TEST_CASE("logistic target checks") {
  std::vector<StaticRow> rows = {{"p1", "x", real(1)}, {"p1", "grade", category("a")}};
  auto three = assemble_dataset(
      build_static_samples(rows, {{"x", ValueKind::continuous()}, {"grade", ValueKind::categorical({"a", "b", "c"})}}),
      std::nullopt, std::nullopt, RoleMap{{"x", Role::Covariate}, {"grade", Role::Target}});
  CHECK_ERROR_CODE(fit_logistic(three, 0.1, 10), ErrorCode::NonBinaryTarget);
  CHECK_ERROR_CODE(fit_logistic(labelled({1, 2}, {0, 2}), 0.1, 10), ErrorCode::NonBinaryTarget);

  std::vector<StaticRow> gap = {{"p1", "x", Missing}, {"p1", "label", integer(1)}};
  auto missing = assemble_dataset(build_static_samples(gap, {{"x", ValueKind::continuous()}, {"label", ValueKind::integer()}}),
                                  std::nullopt, std::nullopt, RoleMap{{"x", Role::Covariate}, {"label", Role::Target}});
  CHECK_ERROR_CODE(fit_logistic(missing, 0.1, 10), ErrorCode::MissingInFeatures);
}

TEST_CASE("two-category targets use the second category as positive") {
  std::vector<StaticRow> rows;
  for (int i = 0; i < 10; ++i) {
    const std::string id = "p" + std::to_string(i);
    rows.push_back({id, "x", real(i < 5 ? -1.0 : 1.0)});
    rows.push_back({id, "outcome", category(i < 5 ? "alive" : "dead")});
  }
  auto ds = assemble_dataset(
      build_static_samples(rows, {{"x", ValueKind::continuous()}, {"outcome", ValueKind::categorical({"alive", "dead"})}}),
      std::nullopt, std::nullopt, RoleMap{{"x", Role::Covariate}, {"outcome", Role::Target}});
  const auto out = predict_proba(fit_logistic(ds, 0.5, 200), ds);
  CHECK(as_double(*out.values.at(9, 0)) > 0.5);
  CHECK(accuracy(out.values, *ds.static_samples()) == 1.0);
}

TEST_CASE("probabilities lie in (0,1) and follow their samples") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Lcg rng(seed);
    std::vector<double> x;
    std::vector<std::int64_t> y;
    for (int i = 0; i < 12; ++i) {
      x.push_back(rng.uniform(-50, 50));
      y.push_back(x.back() > 0 ? 1 : 0);
    }
    const auto ds = labelled(x, y);
    const auto model = fit_logistic(ds, 1.0, 300);
    const auto out = predict_proba(model, ds);
    for (std::size_t i = 0; i < 12; ++i) {
      const double p = as_double(*out.values.at(i, 0));
      CHECK(p > 0.0);
      CHECK(p < 1.0);
    }
    auto order = seeded_permutation(12, seed);
    std::vector<std::string> ids;
    for (auto k : order) ids.push_back(ds.sample_ids()[k]);
    const auto shuffled = predict_proba(model, select_samples(ds, ids));
    for (std::size_t k = 0; k < 12; ++k) CHECK(shuffled.values.at(k, 0) == out.values.at(order[k], 0));
  }
}

TEST_CASE("rmse and accuracy") {
  CHECK(rmse(column({1, 2}), column({1, 2})) == 0.0);
  CHECK(std::abs(rmse(column({0, 0}), column({3, 4})) - std::sqrt(12.5)) <= 1e-15);

  auto grid_a = build_time_series_samples(std::vector<TimedRow>{{"p0", "y", 1, real(1)}}, {{"y", ValueKind::continuous()}});
  auto grid_b = build_time_series_samples(std::vector<TimedRow>{{"p0", "y", 1.5, real(1)}}, {{"y", ValueKind::continuous()}});
  CHECK(rmse(grid_a, grid_a) == 0.0);
  CHECK_ERROR_CODE(rmse(grid_a, grid_b), ErrorCode::AlignmentError);

  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Lcg rng(seed);
    std::vector<double> a, b;
    for (int i = 0; i < 7; ++i) {
      a.push_back(rng.uniform(-10, 10));
      b.push_back(rng.uniform(-10, 10));
    }
    CHECK(rmse(column(a), column(b)) == rmse(column(b), column(a)));
    CHECK(rmse(column(a), column(b)) >= 0);
  }

  std::vector<StaticRow> truth_rows = {{"p0", "y", integer(1)}, {"p1", "y", integer(0)}, {"p2", "y", integer(1)}};
  auto truth = build_static_samples(truth_rows, {{"y", ValueKind::integer()}});
  CHECK(std::abs(accuracy(column({0.9, 0.2, 0.4}), truth) - 2.0 / 3.0) <= 1e-15);
}

TEST_CASE("prediction plugins round-trip through blobs") {
  const auto& reg = builtin_registry();
  const auto g = tftest::stable_ar(3, 2);
  const auto ds = series_target_dataset({tftest::generate_ar(g, 20, 1), tftest::generate_ar(g, 15, 2)});
  for (const char* plugin : {"forecast.persistence", "forecast.ar"}) {
    auto f = reg.create(plugin, {{"horizon", std::int64_t{3}}}).fit(ds);
    CHECK(reg.load_fitted(reg.save_fitted(f)).predict(ds) == f.predict(ds));
  }
  const auto cls = labelled({-1, 1, -2, 2, 0.5}, {0, 1, 0, 1, 1});
  auto f = reg.create("classify.logistic").fit(cls);
  CHECK(reg.load_fitted(reg.save_fitted(f)).predict(cls) == f.predict(cls));
}
