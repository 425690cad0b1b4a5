#pragma once

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "tempoframe/dataset.hpp"
#include "tempoframe/error.hpp"
#include "tempoframe/plugin.hpp"
#include "tempoframe/rng.hpp"

namespace tftest {

using namespace tempoframe;

#define CHECK_ERROR_CODE(expr, expected_code)                                  \
  do {                                                                         \
    bool thrown_ = false;                                                      \
    try {                                                                      \
      (void)(expr);                                                            \
    } catch (const ::tempoframe::Error& e_) {                                  \
      thrown_ = true;                                                          \
      CHECK_MESSAGE(e_.code() == (expected_code), e_.what());                  \
    }                                                                          \
    CHECK_MESSAGE(thrown_, "expected " #expected_code);                        \
  } while (0)

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("tempoframe_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Random dataset with every modality: static (continuous, integer,
/// categorical, some Missing), irregular/unaligned/unequal-length temporal
/// series with Missing points, and event records with censoring.
inline Dataset random_dataset(std::uint64_t seed, bool with_missing = true) {
  Lcg rng(seed);
  const std::size_t n = 2 + rng.below(7);
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back("s" + std::to_string(rng.below(1000)) + "_" + std::to_string(i));

  KindList skinds = {{"age", ValueKind::integer()},
                     {"weight", ValueKind::continuous()},
                     {"blood", ValueKind::categorical({"A", "B", "AB", "O"})},
                     {"label", ValueKind::integer()}};
  std::vector<StaticRow> srows;
  for (const auto& id : ids) {
    auto maybe = [&](CellValue v) { return with_missing && rng.uniform() < 0.15 ? CellValue{} : v; };
    srows.push_back({id, "age", maybe(integer(static_cast<std::int64_t>(20 + rng.below(60))))});
    srows.push_back({id, "weight", maybe(real(rng.uniform(40, 120)))});
    srows.push_back({id, "blood", maybe(category(skinds[2].kind.categories()[rng.below(4)]))});
    srows.push_back({id, "label", integer(static_cast<std::int64_t>(rng.below(2)))});
  }

  KindList tkinds = {{"bp", ValueKind::continuous()}, {"wbc", ValueKind::continuous()}, {"pain", ValueKind::integer()}};
  std::vector<TimedRow> trows;
  for (const auto& id : ids) {
    for (const auto& f : tkinds) {
      const std::size_t len = rng.below(6);
      double t = rng.uniform(-2, 2);
      for (std::size_t k = 0; k < len; ++k) {
        t += 0.1 + rng.uniform(0, 2);
        CellValue v = f.kind.tag() == KindTag::Integer ? integer(static_cast<std::int64_t>(rng.below(10)))
                                                       : real(rng.uniform(-5, 5) * 10);
        if (with_missing && rng.uniform() < 0.2) v = Missing;
        trows.push_back({id, f.id, t, v});
      }
    }
  }

  KindList ekinds = {{"death", ValueKind::integer()}, {"relapse", ValueKind::integer()}};
  std::vector<TimedRow> erows;
  for (const auto& id : ids) {
    erows.push_back({id, "death", rng.uniform(1, 100), rng.uniform() < 0.4 ? CellValue{} : integer(1)});
    if (rng.uniform() < 0.6) erows.push_back({id, "relapse", rng.uniform(1, 100), rng.uniform() < 0.5 ? CellValue{} : integer(1)});
  }

  RoleMap roles{{"age", Role::Covariate},  {"weight", Role::Covariate}, {"blood", Role::Covariate},
                {"label", Role::Target},   {"bp", Role::Covariate},     {"wbc", Role::Covariate},
                {"pain", Role::Covariate}, {"death", Role::Target},     {"relapse", Role::Covariate}};
  return assemble_dataset(build_static_samples(srows, skinds, ids), build_time_series_samples(trows, tkinds, ids),
                          build_event_samples(erows, ekinds, ids), roles);
}

}  // namespace tftest

namespace tftest {

/// Dataset with one regular temporal Target "y" per sample (times t0 + k*step)
/// and a static covariate "age".
inline Dataset series_target_dataset(const std::vector<std::vector<double>>& series, double step = 1.0,
                                     double t0 = 0.0) {
  std::vector<TimedRow> rows;
  std::vector<StaticRow> srows;
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < series.size(); ++i) {
    ids.push_back("p" + std::to_string(i));
    srows.push_back({ids.back(), "age", real(40.0 + static_cast<double>(i))});
    for (std::size_t k = 0; k < series[i].size(); ++k) {
      rows.push_back({ids.back(), "y", t0 + static_cast<double>(k) * step, real(series[i][k])});
    }
  }
  return assemble_dataset(build_static_samples(srows, {{"age", ValueKind::continuous()}}, ids),
                          build_time_series_samples(rows, {{"y", ValueKind::continuous()}}, ids), std::nullopt,
                          RoleMap{{"age", Role::Covariate}, {"y", Role::Target}});
}

struct ArGenerator {
  double intercept = 0;
  std::vector<double> phi;
  double real_root = 0;         // p = 1 or 3
  double modulus = 0, angle = 0;  // complex pair, p >= 2
};

/// Seeded stationary AR(p) coefficients, p in 1..3, built from roots inside
/// the unit circle (a complex pair for p >= 2).
inline ArGenerator stable_ar(std::uint64_t seed, std::size_t p) {
  Lcg rng(seed);
  ArGenerator g;
  g.intercept = rng.uniform(-1, 1);
  const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
  if (p == 1) {
    g.real_root = sign * rng.uniform(0.5, 0.95);
    g.phi = {g.real_root};
    return g;
  }
  const double r = g.modulus = rng.uniform(0.85, 0.98);
  g.angle = rng.uniform(0.3, 2.5);
  const double c = std::cos(g.angle);
  if (p == 2) {
    g.phi = {2 * r * c, -r * r};
    return g;
  }
  const double s = g.real_root = sign * rng.uniform(0.7, 0.9);
  g.phi = {s + 2 * r * c, -(2 * r * s * c + r * r), r * r * s};
  return g;
}

/// Noiseless series: the first p values come from the closed-form solution
/// with every mode given a sizeable seeded amplitude, then the recursion runs.
inline std::vector<double> generate_ar(const ArGenerator& g, std::size_t length, std::uint64_t seed) {
  Lcg rng(seed);
  double sum_phi = 0;
  for (double f : g.phi) sum_phi += f;
  const double mean = g.intercept / (1 - sum_phi);
  const double a = (rng.uniform() < 0.5 ? -1 : 1) * rng.uniform(4, 8);
  const double b = rng.uniform(4, 8);
  const double phase = rng.uniform(0, 6.283185307179586);
  const std::size_t p = g.phi.size();
  std::vector<double> x;
  for (std::size_t t = 0; t < p; ++t) {
    const double td = static_cast<double>(t);
    double v = mean;
    if (p != 2) v += a * std::pow(g.real_root, td);
    if (p >= 2) v += b * std::pow(g.modulus, td) * std::cos(g.angle * td + phase);
    x.push_back(v);
  }
  while (x.size() < length) {
    double next = g.intercept;
    for (std::size_t k = 1; k <= p; ++k) next += g.phi[k - 1] * x[x.size() - k];
    x.push_back(next);
  }
  return x;
}

/// Static covariates (columns of `z`, named z0, z1, ...) plus an event Target
/// "death"; occurred=false records a censoring.
inline Dataset survival_dataset(const std::vector<std::vector<double>>& z, const std::vector<double>& times,
                                const std::vector<bool>& occurred) {
  std::vector<StaticRow> srows;
  std::vector<TimedRow> erows;
  std::vector<std::string> ids;
  KindList kinds;
  std::vector<std::pair<std::string, Role>> roles{{"death", Role::Target}};
  const std::size_t d = z.empty() ? 0 : z.front().size();
  for (std::size_t k = 0; k < d; ++k) {
    kinds.push_back({"z" + std::to_string(k), ValueKind::continuous()});
    roles.push_back({"z" + std::to_string(k), Role::Covariate});
  }
  for (std::size_t i = 0; i < times.size(); ++i) {
    ids.push_back("p" + std::to_string(i));
    for (std::size_t k = 0; k < d; ++k) srows.push_back({ids.back(), "z" + std::to_string(k), real(z[i][k])});
    erows.push_back({ids.back(), "death", times[i], occurred[i] ? integer(1) : CellValue{}});
  }
  return assemble_dataset(build_static_samples(srows, kinds, ids), std::nullopt,
                          build_event_samples(erows, {{"death", ValueKind::integer()}}, ids), RoleMap(roles));
}

/// Forecasting dataset for pipeline laws: a complete regular target "y",
/// an irregular covariate series "hr" with gaps, and static covariates with
/// Missing cells including a categorical one.
inline Dataset pipeline_dataset(std::uint64_t seed) {
  Lcg rng(seed);
  const std::size_t n = 4 + rng.below(5);
  std::vector<std::string> ids;
  std::vector<StaticRow> srows;
  std::vector<TimedRow> trows;
  for (std::size_t i = 0; i < n; ++i) {
    ids.push_back("q" + std::to_string(i));
    auto maybe = [&](CellValue v) { return rng.uniform() < 0.2 ? CellValue{} : v; };
    srows.push_back({ids.back(), "age", maybe(integer(static_cast<std::int64_t>(30 + rng.below(50))))});
    srows.push_back({ids.back(), "weight", maybe(real(rng.uniform(50, 100)))});
    srows.push_back({ids.back(), "site", i < 2 ? category(i == 0 ? "north" : "south")
                                                : maybe(category(rng.uniform() < 0.5 ? "north" : "south"))});
    const std::size_t len = 8 + rng.below(6);
    double level = rng.uniform(-2, 2);
    for (std::size_t k = 0; k < len; ++k) {
      level = 0.5 + 0.7 * level + rng.uniform(-0.3, 0.3);
      trows.push_back({ids.back(), "y", static_cast<double>(k), real(level)});
    }
    double t = rng.uniform(0, 1);
    trows.push_back({ids.back(), "hr", t, real(rng.uniform(60, 100))});
    while ((t += rng.uniform(0.4, 2.5)) < static_cast<double>(len)) {
      trows.push_back({ids.back(), "hr", t, rng.uniform() < 0.25 ? CellValue{} : real(rng.uniform(60, 100))});
    }
  }
  return assemble_dataset(
      build_static_samples(srows,
                           {{"age", ValueKind::integer()},
                            {"weight", ValueKind::continuous()},
                            {"site", ValueKind::categorical({"north", "south"})}},
                           ids),
      build_time_series_samples(trows, {{"y", ValueKind::continuous()}, {"hr", ValueKind::continuous()}}, ids),
      std::nullopt,
      RoleMap{{"age", Role::Covariate}, {"weight", Role::Covariate}, {"site", Role::Covariate},
              {"hr", Role::Covariate}, {"y", Role::Target}});
}

/// Seeded pipeline: a random sequence of shipped transforms, then a final step
/// that is a forecaster or another transform.
inline std::vector<PipelineStep> random_pipeline(std::uint64_t seed) {
  Lcg rng(seed);
  const std::vector<PipelineStep> transforms = {
      {"impute.locf", {}},
      {"impute.mean", {}},
      {"scale.zscore", {}},
      {"scale.zscore", {{"include_targets", true}}},
      {"encode.onehot", {}},
      {"resample.regular", {{"step", 1.0}}},
  };
  const std::vector<PipelineStep> finals = {
      {"forecast.persistence", {{"horizon", std::int64_t{3}}}},
      {"forecast.ar", {{"order", std::int64_t{1}}, {"horizon", std::int64_t{2}}}},
      {"forecast.ar", {{"order", std::int64_t{2}}, {"horizon", std::int64_t{4}}}},
      {"impute.mean", {}},
      {"scale.zscore", {}},
  };
  std::vector<PipelineStep> steps;
  const std::size_t interior = rng.below(5);
  for (std::size_t k = 0; k < interior; ++k) steps.push_back(transforms[rng.below(transforms.size())]);
  steps.push_back(finals[rng.below(finals.size())]);
  return steps;
}

/// Binary label driven by "signal" alone; "noise" is an independent covariate
/// and "flat" is the same value for every sample.
inline Dataset importance_fixture(std::uint64_t seed, std::size_t n) {
  Lcg rng(seed);
  std::vector<StaticRow> rows;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string id = "m" + std::to_string(i);
    const double signal = rng.uniform(-1, 1);
    rows.push_back({id, "signal", real(signal)});
    rows.push_back({id, "noise", real(rng.uniform(-1, 1))});
    rows.push_back({id, "flat", real(2.5)});
    rows.push_back({id, "label", integer(signal + 0.2 * rng.normal() > 0 ? 1 : 0)});
  }
  return assemble_dataset(build_static_samples(rows, {{"signal", ValueKind::continuous()},
                                                      {"noise", ValueKind::continuous()},
                                                      {"flat", ValueKind::continuous()},
                                                      {"label", ValueKind::integer()}}),
                          std::nullopt, std::nullopt,
                          RoleMap{{"signal", Role::Covariate}, {"noise", Role::Covariate},
                                  {"flat", Role::Covariate}, {"label", Role::Target}});
}

}  // namespace tftest

