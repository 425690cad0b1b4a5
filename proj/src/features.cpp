#include "tempoframe/features.hpp"

#include <algorithm>

#include "tempoframe/error.hpp"

namespace tempoframe {

namespace {

constexpr const char* kStats[] = {"last", "mean", "min", "max", "slope"};

}  // namespace

StaticSamples temporal_summary(const TimeSeriesSamples& ts) {
  std::vector<FeatureSpec> features;
  for (const auto& f : ts.features()) {
    if (!f.kind.is_numeric()) {
      fail(ErrorCode::NonNumericFeature, "cannot summarize categorical series '" + f.id + "'");
    }
    for (const char* stat : kStats) features.push_back({f.id + "." + stat, ValueKind::continuous()});
  }

  std::vector<CellValue> cells;
  cells.reserve(ts.num_samples() * features.size());
  std::vector<double> t, v;
  for (std::size_t i = 0; i < ts.num_samples(); ++i) {
    for (std::size_t f = 0; f < ts.num_features(); ++f) {
      t.clear();
      v.clear();
      for (const auto& p : ts.series(i, f)) {
        if (p.value) {
          t.push_back(p.time);
          v.push_back(as_double(*p.value));
        }
      }
      if (v.empty()) {
        cells.insert(cells.end(), 5, Missing);
        continue;
      }
      const double n = static_cast<double>(v.size());
      double sum = 0;
      for (double x : v) sum += x;
      const double mean = sum / n;
      cells.push_back(real(v.back()));
      cells.push_back(real(mean));
      cells.push_back(real(*std::min_element(v.begin(), v.end())));
      cells.push_back(real(*std::max_element(v.begin(), v.end())));
      if (v.size() < 2) {
        cells.push_back(Missing);
        continue;
      }
      double tsum = 0;
      for (double x : t) tsum += x;
      const double tmean = tsum / n;
      double sxy = 0, sxx = 0;
      for (std::size_t k = 0; k < v.size(); ++k) {
        sxy += (t[k] - tmean) * (v[k] - mean);
        sxx += (t[k] - tmean) * (t[k] - tmean);
      }
      cells.push_back(real(sxy / sxx));
    }
  }
  return StaticSamples({ts.sample_ids().begin(), ts.sample_ids().end()}, std::move(features), std::move(cells));
}

FeatureMatrix featurize(const Dataset& ds, Role role) {
  FeatureMatrix out;
  const std::size_t n = ds.num_samples();
  std::vector<std::vector<double>> columns;

  auto take_column = [&](const StaticSamples& s, std::size_t f, const std::string& name) {
    std::vector<double> col(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& cell = s.at(i, f);
      if (!cell) {
        fail(ErrorCode::MissingInFeatures,
             "feature '" + name + "' is missing for sample '" + s.sample_ids()[i] + "'");
      }
      col[i] = as_double(*cell);
    }
    out.names.push_back(name);
    columns.push_back(std::move(col));
  };

  if (ds.static_samples()) {
    for (const auto& ref : ds.features(role, Modality::Static)) {
      if (!ref.spec->kind.is_numeric()) {
        fail(ErrorCode::RequirementUnmet, "static feature '" + ref.spec->id + "' is categorical; encode it first",
             "non_numeric_feature");
      }
      take_column(*ds.static_samples(), ref.index, ref.spec->id);
    }
  }
  if (ds.temporal()) {
    const auto refs = ds.features(role, Modality::Temporal);
    if (!refs.empty()) {
      std::vector<std::string> ids(ds.sample_ids().begin(), ds.sample_ids().end());
      std::vector<FeatureSpec> specs;
      for (const auto& ref : refs) {
        if (!ref.spec->kind.is_numeric()) {
          fail(ErrorCode::RequirementUnmet, "temporal feature '" + ref.spec->id + "' is categorical; encode it first",
               "non_numeric_feature");
        }
        specs.push_back(*ref.spec);
      }
      // Sub-container with only this role's series.
      std::vector<std::vector<TimePoint>> series;
      for (std::size_t i = 0; i < n; ++i) {
        for (const auto& ref : refs) {
          const auto s = ds.temporal()->series(i, ref.index);
          series.emplace_back(s.begin(), s.end());
        }
      }
      const auto summary = temporal_summary(TimeSeriesSamples(std::move(ids), std::move(specs), std::move(series)));
      for (std::size_t f = 0; f < summary.num_features(); ++f) take_column(summary, f, summary.feature(f).id);
    }
  }

  out.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = columns[j][i];
    }
  }
  return out;
}

}  // namespace tempoframe
