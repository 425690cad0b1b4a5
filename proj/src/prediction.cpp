#include "tempoframe/prediction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "json_util.hpp"
#include "tempoframe/error.hpp"
#include "tempoframe/features.hpp"
#include "tempoframe/kernels.hpp"
#include "tempoframe/plugin.hpp"

namespace tempoframe::prediction {

using detail::ojson;

namespace {

constexpr double kArJitter = 1e-9;

const TimeSeriesSamples& temporal_of(const Dataset& ds) {
  if (!ds.temporal()) fail(ErrorCode::RequirementUnmet, "forecasting needs a temporal container", "missing_temporal");
  return *ds.temporal();
}

std::vector<std::size_t> temporal_targets(const Dataset& ds) {
  std::vector<std::size_t> out;
  for (const auto& ref : ds.features(Role::Target, Modality::Temporal)) out.push_back(ref.index);
  if (out.empty()) {
    fail(ErrorCode::RequirementUnmet, "forecasting needs a temporal target feature", "missing_temporal_target");
  }
  return out;
}

std::vector<FeatureSpec> continuous_specs(const TimeSeriesSamples& ts, std::span<const std::size_t> features) {
  std::vector<FeatureSpec> out;
  for (std::size_t f : features) out.push_back({ts.feature(f).id, ValueKind::continuous()});
  return out;
}

std::vector<TimePoint> future(double t_last, double step, std::span<const double> values) {
  std::vector<TimePoint> out;
  for (std::size_t k = 0; k < values.size(); ++k) {
    out.push_back({t_last + static_cast<double>(k + 1) * step, real(values[k])});
  }
  return out;
}

void check_regular(std::span<const TimePoint> s, double step, const std::string& where) {
  for (std::size_t k = 1; k < s.size(); ++k) {
    if (std::abs((s[k].time - s[k - 1].time) - step) > 1e-9 * step) {
      fail(ErrorCode::IrregularSeries, where + " is not on a regular grid with step " + format_real(step) +
                                           " (gap at t=" + format_real(s[k - 1].time) + "); resample it first");
    }
  }
}

std::vector<double> observed_values(std::span<const TimePoint> s, const std::string& where) {
  std::vector<double> out;
  out.reserve(s.size());
  for (const auto& p : s) {
    if (!p.value) fail(ErrorCode::MissingInTarget, where + " has a Missing point at t=" + format_real(p.time));
    out.push_back(as_double(*p.value));
  }
  return out;
}

double sigmoid(double z) {
  const double p = z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
  // Keeps probabilities strictly inside (0, 1) when exp saturates.
  return std::clamp(p, std::numeric_limits<double>::denorm_min(), std::nextafter(1.0, 0.0));
}

}  // namespace

ForecastOutput persistence_forecast(const Dataset& ds, std::size_t horizon, double step) {
  const auto& ts = temporal_of(ds);
  const auto targets = temporal_targets(ds);
  std::vector<std::vector<TimePoint>> series;
  for (std::size_t i = 0; i < ts.num_samples(); ++i) {
    for (std::size_t f : targets) {
      const auto s = ts.series(i, f);
      auto last = std::find_if(s.rbegin(), s.rend(), [](const TimePoint& p) { return p.value.has_value(); });
      if (last == s.rend()) {
        fail(ErrorCode::EmptyTargetSeries, "sample '" + ts.sample_ids()[i] + "' has no observed '" +
                                               ts.feature(f).id + "' values to carry forward");
      }
      const std::vector<double> values(horizon, as_double(*last->value));
      series.push_back(future(last->time, step, values));
    }
  }
  return {TimeSeriesSamples({ts.sample_ids().begin(), ts.sample_ids().end()}, continuous_specs(ts, targets),
                            std::move(series))};
}

ArModel fit_ar(const Dataset& ds, std::size_t order, double step) {
  if (order == 0) fail(ErrorCode::ParamOutOfBounds, "AR order must be at least 1");
  const auto& ts = temporal_of(ds);
  ArModel model{order, step, {}};
  const std::size_t dim = order + 1;
  for (std::size_t f : temporal_targets(ds)) {
    const std::string& id = ts.feature(f).id;
    Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    Eigen::VectorXd xty = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
    Eigen::VectorXd row(static_cast<Eigen::Index>(dim));
    std::size_t windows = 0;
    for (std::size_t i = 0; i < ts.num_samples(); ++i) {
      const auto s = ts.series(i, f);
      const std::string where = "'" + id + "' of sample '" + ts.sample_ids()[i] + "'";
      const auto x = observed_values(s, where);
      check_regular(s, step, where);
      for (std::size_t t = order; t < x.size(); ++t) {
        row[0] = 1.0;
        for (std::size_t k = 1; k <= order; ++k) row[static_cast<Eigen::Index>(k)] = x[t - k];
        xtx.noalias() += row * row.transpose();
        xty += row * x[t];
        ++windows;
      }
    }
    if (windows == 0) {
      fail(ErrorCode::InsufficientHistory,
           "no '" + id + "' sequence has more than " + std::to_string(order) + " points to fit an AR model");
    }
    xtx.diagonal().array() += kArJitter;
    const Eigen::VectorXd b = xtx.ldlt().solve(xty);
    ArCoefficients c;
    c.intercept = b[0];
    for (std::size_t k = 1; k <= order; ++k) c.phi.push_back(b[static_cast<Eigen::Index>(k)]);
    model.targets[id] = std::move(c);
  }
  return model;
}

ForecastOutput forecast_ar(const ArModel& model, const Dataset& ds, std::size_t horizon) {
  const auto& ts = temporal_of(ds);
  std::vector<std::size_t> targets;
  std::vector<const ArCoefficients*> coefs;
  for (const auto& [id, c] : model.targets) {
    auto f = ts.feature_index(id);
    if (!f) fail(ErrorCode::UnknownFeature, "AR target '" + id + "' is not in the query dataset");
    targets.push_back(*f);
    coefs.push_back(&c);
  }
  std::vector<std::vector<TimePoint>> series;
  for (std::size_t i = 0; i < ts.num_samples(); ++i) {
    for (std::size_t k = 0; k < targets.size(); ++k) {
      const auto s = ts.series(i, targets[k]);
      const std::string where = "'" + ts.feature(targets[k]).id + "' of sample '" + ts.sample_ids()[i] + "'";
      if (s.size() < model.order) {
        fail(ErrorCode::InsufficientHistory,
             where + " has " + std::to_string(s.size()) + " points; the model needs " + std::to_string(model.order));
      }
      check_regular(s, model.step, where);
      const auto tail = s.subspan(s.size() - model.order);
      std::vector<double> history = observed_values(tail, where);
      std::vector<double> out;
      for (std::size_t h = 0; h < horizon; ++h) {
        double next = coefs[k]->intercept;
        for (std::size_t lag = 1; lag <= model.order; ++lag) {
          next += coefs[k]->phi[lag - 1] * history[history.size() - lag];
        }
        history.push_back(next);
        out.push_back(next);
      }
      series.push_back(future(s.back().time, model.step, out));
    }
  }
  return {TimeSeriesSamples({ts.sample_ids().begin(), ts.sample_ids().end()}, continuous_specs(ts, targets),
                            std::move(series))};
}

const FeatureSpec& binary_static_target(const Dataset& ds) {
  const auto refs = ds.features(Role::Target, Modality::Static);
  if (refs.empty()) fail(ErrorCode::RequirementUnmet, "classification needs a static target", "missing_static_target");
  if (refs.size() > 1) fail(ErrorCode::MultipleTargets, "classification supports exactly one static target");
  const auto& spec = *refs.front().spec;
  const auto tag = spec.kind.tag();
  if (tag == KindTag::Continuous || (tag == KindTag::Categorical && spec.kind.categories().size() != 2)) {
    fail(ErrorCode::NonBinaryTarget, "target '" + spec.id + "' is not binary");
  }
  return spec;
}

double binary_label(const ValueKind& kind, const CellValue& v) {
  if (!v) fail(ErrorCode::MissingInTarget, "binary target value is Missing");
  if (kind.tag() == KindTag::Categorical) {
    if (kind.categories().size() != 2) fail(ErrorCode::NonBinaryTarget, "categorical target is not binary");
    return *kind.category_index(std::get<std::string>(*v)) == 1 ? 1.0 : 0.0;
  }
  const double x = as_double(*v);
  if (x != 0.0 && x != 1.0) fail(ErrorCode::NonBinaryTarget, "target value " + format_cell(v) + " is not 0 or 1");
  return x;
}

LogisticModel fit_logistic(const Dataset& ds, double lr, std::size_t iters) {
  const auto& target = binary_static_target(ds);
  const auto& s = *ds.static_samples();
  const std::size_t tf = *s.feature_index(target.id);
  auto fm = featurize(ds);
  const std::size_t n = s.num_samples();
  const auto d = fm.values.cols();
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = binary_label(target.kind, s.at(i, tf));

  Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
  double b = 0;
  std::vector<double> z(n);
  std::vector<double> r(n);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t it = 0; it < iters; ++it) {
    kernels::linear_scores(fm.values, w, b, z);
    double gb = 0;
    for (std::size_t i = 0; i < n; ++i) {
      r[i] = sigmoid(z[i]) - y[i];
      gb += r[i];
    }
    for (Eigen::Index k = 0; k < d; ++k) {
      double g = 0;
      for (std::size_t i = 0; i < n; ++i) g += r[i] * fm.values(static_cast<Eigen::Index>(i), k);
      w[k] -= lr * g * inv_n;
    }
    b -= lr * gb * inv_n;
  }
  return {target.id, std::move(fm.names), {w.data(), w.data() + d}, b};
}

StaticOutput predict_proba(const LogisticModel& model, const Dataset& ds) {
  auto fm = featurize(ds);
  if (fm.names != model.features) {
    fail(ErrorCode::FingerprintMismatch, "query covariates differ from the features the classifier was fitted on");
  }
  const Eigen::Map<const Eigen::VectorXd> w(model.weights.data(), static_cast<Eigen::Index>(model.weights.size()));
  std::vector<double> z(ds.num_samples());
  kernels::linear_scores(fm.values, w, model.bias, z);
  std::vector<CellValue> cells;
  for (double v : z) cells.push_back(real(sigmoid(v)));
  const auto ids = ds.sample_ids();
  return {StaticSamples({ids.begin(), ids.end()}, {{model.target, ValueKind::continuous()}}, std::move(cells))};
}

namespace {

double truth_number(const ValueKind& kind, const CellValue& v, const std::string& where) {
  if (!v) fail(ErrorCode::AlignmentError, "truth is Missing at " + where);
  if (kind.tag() == KindTag::Categorical) return binary_label(kind, v);
  return as_double(*v);
}

double pred_number(const CellValue& v, const std::string& where) {
  if (!v) fail(ErrorCode::AlignmentError, "prediction is Missing at " + where);
  return as_double(*v);
}

std::size_t truth_sample(const SampleFeatureIndex& truth, const std::string& id) {
  auto i = truth.sample_index(id);
  if (!i) fail(ErrorCode::AlignmentError, "sample '" + id + "' has no ground truth");
  return *i;
}

std::size_t truth_feature(const SampleFeatureIndex& truth, const std::string& id) {
  auto f = truth.feature_index(id);
  if (!f) fail(ErrorCode::AlignmentError, "feature '" + id + "' has no ground truth");
  return *f;
}

double finish_rmse(double sum, std::size_t count) {
  if (count == 0) fail(ErrorCode::AlignmentError, "no aligned points to score");
  return std::sqrt(sum / static_cast<double>(count));
}

}  // namespace

double rmse(const StaticSamples& pred, const StaticSamples& truth) {
  double sum = 0;
  std::size_t count = 0;
  for (std::size_t f = 0; f < pred.num_features(); ++f) {
    const std::size_t tf = truth_feature(truth, pred.feature(f).id);
    for (std::size_t i = 0; i < pred.num_samples(); ++i) {
      const std::string& id = pred.sample_ids()[i];
      const std::string where = "'" + pred.feature(f).id + "' of '" + id + "'";
      const double e = pred_number(pred.at(i, f), where) -
                       truth_number(truth.feature(tf).kind, truth.at(truth_sample(truth, id), tf), where);
      sum += e * e;
      ++count;
    }
  }
  return finish_rmse(sum, count);
}

double rmse(const TimeSeriesSamples& pred, const TimeSeriesSamples& truth) {
  double sum = 0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < pred.num_samples(); ++i) {
    const std::string& id = pred.sample_ids()[i];
    const std::size_t ti = truth_sample(truth, id);
    for (std::size_t f = 0; f < pred.num_features(); ++f) {
      const std::size_t tf = truth_feature(truth, pred.feature(f).id);
      const auto ts = truth.series(ti, tf);
      for (const auto& p : pred.series(i, f)) {
        const std::string where = "'" + pred.feature(f).id + "' of '" + id + "' at t=" + format_real(p.time);
        auto it = std::lower_bound(ts.begin(), ts.end(), p.time,
                                   [](const TimePoint& q, double t) { return q.time < t; });
        if (it == ts.end() || it->time != p.time) fail(ErrorCode::AlignmentError, "no truth point for " + where);
        const double e = pred_number(p.value, where) - truth_number(truth.feature(tf).kind, it->value, where);
        sum += e * e;
        ++count;
      }
    }
  }
  return finish_rmse(sum, count);
}

double accuracy(const StaticSamples& pred, const StaticSamples& truth, double threshold) {
  std::size_t correct = 0;
  std::size_t count = 0;
  for (std::size_t f = 0; f < pred.num_features(); ++f) {
    const std::size_t tf = truth_feature(truth, pred.feature(f).id);
    const auto& kind = truth.feature(tf).kind;
    for (std::size_t i = 0; i < pred.num_samples(); ++i) {
      const std::string& id = pred.sample_ids()[i];
      const std::string where = "'" + pred.feature(f).id + "' of '" + id + "'";
      const auto& tv = truth.at(truth_sample(truth, id), tf);
      if (!tv) fail(ErrorCode::AlignmentError, "truth is Missing at " + where);
      const double label = binary_label(kind, tv);
      const double predicted = pred_number(pred.at(i, f), where) >= threshold ? 1.0 : 0.0;
      correct += predicted == label ? 1 : 0;
      ++count;
    }
  }
  if (count == 0) fail(ErrorCode::AlignmentError, "no aligned samples to score");
  return static_cast<double>(correct) / static_cast<double>(count);
}

// --- plugins ----------------------------------------------------------------

namespace {

class FittedPersistence final : public FittedModel {
 public:
  FittedPersistence(std::size_t horizon, double step) : horizon_(horizon), step_(step) {}
  Predictions predict(const Dataset& ds) const override { return persistence_forecast(ds, horizon_, step_); }
  ojson state() const override { return ojson::object(); }

 private:
  std::size_t horizon_;
  double step_;
};

class PersistenceLearner final : public Learner {
 public:
  PersistenceLearner(std::size_t horizon, double step) : horizon_(horizon), step_(step) {}
  std::shared_ptr<const FittedModel> fit(const Dataset& ds) const override {
    for (std::size_t f : temporal_targets(ds)) {
      if (!ds.temporal()->feature(f).kind.is_numeric()) {
        fail(ErrorCode::RequirementUnmet, "forecast targets must be numeric", "non_numeric_feature");
      }
    }
    return std::make_shared<FittedPersistence>(horizon_, step_);
  }

 private:
  std::size_t horizon_;
  double step_;
};

class FittedAr final : public FittedModel {
 public:
  FittedAr(ArModel model, std::size_t horizon) : model_(std::move(model)), horizon_(horizon) {}
  Predictions predict(const Dataset& ds) const override { return forecast_ar(model_, ds, horizon_); }
  ojson state() const override {
    ojson targets = ojson::object();
    for (const auto& [id, c] : model_.targets) targets[id] = {{"intercept", c.intercept}, {"phi", c.phi}};
    return {{"order", model_.order}, {"step", model_.step}, {"targets", targets}};
  }
  static std::shared_ptr<const FittedModel> load(const ojson& j, std::size_t horizon) {
    ArModel m{j.at("order").get<std::size_t>(), j.at("step").get<double>(), {}};
    for (const auto& [id, c] : j.at("targets").items()) {
      m.targets[id] = {c.at("intercept").get<double>(), c.at("phi").get<std::vector<double>>()};
    }
    return std::make_shared<FittedAr>(std::move(m), horizon);
  }

 private:
  ArModel model_;
  std::size_t horizon_;
};

class ArLearner final : public Learner {
 public:
  ArLearner(std::size_t order, std::size_t horizon, double step) : order_(order), horizon_(horizon), step_(step) {}
  std::shared_ptr<const FittedModel> fit(const Dataset& ds) const override {
    return std::make_shared<FittedAr>(fit_ar(ds, order_, step_), horizon_);
  }

 private:
  std::size_t order_;
  std::size_t horizon_;
  double step_;
};

class FittedLogistic final : public FittedModel {
 public:
  explicit FittedLogistic(LogisticModel model) : model_(std::move(model)) {}
  Predictions predict(const Dataset& ds) const override { return predict_proba(model_, ds); }
  ojson state() const override {
    return {{"target", model_.target}, {"features", model_.features}, {"weights", model_.weights}, {"bias", model_.bias}};
  }
  static std::shared_ptr<const FittedModel> load(const ojson& j) {
    return std::make_shared<FittedLogistic>(LogisticModel{j.at("target").get<std::string>(),
                                                          j.at("features").get<std::vector<std::string>>(),
                                                          j.at("weights").get<std::vector<double>>(),
                                                          j.at("bias").get<double>()});
  }

 private:
  LogisticModel model_;
};

class LogisticLearner final : public Learner {
 public:
  LogisticLearner(double lr, std::size_t iters) : lr_(lr), iters_(iters) {}
  std::shared_ptr<const FittedModel> fit(const Dataset& ds) const override {
    return std::make_shared<FittedLogistic>(fit_logistic(ds, lr_, iters_));
  }

 private:
  double lr_;
  std::size_t iters_;
};

constexpr double kTinyPositive = 1e-12;

std::size_t as_size(std::int64_t v) { return static_cast<std::size_t>(v); }

}  // namespace

void register_plugins(Registry& registry) {
  registry.register_plugin({
      .name = "forecast.persistence",
      .category = Category::Predictor,
      .schema = {HyperparamDef::integer("horizon", 1, 1, 1000000), HyperparamDef::real("step", 1.0, kTinyPositive, 1e300)},
      .output = OutputShape::Forecast,
      .description = "repeat the last observed value of each temporal target",
      .make = [](const Params& p) {
        return std::make_unique<PersistenceLearner>(as_size(p.integer("horizon")), p.real("step"));
      },
      .load = [](const ojson&, const Params& p, const Registry&) -> std::shared_ptr<const FittedModel> {
        return std::make_shared<FittedPersistence>(as_size(p.integer("horizon")), p.real("step"));
      },
  });
  registry.register_plugin({
      .name = "forecast.ar",
      .category = Category::Predictor,
      .schema = {HyperparamDef::integer("order", 1, 1, 64), HyperparamDef::integer("horizon", 1, 1, 1000000),
                 HyperparamDef::real("step", 1.0, kTinyPositive, 1e300)},
      .output = OutputShape::Forecast,
      .description = "pooled least-squares autoregression with recursive multi-step forecasts",
      .make = [](const Params& p) {
        return std::make_unique<ArLearner>(as_size(p.integer("order")), as_size(p.integer("horizon")), p.real("step"));
      },
      .load = [](const ojson& j, const Params& p, const Registry&) {
        return FittedAr::load(j, as_size(p.integer("horizon")));
      },
  });
  registry.register_plugin({
      .name = "classify.logistic",
      .category = Category::Predictor,
      .schema = {HyperparamDef::integer("seed", 0, 0, std::numeric_limits<std::int64_t>::max()),
                 HyperparamDef::real("lr", 0.1, kTinyPositive, 1e6), HyperparamDef::integer("iters", 500, 1, 100000000)},
      .output = OutputShape::Static,
      .description = "logistic regression on static covariates and temporal summaries",
      .make = [](const Params& p) {
        return std::make_unique<LogisticLearner>(p.real("lr"), as_size(p.integer("iters")));
      },
      .load = [](const ojson& j, const Params&, const Registry&) { return FittedLogistic::load(j); },
  });
}

}  // namespace tempoframe::prediction
