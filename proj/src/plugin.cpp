#include "tempoframe/plugin.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "tempoframe/error.hpp"

namespace tempoframe {

using ojson = nlohmann::ordered_json;

std::string_view to_string(Category c) noexcept {
  switch (c) {
    case Category::Transform: return "transform";
    case Category::Predictor: return "predictor";
    case Category::Survival: return "survival";
    case Category::Treatment: return "treatment";
    case Category::Wrapper: return "wrapper";
    case Category::Clustering: return "clustering";
  }
  return "transform";
}

std::optional<Category> category_from_string(std::string_view text) noexcept {
  for (Category c : {Category::Transform, Category::Predictor, Category::Survival, Category::Treatment,
                     Category::Wrapper, Category::Clustering}) {
    if (to_string(c) == text) return c;
  }
  return std::nullopt;
}

namespace {

std::string_view to_string(OutputShape s) {
  switch (s) {
    case OutputShape::None: return "none";
    case OutputShape::Static: return "static";
    case OutputShape::Forecast: return "forecast";
    case OutputShape::Survival: return "survival";
    case OutputShape::Counterfactual: return "counterfactual";
  }
  return "none";
}

OutputShape output_from_string(std::string_view s) {
  for (OutputShape o : {OutputShape::None, OutputShape::Static, OutputShape::Forecast, OutputShape::Survival,
                        OutputShape::Counterfactual}) {
    if (to_string(o) == s) return o;
  }
  fail(ErrorCode::CorruptBlob, "unknown output shape '" + std::string(s) + "'");
}

std::string describe(const ParamValue& v) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, bool>) {
          return x ? "true" : "false";
        } else if constexpr (std::is_same_v<T, std::string>) {
          return "'" + x + "'";
        } else {
          return std::to_string(x);
        }
      },
      v);
}

}  // namespace

// --- hyperparameters --------------------------------------------------------

HyperparamDef HyperparamDef::real(std::string name, double def, double lo, double hi) {
  return {std::move(name), ParamType::Real, lo, hi, {}, def};
}

HyperparamDef HyperparamDef::integer(std::string name, std::int64_t def, std::int64_t lo, std::int64_t hi) {
  return {std::move(name), ParamType::Integer, static_cast<double>(lo), static_cast<double>(hi), {}, def};
}

HyperparamDef HyperparamDef::boolean(std::string name, bool def) {
  return {std::move(name), ParamType::Boolean, 0, 0, {}, def};
}

HyperparamDef HyperparamDef::categorical(std::string name, std::string def, std::vector<std::string> choices) {
  return {std::move(name), ParamType::Categorical, 0, 0, std::move(choices), std::move(def)};
}

ParamValue HyperparamDef::coerce(const ParamValue& value) const {
  auto out_of_bounds = [&](const std::string& why) -> ParamValue {
    fail(ErrorCode::ParamOutOfBounds, "parameter '" + name + "' = " + describe(value) + ": " + why);
  };
  switch (type) {
    case ParamType::Real: {
      double v;
      if (const auto* d = std::get_if<double>(&value)) {
        v = *d;
      } else if (const auto* i = std::get_if<std::int64_t>(&value)) {
        v = static_cast<double>(*i);
      } else {
        return out_of_bounds("expected a real number");
      }
      if (!std::isfinite(v) || v < lower || v > upper) {
        return out_of_bounds("outside [" + std::to_string(lower) + ", " + std::to_string(upper) + "]");
      }
      return v;
    }
    case ParamType::Integer: {
      std::int64_t v;
      if (const auto* i = std::get_if<std::int64_t>(&value)) {
        v = *i;
      } else if (const auto* d = std::get_if<double>(&value); d && std::floor(*d) == *d && std::abs(*d) < 9e15) {
        v = static_cast<std::int64_t>(*d);
      } else {
        return out_of_bounds("expected an integer");
      }
      if (static_cast<double>(v) < lower || static_cast<double>(v) > upper) {
        return out_of_bounds("outside [" + std::to_string(static_cast<std::int64_t>(lower)) + ", " +
                             std::to_string(static_cast<std::int64_t>(upper)) + "]");
      }
      return v;
    }
    case ParamType::Boolean:
      if (!std::holds_alternative<bool>(value)) return out_of_bounds("expected true or false");
      return value;
    case ParamType::Categorical: {
      const auto* s = std::get_if<std::string>(&value);
      if (!s || std::find(choices.begin(), choices.end(), *s) == choices.end()) {
        return out_of_bounds("not one of the allowed choices");
      }
      return value;
    }
  }
  return value;
}

HyperparamSchema::HyperparamSchema(std::initializer_list<HyperparamDef> defs) : defs_(defs) {
  for (std::size_t k = 0; k < defs_.size(); ++k) {
    for (std::size_t j = 0; j < k; ++j) {
      if (defs_[j].name == defs_[k].name) fail(ErrorCode::InvalidSpec, "duplicate parameter '" + defs_[k].name + "'");
    }
    (void)defs_[k].coerce(defs_[k].default_value);
  }
}

const HyperparamDef* HyperparamSchema::find(std::string_view name) const {
  for (const auto& d : defs_) {
    if (d.name == name) return &d;
  }
  return nullptr;
}

Params Params::resolve(const HyperparamSchema& schema, const ParamMap& overrides) {
  Params p;
  for (const auto& d : schema.defs()) p.values_[d.name] = d.default_value;
  for (const auto& [name, value] : overrides) {
    const auto* def = schema.find(name);
    if (!def) fail(ErrorCode::UnknownParam, "unknown parameter '" + name + "'");
    p.values_[name] = def->coerce(value);
  }
  return p;
}

const ParamValue& Params::get(std::string_view name) const {
  auto it = values_.find(name);
  if (it == values_.end()) fail(ErrorCode::UnknownParam, "parameter '" + std::string(name) + "' is not defined");
  return it->second;
}

double Params::real(std::string_view name) const { return std::get<double>(get(name)); }
std::int64_t Params::integer(std::string_view name) const { return std::get<std::int64_t>(get(name)); }
bool Params::boolean(std::string_view name) const { return std::get<bool>(get(name)); }
const std::string& Params::choice(std::string_view name) const { return std::get<std::string>(get(name)); }

ojson to_json(const ParamMap& params) {
  ojson j = ojson::object();
  for (const auto& [name, value] : params) {
    std::visit([&](const auto& v) { j[name] = v; }, value);
  }
  return j;
}

ParamMap param_map_from_json(const ojson& j) {
  if (!j.is_object()) fail(ErrorCode::ConfigError, "parameters must be an object");
  ParamMap out;
  for (const auto& [name, v] : j.items()) {
    if (v.is_boolean()) {
      out[name] = v.get<bool>();
    } else if (v.is_number_integer()) {
      out[name] = v.get<std::int64_t>();
    } else if (v.is_number_float()) {
      out[name] = v.get<double>();
    } else if (v.is_string()) {
      out[name] = v.get<std::string>();
    } else {
      fail(ErrorCode::ConfigError, "parameter '" + name + "' must be a scalar");
    }
  }
  return out;
}

// --- FittedModel defaults ---------------------------------------------------

Dataset FittedModel::transform(const Dataset&) const {
  fail(ErrorCode::NotATransform, "this estimator does not transform datasets");
}

Predictions FittedModel::predict(const Dataset&) const {
  fail(ErrorCode::NotAPredictor, "this estimator does not predict");
}

Predictions FittedModel::predict_counterfactuals(const Dataset&, std::span<const CellValue>) const {
  fail(ErrorCode::RequirementUnmet, "this estimator does not predict counterfactuals", "not_a_treatment_model");
}

// --- lifecycle --------------------------------------------------------------

namespace {

void check_requirements(Category c, const Dataset& ds) {
  switch (c) {
    case Category::Transform:
      return;
    case Category::Predictor:
      if (ds.features(Role::Target).empty()) fail(ErrorCode::RequirementUnmet, "no target feature", "missing_target");
      return;
    case Category::Survival:
      if (ds.features(Role::Target, Modality::Event).empty()) {
        fail(ErrorCode::RequirementUnmet, "survival estimators need an event target", "missing_event_target");
      }
      return;
    case Category::Treatment:
      if (ds.features(Role::Treatment).empty()) {
        fail(ErrorCode::RequirementUnmet, "no treatment feature", "missing_treatment");
      }
      if (ds.features(Role::Target).empty()) fail(ErrorCode::RequirementUnmet, "no target feature", "missing_target");
      return;
    case Category::Wrapper:
      fail(ErrorCode::RequirementUnmet, "wrappers are applied to fitted estimators, not fitted", "wrapper_needs_inner");
    case Category::Clustering:
      fail(ErrorCode::RequirementUnmet, "clustering is not available", "clustering_unavailable");
  }
}

}  // namespace

Estimator::Estimator(std::string name, Category category, OutputShape output, Params params,
                     std::shared_ptr<const Learner> learner)
    : name_(std::move(name)),
      category_(category),
      output_(output),
      params_(std::move(params)),
      learner_(std::move(learner)) {}

FittedEstimator Estimator::fit(const Dataset& ds) const {
  check_requirements(category_, ds);
  return FittedEstimator(name_, category_, output_, params_, fingerprint(ds), learner_->fit(ds));
}

FittedEstimator::FittedEstimator(std::string name, Category category, OutputShape output, Params params,
                                 std::uint64_t fp, std::shared_ptr<const FittedModel> model)
    : name_(std::move(name)),
      category_(category),
      output_(output),
      params_(std::move(params)),
      fingerprint_(fp),
      model_(std::move(model)) {}

const FittedModel& FittedEstimator::model() const {
  if (!model_) fail(ErrorCode::NotFitted, "estimator has not been fitted");
  return *model_;
}

void FittedEstimator::check_ready(const Dataset& ds) const {
  if (!model_) fail(ErrorCode::NotFitted, "estimator has not been fitted");
  if (tempoframe::fingerprint(ds) != fingerprint_) {
    fail(ErrorCode::FingerprintMismatch,
         "dataset features differ from those seen when '" + name_ + "' was fitted");
  }
}

Category FittedEstimator::effective_category() const {
  if (category_ != Category::Wrapper) return category_;
  // Wrapper models expose their inner estimator through the wrapper spec's model; see interpret.
  const auto* w = dynamic_cast<const WrappedModelBase*>(model_.get());
  return w ? w->inner().effective_category() : category_;
}

Dataset FittedEstimator::transform(const Dataset& ds) const {
  if (!model_) fail(ErrorCode::NotFitted, "estimator has not been fitted");
  if (category_ != Category::Transform) {
    fail(ErrorCode::NotATransform, "'" + name_ + "' is a " + std::string(to_string(category_)) + ", not a transform");
  }
  check_ready(ds);
  return model_->transform(ds);
}

Predictions FittedEstimator::predict(const Dataset& ds) const {
  if (!model_) fail(ErrorCode::NotFitted, "estimator has not been fitted");
  if (category_ == Category::Transform) fail(ErrorCode::NotAPredictor, "'" + name_ + "' is a transform");
  check_ready(ds);
  return model_->predict(ds);
}

Predictions FittedEstimator::predict_counterfactuals(const Dataset& ds, std::span<const CellValue> alternatives) const {
  if (!model_) fail(ErrorCode::NotFitted, "estimator has not been fitted");
  if (effective_category() != Category::Treatment) {
    fail(ErrorCode::RequirementUnmet, "'" + name_ + "' is not a treatment-effect estimator", "not_a_treatment_model");
  }
  if (alternatives.empty()) fail(ErrorCode::InvalidAlternative, "no alternative treatment assignments given");
  check_ready(ds);
  return model_->predict_counterfactuals(ds, alternatives);
}

// --- pipelines --------------------------------------------------------------

namespace {

class FittedPipeline final : public FittedModel {
 public:
  explicit FittedPipeline(std::vector<FittedEstimator> steps) : steps_(std::move(steps)) {}

  Dataset transform(const Dataset& ds) const override { return apply(ds, steps_.size()); }

  Predictions predict(const Dataset& ds) const override {
    const Dataset input = apply(ds, steps_.size() - 1);
    try {
      return steps_.back().predict(input);
    } catch (const Error& e) {
      throw e.with_context(context(steps_.size() - 1));
    }
  }

  Predictions predict_counterfactuals(const Dataset& ds, std::span<const CellValue> alternatives) const override {
    const Dataset input = apply(ds, steps_.size() - 1);
    try {
      return steps_.back().predict_counterfactuals(input, alternatives);
    } catch (const Error& e) {
      throw e.with_context(context(steps_.size() - 1));
    }
  }

  ojson state() const override {
    ojson steps = ojson::array();
    for (const auto& s : steps_) steps.push_back(fitted_state_json(s));
    return {{"steps", steps}};
  }

  const std::vector<FittedEstimator>& steps() const { return steps_; }

 private:
  std::string context(std::size_t k) const { return "step " + std::to_string(k) + " '" + steps_[k].name() + "'"; }

  // Applies the first `count` steps as transforms.
  Dataset apply(const Dataset& ds, std::size_t count) const {
    Dataset running = ds;
    for (std::size_t k = 0; k < count; ++k) {
      try {
        running = steps_[k].transform(running);
      } catch (const Error& e) {
        throw e.with_context(context(k));
      }
    }
    return running;
  }

  std::vector<FittedEstimator> steps_;
};

class PipelineLearner final : public Learner {
 public:
  explicit PipelineLearner(std::vector<Estimator> steps) : steps_(std::move(steps)) {}

  std::shared_ptr<const FittedModel> fit(const Dataset& ds) const override {
    std::vector<FittedEstimator> fitted;
    Dataset running = ds;
    for (std::size_t k = 0; k < steps_.size(); ++k) {
      try {
        fitted.push_back(steps_[k].fit(running));
        if (k + 1 < steps_.size()) running = fitted.back().transform(running);
      } catch (const Error& e) {
        throw e.with_context("step " + std::to_string(k) + " '" + steps_[k].name() + "'");
      }
    }
    return std::make_shared<FittedPipeline>(std::move(fitted));
  }

 private:
  std::vector<Estimator> steps_;
};

constexpr const char* kPipelineName = "pipeline";
constexpr const char* kBlobMagic = "tempoframe-fitted/1 ";

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

bool valid_plugin_name(std::string_view name) {
  const auto dot = name.find('.');
  if (dot == std::string_view::npos || dot == 0 || dot + 1 == name.size()) return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '.';
  });
}

}  // namespace

ojson fitted_state_json(const FittedEstimator& f) {
  ojson j;
  j["plugin"] = f.name();
  j["category"] = std::string(to_string(f.category()));
  j["output"] = std::string(to_string(f.output()));
  j["params"] = to_json(f.params().values());
  j["fingerprint"] = hex64(f.fingerprint());
  j["state"] = f.model().state();
  return j;
}

// --- registry ---------------------------------------------------------------

void Registry::register_plugin(EstimatorSpec spec) {
  if (!valid_plugin_name(spec.name)) {
    fail(ErrorCode::InvalidSpec, "plugin name '" + spec.name + "' must look like <area>.<name>");
  }
  if (contains(spec.name)) fail(ErrorCode::DuplicatePlugin, "plugin '" + spec.name + "' is already registered");
  if (spec.category == Category::Clustering) fail(ErrorCode::InvalidSpec, "the clustering category is reserved");
  if (spec.category == Category::Wrapper ? !spec.wrap : !spec.make) {
    fail(ErrorCode::InvalidSpec, "plugin '" + spec.name + "' has no factory");
  }
  specs_.push_back(std::make_shared<const EstimatorSpec>(std::move(spec)));
}

bool Registry::contains(std::string_view name) const {
  return std::any_of(specs_.begin(), specs_.end(), [&](const auto& s) { return s->name == name; });
}

const EstimatorSpec& Registry::spec(std::string_view name) const {
  for (const auto& s : specs_) {
    if (s->name == name) return *s;
  }
  fail(ErrorCode::UnknownPlugin, "no plugin named '" + std::string(name) + "'");
}

std::vector<std::string> Registry::list(std::optional<Category> category) const {
  std::vector<std::string> out;
  for (const auto& s : specs_) {
    if (!category || s->category == *category) out.push_back(s->name);
  }
  return out;
}

Estimator Registry::create(std::string_view name, const ParamMap& params) const {
  const auto& s = spec(name);
  if (s.category == Category::Wrapper) {
    fail(ErrorCode::RequirementUnmet, "'" + s.name + "' wraps a fitted estimator; use wrap()", "wrapper_needs_inner");
  }
  Params resolved = Params::resolve(s.schema, params);
  std::shared_ptr<const Learner> learner = s.make(resolved);
  return Estimator(s.name, s.category, s.output, std::move(resolved), std::move(learner));
}

Estimator Registry::build_pipeline(std::span<const PipelineStep> steps) const {
  if (steps.empty()) fail(ErrorCode::BadPipelineShape, "a pipeline needs at least one step");
  std::vector<Estimator> estimators;
  for (std::size_t k = 0; k < steps.size(); ++k) {
    const auto& s = spec(steps[k].plugin);
    if (k + 1 < steps.size() && s.category != Category::Transform) {
      fail(ErrorCode::BadPipelineShape, "step " + std::to_string(k) + " ('" + s.name + "') is a " +
                                            std::string(to_string(s.category)) + "; only the last step may predict");
    }
    if (s.category == Category::Wrapper) {
      fail(ErrorCode::BadPipelineShape, "wrapper '" + s.name + "' cannot be a pipeline step");
    }
    estimators.push_back(create(steps[k].plugin, steps[k].params));
  }
  const Category category = estimators.back().category();
  const OutputShape output = estimators.back().output();
  return Estimator(kPipelineName, category, output, Params{},
                   std::make_shared<PipelineLearner>(std::move(estimators)));
}

FittedEstimator Registry::wrap(const FittedEstimator& inner, std::string_view wrapper_name,
                               const ParamMap& params) const {
  const auto& s = spec(wrapper_name);
  if (s.category != Category::Wrapper) {
    fail(ErrorCode::IncompatibleInner, "'" + s.name + "' is not a wrapper plugin");
  }
  if (!inner.fitted()) fail(ErrorCode::NotFitted, "cannot wrap an unfitted estimator");
  const Category inner_category = inner.effective_category();
  if (!s.accepts.contains(inner_category)) {
    fail(ErrorCode::IncompatibleInner,
         "'" + s.name + "' does not accept " + std::string(to_string(inner_category)) + " estimators");
  }
  Params resolved = Params::resolve(s.schema, params);
  auto model = s.wrap(inner, resolved);
  return FittedEstimator(s.name, Category::Wrapper, inner.output(), std::move(resolved), inner.fingerprint(),
                         std::move(model));
}

ojson Registry::fitted_to_json(const FittedEstimator& fitted) const {
  if (!fitted.fitted()) fail(ErrorCode::NotFitted, "cannot save an unfitted estimator");
  if (fitted.name() != kPipelineName && !spec(fitted.name()).load) {
    fail(ErrorCode::RequirementUnmet, "plugin '" + fitted.name() + "' has no serializable state", "not_serializable");
  }
  return fitted_state_json(fitted);
}

FittedEstimator Registry::fitted_from_json(const ojson& j) const {
  try {
    const auto name = j.at("plugin").get<std::string>();
    const auto fp = std::stoull(j.at("fingerprint").get<std::string>(), nullptr, 16);
    const auto category_name = j.at("category").get<std::string>();
    const auto output = output_from_string(j.at("output").get<std::string>());
    if (name == kPipelineName) {
      std::vector<FittedEstimator> steps;
      for (const auto& step : j.at("state").at("steps")) steps.push_back(fitted_from_json(step));
      if (steps.empty()) fail(ErrorCode::CorruptBlob, "pipeline blob has no steps");
      const auto category = category_from_string(category_name);
      if (!category) fail(ErrorCode::CorruptBlob, "unknown category '" + category_name + "'");
      return FittedEstimator(kPipelineName, *category, output, Params{}, fp,
                             std::make_shared<FittedPipeline>(std::move(steps)));
    }
    if (!contains(name)) fail(ErrorCode::UnknownPluginInBlob, "blob names unregistered plugin '" + name + "'");
    const auto& s = spec(name);
    if (!s.load) fail(ErrorCode::CorruptBlob, "plugin '" + name + "' cannot load state");
    Params params = Params::resolve(s.schema, param_map_from_json(j.at("params")));
    auto model = s.load(j.at("state"), params, *this);
    return FittedEstimator(s.name, s.category, output, std::move(params), fp, std::move(model));
  } catch (const ojson::exception& e) {
    fail(ErrorCode::CorruptBlob, std::string("malformed fitted-estimator blob: ") + e.what());
  } catch (const std::invalid_argument& e) {
    fail(ErrorCode::CorruptBlob, "malformed fingerprint in blob");
  }
}

std::string Registry::save_fitted(const FittedEstimator& fitted) const {
  const std::string body = fitted_to_json(fitted).dump();
  return kBlobMagic + hex64(fnv1a(body)) + "\n" + body;
}

FittedEstimator Registry::load_fitted(std::string_view blob) const {
  const std::string_view magic = kBlobMagic;
  if (blob.size() < magic.size() + 17 || blob.substr(0, magic.size()) != magic || blob[magic.size() + 16] != '\n') {
    fail(ErrorCode::CorruptBlob, "not a fitted-estimator blob");
  }
  const std::string_view checksum = blob.substr(magic.size(), 16);
  const std::string_view body = blob.substr(magic.size() + 17);
  if (hex64(fnv1a(body)) != checksum) fail(ErrorCode::CorruptBlob, "blob checksum mismatch (truncated or altered)");
  ojson j;
  try {
    j = ojson::parse(body);
  } catch (const ojson::exception& e) {
    fail(ErrorCode::CorruptBlob, e.what());
  }
  return fitted_from_json(j);
}

const Registry& builtin_registry() {
  static const Registry registry = [] {
    Registry r;
    register_builtin_plugins(r);
    return r;
  }();
  return registry;
}

}  // namespace tempoframe
