#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "tempoframe/dataset.hpp"
#include "tempoframe/predictions.hpp"

namespace tempoframe {

/// Closed set of plugin categories. Clustering is reserved: no shipped plugin
/// uses it and the framework refuses to fit it.
enum class Category { Transform, Predictor, Survival, Treatment, Wrapper, Clustering };

std::string_view to_string(Category c) noexcept;
std::optional<Category> category_from_string(std::string_view text) noexcept;

/// What a Predictor-category plugin returns from predict.
enum class OutputShape { None, Static, Forecast, Survival, Counterfactual };

// --- hyperparameters --------------------------------------------------------

enum class ParamType { Real, Integer, Categorical, Boolean };

using ParamValue = std::variant<bool, std::int64_t, double, std::string>;
using ParamMap = std::map<std::string, ParamValue, std::less<>>;

struct HyperparamDef {
  std::string name;
  ParamType type = ParamType::Real;
  double lower = 0;  // inclusive bounds for Real / Integer
  double upper = 0;
  std::vector<std::string> choices;  // Categorical
  ParamValue default_value;

  static HyperparamDef real(std::string name, double def, double lo, double hi);
  static HyperparamDef integer(std::string name, std::int64_t def, std::int64_t lo, std::int64_t hi);
  static HyperparamDef boolean(std::string name, bool def);
  static HyperparamDef categorical(std::string name, std::string def, std::vector<std::string> choices);

  /// Coerces `value` to this parameter's type, or throws ParamOutOfBounds.
  ParamValue coerce(const ParamValue& value) const;
};

/// Ordered, name-unique parameter definitions whose defaults satisfy their bounds.
class HyperparamSchema {
 public:
  HyperparamSchema() = default;
  HyperparamSchema(std::initializer_list<HyperparamDef> defs);

  std::span<const HyperparamDef> defs() const noexcept { return defs_; }
  const HyperparamDef* find(std::string_view name) const;

 private:
  std::vector<HyperparamDef> defs_;
};

/// Fully resolved, validated parameter values.
class Params {
 public:
  Params() = default;
  /// Merges `overrides` over the schema defaults. Throws UnknownParam / ParamOutOfBounds.
  static Params resolve(const HyperparamSchema& schema, const ParamMap& overrides);

  double real(std::string_view name) const;
  std::int64_t integer(std::string_view name) const;
  bool boolean(std::string_view name) const;
  const std::string& choice(std::string_view name) const;
  const ParamMap& values() const noexcept { return values_; }

  bool operator==(const Params&) const = default;

 private:
  const ParamValue& get(std::string_view name) const;
  ParamMap values_;
};

nlohmann::ordered_json to_json(const ParamMap& params);
ParamMap param_map_from_json(const nlohmann::ordered_json& j);

// --- plugin implementation interface ----------------------------------------

class FittedEstimator;
class Registry;

/// Learned state of one plugin. Operations a category does not support keep
/// the throwing defaults.
class FittedModel {
 public:
  virtual ~FittedModel() = default;

  virtual Dataset transform(const Dataset& ds) const;
  virtual Predictions predict(const Dataset& ds) const;
  virtual Predictions predict_counterfactuals(const Dataset& ds, std::span<const CellValue> alternatives) const;

  /// Serializable learned state; the plugin's `load` must invert it exactly.
  virtual nlohmann::ordered_json state() const = 0;
};

/// Unfitted algorithm bound to resolved params.
class Learner {
 public:
  virtual ~Learner() = default;
  virtual std::shared_ptr<const FittedModel> fit(const Dataset& ds) const = 0;
};

using LearnerFactory = std::function<std::unique_ptr<Learner>(const Params&)>;
using StateLoader =
    std::function<std::shared_ptr<const FittedModel>(const nlohmann::ordered_json& state, const Params&, const Registry&)>;
using WrapperFactory = std::function<std::shared_ptr<const FittedModel>(const FittedEstimator& inner, const Params&)>;

struct EstimatorSpec {
  std::string name;  // `<area>.<name>`
  Category category = Category::Transform;
  HyperparamSchema schema;
  OutputShape output = OutputShape::None;
  std::string description;
  LearnerFactory make;       // all categories except Wrapper
  StateLoader load;          // null: state not serializable
  WrapperFactory wrap;       // Wrapper only
  std::set<Category> accepts;  // Wrapper only: accepted inner categories
};

// --- lifecycle objects ------------------------------------------------------

/// Unfitted estimator: a plugin (or pipeline) plus resolved parameters.
class Estimator {
 public:
  Estimator(std::string name, Category category, OutputShape output, Params params,
            std::shared_ptr<const Learner> learner);

  const std::string& name() const noexcept { return name_; }
  Category category() const noexcept { return category_; }
  OutputShape output() const noexcept { return output_; }
  const Params& params() const noexcept { return params_; }

  /// Checks the category's data requirements, then fits. Throws RequirementUnmet.
  FittedEstimator fit(const Dataset& ds) const;

 private:
  std::string name_;
  Category category_;
  OutputShape output_;
  Params params_;
  std::shared_ptr<const Learner> learner_;
};

/// Immutable fitted estimator. A default-constructed instance is unfitted and
/// every operation on it throws NotFitted.
class FittedEstimator {
 public:
  FittedEstimator() = default;
  FittedEstimator(std::string name, Category category, OutputShape output, Params params,
                  std::uint64_t fingerprint, std::shared_ptr<const FittedModel> model);

  bool fitted() const noexcept { return model_ != nullptr; }
  const std::string& name() const noexcept { return name_; }
  Category category() const noexcept { return category_; }
  OutputShape output() const noexcept { return output_; }
  const Params& params() const noexcept { return params_; }
  std::uint64_t fingerprint() const noexcept { return fingerprint_; }

  /// Category of the innermost non-wrapper estimator.
  Category effective_category() const;

  Dataset transform(const Dataset& ds) const;
  Predictions predict(const Dataset& ds) const;
  Predictions predict_counterfactuals(const Dataset& ds, std::span<const CellValue> alternatives) const;

  const FittedModel& model() const;

 private:
  void check_ready(const Dataset& ds) const;

  std::string name_;
  Category category_ = Category::Transform;
  OutputShape output_ = OutputShape::None;
  Params params_;
  std::uint64_t fingerprint_ = 0;
  std::shared_ptr<const FittedModel> model_;
};

/// Base of wrapper models: holds the encapsulated estimator and delegates
/// prediction to it unchanged.
class WrappedModelBase : public FittedModel {
 public:
  explicit WrappedModelBase(FittedEstimator inner) : inner_(std::move(inner)) {}

  const FittedEstimator& inner() const noexcept { return inner_; }

  Predictions predict(const Dataset& ds) const override { return inner_.predict(ds); }
  Predictions predict_counterfactuals(const Dataset& ds, std::span<const CellValue> alternatives) const override {
    return inner_.predict_counterfactuals(ds, alternatives);
  }

 private:
  FittedEstimator inner_;
};

struct PipelineStep {
  std::string plugin;
  ParamMap params;
};

/// Name -> spec registry. Populated during a startup phase, read-only after.
class Registry {
 public:
  /// Throws DuplicatePlugin; also rejects malformed names and specs.
  void register_plugin(EstimatorSpec spec);

  const EstimatorSpec& spec(std::string_view name) const;  // throws UnknownPlugin
  bool contains(std::string_view name) const;

  /// Names in registration order, optionally filtered by category.
  std::vector<std::string> list(std::optional<Category> category = std::nullopt) const;

  Estimator create(std::string_view name, const ParamMap& params = {}) const;

  /// Interior steps must be Transforms. Throws BadPipelineShape.
  Estimator build_pipeline(std::span<const PipelineStep> steps) const;

  /// Throws IncompatibleInner when `wrapper_name` is not a Wrapper plugin or
  /// does not accept the inner estimator's effective category.
  FittedEstimator wrap(const FittedEstimator& inner, std::string_view wrapper_name,
                       const ParamMap& params = {}) const;

  std::string save_fitted(const FittedEstimator& fitted) const;
  /// Throws CorruptBlob / UnknownPluginInBlob.
  FittedEstimator load_fitted(std::string_view blob) const;

  nlohmann::ordered_json fitted_to_json(const FittedEstimator& fitted) const;
  FittedEstimator fitted_from_json(const nlohmann::ordered_json& j) const;

 private:
  std::vector<std::shared_ptr<const EstimatorSpec>> specs_;
};

/// JSON form of a fitted estimator (plugin, params, fingerprint, state).
/// Wrapper states embed their inner estimator through this.
nlohmann::ordered_json fitted_state_json(const FittedEstimator& fitted);

/// The registry holding every shipped plugin.
const Registry& builtin_registry();

/// Registers every shipped plugin into `registry`.
void register_builtin_plugins(Registry& registry);

}  // namespace tempoframe
