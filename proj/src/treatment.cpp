#include "tempoframe/treatment.hpp"

#include <cmath>
#include <limits>

#include "json_util.hpp"
#include "tempoframe/error.hpp"
#include "tempoframe/features.hpp"
#include "tempoframe/plugin.hpp"
#include "tempoframe/rng.hpp"

namespace tempoframe::treatment {

using detail::ojson;

double ArmModel::predict(const Eigen::RowVectorXd& x) const {
  double s = intercept;
  for (Eigen::Index k = 0; k < weights.size(); ++k) s += x[k] * weights[k];
  return s;
}

ArmModel fit_arm(const Eigen::MatrixXd& x, std::span<const double> y, double ridge) {
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  Eigen::MatrixXd a(n, d + 1);
  a.col(0).setOnes();
  a.rightCols(d) = x;
  Eigen::MatrixXd ata = a.transpose() * a;
  for (Eigen::Index k = 1; k <= d; ++k) ata(k, k) += ridge;
  const Eigen::VectorXd aty = a.transpose() * Eigen::Map<const Eigen::VectorXd>(y.data(), n);
  const Eigen::VectorXd b = ata.ldlt().solve(aty);
  return {b[0], b.tail(d)};
}

int arm_of(const ValueKind& kind, const CellValue& v) {
  if (!v) fail(ErrorCode::MissingInFeatures, "treatment value is Missing");
  if (kind.tag() == KindTag::Categorical) {
    if (kind.categories().size() != 2) fail(ErrorCode::NonBinaryTreatment, "treatment has more than two categories");
    const auto* label = std::get_if<std::string>(&*v);
    auto k = label ? kind.category_index(*label) : std::nullopt;
    if (!k) fail(ErrorCode::NonBinaryTreatment, "'" + format_cell(v) + "' is not a treatment category");
    return static_cast<int>(*k);
  }
  if (kind.tag() == KindTag::Integer) {
    const auto* i = std::get_if<std::int64_t>(&*v);
    if (i && (*i == 0 || *i == 1)) return static_cast<int>(*i);
  }
  fail(ErrorCode::NonBinaryTreatment, "treatment value " + format_cell(v) + " is not 0 or 1");
}

namespace {

struct TreatmentColumn {
  const StaticSamples* samples;
  std::size_t index;
  const FeatureSpec* spec;
};

TreatmentColumn treatment_column(const Dataset& ds) {
  const auto refs = ds.features(Role::Treatment);
  if (refs.empty()) fail(ErrorCode::RequirementUnmet, "no treatment feature", "missing_treatment");
  if (refs.size() > 1 || refs.front().modality != Modality::Static) {
    fail(ErrorCode::NonBinaryTreatment, "exactly one static binary treatment feature is supported");
  }
  const auto& spec = *refs.front().spec;
  if (spec.kind.tag() == KindTag::Continuous ||
      (spec.kind.tag() == KindTag::Categorical && spec.kind.categories().size() != 2)) {
    fail(ErrorCode::NonBinaryTreatment, "treatment '" + spec.id + "' is not binary");
  }
  return {&*ds.static_samples(), refs.front().index, &spec};
}

const FeatureSpec& outcome_target(const Dataset& ds) {
  const auto all = ds.features(Role::Target);
  const auto refs = ds.features(Role::Target, Modality::Static);
  if (all.size() > 1) fail(ErrorCode::MultipleTargets, "the T-learner supports exactly one target");
  if (refs.empty()) fail(ErrorCode::RequirementUnmet, "the T-learner needs a static target", "missing_static_target");
  if (!refs.front().spec->kind.is_numeric()) {
    fail(ErrorCode::RequirementUnmet, "the outcome must be numeric", "non_numeric_feature");
  }
  return *refs.front().spec;
}

Eigen::MatrixXd covariates(const TLearnerModel& model, const Dataset& ds) {
  auto fm = featurize(ds);
  if (fm.names != model.features) {
    fail(ErrorCode::FingerprintMismatch, "query covariates differ from the features the T-learner was fitted on");
  }
  return std::move(fm.values);
}

}  // namespace

TLearnerModel fit_t_learner(const Dataset& ds, double ridge) {
  const auto tc = treatment_column(ds);
  const auto& target = outcome_target(ds);
  const std::size_t yf = *tc.samples->feature_index(target.id);
  auto fm = featurize(ds);
  const auto n = static_cast<std::size_t>(fm.values.rows());
  const auto d = fm.values.cols();

  std::vector<Eigen::Index> rows[2];
  std::vector<double> ys[2];
  for (std::size_t i = 0; i < n; ++i) {
    const int arm = arm_of(tc.spec->kind, tc.samples->at(i, tc.index));
    const auto& y = tc.samples->at(i, yf);
    if (!y) fail(ErrorCode::MissingInTarget, "sample '" + ds.sample_ids()[i] + "' has no outcome");
    rows[arm].push_back(static_cast<Eigen::Index>(i));
    ys[arm].push_back(as_double(*y));
  }

  TLearnerModel model{tc.spec->id, tc.spec->kind, target.id, fm.names, {}};
  for (int arm = 0; arm < 2; ++arm) {
    if (static_cast<Eigen::Index>(rows[arm].size()) < d + 1) {
      fail(ErrorCode::ArmTooSmall, "arm " + std::to_string(arm) + " has " + std::to_string(rows[arm].size()) +
                                       " samples; at least " + std::to_string(d + 1) + " are needed");
    }
    model.arms[arm] = fit_arm(fm.values(rows[arm], Eigen::all), ys[arm], ridge);
  }
  return model;
}

StaticOutput predict_factual(const TLearnerModel& model, const Dataset& ds) {
  const auto tc = treatment_column(ds);
  if (tc.spec->id != model.treatment) fail(ErrorCode::FingerprintMismatch, "treatment feature differs from training");
  const auto x = covariates(model, ds);
  std::vector<CellValue> cells;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const int arm = arm_of(tc.spec->kind, tc.samples->at(static_cast<std::size_t>(i), tc.index));
    cells.push_back(real(model.arms[arm].predict(x.row(i))));
  }
  const auto ids = ds.sample_ids();
  return {StaticSamples({ids.begin(), ids.end()}, {{model.target, ValueKind::continuous()}}, std::move(cells))};
}

CounterfactualOutput predict_counterfactuals(const TLearnerModel& model, const Dataset& ds,
                                             std::span<const CellValue> alternatives) {
  if (alternatives.empty()) fail(ErrorCode::InvalidAlternative, "no alternative treatment assignments given");
  std::vector<int> arms;
  for (const auto& a : alternatives) {
    try {
      arms.push_back(arm_of(model.treatment_kind, a));
    } catch (const Error&) {
      fail(ErrorCode::InvalidAlternative, "'" + format_cell(a) + "' is not a value of treatment '" + model.treatment + "'");
    }
  }
  const auto x = covariates(model, ds);
  const auto ids = ds.sample_ids();
  CounterfactualOutput out{{ids.begin(), ids.end()}, {alternatives.begin(), alternatives.end()}, {}};
  for (int arm : arms) {
    std::vector<CellValue> cells;
    for (Eigen::Index i = 0; i < x.rows(); ++i) cells.push_back(real(model.arms[arm].predict(x.row(i))));
    out.outcomes.emplace_back(out.sample_ids, std::vector<FeatureSpec>{{model.target, ValueKind::continuous()}},
                              std::move(cells));
  }
  return out;
}

std::vector<double> effect_estimates(const CounterfactualOutput& out, const ValueKind& treatment_kind) {
  const StaticSamples* by_arm[2] = {nullptr, nullptr};
  for (std::size_t a = 0; a < out.alternatives.size(); ++a) {
    by_arm[arm_of(treatment_kind, out.alternatives[a])] = &out.outcomes[a];
  }
  if (!by_arm[0] || !by_arm[1]) fail(ErrorCode::InvalidAlternative, "effects need predictions under both arms");
  std::vector<double> tau;
  for (std::size_t i = 0; i < out.sample_ids.size(); ++i) {
    tau.push_back(as_double(*by_arm[1]->at(i, 0)) - as_double(*by_arm[0]->at(i, 0)));
  }
  return tau;
}

double pehe(std::span<const double> estimates, std::span<const double> truth) {
  if (estimates.size() != truth.size() || estimates.empty()) {
    fail(ErrorCode::AlignmentError, "effect estimates and truth must be non-empty and equal in length");
  }
  double sum = 0;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    const double e = estimates[i] - truth[i];
    sum += e * e;
  }
  return std::sqrt(sum / static_cast<double>(estimates.size()));
}

SynthGroundTruth synth_treatment_data(const SynthSpec& spec) {
  if (spec.n < 4) fail(ErrorCode::InvalidSpec, "synthetic data needs n >= 4");
  if (spec.dims < 1) fail(ErrorCode::InvalidSpec, "synthetic data needs at least one covariate");
  if (!(spec.sigma >= 0) || !std::isfinite(spec.sigma)) fail(ErrorCode::InvalidSpec, "noise sigma must be >= 0");
  if (!spec.gamma.empty() && spec.gamma.size() != spec.dims) {
    fail(ErrorCode::InvalidSpec, "linear effect needs one coefficient per covariate");
  }

  // Draw order is part of the contract: w, then per sample x, a, noise.
  Lcg rng(spec.seed);
  std::vector<double> w(spec.dims);
  for (auto& wk : w) wk = rng.uniform(-1, 1);

  const std::size_t width = std::to_string(spec.n - 1).size();
  std::vector<std::string> ids;
  std::vector<FeatureSpec> specs;
  for (std::size_t k = 0; k < spec.dims; ++k) specs.push_back({"x" + std::to_string(k + 1), ValueKind::continuous()});
  specs.push_back({"a", ValueKind::integer()});
  specs.push_back({"y", ValueKind::continuous()});

  SynthGroundTruth out;
  std::vector<CellValue> cells;
  std::vector<double> x(spec.dims);
  for (std::size_t i = 0; i < spec.n; ++i) {
    std::string num = std::to_string(i);
    ids.push_back("s" + std::string(width - num.size(), '0') + num);
    for (auto& xk : x) xk = rng.uniform(-1, 1);
    const int a = rng.uniform() < 0.5 ? 0 : 1;
    const double noise = rng.normal();
    double f = 0;
    double tau = spec.gamma.empty() ? spec.tau0 : 0.0;
    for (std::size_t k = 0; k < spec.dims; ++k) {
      f += x[k] * w[k];
      if (!spec.gamma.empty()) tau += spec.gamma[k] * x[k];
    }
    out.tau.push_back(tau);
    out.mu0.push_back(f);
    out.mu1.push_back(f + tau);
    for (double xk : x) cells.push_back(real(xk));
    cells.push_back(integer(a));
    cells.push_back(real(f + tau * a + spec.sigma * noise));
  }
  std::vector<std::pair<std::string, Role>> roles;
  for (std::size_t k = 0; k < spec.dims; ++k) roles.emplace_back(specs[k].id, Role::Covariate);
  roles.emplace_back("a", Role::Treatment);
  roles.emplace_back("y", Role::Target);
  out.data = assemble_dataset(StaticSamples(std::move(ids), std::move(specs), std::move(cells)), std::nullopt,
                              std::nullopt, RoleMap(roles));
  return out;
}

// --- plugin -----------------------------------------------------------------

namespace {

ojson arm_to_json(const ArmModel& m) {
  return {{"intercept", m.intercept}, {"weights", std::vector<double>(m.weights.data(), m.weights.data() + m.weights.size())}};
}

ArmModel arm_from_json(const ojson& j) {
  const auto w = j.at("weights").get<std::vector<double>>();
  return {j.at("intercept").get<double>(), Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()))};
}

class FittedTLearner final : public FittedModel {
 public:
  explicit FittedTLearner(TLearnerModel model) : model_(std::move(model)) {}
  Predictions predict(const Dataset& ds) const override { return predict_factual(model_, ds); }
  Predictions predict_counterfactuals(const Dataset& ds, std::span<const CellValue> alternatives) const override {
    return treatment::predict_counterfactuals(model_, ds, alternatives);
  }
  ojson state() const override {
    ojson kind = {{"kind", std::string(to_string(model_.treatment_kind.tag()))}};
    if (model_.treatment_kind.tag() == KindTag::Categorical) kind["categories"] = model_.treatment_kind.categories();
    return {{"treatment", model_.treatment},     {"treatment_kind", kind},
            {"target", model_.target},           {"features", model_.features},
            {"arm0", arm_to_json(model_.arms[0])}, {"arm1", arm_to_json(model_.arms[1])}};
  }
  static std::shared_ptr<const FittedModel> load(const ojson& j) {
    TLearnerModel m;
    m.treatment = j.at("treatment").get<std::string>();
    const auto& kind = j.at("treatment_kind");
    m.treatment_kind = kind.at("kind").get<std::string>() == "categorical"
                           ? ValueKind::categorical(kind.at("categories").get<std::vector<std::string>>())
                           : ValueKind::integer();
    m.target = j.at("target").get<std::string>();
    m.features = j.at("features").get<std::vector<std::string>>();
    m.arms[0] = arm_from_json(j.at("arm0"));
    m.arms[1] = arm_from_json(j.at("arm1"));
    return std::make_shared<FittedTLearner>(std::move(m));
  }

 private:
  TLearnerModel model_;
};

class TLearnerLearner final : public Learner {
 public:
  explicit TLearnerLearner(double ridge) : ridge_(ridge) {}
  std::shared_ptr<const FittedModel> fit(const Dataset& ds) const override {
    return std::make_shared<FittedTLearner>(fit_t_learner(ds, ridge_));
  }

 private:
  double ridge_;
};

}  // namespace

void register_plugins(Registry& registry) {
  registry.register_plugin({
      .name = "treatment.t_learner",
      .category = Category::Treatment,
      .schema = {HyperparamDef::integer("seed", 0, 0, std::numeric_limits<std::int64_t>::max()),
                 HyperparamDef::real("ridge", 1e-6, 0, 1e6)},
      .output = OutputShape::Counterfactual,
      .description = "one ridge regression per treatment arm; effects are arm differences",
      .make = [](const Params& p) { return std::make_unique<TLearnerLearner>(p.real("ridge")); },
      .load = [](const ojson& j, const Params&, const Registry&) { return FittedTLearner::load(j); },
  });
}

}  // namespace tempoframe::treatment
