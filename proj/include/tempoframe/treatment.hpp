#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tempoframe/dataset.hpp"
#include "tempoframe/predictions.hpp"

namespace tempoframe {
class Registry;
}

namespace tempoframe::treatment {

/// Linear outcome model y = intercept + weights.x for one arm.
struct ArmModel {
  double intercept = 0;
  Eigen::VectorXd weights;

  double predict(const Eigen::RowVectorXd& x) const;
};

/// Ridge least squares with an unpenalized intercept column.
ArmModel fit_arm(const Eigen::MatrixXd& x, std::span<const double> y, double ridge);

struct TLearnerModel {
  std::string treatment;
  ValueKind treatment_kind = ValueKind::integer();
  std::string target;
  std::vector<std::string> features;
  ArmModel arms[2];
};

/// Arm (0 or 1) of a binary treatment value: Integer 0/1, or the index of a
/// two-category label. Throws NonBinaryTreatment.
int arm_of(const ValueKind& kind, const CellValue& v);

/// One ridge regressor per factual arm. Throws NonBinaryTreatment,
/// MultipleTargets, ArmTooSmall (an arm with fewer than features+1 samples).
TLearnerModel fit_t_learner(const Dataset& ds, double ridge);

/// Prediction of each sample's factual arm.
StaticOutput predict_factual(const TLearnerModel& model, const Dataset& ds);

/// One outcome per (alternative, sample). Throws InvalidAlternative for an
/// empty list or a value that is not an arm of the treatment feature.
CounterfactualOutput predict_counterfactuals(const TLearnerModel& model, const Dataset& ds,
                                             std::span<const CellValue> alternatives);

/// Per-sample outcome(arm 1) - outcome(arm 0); both arms must be among the alternatives.
std::vector<double> effect_estimates(const CounterfactualOutput& out, const ValueKind& treatment_kind);

/// sqrt(mean((estimate - truth)^2)). Throws AlignmentError.
double pehe(std::span<const double> estimates, std::span<const double> truth);

struct SynthSpec {
  std::size_t n = 100;
  std::uint64_t seed = 0;
  std::size_t dims = 2;
  double tau0 = 3.0;           // constant effect when gamma is empty
  std::vector<double> gamma;   // linear effect tau(x) = gamma.x
  double sigma = 0.0;
};

struct SynthGroundTruth {
  Dataset data;                 // covariates x1..xd, Integer treatment "a", Continuous target "y"
  std::vector<double> tau;      // true effect per sample
  std::vector<double> mu0, mu1; // noiseless potential outcomes
};

/// x ~ U[-1,1]^d, a ~ fair coin, f(x) = w.x with seeded w ~ U[-1,1]^d,
/// y = f(x) + tau(x) a + sigma * N(0,1). Throws InvalidSpec.
SynthGroundTruth synth_treatment_data(const SynthSpec& spec);

void register_plugins(Registry& registry);

}  // namespace tempoframe::treatment
