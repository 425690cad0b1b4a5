#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tempoframe/dataset.hpp"

namespace tempoframe {

/// Per (sample, feature) summary of a numeric time series as five static
/// Continuous features named `<feature>.last|mean|min|max|slope`. Statistics
/// use observed points only; slope is the least-squares slope of value on
/// time and is Missing below two observed points. Throws NonNumericFeature.
StaticSamples temporal_summary(const TimeSeriesSamples& ts);

/// Dense numeric design matrix over the features of one role.
struct FeatureMatrix {
  std::vector<std::string> names;
  Eigen::MatrixXd values;  // samples x features
};

/// Static numeric features of `role` followed by the temporal summary of
/// temporal features of `role`. Event features are not featurized.
/// Categorical static inputs raise RequirementUnmet("non_numeric_feature");
/// any Missing cell raises MissingInFeatures.
FeatureMatrix featurize(const Dataset& ds, Role role = Role::Covariate);

}  // namespace tempoframe
