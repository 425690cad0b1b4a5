#include "tempoframe/error.hpp"

namespace tempoframe {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DuplicateCell: return "DuplicateCell";
    case ErrorCode::DuplicateTimePoint: return "DuplicateTimePoint";
    case ErrorCode::DuplicateEvent: return "DuplicateEvent";
    case ErrorCode::DuplicateFeature: return "DuplicateFeature";
    case ErrorCode::KindMismatch: return "KindMismatch";
    case ErrorCode::InvalidKind: return "InvalidKind";
    case ErrorCode::InvalidTime: return "InvalidTime";
    case ErrorCode::SampleIndexMismatch: return "SampleIndexMismatch";
    case ErrorCode::RoleGap: return "RoleGap";
    case ErrorCode::RoleConflict: return "RoleConflict";
    case ErrorCode::UnknownFeature: return "UnknownFeature";
    case ErrorCode::UnknownSample: return "UnknownSample";
    case ErrorCode::InvalidWindow: return "InvalidWindow";
    case ErrorCode::NonNumericFeature: return "NonNumericFeature";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::ManifestError: return "ManifestError";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::DuplicatePlugin: return "DuplicatePlugin";
    case ErrorCode::UnknownPlugin: return "UnknownPlugin";
    case ErrorCode::UnknownParam: return "UnknownParam";
    case ErrorCode::ParamOutOfBounds: return "ParamOutOfBounds";
    case ErrorCode::RequirementUnmet: return "RequirementUnmet";
    case ErrorCode::FingerprintMismatch: return "FingerprintMismatch";
    case ErrorCode::NotATransform: return "NotATransform";
    case ErrorCode::NotAPredictor: return "NotAPredictor";
    case ErrorCode::NotFitted: return "NotFitted";
    case ErrorCode::InvalidAlternative: return "InvalidAlternative";
    case ErrorCode::BadPipelineShape: return "BadPipelineShape";
    case ErrorCode::IncompatibleInner: return "IncompatibleInner";
    case ErrorCode::CorruptBlob: return "CorruptBlob";
    case ErrorCode::UnknownPluginInBlob: return "UnknownPluginInBlob";
    case ErrorCode::AllMissingFeature: return "AllMissingFeature";
    case ErrorCode::UnseenCategory: return "UnseenCategory";
    case ErrorCode::InvalidStep: return "InvalidStep";
    case ErrorCode::EmptyTargetSeries: return "EmptyTargetSeries";
    case ErrorCode::IrregularSeries: return "IrregularSeries";
    case ErrorCode::InsufficientHistory: return "InsufficientHistory";
    case ErrorCode::MissingInTarget: return "MissingInTarget";
    case ErrorCode::MissingInFeatures: return "MissingInFeatures";
    case ErrorCode::NonBinaryTarget: return "NonBinaryTarget";
    case ErrorCode::AlignmentError: return "AlignmentError";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::NoEvents: return "NoEvents";
    case ErrorCode::NoComparablePairs: return "NoComparablePairs";
    case ErrorCode::NoEvaluableSamples: return "NoEvaluableSamples";
    case ErrorCode::ArmTooSmall: return "ArmTooSmall";
    case ErrorCode::NonBinaryTreatment: return "NonBinaryTreatment";
    case ErrorCode::MultipleTargets: return "MultipleTargets";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::MetricMismatch: return "MetricMismatch";
    case ErrorCode::UnknownMetric: return "UnknownMetric";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message, std::string reason)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code),
      message_(message),
      reason_(std::move(reason)) {}

Error Error::with_context(const std::string& context) const { return Error(code_, context + ": " + message_, reason_); }

void fail(ErrorCode code, const std::string& message, std::string reason) {
  throw Error(code, message, std::move(reason));
}

}  // namespace tempoframe
