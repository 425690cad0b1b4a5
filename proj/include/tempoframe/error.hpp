#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tempoframe {

enum class ErrorCode {
  // data model
  DuplicateCell,
  DuplicateTimePoint,
  DuplicateEvent,
  DuplicateFeature,
  KindMismatch,
  InvalidKind,
  InvalidTime,
  SampleIndexMismatch,
  RoleGap,
  RoleConflict,
  UnknownFeature,
  UnknownSample,
  InvalidWindow,
  NonNumericFeature,
  EmptyDataset,
  // io
  ManifestError,
  ParseError,
  IoError,
  // plugins
  DuplicatePlugin,
  UnknownPlugin,
  UnknownParam,
  ParamOutOfBounds,
  RequirementUnmet,
  FingerprintMismatch,
  NotATransform,
  NotAPredictor,
  NotFitted,
  InvalidAlternative,
  BadPipelineShape,
  IncompatibleInner,
  CorruptBlob,
  UnknownPluginInBlob,
  // preprocessing
  AllMissingFeature,
  UnseenCategory,
  InvalidStep,
  // prediction
  EmptyTargetSeries,
  IrregularSeries,
  InsufficientHistory,
  MissingInTarget,
  MissingInFeatures,
  NonBinaryTarget,
  AlignmentError,
  // survival
  EmptyInput,
  NoEvents,
  NoComparablePairs,
  NoEvaluableSamples,
  // treatment
  ArmTooSmall,
  NonBinaryTreatment,
  MultipleTargets,
  InvalidSpec,
  // interpret / bench
  MetricMismatch,
  UnknownMetric,
  TooFewSamples,
  ConfigError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure in the library is reported as an Error carrying a code.
/// `reason` is an optional machine-readable qualifier, e.g.
/// "missing_event_target" for RequirementUnmet.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string reason = {});

  ErrorCode code() const noexcept { return code_; }
  const std::string& reason() const noexcept { return reason_; }
  const std::string& message() const noexcept { return message_; }

  /// Same error with `context` prefixed to the message.
  Error with_context(const std::string& context) const;

 private:
  ErrorCode code_;
  std::string message_;
  std::string reason_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message, std::string reason = {});

}  // namespace tempoframe
