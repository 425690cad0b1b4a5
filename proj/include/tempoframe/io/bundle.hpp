#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tempoframe/dataset.hpp"

namespace tempoframe::io {

/// One serialized data point as read from a long-format table.
struct LongTableRow {
  std::string sample_id;
  std::string feature_id;
  std::optional<std::string> time;
  std::string value;  // "" = Missing
  std::size_t line = 0;  // source line, 0 when not read from a file
};

struct Violation {
  std::size_t row = 0;  // 1-based index into the validated rows; 0 = table-level
  std::string code;
  std::string message;
};

/// Collects every problem that would stop the matching builder (not fail-fast).
/// Codes: unexpected_time, missing_time, bad_time, unknown_feature,
/// unknown_sample, kind_mismatch, duplicate_cell, duplicate_time_point,
/// duplicate_event, duplicate_feature.
std::vector<Violation> validate_long_table(std::span<const LongTableRow> rows, Modality modality,
                                           const KindList& kinds,
                                           std::span<const std::string> sample_order = {});

/// Reads a long table; the header must name sample_id, feature_id, value and
/// optionally time. Throws ParseError on arity or header problems.
std::vector<LongTableRow> read_long_table(const std::string& path);

struct ManifestFeature {
  FeatureSpec spec;
  Modality modality;
  Role role;

  bool operator==(const ManifestFeature&) const = default;
};

struct BundleManifest {
  std::string schema_version = "1";
  std::vector<std::string> samples;               // optional; empty = first appearance
  std::map<Modality, std::string> files;          // relative paths
  std::vector<ManifestFeature> features;          // declaration order

  KindList kinds(Modality modality) const;
  RoleMap roles() const;

  bool operator==(const BundleManifest&) const = default;
};

inline constexpr const char* kManifestName = "manifest.json";

/// Parses a manifest file. Throws ManifestError.
BundleManifest read_manifest(const std::string& path);

/// `path` may be the manifest file or the bundle directory.
Dataset read_bundle(const std::string& path);

/// Writes manifest.json plus static.csv / temporal.csv / events.csv for the
/// containers present. Output bytes depend only on `ds`.
BundleManifest write_bundle(const Dataset& ds, const std::string& dir);

/// All violations of a bundle, each prefixed with "file:line". Manifest errors
/// are reported as a single entry.
std::vector<std::string> validate_bundle(const std::string& path);

}  // namespace tempoframe::io
