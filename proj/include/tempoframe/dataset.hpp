#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tempoframe/containers.hpp"

namespace tempoframe {

enum class Role { Covariate, Target, Treatment };
enum class Modality { Static, Temporal, Event };

std::string_view to_string(Role role) noexcept;
std::string_view to_string(Modality modality) noexcept;
Role role_from_string(std::string_view text);
Modality modality_from_string(std::string_view text);

/// Feature id -> role. Built from (feature, role) pairs; conflicting pairs
/// raise RoleConflict.
class RoleMap {
 public:
  RoleMap() = default;
  RoleMap(std::initializer_list<std::pair<std::string, Role>> pairs);
  explicit RoleMap(std::span<const std::pair<std::string, Role>> pairs);

  std::optional<Role> role_of(std::string_view feature) const;
  const std::map<std::string, Role, std::less<>>& entries() const noexcept { return roles_; }
  std::size_t size() const noexcept { return roles_.size(); }

  bool operator==(const RoleMap&) const = default;

 private:
  void add(const std::string& feature, Role role);
  std::map<std::string, Role, std::less<>> roles_;
};

/// Where a feature lives inside a Dataset.
struct FeatureRef {
  Modality modality;
  std::size_t index;
  const FeatureSpec* spec;
  Role role;
};

/// Sample-aligned bundle of modality containers with a role assignment that
/// partitions every feature. Immutable once assembled.
class Dataset {
 public:
  const std::optional<StaticSamples>& static_samples() const noexcept { return static_; }
  const std::optional<TimeSeriesSamples>& temporal() const noexcept { return temporal_; }
  const std::optional<EventSamples>& events() const noexcept { return events_; }
  const RoleMap& roles() const noexcept { return roles_; }

  std::span<const std::string> sample_ids() const noexcept { return sample_ids_; }
  std::size_t num_samples() const noexcept { return sample_ids_.size(); }

  /// All features in canonical order (static, temporal, event; declaration order within).
  std::vector<FeatureRef> features() const;
  std::vector<FeatureRef> features(Role role) const;
  std::vector<FeatureRef> features(Role role, Modality modality) const;
  std::optional<FeatureRef> find_feature(std::string_view id) const;

  bool operator==(const Dataset& other) const {
    return sample_ids_ == other.sample_ids_ && static_ == other.static_ && temporal_ == other.temporal_ &&
           events_ == other.events_ && roles_ == other.roles_;
  }

 private:
  friend Dataset assemble_dataset(std::optional<StaticSamples>, std::optional<TimeSeriesSamples>,
                                  std::optional<EventSamples>, RoleMap);

  std::optional<StaticSamples> static_;
  std::optional<TimeSeriesSamples> temporal_;
  std::optional<EventSamples> events_;
  RoleMap roles_;
  std::vector<std::string> sample_ids_;
};

/// Errors: EmptyDataset (no container), SampleIndexMismatch, DuplicateFeature
/// (same id in two containers), RoleGap, UnknownFeature (role for an absent
/// feature), RoleGap with reason "no_covariate" when no covariate exists.
Dataset assemble_dataset(std::optional<StaticSamples> static_samples, std::optional<TimeSeriesSamples> temporal,
                         std::optional<EventSamples> events, RoleMap roles);

/// Same dataset with one container replaced (or removed) and new roles.
Dataset with_static(const Dataset& ds, std::optional<StaticSamples> c, RoleMap roles);
Dataset with_temporal(const Dataset& ds, std::optional<TimeSeriesSamples> c, RoleMap roles);
Dataset with_events(const Dataset& ds, std::optional<EventSamples> c, RoleMap roles);

/// Restricts every container to `ids` in order. Throws UnknownSample.
Dataset select_samples(const Dataset& ds, std::span<const std::string> ids);

/// Hash of the ordered (feature id, kind, role, modality) list.
std::uint64_t fingerprint(const Dataset& ds);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);

}  // namespace tempoframe
