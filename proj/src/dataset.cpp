#include "tempoframe/dataset.hpp"

#include <set>

#include "tempoframe/error.hpp"

namespace tempoframe {

std::string_view to_string(Role role) noexcept {
  switch (role) {
    case Role::Covariate: return "covariate";
    case Role::Target: return "target";
    case Role::Treatment: return "treatment";
  }
  return "covariate";
}

std::string_view to_string(Modality modality) noexcept {
  switch (modality) {
    case Modality::Static: return "static";
    case Modality::Temporal: return "temporal";
    case Modality::Event: return "event";
  }
  return "static";
}

Role role_from_string(std::string_view text) {
  if (text == "covariate") return Role::Covariate;
  if (text == "target") return Role::Target;
  if (text == "treatment") return Role::Treatment;
  fail(ErrorCode::ManifestError, "unknown role '" + std::string(text) + "'");
}

Modality modality_from_string(std::string_view text) {
  if (text == "static") return Modality::Static;
  if (text == "temporal") return Modality::Temporal;
  if (text == "event") return Modality::Event;
  fail(ErrorCode::ManifestError, "unknown modality '" + std::string(text) + "'");
}

RoleMap::RoleMap(std::initializer_list<std::pair<std::string, Role>> pairs) {
  for (const auto& [f, r] : pairs) add(f, r);
}

RoleMap::RoleMap(std::span<const std::pair<std::string, Role>> pairs) {
  for (const auto& [f, r] : pairs) add(f, r);
}

void RoleMap::add(const std::string& feature, Role role) {
  auto [it, inserted] = roles_.emplace(feature, role);
  if (!inserted && it->second != role) {
    fail(ErrorCode::RoleConflict, "feature '" + feature + "' assigned both " + std::string(to_string(it->second)) +
                                      " and " + std::string(to_string(role)));
  }
}

std::optional<Role> RoleMap::role_of(std::string_view feature) const {
  auto it = roles_.find(feature);
  if (it == roles_.end()) return std::nullopt;
  return it->second;
}

// ---------------------------------------------------------------------------

std::vector<FeatureRef> Dataset::features() const {
  std::vector<FeatureRef> out;
  auto add = [&](const SampleFeatureIndex& c, Modality m) {
    for (std::size_t f = 0; f < c.num_features(); ++f) {
      out.push_back({m, f, &c.feature(f), *roles_.role_of(c.feature(f).id)});
    }
  };
  if (static_) add(*static_, Modality::Static);
  if (temporal_) add(*temporal_, Modality::Temporal);
  if (events_) add(*events_, Modality::Event);
  return out;
}

std::vector<FeatureRef> Dataset::features(Role role) const {
  std::vector<FeatureRef> out;
  for (const auto& f : features()) {
    if (f.role == role) out.push_back(f);
  }
  return out;
}

std::vector<FeatureRef> Dataset::features(Role role, Modality modality) const {
  std::vector<FeatureRef> out;
  for (const auto& f : features()) {
    if (f.role == role && f.modality == modality) out.push_back(f);
  }
  return out;
}

std::optional<FeatureRef> Dataset::find_feature(std::string_view id) const {
  for (const auto& f : features()) {
    if (f.spec->id == id) return f;
  }
  return std::nullopt;
}

Dataset assemble_dataset(std::optional<StaticSamples> static_samples, std::optional<TimeSeriesSamples> temporal,
                         std::optional<EventSamples> events, RoleMap roles) {
  if (!static_samples && !temporal && !events) fail(ErrorCode::EmptyDataset, "a dataset needs at least one container");

  std::vector<std::string> ids;
  std::set<std::string, std::less<>> feature_ids;
  // Seed the id list from the first container even if it has no features.
  bool seeded = false;
  auto visit = [&](const auto& c, Modality m) {
    if (!seeded) {
      ids.assign(c.sample_ids().begin(), c.sample_ids().end());
      seeded = true;
    } else {
      std::vector<std::string> these(c.sample_ids().begin(), c.sample_ids().end());
      if (these != ids) {
        fail(ErrorCode::SampleIndexMismatch,
             std::string(to_string(m)) + " container sample ids differ from the other containers");
      }
    }
    for (const auto& f : c.features()) {
      if (!feature_ids.insert(f.id).second) {
        fail(ErrorCode::DuplicateFeature, "feature '" + f.id + "' appears in more than one container");
      }
      if (!roles.role_of(f.id)) fail(ErrorCode::RoleGap, "feature '" + f.id + "' has no role");
    }
  };
  if (static_samples) visit(*static_samples, Modality::Static);
  if (temporal) visit(*temporal, Modality::Temporal);
  if (events) visit(*events, Modality::Event);

  bool any_covariate = false;
  for (const auto& [f, r] : roles.entries()) {
    if (!feature_ids.contains(f)) fail(ErrorCode::UnknownFeature, "role given for unknown feature '" + f + "'");
    any_covariate = any_covariate || r == Role::Covariate;
  }
  if (!any_covariate) fail(ErrorCode::RoleGap, "dataset has no covariate feature", "no_covariate");

  Dataset ds;
  ds.static_ = std::move(static_samples);
  ds.temporal_ = std::move(temporal);
  ds.events_ = std::move(events);
  ds.roles_ = std::move(roles);
  ds.sample_ids_ = std::move(ids);
  return ds;
}

Dataset with_static(const Dataset& ds, std::optional<StaticSamples> c, RoleMap roles) {
  return assemble_dataset(std::move(c), ds.temporal(), ds.events(), std::move(roles));
}

Dataset with_temporal(const Dataset& ds, std::optional<TimeSeriesSamples> c, RoleMap roles) {
  return assemble_dataset(ds.static_samples(), std::move(c), ds.events(), std::move(roles));
}

Dataset with_events(const Dataset& ds, std::optional<EventSamples> c, RoleMap roles) {
  return assemble_dataset(ds.static_samples(), ds.temporal(), std::move(c), std::move(roles));
}

Dataset select_samples(const Dataset& ds, std::span<const std::string> ids) {
  std::optional<StaticSamples> s;
  std::optional<TimeSeriesSamples> t;
  std::optional<EventSamples> e;
  if (ds.static_samples()) s = select(*ds.static_samples(), ids);
  if (ds.temporal()) t = select(*ds.temporal(), ids);
  if (ds.events()) e = select(*ds.events(), ids);
  return assemble_dataset(std::move(s), std::move(t), std::move(e), ds.roles());
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t fingerprint(const Dataset& ds) {
  std::string canon;
  for (const auto& f : ds.features()) {
    canon += f.spec->id;
    canon += '\x1f';
    canon += to_string(f.spec->kind.tag());
    for (const auto& c : f.spec->kind.categories()) {
      canon += '\x1e';
      canon += c;
    }
    canon += '\x1f';
    canon += to_string(f.role);
    canon += '\x1f';
    canon += to_string(f.modality);
    canon += '\x1d';
  }
  return fnv1a(canon);
}

}  // namespace tempoframe
