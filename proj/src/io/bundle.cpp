#include "tempoframe/io/bundle.hpp"

#include <filesystem>
#include <set>
#include <tuple>

#include <json.hpp>

#include "tempoframe/error.hpp"
#include "tempoframe/io/csv.hpp"

namespace tempoframe::io {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

const char* default_file(Modality m) {
  switch (m) {
    case Modality::Static: return "static.csv";
    case Modality::Temporal: return "temporal.csv";
    case Modality::Event: return "events.csv";
  }
  return "";
}

const char* file_key(Modality m) {
  switch (m) {
    case Modality::Static: return "static";
    case Modality::Temporal: return "temporal";
    case Modality::Event: return "events";
  }
  return "";
}

constexpr Modality kModalities[] = {Modality::Static, Modality::Temporal, Modality::Event};

ErrorCode code_for(const std::string& violation) {
  if (violation == "kind_mismatch") return ErrorCode::KindMismatch;
  if (violation == "duplicate_cell") return ErrorCode::DuplicateCell;
  if (violation == "duplicate_time_point") return ErrorCode::DuplicateTimePoint;
  if (violation == "duplicate_event") return ErrorCode::DuplicateEvent;
  if (violation == "unknown_feature") return ErrorCode::UnknownFeature;
  if (violation == "unknown_sample") return ErrorCode::UnknownSample;
  if (violation == "duplicate_feature") return ErrorCode::DuplicateFeature;
  return ErrorCode::ParseError;
}

std::string manifest_path_of(const std::string& path) {
  if (fs::is_directory(path)) return (fs::path(path) / kManifestName).string();
  return path;
}

}  // namespace

std::vector<Violation> validate_long_table(std::span<const LongTableRow> rows, Modality modality,
                                           const KindList& kinds, std::span<const std::string> sample_order) {
  std::vector<Violation> out;
  std::map<std::string, const FeatureSpec*, std::less<>> by_id;
  for (const auto& k : kinds) {
    if (!by_id.emplace(k.id, &k).second) {
      out.push_back({0, "duplicate_feature", "feature '" + k.id + "' declared twice"});
    }
  }
  const std::set<std::string, std::less<>> known_samples(sample_order.begin(), sample_order.end());

  std::set<std::pair<std::string, std::string>> seen_cells;
  std::set<std::tuple<std::string, std::string, double>> seen_points;

  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const std::size_t n = r + 1;
    std::optional<double> time;
    if (modality == Modality::Static) {
      if (row.time) out.push_back({n, "unexpected_time", "static rows carry no time"});
    } else if (!row.time || row.time->empty()) {
      out.push_back({n, "missing_time", "time is required"});
    } else if (!(time = parse_real(*row.time))) {
      out.push_back({n, "bad_time", "'" + *row.time + "' is not a finite decimal time"});
    }
    if (!sample_order.empty() && !known_samples.contains(row.sample_id)) {
      out.push_back({n, "unknown_sample", "sample '" + row.sample_id + "' is not listed in the manifest"});
    }
    auto it = by_id.find(row.feature_id);
    if (it == by_id.end()) {
      out.push_back({n, "unknown_feature", "feature '" + row.feature_id + "' has no declared kind"});
    } else {
      try {
        (void)parse_cell(row.value, it->second->kind);
      } catch (const Error& e) {
        out.push_back({n, "kind_mismatch", e.what()});
      }
    }
    switch (modality) {
      case Modality::Static:
        if (!seen_cells.emplace(row.sample_id, row.feature_id).second) {
          out.push_back({n, "duplicate_cell", "second value for (" + row.sample_id + ", " + row.feature_id + ")"});
        }
        break;
      case Modality::Event:
        if (!seen_cells.emplace(row.sample_id, row.feature_id).second) {
          out.push_back({n, "duplicate_event", "second entry for (" + row.sample_id + ", " + row.feature_id + ")"});
        }
        break;
      case Modality::Temporal:
        if (time && !seen_points.emplace(row.sample_id, row.feature_id, *time).second) {
          out.push_back({n, "duplicate_time_point", "second point for (" + row.sample_id + ", " + row.feature_id +
                                                        ") at time " + *row.time});
        }
        break;
    }
  }
  return out;
}

std::vector<LongTableRow> read_long_table(const std::string& path) {
  const auto records = parse_csv(read_file(path), path);
  if (records.empty()) fail(ErrorCode::ParseError, path + ":1: missing header row");
  const auto& header = records.front().fields;
  int col_sample = -1, col_feature = -1, col_time = -1, col_value = -1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const auto& h = header[c];
    int* slot = h == "sample_id" ? &col_sample : h == "feature_id" ? &col_feature : h == "time" ? &col_time
                : h == "value"   ? &col_value : nullptr;
    if (!slot) fail(ErrorCode::ParseError, path + ":1: unknown column '" + h + "'");
    if (*slot >= 0) fail(ErrorCode::ParseError, path + ":1: column '" + h + "' repeated");
    *slot = static_cast<int>(c);
  }
  if (col_sample < 0 || col_feature < 0 || col_value < 0) {
    fail(ErrorCode::ParseError, path + ":1: header must name sample_id, feature_id and value");
  }
  std::vector<LongTableRow> rows;
  rows.reserve(records.size() - 1);
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.fields.size() != header.size()) {
      fail(ErrorCode::ParseError, path + ":" + std::to_string(rec.line) + ": expected " +
                                      std::to_string(header.size()) + " fields, found " +
                                      std::to_string(rec.fields.size()));
    }
    LongTableRow row;
    row.sample_id = rec.fields[col_sample];
    row.feature_id = rec.fields[col_feature];
    row.value = rec.fields[col_value];
    if (col_time >= 0) row.time = rec.fields[col_time];
    row.line = rec.line;
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---------------------------------------------------------------------------

KindList BundleManifest::kinds(Modality modality) const {
  KindList out;
  for (const auto& f : features) {
    if (f.modality == modality) out.push_back(f.spec);
  }
  return out;
}

RoleMap BundleManifest::roles() const {
  std::vector<std::pair<std::string, Role>> pairs;
  for (const auto& f : features) pairs.emplace_back(f.spec.id, f.role);
  return RoleMap(pairs);
}

BundleManifest read_manifest(const std::string& path) {
  ojson j;
  try {
    j = ojson::parse(read_file(path));
  } catch (const ojson::exception& e) {
    fail(ErrorCode::ManifestError, path + ": " + e.what());
  }
  auto need = [&](const char* key) -> const ojson& {
    if (!j.is_object() || !j.contains(key)) fail(ErrorCode::ManifestError, path + ": missing key '" + key + "'");
    return j.at(key);
  };
  BundleManifest m;
  try {
    const auto& version = need("schema_version");
    if (!version.is_string() || version.get<std::string>() != "1") {
      fail(ErrorCode::ManifestError, path + ": unsupported schema_version " + version.dump());
    }
    if (j.contains("samples")) m.samples = j.at("samples").get<std::vector<std::string>>();
    const auto& files = need("files");
    for (Modality mod : kModalities) {
      if (files.contains(file_key(mod))) m.files[mod] = files.at(file_key(mod)).get<std::string>();
    }
    for (const auto& [key, _] : files.items()) {
      if (key != "static" && key != "temporal" && key != "events") {
        fail(ErrorCode::ManifestError, path + ": unknown file slot '" + key + "'");
      }
    }
    if (m.files.empty()) fail(ErrorCode::ManifestError, path + ": no data files listed");
    const auto& roles = need("roles");
    for (const auto& [id, desc] : need("kinds").items()) {
      ManifestFeature f{{id, ValueKind::continuous()}, Modality::Static, Role::Covariate};
      const auto tag = kind_tag_from_string(desc.at("kind").get<std::string>());
      if (tag == KindTag::Categorical) {
        f.spec.kind = ValueKind::categorical(desc.at("categories").get<std::vector<std::string>>());
      } else {
        f.spec.kind = tag == KindTag::Integer ? ValueKind::integer() : ValueKind::continuous();
      }
      if (!desc.contains("modality")) fail(ErrorCode::ManifestError, path + ": feature '" + id + "' has no modality");
      f.modality = modality_from_string(desc.at("modality").get<std::string>());
      if (!roles.contains(id)) fail(ErrorCode::ManifestError, path + ": feature '" + id + "' has no role");
      f.role = role_from_string(roles.at(id).get<std::string>());
      if (!m.files.contains(f.modality)) {
        fail(ErrorCode::ManifestError,
             path + ": feature '" + id + "' is " + std::string(to_string(f.modality)) + " but no such file is listed");
      }
      m.features.push_back(std::move(f));
    }
    for (const auto& [id, _] : roles.items()) {
      bool known = false;
      for (const auto& f : m.features) known = known || f.spec.id == id;
      if (!known) fail(ErrorCode::ManifestError, path + ": role given for undeclared feature '" + id + "'");
    }
  } catch (const ojson::exception& e) {
    fail(ErrorCode::ManifestError, path + ": " + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ManifestError) throw;
    fail(ErrorCode::ManifestError, path + ": " + e.what());
  }
  const fs::path dir = fs::path(path).parent_path();
  for (const auto& [mod, rel] : m.files) {
    if (!fs::exists(dir / rel)) fail(ErrorCode::ManifestError, path + ": listed file '" + rel + "' does not exist");
  }
  return m;
}

namespace {

std::vector<TimedRow> to_timed_rows(std::span<const LongTableRow> rows, const KindList& kinds) {
  std::map<std::string, const FeatureSpec*, std::less<>> by_id;
  for (const auto& k : kinds) by_id.emplace(k.id, &k);
  std::vector<TimedRow> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    out.push_back({r.sample_id, r.feature_id, *parse_real(*r.time), parse_cell(r.value, by_id.at(r.feature_id)->kind)});
  }
  return out;
}

}  // namespace

Dataset read_bundle(const std::string& path) {
  const std::string manifest_path = manifest_path_of(path);
  const BundleManifest m = read_manifest(manifest_path);
  const fs::path dir = fs::path(manifest_path).parent_path();

  std::optional<StaticSamples> s;
  std::optional<TimeSeriesSamples> t;
  std::optional<EventSamples> e;
  for (const auto& [mod, rel] : m.files) {
    const std::string file = (dir / rel).string();
    const auto rows = read_long_table(file);
    const auto kinds = m.kinds(mod);
    const auto violations = validate_long_table(rows, mod, kinds, m.samples);
    if (!violations.empty()) {
      const auto& v = violations.front();
      const std::size_t line = v.row ? rows[v.row - 1].line : 0;
      fail(code_for(v.code), file + ":" + std::to_string(line) + ": " + v.message, v.code);
    }
    try {
      if (mod == Modality::Static) {
        std::map<std::string, const FeatureSpec*, std::less<>> by_id;
        for (const auto& k : kinds) by_id.emplace(k.id, &k);
        std::vector<StaticRow> typed;
        typed.reserve(rows.size());
        for (const auto& r : rows) typed.push_back({r.sample_id, r.feature_id, parse_cell(r.value, by_id.at(r.feature_id)->kind)});
        s = build_static_samples(typed, kinds, m.samples);
      } else if (mod == Modality::Temporal) {
        t = build_time_series_samples(to_timed_rows(rows, kinds), kinds, m.samples);
      } else {
        e = build_event_samples(to_timed_rows(rows, kinds), kinds, m.samples);
      }
    } catch (const Error& err) {
      fail(err.code(), file + ": " + err.what(), err.reason());
    }
  }
  try {
    return assemble_dataset(std::move(s), std::move(t), std::move(e), m.roles());
  } catch (const Error& err) {
    fail(err.code(), manifest_path + ": " + err.what(), err.reason());
  }
}

BundleManifest write_bundle(const Dataset& ds, const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::IoError, "cannot create directory '" + dir + "': " + ec.message());

  BundleManifest m;
  m.samples.assign(ds.sample_ids().begin(), ds.sample_ids().end());
  for (const auto& f : ds.features()) m.features.push_back({*f.spec, f.modality, f.role});

  auto emit_timed = [](std::string& out, const std::vector<TimedRow>& rows) {
    out += "sample_id,feature_id,time,value\n";
    for (const auto& r : rows) {
      const std::string fields[] = {r.sample_id, r.feature_id, format_real(r.time), format_cell(r.value)};
      out += format_csv_record(fields);
    }
  };

  if (ds.static_samples()) {
    std::string out = "sample_id,feature_id,value\n";
    for (const auto& r : ds.static_samples()->to_rows()) {
      const std::string fields[] = {r.sample_id, r.feature_id, format_cell(r.value)};
      out += format_csv_record(fields);
    }
    write_file((fs::path(dir) / default_file(Modality::Static)).string(), out);
    m.files[Modality::Static] = default_file(Modality::Static);
  }
  if (ds.temporal()) {
    std::string out;
    emit_timed(out, ds.temporal()->to_rows());
    write_file((fs::path(dir) / default_file(Modality::Temporal)).string(), out);
    m.files[Modality::Temporal] = default_file(Modality::Temporal);
  }
  if (ds.events()) {
    std::string out;
    emit_timed(out, ds.events()->to_rows());
    write_file((fs::path(dir) / default_file(Modality::Event)).string(), out);
    m.files[Modality::Event] = default_file(Modality::Event);
  }

  ojson j;
  j["schema_version"] = m.schema_version;
  j["samples"] = m.samples;
  ojson files = ojson::object();
  for (const auto& [mod, rel] : m.files) files[file_key(mod)] = rel;
  j["files"] = files;
  ojson kinds = ojson::object();
  ojson roles = ojson::object();
  for (const auto& f : m.features) {
    ojson desc;
    desc["kind"] = std::string(to_string(f.spec.kind.tag()));
    if (f.spec.kind.tag() == KindTag::Categorical) desc["categories"] = f.spec.kind.categories();
    desc["modality"] = std::string(to_string(f.modality));
    kinds[f.spec.id] = desc;
    roles[f.spec.id] = std::string(to_string(f.role));
  }
  j["kinds"] = kinds;
  j["roles"] = roles;
  write_file((fs::path(dir) / kManifestName).string(), j.dump(2) + "\n");
  return m;
}

std::vector<std::string> validate_bundle(const std::string& path) {
  const std::string manifest_path = manifest_path_of(path);
  std::vector<std::string> out;
  BundleManifest m;
  try {
    m = read_manifest(manifest_path);
  } catch (const Error& e) {
    out.push_back(e.what());
    return out;
  }
  const fs::path dir = fs::path(manifest_path).parent_path();
  for (const auto& [mod, rel] : m.files) {
    const std::string file = (dir / rel).string();
    std::vector<LongTableRow> rows;
    try {
      rows = read_long_table(file);
    } catch (const Error& e) {
      out.push_back(e.what());
      continue;
    }
    for (const auto& v : validate_long_table(rows, mod, m.kinds(mod), m.samples)) {
      const std::size_t line = v.row ? rows[v.row - 1].line : 0;
      out.push_back(file + ":" + std::to_string(line) + ": " + v.code + ": " + v.message);
    }
  }
  if (out.empty()) {
    try {
      (void)read_bundle(manifest_path);
    } catch (const Error& e) {
      out.push_back(e.what());
    }
  }
  return out;
}

}  // namespace tempoframe::io
