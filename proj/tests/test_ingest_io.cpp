#include <doctest.h>

#include <filesystem>

#include "tempoframe/io/bundle.hpp"
#include "tempoframe/io/csv.hpp"
#include "test_util.hpp"

using namespace tempoframe;
using namespace tempoframe::io;

namespace {

void write(const std::filesystem::path& p, const std::string& text) { write_file(p.string(), text); }

const char* kMinimalManifest = R"({
  "schema_version": "1",
  "files": {"static": "static.csv"},
  "kinds": {"age": {"kind": "integer", "modality": "static"}},
  "roles": {"age": "covariate"}
})";

}  // namespace

TEST_CASE("csv records") {
  const auto recs = parse_csv("a,b\n\"x,y\",\"he said \"\"hi\"\"\"\n1,\n", "t");
  REQUIRE(recs.size() == 3);
  CHECK(recs[1].fields[0] == "x,y");
  CHECK(recs[1].fields[1] == "he said \"hi\"");
  CHECK(recs[2].fields == std::vector<std::string>{"1", ""});
  CHECK(recs[2].line == 3);
  const std::vector<std::string> fields = {"a,b", "c\"d", ""};
  CHECK(parse_csv(format_csv_record(fields), "t")[0].fields == fields);
  CHECK_ERROR_CODE(parse_csv("\"open", "t"), ErrorCode::ParseError);
}

TEST_CASE("read_bundle") {
  const auto dir = tftest::scratch_dir("read_bundle");
  SUBCASE("minimal bundle") {
    write(dir / "manifest.json", kMinimalManifest);
    write(dir / "static.csv", "sample_id,feature_id,value\np1,age,40\n");
    const auto ds = read_bundle(dir.string());
    CHECK(ds.num_samples() == 1);
    CHECK(ds.static_samples()->at(0, 0) == integer(40));
  }
  SUBCASE("schema version 2") {
    std::string m = kMinimalManifest;
    m.replace(m.find("\"1\""), 3, "\"2\"");
    write(dir / "manifest.json", m);
    write(dir / "static.csv", "sample_id,feature_id,value\np1,age,40\n");
    CHECK_ERROR_CODE(read_bundle(dir.string()), ErrorCode::ManifestError);
  }
  SUBCASE("missing key and missing file") {
    write(dir / "manifest.json", R"({"schema_version": "1", "files": {"static": "static.csv"}})");
    write(dir / "static.csv", "sample_id,feature_id,value\n");
    CHECK_ERROR_CODE(read_bundle(dir.string()), ErrorCode::ManifestError);
    write(dir / "manifest.json", kMinimalManifest);
    std::filesystem::remove(dir / "static.csv");
    CHECK_ERROR_CODE(read_bundle(dir.string()), ErrorCode::ManifestError);
  }
  SUBCASE("empty time field names file and line") {
    write(dir / "manifest.json", R"({
      "schema_version": "1",
      "files": {"temporal": "temporal.csv"},
      "kinds": {"bp": {"kind": "continuous", "modality": "temporal"}},
      "roles": {"bp": "covariate"}})");
    write(dir / "temporal.csv", "sample_id,feature_id,time,value\np1,bp,0,120\np1,bp,,118\n");
    try {
      (void)read_bundle(dir.string());
      FAIL("expected ParseError");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ParseError);
      const std::string what = e.what();
      CHECK(what.find("temporal.csv:3") != std::string::npos);
    }
  }
  SUBCASE("row arity") {
    write(dir / "manifest.json", kMinimalManifest);
    write(dir / "static.csv", "sample_id,feature_id,value\np1,age\n");
    CHECK_ERROR_CODE(read_bundle(dir.string()), ErrorCode::ParseError);
  }
  SUBCASE("builder errors carry location") {
    write(dir / "manifest.json", kMinimalManifest);
    write(dir / "static.csv", "sample_id,feature_id,value\np1,age,40\np1,age,41\n");
    try {
      (void)read_bundle(dir.string());
      FAIL("expected DuplicateCell");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::DuplicateCell);
      CHECK(std::string(e.what()).find("static.csv:3") != std::string::npos);
    }
  }
}

TEST_CASE("write_bundle round trip") {
  const auto dir = tftest::scratch_dir("write_bundle");
  SUBCASE("generated datasets") {
    for (std::uint64_t seed = 100; seed < 140; ++seed) {
      const auto ds = tftest::random_dataset(seed);
      write_bundle(ds, dir.string());
      CHECK(read_bundle(dir.string()) == ds);
    }
  }
  SUBCASE("missing cells and censoring rows") {
    std::vector<StaticRow> srows = {{"p1", "age", Missing}};
    std::vector<TimedRow> erows = {{"p1", "death", 90.5, Missing}};
    const auto ds = assemble_dataset(build_static_samples(srows, {{"age", ValueKind::integer()}}), std::nullopt,
                                     build_event_samples(erows, {{"death", ValueKind::integer()}}),
                                     {{"age", Role::Covariate}, {"death", Role::Target}});
    write_bundle(ds, dir.string());
    CHECK(read_file((dir / "static.csv").string()) == "sample_id,feature_id,value\np1,age,\n");
    CHECK(read_file((dir / "events.csv").string()) == "sample_id,feature_id,time,value\np1,death,90.5,\n");
    CHECK(read_bundle(dir.string()) == ds);
  }
  SUBCASE("byte-identical output") {
    const auto ds = tftest::random_dataset(5);
    const auto d2 = tftest::scratch_dir("write_bundle_2");
    write_bundle(ds, dir.string());
    write_bundle(ds, d2.string());
    for (const char* f : {"manifest.json", "static.csv", "temporal.csv", "events.csv"}) {
      CHECK(read_file((dir / f).string()) == read_file((d2 / f).string()));
    }
  }
}

TEST_CASE("validate_long_table") {
  const KindList kinds = {{"age", ValueKind::integer()}, {"blood", ValueKind::categorical({"A", "B"})}};
  SUBCASE("clean table") {
    std::vector<LongTableRow> rows = {{"p1", "age", {}, "40"}, {"p1", "blood", {}, "A"}, {"p2", "age", {}, ""}};
    CHECK(validate_long_table(rows, Modality::Static, kinds).empty());
  }
  SUBCASE("two duplicates and one kind mismatch") {
    std::vector<LongTableRow> rows = {{"p1", "age", {}, "40"}, {"p1", "age", {}, "41"},
                                      {"p2", "blood", {}, "A"}, {"p2", "blood", {}, "B"},
                                      {"p3", "age", {}, "forty"}};
    const auto v = validate_long_table(rows, Modality::Static, kinds);
    REQUIRE(v.size() == 3);
    CHECK(v[0].code == "duplicate_cell");
    CHECK(v[0].row == 2);
    CHECK(v[1].code == "duplicate_cell");
    CHECK(v[2].code == "kind_mismatch");
    CHECK(v[2].row == 5);
  }
  SUBCASE("static table with a time column") {
    std::vector<LongTableRow> rows = {{"p1", "age", "0", "40"}, {"p2", "age", "1", "41"}};
    const auto v = validate_long_table(rows, Modality::Static, kinds);
    REQUIRE(v.size() == 2);
    CHECK(v[0].code == "unexpected_time");
    CHECK(v[1].code == "unexpected_time");
  }
  SUBCASE("temporal time problems") {
    std::vector<LongTableRow> rows = {{"p1", "age", std::nullopt, "1"}, {"p1", "age", "x", "1"},
                                      {"p1", "age", "2", "1"},          {"p1", "age", "2.0", "1"}};
    const auto v = validate_long_table(rows, Modality::Temporal, kinds);
    REQUIRE(v.size() == 3);
    CHECK(v[0].code == "missing_time");
    CHECK(v[1].code == "bad_time");
    CHECK(v[2].code == "duplicate_time_point");
  }
}

TEST_CASE("validation agrees with the builders") {
  // Mutate clean rows at random; the violation list is empty exactly when the builder succeeds.
  const KindList kinds = {{"age", ValueKind::integer()}, {"blood", ValueKind::categorical({"A", "B"})}};
  Lcg rng(21);
  const char* values[] = {"1", "2", "", "A", "B", "x", "1.5"};
  const char* features[] = {"age", "blood", "zzz"};
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<LongTableRow> rows;
    std::vector<TimedRow> typed;
    const std::size_t n = 1 + rng.below(5);
    for (std::size_t r = 0; r < n; ++r) {
      LongTableRow row{"p" + std::to_string(rng.below(3)), features[rng.below(3)],
                       format_real(static_cast<double>(rng.below(3))), values[rng.below(7)]};
      rows.push_back(row);
    }
    const bool clean = validate_long_table(rows, Modality::Temporal, kinds).empty();
    bool built = true;
    try {
      for (const auto& r : rows) {
        const FeatureSpec* spec = nullptr;
        for (const auto& k : kinds) {
          if (k.id == r.feature_id) spec = &k;
        }
        if (!spec) fail(ErrorCode::UnknownFeature, r.feature_id);
        typed.push_back({r.sample_id, r.feature_id, *parse_real(*r.time), parse_cell(r.value, spec->kind)});
      }
      (void)build_time_series_samples(typed, kinds);
    } catch (const Error&) {
      built = false;
    }
    CHECK(clean == built);
  }
}

TEST_CASE("validate_bundle") {
  const auto dir = tftest::scratch_dir("validate_bundle");
  write(dir / "manifest.json", kMinimalManifest);
  write(dir / "static.csv", "sample_id,feature_id,value\np1,age,40\n");
  CHECK(validate_bundle(dir.string()).empty());
  write(dir / "static.csv", "sample_id,feature_id,value\np1,age,40\np1,age,4x\np1,age,41\n");
  CHECK(validate_bundle(dir.string()).size() == 3);
}
