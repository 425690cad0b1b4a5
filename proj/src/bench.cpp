#include "tempoframe/bench.hpp"

#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <set>

#include "log.hpp"
#include "tempoframe/error.hpp"
#include "tempoframe/io/bundle.hpp"
#include "tempoframe/io/csv.hpp"
#include "tempoframe/rng.hpp"

namespace tempoframe::bench {

using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;
using namespace tempoframe::io;

std::vector<Fold> kfold_split(const Dataset& ds, std::size_t k, std::uint64_t seed) {
  const std::size_t n = ds.num_samples();
  if (k < 2) fail(ErrorCode::TooFewSamples, "cross-validation needs at least 2 folds");
  if (n < k) {
    fail(ErrorCode::TooFewSamples, std::to_string(n) + " samples cannot fill " + std::to_string(k) + " folds");
  }
  const auto perm = seeded_permutation(n, seed);
  std::vector<std::size_t> fold_of(n);
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = n / k + (f < n % k ? 1 : 0);
    for (std::size_t j = 0; j < size; ++j) fold_of[perm[pos++]] = f;
  }
  const auto ids = ds.sample_ids();
  std::vector<Fold> out;
  for (std::size_t f = 0; f < k; ++f) {
    std::vector<std::string> train, test;
    for (std::size_t i = 0; i < n; ++i) (fold_of[i] == f ? test : train).push_back(ids[i]);
    out.push_back({f, select_samples(ds, train), select_samples(ds, test)});
  }
  return out;
}

// --- config -----------------------------------------------------------------

namespace {

[[noreturn]] void config_error(const std::string& msg) { fail(ErrorCode::ConfigError, msg); }

std::string resolve(const std::string& path, const std::string& base_dir) {
  if (path.empty() || fs::path(path).is_absolute()) return path;
  return (fs::path(base_dir) / path).lexically_normal().string();
}

template <class T>
T get(const ojson& j, const char* key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const ojson::exception&) {
    config_error(where + " '" + key + "' is missing or has the wrong type");
  }
}

void only_keys(const ojson& j, std::initializer_list<std::string_view> keys, const std::string& where) {
  for (const auto& [k, v] : j.items()) {
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) config_error(where + " has unknown key '" + k + "'");
  }
}

}  // namespace

BenchConfig parse_config(const std::string& text, const std::string& base_dir) {
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const ojson::exception& e) {
    config_error(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) config_error("config must be a JSON object");
  only_keys(j, {"bundle", "task", "pipeline", "metrics", "cv", "output", "holdout", "truth", "importance", "timing"},
            "config");

  BenchConfig c;
  c.source = j;
  c.hash = fnv1a(text);
  c.bundle = resolve(get<std::string>(j, "bundle", "config"), base_dir);
  const auto task = get<std::string>(j, "task", "config");
  const auto parsed = task_from_string(task);
  if (!parsed) config_error("unknown task '" + task + "' (forecast, classify, survival, treatment)");
  c.task = *parsed;

  if (!j.contains("pipeline") || !j["pipeline"].is_array()) config_error("config 'pipeline' must be an array");
  for (const auto& step : j["pipeline"]) {
    if (step.is_string()) {
      c.pipeline.push_back({step.get<std::string>(), {}});
      continue;
    }
    if (!step.is_object()) config_error("pipeline steps must be names or {plugin, params} objects");
    only_keys(step, {"plugin", "params"}, "pipeline step");
    PipelineStep s{get<std::string>(step, "plugin", "pipeline step"), {}};
    if (step.contains("params")) s.params = param_map_from_json(step["params"]);
    c.pipeline.push_back(std::move(s));
  }

  if (j.contains("metrics")) {
    c.metrics = get<std::vector<std::string>>(j, "metrics", "config");
  } else {
    c.metrics = {default_metric(c.task).name};
  }
  if (c.metrics.empty()) config_error("config 'metrics' is empty");
  for (const auto& m : c.metrics) (void)Metric::parse(m);

  if (j.contains("cv")) {
    const auto& cv = j["cv"];
    if (!cv.is_object()) config_error("config 'cv' must be an object");
    only_keys(cv, {"folds", "seed"}, "cv");
    if (cv.contains("folds")) c.folds = get<std::size_t>(cv, "folds", "cv");
    if (cv.contains("seed")) c.seed = get<std::uint64_t>(cv, "seed", "cv");
  }
  if (c.folds < 2) config_error("cv 'folds' must be at least 2");
  if (j.contains("output")) c.output = resolve(get<std::string>(j, "output", "config"), base_dir);
  if (j.contains("holdout")) {
    c.holdout = get<std::size_t>(j, "holdout", "config");
    if (*c.holdout == 0) config_error("'holdout' must be at least 1");
  }
  if (j.contains("truth")) c.truth = resolve(get<std::string>(j, "truth", "config"), base_dir);
  if (j.contains("importance")) {
    const auto& imp = j["importance"];
    if (!imp.is_object()) config_error("config 'importance' must be an object");
    only_keys(imp, {"metric", "repeats", "seed"}, "importance");
    ImportanceConfig ic;
    if (imp.contains("metric")) ic.metric = get<std::string>(imp, "metric", "importance");
    if (imp.contains("repeats")) ic.repeats = get<std::size_t>(imp, "repeats", "importance");
    if (imp.contains("seed")) ic.seed = get<std::uint64_t>(imp, "seed", "importance");
    c.importance = ic;
  }
  if (j.contains("timing")) c.timing = get<bool>(j, "timing", "config");
  return c;
}

BenchConfig load_config(const std::string& path) {
  const std::string text = read_file(path);
  const auto dir = fs::path(path).parent_path();
  return parse_config(text, dir.empty() ? "." : dir.string());
}

void validate_config(const BenchConfig& config, const Registry& registry) {
  const Estimator est = registry.build_pipeline(config.pipeline);
  const auto task = task_of(est.category(), est.output());
  if (!task || *task != config.task) {
    config_error("task '" + std::string(to_string(config.task)) + "' does not match the final pipeline step (" +
                 std::string(to_string(est.category())) + ")");
  }
  for (const auto& name : config.metrics) {
    const Metric m = Metric::parse(name);
    if (!applicable(m, config.task)) {
      fail(ErrorCode::MetricMismatch,
           "metric '" + name + "' does not apply to task '" + std::string(to_string(config.task)) + "'");
    }
    if (m.name == "pehe" && config.truth.empty()) config_error("metric 'pehe' needs a 'truth' effects file");
  }
  if (config.importance) {
    if (config.task != Task::Classify && config.task != Task::Survival && config.task != Task::Forecast) {
      config_error("importance needs a predictor or survival pipeline");
    }
    const auto& m = config.importance->metric;
    if (m != "auto" && !applicable(Metric::parse(m), config.task)) {
      fail(ErrorCode::MetricMismatch, "importance metric '" + m + "' does not apply to this task");
    }
  }
}

// --- running ----------------------------------------------------------------

std::vector<std::pair<std::string, double>> read_effects(const std::string& path) {
  const auto records = parse_csv(read_file(path), path);
  if (records.empty() || records.front().fields != std::vector<std::string>{"sample_id", "tau"}) {
    fail(ErrorCode::ParseError, path + ": expected header 'sample_id,tau'");
  }
  std::vector<std::pair<std::string, double>> out;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    auto tau = rec.fields.size() == 2 ? parse_real(rec.fields[1]) : std::nullopt;
    if (!tau) fail(ErrorCode::ParseError, path + ":" + std::to_string(rec.line) + ": expected sample_id,tau");
    out.emplace_back(rec.fields[0], *tau);
  }
  return out;
}

namespace {

struct ForecastSplit {
  Dataset input;
  Dataset truth;
};

// Holds out the last `holdout` points of every temporal target per sample;
// every temporal feature is cut at the earliest held-out time.
ForecastSplit split_forecast(const Dataset& test, std::size_t holdout) {
  if (!test.temporal()) fail(ErrorCode::RequirementUnmet, "forecasting needs a temporal container", "missing_temporal");
  const auto& ts = *test.temporal();
  const auto targets = test.features(Role::Target, Modality::Temporal);
  std::vector<std::vector<TimePoint>> input, truth;
  for (std::size_t i = 0; i < ts.num_samples(); ++i) {
    double cutoff = std::numeric_limits<double>::infinity();
    for (const auto& ref : targets) {
      const auto s = ts.series(i, ref.index);
      if (s.size() <= holdout) {
        fail(ErrorCode::InsufficientHistory, "sample '" + ts.sample_ids()[i] + "' has " + std::to_string(s.size()) +
                                                 " '" + ref.spec->id + "' points; holding out " +
                                                 std::to_string(holdout) + " leaves no history");
      }
      cutoff = std::min(cutoff, s[s.size() - holdout].time);
    }
    for (std::size_t f = 0; f < ts.num_features(); ++f) {
      auto& in = input.emplace_back();
      auto& out = truth.emplace_back();
      for (const auto& p : ts.series(i, f)) (p.time < cutoff ? in : out).push_back(p);
    }
  }
  std::vector<std::string> ids(ts.sample_ids().begin(), ts.sample_ids().end());
  std::vector<FeatureSpec> specs(ts.features().begin(), ts.features().end());
  return {with_temporal(test, TimeSeriesSamples(ids, specs, std::move(input)), test.roles()),
          with_temporal(test, TimeSeriesSamples(ids, specs, std::move(truth)), test.roles())};
}

std::size_t forecast_holdout(const BenchConfig& config, const Registry& registry) {
  if (config.holdout) return *config.holdout;
  const auto& last = config.pipeline.back();
  const Params p = Params::resolve(registry.spec(last.plugin).schema, last.params);
  if (p.values().contains("horizon")) return static_cast<std::size_t>(p.integer("horizon"));
  return 1;
}

std::vector<CellValue> both_arms(const Dataset& ds) {
  const auto refs = ds.features(Role::Treatment);
  if (refs.size() != 1) fail(ErrorCode::NonBinaryTreatment, "expected exactly one treatment feature");
  const auto& kind = refs.front().spec->kind;
  if (kind.tag() == KindTag::Categorical) return {category(kind.categories()[0]), category(kind.categories()[1])};
  return {integer(0), integer(1)};
}

FoldResult run_fold(const BenchConfig& config, const Registry& registry, const Fold& fold,
                    const std::vector<std::pair<std::string, double>>& effects) {
  const auto start = std::chrono::steady_clock::now();
  FoldResult r{fold.index, fold.train.num_samples(), fold.test.num_samples(), {}, 0, std::nullopt};
  const FittedEstimator fitted = registry.build_pipeline(config.pipeline).fit(fold.train);

  Dataset input = fold.test;
  Dataset truth = fold.test;
  if (config.task == Task::Forecast) {
    auto split = split_forecast(fold.test, forecast_holdout(config, registry));
    input = std::move(split.input);
    truth = std::move(split.truth);
  }

  std::vector<double> tau;
  if (!effects.empty()) {
    for (const auto& id : fold.test.sample_ids()) {
      auto it = std::find_if(effects.begin(), effects.end(), [&](const auto& e) { return e.first == id; });
      if (it == effects.end()) fail(ErrorCode::AlignmentError, "truth file has no effect for sample '" + id + "'");
      tau.push_back(it->second);
    }
  }

  std::optional<Predictions> plain;
  std::optional<Predictions> counterfactual;
  for (const auto& name : config.metrics) {
    const Metric m = Metric::parse(name);
    if (m.name == "pehe") {
      if (!counterfactual) counterfactual = fitted.predict_counterfactuals(input, both_arms(input));
      r.metrics.push_back({name, evaluate(m, *counterfactual, truth, tau)});
    } else {
      if (!plain) plain = fitted.predict(input);
      r.metrics.push_back({name, evaluate(m, *plain, truth)});
    }
  }

  if (config.importance) {
    const auto wrapped = registry.wrap(fitted, "interpret.perm_importance",
                                       {{"metric", config.importance->metric},
                                        {"repeats", static_cast<std::int64_t>(config.importance->repeats)},
                                        {"seed", static_cast<std::int64_t>(config.importance->seed)}});
    r.importance = interpret::importance(wrapped, input, truth);
  }
  if (config.timing) r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

}  // namespace

BenchReport run_benchmark(const BenchConfig& config, const Registry& registry) {
  validate_config(config, registry);
  const Dataset ds = read_bundle(config.bundle);
  std::vector<std::pair<std::string, double>> effects;
  if (!config.truth.empty()) effects = read_effects(config.truth);

  BenchReport report{TEMPOFRAME_VERSION, config.hash, config.source, {}, {}};
  for (const auto& fold : kfold_split(ds, config.folds, config.seed)) {
    detail::log().info("fold {}: {} train / {} test samples", fold.index, fold.train.num_samples(),
                       fold.test.num_samples());
    try {
      report.folds.push_back(run_fold(config, registry, fold, effects));
    } catch (const Error& e) {
      throw e.with_context("fold " + std::to_string(fold.index));
    }
  }
  for (std::size_t m = 0; m < config.metrics.size(); ++m) {
    double sum = 0;
    for (const auto& f : report.folds) sum += f.metrics[m].value;
    const double mean = sum / static_cast<double>(report.folds.size());
    double ss = 0;
    for (const auto& f : report.folds) ss += (f.metrics[m].value - mean) * (f.metrics[m].value - mean);
    report.summary.push_back({config.metrics[m], mean, std::sqrt(ss / static_cast<double>(report.folds.size()))});
  }
  if (!config.output.empty()) write_file(config.output, format_report(report));
  return report;
}

// --- report text ------------------------------------------------------------

namespace {

std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void emit(const ojson& j, std::string& out, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
  if (j.is_object()) {
    if (j.empty()) {
      out += "{}";
      return;
    }
    out += "{\n";
    bool first = true;
    for (const auto& [k, v] : j.items()) {
      if (!first) out += ",\n";
      first = false;
      out += inner + ojson(k).dump() + ": ";
      emit(v, out, indent + 1);
    }
    out += "\n" + pad + "}";
  } else if (j.is_array()) {
    if (j.empty()) {
      out += "[]";
      return;
    }
    out += "[\n";
    for (std::size_t k = 0; k < j.size(); ++k) {
      if (k) out += ",\n";
      out += inner;
      emit(j[k], out, indent + 1);
    }
    out += "\n" + pad + "]";
  } else if (j.is_number_float()) {
    out += number(j.get<double>());
  } else {
    out += j.dump();
  }
}

}  // namespace

std::string format_report(const BenchReport& report) {
  char hash[17];
  std::snprintf(hash, sizeof(hash), "%016" PRIx64, report.config_hash);
  ojson j;
  j["tempoframe_version"] = report.version;
  j["config_hash"] = hash;
  j["config"] = report.config;
  j["folds"] = ojson::array();
  for (const auto& f : report.folds) {
    ojson fj;
    fj["index"] = f.index;
    fj["train_samples"] = f.train_samples;
    fj["test_samples"] = f.test_samples;
    fj["metrics"] = ojson::object();
    for (const auto& m : f.metrics) fj["metrics"][m.metric] = m.value;
    if (f.importance) {
      ojson imp;
      imp["metric"] = f.importance->metric;
      imp["repeats"] = f.importance->repeats;
      imp["seed"] = f.importance->seed;
      imp["baseline"] = f.importance->baseline;
      imp["features"] = ojson::array();
      for (const auto& fi : f.importance->features) {
        imp["features"].push_back({{"feature", fi.feature}, {"importance", fi.importance}, {"spread", fi.spread}});
      }
      fj["importance"] = imp;
    }
    fj["seconds"] = f.seconds;
    j["folds"].push_back(fj);
  }
  j["summary"] = ojson::object();
  for (const auto& s : report.summary) j["summary"][s.metric] = {{"mean", s.mean}, {"stddev", s.stddev}};
  std::string out;
  emit(j, out, 0);
  out += "\n";
  return out;
}

void write_synthetic(const treatment::SynthSpec& spec, const std::string& dir) {
  const auto data = treatment::synth_treatment_data(spec);
  write_bundle(data.data, dir);
  std::string truth = format_csv_record(std::vector<std::string>{"sample_id", "tau"});
  const auto ids = data.data.sample_ids();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    truth += format_csv_record(std::vector<std::string>{ids[i], format_real(data.tau[i])});
  }
  write_file((fs::path(dir) / "truth.csv").string(), truth);
}

}  // namespace tempoframe::bench
