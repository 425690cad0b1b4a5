#include "cli.hpp"

#include <filesystem>
#include <ostream>

#include <CLI11.hpp>

#include "tempoframe/bench.hpp"
#include "tempoframe/error.hpp"
#include "tempoframe/io/bundle.hpp"
#include "tempoframe/plugin.hpp"

namespace tempoframe::cli {

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kUsage = 2;

int run_config(const std::string& path, const std::string& output, std::ostream& out, std::ostream& err) {
  if (!std::filesystem::is_regular_file(path)) {
    err << "error: config file '" << path << "' not found\n";
    return kUsage;
  }
  try {
    auto config = bench::load_config(path);
    if (!output.empty()) config.output = output;
    const auto report = bench::run_benchmark(config);
    for (const auto& s : report.summary) {
      out << s.metric << " mean " << format_real(s.mean) << " stddev " << format_real(s.stddev) << "\n";
    }
    if (!config.output.empty()) out << "report written to " << config.output << "\n";
    return kOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kFailed;
  }
}

int validate(const std::string& path, std::ostream& out) {
  const auto violations = io::validate_bundle(path);
  for (const auto& v : violations) out << v << "\n";
  return violations.empty() ? kOk : kFailed;
}

int list_plugins(const std::string& category, std::ostream& out) {
  const auto& registry = builtin_registry();
  std::vector<std::string> names;
  if (category.empty()) {
    names = registry.list();
  } else if (auto c = category_from_string(category)) {
    names = registry.list(*c);
  }
  for (const auto& n : names) out << n << "\n";
  return kOk;
}

int synth(const treatment::SynthSpec& spec, const std::string& dir, std::ostream& out, std::ostream& err) {
  try {
    bench::write_synthetic(spec, dir);
    out << "wrote " << spec.n << " samples to " << dir << "\n";
    return kOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::InvalidSpec ? kUsage : kFailed;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"tempoframe: benchmarking for static, temporal and event patient data", "tempoframe"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run_cmd = app.add_subcommand("run", "run a benchmark config");
  std::string report_path;
  run_cmd->add_option("config", config_path, "benchmark config (JSON)")->required();
  run_cmd->add_option("--output", report_path, "write the report here instead of the config's output path");

  std::string bundle_path;
  auto* validate_cmd = app.add_subcommand("validate", "check a dataset bundle and print violations");
  validate_cmd->add_option("bundle", bundle_path, "bundle directory or manifest.json")->required();

  std::string category;
  auto* plugins_cmd = app.add_subcommand("plugins", "list registered plugins");
  plugins_cmd->add_option("--category", category, "only plugins of this category");

  treatment::SynthSpec spec;
  std::string out_dir;
  auto* synth_cmd = app.add_subcommand("synth-ite", "write a synthetic treatment-effect bundle and truth.csv");
  synth_cmd->add_option("--n", spec.n, "number of samples")->required();
  synth_cmd->add_option("--seed", spec.seed, "generator seed")->required();
  synth_cmd->add_option("--out", out_dir, "output directory")->required();
  synth_cmd->add_option("--tau", spec.tau0, "constant treatment effect")->capture_default_str();
  synth_cmd->add_option("--sigma", spec.sigma, "outcome noise standard deviation")->capture_default_str();
  synth_cmd->add_option("--dims", spec.dims, "number of covariates")->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n\n" << app.help();
    return kUsage;
  }

  if (*run_cmd) return run_config(config_path, report_path, out, err);
  if (*validate_cmd) return validate(bundle_path, out);
  if (*plugins_cmd) return list_plugins(category, out);
  if (*synth_cmd) return synth(spec, out_dir, out, err);
  err << app.help();
  return kUsage;
}

}  // namespace tempoframe::cli
