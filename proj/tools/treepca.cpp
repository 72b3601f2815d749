// Command-line experiment runner: executes experiment configs (from JSON
// files or built-in preset grids), writes per-experiment CSV/JSON reports,
// and prints a one-line summary per experiment.

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "treepca/bench.hpp"

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> runs;
  std::optional<std::int64_t> mc_samples;
};

void apply(const Overrides& ov, treepca::ExperimentConfig& cfg) {
  if (ov.seed) cfg.base_seed = *ov.seed;
  if (ov.runs) cfg.runs = *ov.runs;
  if (ov.mc_samples) cfg.mc_samples = *ov.mc_samples;
}

std::string default_out_dir() {
  const char* env = std::getenv("TREEPCA_OUT_DIR");
  return env && *env ? env : "out";
}

// Runs one config, writes its report, prints a summary line; returns the
// number of failed runs.
int run_one(const treepca::ExperimentConfig& cfg, const std::string& out_dir,
            const std::string& format) {
  treepca::RunReport report = treepca::run_experiment(cfg);
  treepca::write_report(report, out_dir, format);
  std::printf("%-48s runs=%d failures=%d", report.config.effective_label().c_str(),
              static_cast<int>(report.rows.size()), report.failures);
  if (report.failures < static_cast<int>(report.rows.size())) {
    std::printf("  err_l2=[%.2e,%.2e,%.2e]  M=%lld  S=%lld  max_rank=%g", report.err_l2.q05,
                report.err_l2.q50, report.err_l2.q95,
                static_cast<long long>(report.evaluations.q50),
                static_cast<long long>(report.storage.q50), report.max_rank.q95);
  }
  std::printf("\n");
  for (const treepca::RunRow& row : report.rows)
    if (!row.ok) std::printf("  run %d failed: %s\n", row.run, row.message.c_str());
  return report.failures;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tree tensor approximation experiments"};
  app.require_subcommand(1);

  std::string out_dir = default_out_dir();
  std::string format = "both";
  Overrides ov;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--out", out_dir, "output directory")->capture_default_str();
    cmd->add_option("--format", format, "csv, json or both")->capture_default_str();
    cmd->add_option("--seed", ov.seed, "override base seed");
    cmd->add_option("--runs", ov.runs, "override run count");
    cmd->add_option("--mc-samples", ov.mc_samples, "override Monte-Carlo sample count");
  };

  std::string config_path;
  CLI::App* run_cmd = app.add_subcommand("run", "run experiments from a JSON config file");
  run_cmd->add_option("--config", config_path, "JSON config (object or array)")->required();
  add_common(run_cmd);

  std::string table_name;
  CLI::App* table_cmd = app.add_subcommand("table", "run a named preset experiment grid");
  table_cmd->add_option("name", table_name, "preset name, or 'all'")->required();
  add_common(table_cmd);

  CLI::App* list_cmd = app.add_subcommand("presets", "list preset names");

  CLI11_PARSE(app, argc, argv);

  try {
    if (list_cmd->parsed()) {
      for (const std::string& name : treepca::preset_names()) std::printf("%s\n", name.c_str());
      return 0;
    }

    std::vector<treepca::ExperimentConfig> configs;
    if (run_cmd->parsed()) {
      std::ifstream in(config_path);
      if (!in) throw std::runtime_error("cannot open config file: " + config_path);
      nlohmann::json j = nlohmann::json::parse(in);
      if (j.is_array())
        configs = j.get<std::vector<treepca::ExperimentConfig>>();
      else
        configs.push_back(j.get<treepca::ExperimentConfig>());
    } else {
      if (table_name == "all") {
        for (const std::string& name : treepca::preset_names())
          for (treepca::ExperimentConfig& cfg : treepca::preset_configs(name))
            configs.push_back(std::move(cfg));
      } else {
        configs = treepca::preset_configs(table_name);
      }
    }

    int failures = 0;
    for (treepca::ExperimentConfig& cfg : configs) {
      apply(ov, cfg);
      failures += run_one(cfg, out_dir, format);
    }
    return failures == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
