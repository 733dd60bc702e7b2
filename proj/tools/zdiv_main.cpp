#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "zdiv/experiments.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::string preset;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::size_t workers = 0;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config_path, "key = value config file");
  cmd->add_option("--preset", o.preset, "scale preset: desk or paper")
      ->check(CLI::IsMember({"desk", "paper"}));
  cmd->add_option("--out", o.out_dir, "output directory");
  cmd->add_option("--seed", o.seed, "override the seed list with one seed")
      ->each([&](const std::string&) { o.seed_set = true; });
  cmd->add_option("--workers", o.workers, "worker threads for sweeps");
}

zdiv::ExperimentConfig resolve(const CommonOpts& o,
                               const std::string& default_scenario) {
  zdiv::KeyValueConfig kv;
  if (!o.config_path.empty()) kv = zdiv::KeyValueConfig::parse_file(o.config_path);
  if (!kv.has("scenario")) kv.set("scenario", default_scenario);
  if (!o.preset.empty()) kv.set("preset", o.preset);
  if (!o.out_dir.empty()) kv.set("out_dir", o.out_dir);
  if (o.seed_set) kv.set("seeds", std::to_string(o.seed));
  if (o.workers > 0) kv.set("workers", std::to_string(o.workers));
  return zdiv::ExperimentConfig::from_kv(kv);
}

int run_train(const zdiv::ExperimentConfig& cfg) {
  using namespace zdiv;
  const std::uint64_t seed = cfg.seeds.front();
  const LinkMode mode = cfg.modes.front();
  const double l2 = cfg.l2_km.empty() ? 0.0 : cfg.l2_km.front();
  const double power = cfg.power_dbm.front();

  const TrainConfig tc = train_config_from(cfg, mode, l2, power, seed);
  const TransceiverParams p0 = initial_params(cfg, seed);
  const TrainResult tr = train(tc, p0);

  std::filesystem::create_directories(cfg.out_dir);
  const auto base = std::filesystem::path(cfg.out_dir) / "transceiver";
  save_transceiver(tr.params, base.string(), seed, tc.steps, tr.loss_history);
  std::printf("trained %zu steps, final loss %.6f nats, saved to %s\n",
              tc.steps, tr.loss_history.back(), base.string().c_str());
  return 0;
}

int run_eval(const zdiv::ExperimentConfig& cfg) {
  using namespace zdiv;
  const std::uint64_t seed = cfg.seeds.front();
  const LinkMode mode = cfg.modes.front();
  const double l2 = cfg.l2_km.empty() ? 0.0 : cfg.l2_km.front();
  const double power = cfg.power_dbm.front();

  const auto base = std::filesystem::path(cfg.out_dir) / "transceiver";
  const TransceiverParams p = load_transceiver(base.string());
  const TrainConfig tc = train_config_from(cfg, mode, l2, power, seed);
  const MetricsResult m = evaluate(p, tc, cfg.eval_frames);
  const std::string js = evaluation_json(m, tc);

  std::ofstream((std::filesystem::path(cfg.out_dir) / "eval.json").string())
      << js << "\n";
  std::printf("%s\n", js.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"z-diversity fiber link experiments"};
  app.require_subcommand(1);

  CommonOpts opts;
  struct Cmd {
    const char* name;
    const char* scenario;
    const char* help;
  };
  const Cmd cmds[] = {
      {"soliton-demo", "soliton-demo", "soliton spectral breathing demo"},
      {"sweep-l2", "soliton-l2-sweep", "MI / gain versus second fiber length"},
      {"sweep-power", "ae-power-sweep", "spectral efficiency versus launch power"},
      {"baselines", "baseline-curves", "CDC and DBP reference curves"},
      {"train", "ae-l2-sweep", "train one transceiver and save a checkpoint"},
      {"eval", "ae-l2-sweep", "evaluate a saved transceiver checkpoint"},
  };
  for (const Cmd& c : cmds) add_common(app.add_subcommand(c.name, c.help), opts);

  CLI11_PARSE(app, argc, argv);
  const std::string name = app.get_subcommands().front()->get_name();

  try {
    std::string scenario;
    for (const Cmd& c : cmds)
      if (name == c.name) scenario = c.scenario;
    zdiv::ExperimentConfig cfg = resolve(opts, scenario);

    if (name == "train") return run_train(cfg);
    if (name == "eval") return run_eval(cfg);

    // sweep-l2 follows the config's scenario when it names the ae sweep
    if (name == "sweep-l2" && cfg.scenario != "ae-l2-sweep")
      cfg.scenario = "soliton-l2-sweep";
    const auto rows = zdiv::run_scenario(cfg);
    if (cfg.scenario == "soliton-demo") {
      std::printf("wrote soliton demo CSVs to %s\n", cfg.out_dir.c_str());
    } else {
      std::printf("wrote %zu rows to %s/%s.csv\n", rows.size(),
                  cfg.out_dir.c_str(), cfg.scenario.c_str());
    }
    return 0;
  } catch (const std::exception& e) {
    nlohmann::json err;
    err["error"] = e.what();
    err["command"] = name;
    std::fprintf(stderr, "%s\n", err.dump().c_str());
    return 1;
  }
}
