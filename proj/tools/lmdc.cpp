// Command-line front end: train, sweep, eval, export.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lmdc/checkpoint.hpp"
#include "lmdc/config.hpp"
#include "lmdc/evaluation.hpp"
#include "lmdc/io.hpp"
#include "lmdc/training.hpp"

namespace {

using namespace lmdc;

struct CommonOpts {
  std::string config_path;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "Config file of 'key = value' lines");
  cmd->add_option("--set", opts.sets, "Override one config key, e.g. --set train.gamma=0.9")
      ->take_all();
  cmd->add_option("--seed", opts.seed, "Seed shorthand (train.seed or eval.seed)");
}

// Layering: defaults (or a checkpoint snapshot), then the config file, then
// --set overrides, then the --seed shorthand.
void apply_common(RunConfig& cfg, const CommonOpts& opts, bool seed_is_training) {
  if (!opts.config_path.empty()) {
    apply_config_text(cfg, read_text_file(opts.config_path), opts.config_path);
  }
  for (const std::string& kv : opts.sets) {
    const std::size_t eq = kv.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
    }
    auto trim = [](std::string s) {
      const std::size_t b = s.find_first_not_of(" \t");
      if (b == std::string::npos) return std::string();
      const std::size_t e = s.find_last_not_of(" \t");
      return s.substr(b, e - b + 1);
    };
    set_key(cfg, trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
  }
  if (opts.seed) {
    if (seed_is_training) {
      cfg.train.master_seed = *opts.seed;
    } else {
      cfg.eval.seed = *opts.seed;
    }
  }
}

int env_thread_cap() {
  const char* raw = std::getenv("LMDC_THREADS");
  if (!raw || !*raw) return 0;
  char* end = nullptr;
  const long v = std::strtol(raw, &end, 10);
  if (end == raw || *end != '\0' || v < 0) {
    throw std::invalid_argument("LMDC_THREADS must be a non-negative integer, got '" +
                                std::string(raw) + "'");
  }
  return static_cast<int>(v);
}

// 0 means one worker per hardware thread; LMDC_THREADS caps the result.
int resolve_workers(int configured) {
  int workers = configured;
  const int cap = env_thread_cap();
  if (cap > 0) {
    if (workers == 0) {
      workers = cap;
    } else {
      workers = std::min(workers, cap);
    }
  }
  return workers;
}

Controller make_controller(ControllerKind kind, const Checkpoint* ck) {
  Controller c;
  c.kind = kind;
  if (kind != ControllerKind::lmc) {
    if (!ck) {
      throw std::invalid_argument(std::string("controller '") + to_string(kind) +
                                  "' needs --checkpoint");
    }
    c.actor = &ck->agent.actor;
  }
  return c;
}

void check_density(double d) {
  if (!(d >= 0.0 && d <= 1.0)) {
    throw std::invalid_argument("density " + format_sig6(d) + " is outside [0, 1]");
  }
}

// runs.csv + "summary" -> runs.summary.csv; the derived file is always CSV.
std::string sibling_path(const std::string& out, const char* tag) {
  namespace fs = std::filesystem;
  fs::path p(out);
  fs::path s = p;
  s.replace_filename(p.stem().string() + "." + tag + ".csv");
  return s.string();
}

int cmd_train(const CommonOpts& common, const std::string& out_path,
              const std::string& metrics_path) {
  RunConfig cfg;
  apply_common(cfg, common, /*seed_is_training=*/true);
  cfg.train.validate();

  std::ofstream metrics;
  if (!metrics_path.empty()) {
    metrics.open(metrics_path, std::ios::trunc);
    if (!metrics) throw std::runtime_error("cannot open " + metrics_path + " for writing");
  }

  EpisodeSink on_episode = [&](const EpisodeRecord& ep) {
    if (metrics.is_open()) {
      nlohmann::json rec;
      rec["step"] = ep.step;
      rec["episode"] = ep.episode;
      rec["return"] = ep.episode_return;
      rec["actor_loss"] = ep.has_losses ? nlohmann::json(ep.actor_loss) : nlohmann::json();
      rec["critic_loss"] = ep.has_losses ? nlohmann::json(ep.critic_loss) : nlohmann::json();
      rec["status"] = to_string(ep.status);
      metrics << rec.dump() << "\n";
      metrics.flush();
    }
    if (ep.episode % 50 == 0) {
      std::cerr << "episode " << ep.episode << " step " << ep.step << " return "
                << format_sig6(ep.episode_return) << " (" << to_string(ep.status) << ")\n";
    }
  };

  CheckpointHook on_checkpoint = [&](const AgentParams& agent, long step) {
    Checkpoint ck;
    ck.config = cfg;
    ck.trained_steps = step;
    ck.seed = cfg.train.master_seed;
    ck.agent = agent;
    save_checkpoint(ck, out_path);
  };

  TrainResult result = run_training(cfg.train, on_episode, on_checkpoint);

  Checkpoint ck;
  ck.config = cfg;
  ck.trained_steps = cfg.train.total_steps;
  ck.seed = cfg.train.master_seed;
  ck.agent = result.agent;
  save_checkpoint(ck, out_path);

  std::cerr << "trained " << cfg.train.total_steps << " steps in "
            << format_sig6(result.metrics.wall_seconds) << "s; checkpoint written to "
            << out_path << "\n";
  return 0;
}

struct SweepFlags {
  std::string densities;
  std::optional<int> rounds;
  std::optional<int> trials;
};

// Sweep output: <out> gets the per-round table; the per-density summary and,
// when a baseline summary is given, the improvement table land in siblings
// derived from the output name (runs.csv -> runs.summary.csv, ...).
int cmd_sweep(const CommonOpts& common, const SweepFlags& flags,
              const std::string& checkpoint_path, std::string controller_name,
              const std::string& out_path, const std::string& baseline_path) {
  std::optional<Checkpoint> ck;
  RunConfig cfg;
  if (!checkpoint_path.empty()) {
    ck = load_checkpoint(checkpoint_path);
    cfg = ck->config;  // snapshot first, file and --set override it
  }
  apply_common(cfg, common, /*seed_is_training=*/false);
  if (!flags.densities.empty()) set_key(cfg, "eval.densities", flags.densities);
  if (flags.rounds) cfg.eval.rounds = *flags.rounds;
  if (flags.trials) cfg.eval.trials = *flags.trials;

  if (controller_name.empty()) {
    controller_name =
        ck ? (cfg.train.blind ? "blind-ddpg" : "situation-aware") : "lmc";
  }
  const ControllerKind kind = controller_from_string(controller_name);
  const Controller controller = make_controller(kind, ck ? &*ck : nullptr);

  SweepConfig sweep = sweep_config(cfg);
  sweep.n_workers = resolve_workers(sweep.n_workers);
  const SweepResult result = run_sweep(controller, sweep);

  write_text_atomic(out_path, rounds_csv(result));
  const std::string summary_path = sibling_path(out_path, "summary");
  write_text_atomic(summary_path, summary_csv(result));
  std::cerr << "sweep rounds written to " << out_path << "\nsummary written to "
            << summary_path << "\n";

  if (!baseline_path.empty()) {
    const std::vector<DensityStats> base = parse_summary_csv(read_text_file(baseline_path));
    const ImprovementTable table = improvement(result.summary, base);
    const std::string improvement_path = sibling_path(out_path, "improvement");
    write_text_atomic(improvement_path, improvement_csv(table));
    std::cerr << "improvement over " << baseline_path << " written to " << improvement_path
              << "\n";
  }

  std::cout << summary_csv(result);
  return 0;
}

int cmd_eval(const CommonOpts& common, const std::string& checkpoint_path,
             std::string controller_name, double density, int episodes) {
  check_density(density);
  if (episodes < 1) throw std::invalid_argument("--episodes must be >= 1");

  std::optional<Checkpoint> ck;
  RunConfig cfg;
  if (!checkpoint_path.empty()) {
    ck = load_checkpoint(checkpoint_path);
    cfg = ck->config;
  }
  apply_common(cfg, common, /*seed_is_training=*/false);

  if (controller_name.empty()) {
    controller_name =
        ck ? (cfg.train.blind ? "blind-ddpg" : "situation-aware") : "lmc";
  }
  const Controller controller =
      make_controller(controller_from_string(controller_name), ck ? &*ck : nullptr);

  int wins = 0;
  for (int i = 0; i < episodes; ++i) {
    const std::uint64_t seed = derive_seed(cfg.eval.seed, 0xe7a1u, static_cast<std::uint64_t>(i));
    if (run_trial(controller, density, seed, cfg.train.world, cfg.train.rays,
                  cfg.train.reward)) {
      ++wins;
    }
  }
  std::cout << "controller " << controller_name << " density " << format_sig6(density)
            << ": " << wins << "/" << episodes << " successes\n";
  return 0;
}

int cmd_export(const CommonOpts& common, const std::string& checkpoint_path,
               std::string controller_name, double density, const std::string& out_path) {
  check_density(density);

  std::optional<Checkpoint> ck;
  RunConfig cfg;
  if (!checkpoint_path.empty()) {
    ck = load_checkpoint(checkpoint_path);
    cfg = ck->config;
  }
  apply_common(cfg, common, /*seed_is_training=*/false);

  if (controller_name.empty()) {
    controller_name =
        ck ? (cfg.train.blind ? "blind-ddpg" : "situation-aware") : "lmc";
  }
  const Controller controller =
      make_controller(controller_from_string(controller_name), ck ? &*ck : nullptr);

  const std::string components_path = sibling_path(out_path, "rewards");
  export_trajectory(controller, density, cfg.eval.seed, cfg.train.world, cfg.train.rays,
                    cfg.train.reward, out_path, components_path);
  std::cerr << "trajectory written to " << out_path << "\nreward components written to "
            << components_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic drone mobility-control sandbox: DDPG training and "
               "obstacle-density evaluation"};
  app.require_subcommand(1);

  CommonOpts train_common, sweep_common, eval_common, export_common;

  auto* train = app.add_subcommand("train", "Train a policy and write a checkpoint");
  add_common(train, train_common);
  std::string train_out = "policy.ckpt";
  std::string train_metrics;
  train->add_option("--out", train_out, "Checkpoint output path");
  train->add_option("--metrics", train_metrics, "Per-episode JSONL metrics path");

  auto* sweep = app.add_subcommand(
      "sweep", "Success-rate sweep over obstacle densities, CSV out");
  add_common(sweep, sweep_common);
  SweepFlags sweep_flags;
  std::string sweep_ckpt, sweep_controller, sweep_out = "sweep.csv", sweep_baseline;
  sweep->add_option("--checkpoint", sweep_ckpt, "Trained policy checkpoint");
  sweep->add_option("--controller", sweep_controller,
                    "situation-aware, blind-ddpg, or lmc (default: from checkpoint)");
  sweep->add_option("--densities", sweep_flags.densities,
                    "Comma-separated density list, each in [0, 1]");
  sweep->add_option("--rounds", sweep_flags.rounds, "Rounds per density");
  sweep->add_option("--trials", sweep_flags.trials, "Trials per round");
  sweep->add_option("--out", sweep_out, "Per-round CSV path; summary lands beside it");
  sweep->add_option("--baseline-csv", sweep_baseline,
                    "Summary CSV to compute percent improvement against");

  auto* eval = app.add_subcommand("eval", "Quick success count at one density");
  add_common(eval, eval_common);
  std::string eval_ckpt, eval_controller;
  double eval_density = 0.5;
  int eval_episodes = 20;
  eval->add_option("--checkpoint", eval_ckpt, "Trained policy checkpoint");
  eval->add_option("--controller", eval_controller,
                   "situation-aware, blind-ddpg, or lmc (default: from checkpoint)");
  eval->add_option("--density", eval_density, "Obstacle density in [0, 1]");
  eval->add_option("--episodes", eval_episodes, "Number of trials");

  auto* exp = app.add_subcommand("export", "Write one greedy trajectory as JSONL");
  add_common(exp, export_common);
  std::string export_ckpt, export_controller, export_out = "trajectory.jsonl";
  double export_density = 0.5;
  exp->add_option("--checkpoint", export_ckpt, "Trained policy checkpoint");
  exp->add_option("--controller", export_controller,
                  "situation-aware, blind-ddpg, or lmc (default: from checkpoint)");
  exp->add_option("--density", export_density, "Obstacle density in [0, 1]");
  exp->add_option("--out", export_out, "Trajectory output path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) return cmd_train(train_common, train_out, train_metrics);
    if (sweep->parsed()) {
      return cmd_sweep(sweep_common, sweep_flags, sweep_ckpt, sweep_controller, sweep_out,
                       sweep_baseline);
    }
    if (eval->parsed()) {
      return cmd_eval(eval_common, eval_ckpt, eval_controller, eval_density, eval_episodes);
    }
    if (exp->parsed()) {
      return cmd_export(export_common, export_ckpt, export_controller, export_density,
                        export_out);
    }
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 0;
}
