#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lmdc/ddpg.hpp"
#include "lmdc/environment.hpp"

namespace lmdc {

enum class ControllerKind { situation_aware, blind_ddpg, lmc };

const char* to_string(ControllerKind k);
ControllerKind controller_from_string(const std::string& name);

// A frozen policy. Learned kinds need an actor; lmc is analytic. blind_ddpg
// zeroes the ray entries of every observation before the actor sees it.
struct Controller {
  ControllerKind kind = ControllerKind::lmc;
  const Mlp* actor = nullptr;

  bool needs_checkpoint() const { return kind != ControllerKind::lmc; }
};

// Straight-line pursuit: the unit direction toward the target, clamped per
// axis; ray readings are ignored entirely. Zero rel_target gives zero.
Action lmc_action(const State& x);

// Greedy action of the controller (sigma = 0 for learned policies).
Action controller_action(const Controller& c, const State& x);

struct SweepConfig {
  std::vector<double> densities{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  int rounds = 10;
  int trials_per_round = 20;
  std::uint64_t eval_seed = 0;
  int n_workers = 1;  // 0: one per hardware thread

  WorldConfig world;
  RayConfig rays;
  RewardConfig reward;

  void validate() const;
};

struct RoundResult {
  double density = 0.0;
  int round = 0;  // 1-based, as reported
  int successes = 0;
  int trials = 0;
};

struct DensityStats {
  double density = 0.0;
  double max = 0.0;
  double avg = 0.0;
  double median = 0.0;
  double min = 0.0;
};

struct SweepResult {
  std::vector<RoundResult> rounds;    // (density, round) order
  std::vector<DensityStats> summary;  // one per density
  int trials_per_round = 0;
};

// One full greedy episode; success iff the terminal status is success.
bool run_trial(const Controller& c, double density, std::uint64_t seed,
               const WorldConfig& world, const RayConfig& rays, const RewardConfig& reward);

// Runs rounds x trials per density with per-trial seeds derived from
// (eval_seed, density, round, trial). Trials may fan out across workers;
// results are merged in (density, round, trial) order regardless.
SweepResult run_sweep(const Controller& c, const SweepConfig& cfg);

struct ImprovementCell {
  double value = 0.0;
  bool defined = false;  // false when the baseline statistic is 0
};

struct ImprovementRow {
  double density = 0.0;
  ImprovementCell max, avg, median, min;
};

struct ImprovementTable {
  std::vector<ImprovementRow> rows;
};

// Per-density, per-statistic percent improvement of proposed over baseline:
// 100 * (proposed - baseline) / baseline, undefined where baseline is 0.
ImprovementTable improvement(const SweepResult& proposed, const SweepResult& baseline);
ImprovementTable improvement(const std::vector<DensityStats>& proposed,
                             const std::vector<DensityStats>& baseline);

// Spearman rank correlation with average ranks for ties.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

// Writes one record per step (plus the initial pose) as line-delimited JSON
// objects: step, agent, target, action, reward, rays, status. Replaying the
// logged actions through a world generated from (density, seed) reproduces
// the logged states exactly. When components_csv_path is nonempty, a CSV of
// the per-step reward decomposition (step penalty, progress, obstacle
// penalty, terminal bonus) lands there.
void export_trajectory(const Controller& c, double density, std::uint64_t seed,
                       const WorldConfig& world, const RayConfig& rays,
                       const RewardConfig& reward, const std::string& out_path,
                       const std::string& components_csv_path = "");

// CSV renderings (6 significant digits, fixed ordering).
std::string rounds_csv(const SweepResult& r);
std::string summary_csv(const SweepResult& r);
std::string improvement_csv(const ImprovementTable& t);
std::vector<DensityStats> parse_summary_csv(const std::string& text);

}  // namespace lmdc
