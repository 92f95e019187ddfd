#include "lmdc/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "lmdc/io.hpp"
#include "lmdc/rng.hpp"

namespace lmdc {

const char* to_string(ControllerKind k) {
  switch (k) {
    case ControllerKind::situation_aware: return "situation-aware";
    case ControllerKind::blind_ddpg: return "blind-ddpg";
    case ControllerKind::lmc: return "lmc";
  }
  return "lmc";
}

ControllerKind controller_from_string(const std::string& name) {
  if (name == "situation-aware") return ControllerKind::situation_aware;
  if (name == "blind-ddpg") return ControllerKind::blind_ddpg;
  if (name == "lmc") return ControllerKind::lmc;
  throw std::invalid_argument(
      "unknown controller '" + name + "' (expected situation-aware, blind-ddpg, or lmc)");
}

Action lmc_action(const State& x) {
  const double n = x.rel_target.norm();
  Action a;
  if (n == 0.0) return a;
  a.u[0] = std::clamp(x.rel_target.x / n, -1.0, 1.0);
  a.u[1] = std::clamp(x.rel_target.y / n, -1.0, 1.0);
  a.u[2] = std::clamp(x.rel_target.z / n, -1.0, 1.0);
  return a;
}

Action controller_action(const Controller& c, const State& x) {
  if (c.kind == ControllerKind::lmc) return lmc_action(x);
  if (!c.actor) throw std::invalid_argument("controller: learned policy without an actor");
  thread_local Rng unused(0);
  if (c.kind == ControllerKind::blind_ddpg) {
    State masked = x;
    std::fill(masked.rays.begin(), masked.rays.end(), 0.0);
    return select_action(*c.actor, masked, 0.0, unused);
  }
  return select_action(*c.actor, x, 0.0, unused);
}

void SweepConfig::validate() const {
  world.validate();
  reward.validate();
  if (rounds < 1) throw std::invalid_argument("SweepConfig: rounds must be >= 1");
  if (trials_per_round < 1) throw std::invalid_argument("SweepConfig: trials must be >= 1");
  if (densities.empty()) throw std::invalid_argument("SweepConfig: no densities given");
  for (double d : densities) {
    if (!(d >= 0.0 && d <= 1.0)) {
      throw std::invalid_argument("SweepConfig: density outside [0, 1]");
    }
  }
  if (n_workers < 0) throw std::invalid_argument("SweepConfig: negative worker count");
}

namespace {

std::uint64_t trial_seed(std::uint64_t eval_seed, double density, int round, int trial) {
  // Densities are keyed by a fixed-point image so that 0.1 read from a
  // config file and 0.1 computed in code produce identical streams.
  const auto dkey = static_cast<std::uint64_t>(std::llround(density * 1e6));
  return derive_seed(eval_seed, dkey, static_cast<std::uint64_t>(round),
                     static_cast<std::uint64_t>(trial));
}

}  // namespace

bool run_trial(const Controller& c, double density, std::uint64_t seed,
               const WorldConfig& world_cfg, const RayConfig& rays,
               const RewardConfig& reward) {
  WorldInstance world = generate_world(density, world_cfg, seed);
  State state = observe(world, world_cfg, rays);
  while (world.active()) {
    const Action a = controller_action(c, state);
    StepOutcome out = step(world, a, world_cfg, rays, reward);
    state = std::move(out.next_state);
  }
  return world.status == Status::success;
}

SweepResult run_sweep(const Controller& c, const SweepConfig& cfg) {
  cfg.validate();
  if (c.needs_checkpoint() && !c.actor) {
    throw std::invalid_argument("run_sweep: controller requires a loaded policy");
  }

  struct Cell {
    double density;
    int round;
  };
  std::vector<Cell> cells;
  cells.reserve(cfg.densities.size() * cfg.rounds);
  for (double d : cfg.densities) {
    for (int r = 0; r < cfg.rounds; ++r) cells.push_back({d, r});
  }
  std::vector<int> successes(cells.size(), 0);

  int workers = cfg.n_workers;
  if (workers == 0) {
    workers = static_cast<int>(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;
  }
  workers = std::min<int>(workers, static_cast<int>(cells.size()));

  std::atomic<std::size_t> next_cell{0};
  auto worker_fn = [&]() {
    for (;;) {
      const std::size_t i = next_cell.fetch_add(1);
      if (i >= cells.size()) return;
      int wins = 0;
      for (int t = 0; t < cfg.trials_per_round; ++t) {
        const std::uint64_t seed = trial_seed(cfg.eval_seed, cells[i].density, cells[i].round, t);
        if (run_trial(c, cells[i].density, seed, cfg.world, cfg.rays, cfg.reward)) ++wins;
      }
      successes[i] = wins;  // each cell slot is written by exactly one worker
    }
  };

  if (workers <= 1) {
    worker_fn();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int i = 0; i < workers; ++i) pool.emplace_back(worker_fn);
    for (auto& th : pool) th.join();
  }

  SweepResult result;
  result.trials_per_round = cfg.trials_per_round;
  result.rounds.reserve(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    result.rounds.push_back(
        {cells[i].density, cells[i].round + 1, successes[i], cfg.trials_per_round});
  }

  for (std::size_t di = 0; di < cfg.densities.size(); ++di) {
    std::vector<double> counts;
    counts.reserve(cfg.rounds);
    for (int r = 0; r < cfg.rounds; ++r) {
      counts.push_back(static_cast<double>(successes[di * cfg.rounds + r]));
    }
    std::sort(counts.begin(), counts.end());
    DensityStats s;
    s.density = cfg.densities[di];
    s.min = counts.front();
    s.max = counts.back();
    double sum = 0.0;
    for (double v : counts) sum += v;
    s.avg = sum / counts.size();
    const std::size_t n = counts.size();
    s.median = (n % 2 == 1) ? counts[n / 2] : 0.5 * (counts[n / 2 - 1] + counts[n / 2]);
    result.summary.push_back(s);
  }
  return result;
}

namespace {

ImprovementCell cell_of(double proposed, double baseline) {
  ImprovementCell c;
  if (baseline == 0.0) return c;
  c.defined = true;
  c.value = 100.0 * (proposed - baseline) / baseline;
  return c;
}

}  // namespace

ImprovementTable improvement(const std::vector<DensityStats>& proposed,
                             const std::vector<DensityStats>& baseline) {
  if (proposed.size() != baseline.size()) {
    throw std::invalid_argument("improvement: density lists differ");
  }
  ImprovementTable table;
  table.rows.reserve(proposed.size());
  for (std::size_t i = 0; i < proposed.size(); ++i) {
    if (std::abs(proposed[i].density - baseline[i].density) > 1e-9) {
      throw std::invalid_argument("improvement: density lists differ");
    }
    ImprovementRow row;
    row.density = proposed[i].density;
    row.max = cell_of(proposed[i].max, baseline[i].max);
    row.avg = cell_of(proposed[i].avg, baseline[i].avg);
    row.median = cell_of(proposed[i].median, baseline[i].median);
    row.min = cell_of(proposed[i].min, baseline[i].min);
    table.rows.push_back(row);
  }
  return table;
}

ImprovementTable improvement(const SweepResult& proposed, const SweepResult& baseline) {
  return improvement(proposed.summary, baseline.summary);
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw std::invalid_argument("spearman: need two equal-length series");
  }
  const auto ranks = [](const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t y) { return v[x] < v[y]; });
    std::vector<double> rank(n);
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i;
      while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
      const double shared = 0.5 * (i + j) + 1.0;  // average rank, 1-based
      for (std::size_t k = i; k <= j; ++k) rank[order[k]] = shared;
      i = j + 1;
    }
    return rank;
  };
  const std::vector<double> ra = ranks(a);
  const std::vector<double> rb = ranks(b);
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    ma += ra[i];
    mb += rb[i];
  }
  ma /= n;
  mb /= n;
  double cov = 0.0, va = 0.0, vb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    cov += (ra[i] - ma) * (rb[i] - mb);
    va += (ra[i] - ma) * (ra[i] - ma);
    vb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (va == 0.0 || vb == 0.0) {
    throw std::invalid_argument("spearman: a series is constant");
  }
  return cov / std::sqrt(va * vb);
}

void export_trajectory(const Controller& c, double density, std::uint64_t seed,
                       const WorldConfig& world_cfg, const RayConfig& rays,
                       const RewardConfig& reward, const std::string& out_path,
                       const std::string& components_csv_path) {
  WorldInstance world = generate_world(density, world_cfg, seed);
  State state = observe(world, world_cfg, rays);

  std::ostringstream lines;
  const auto emit = [&](int step_idx, const Action& a, double r, const State& s,
                        Status status) {
    nlohmann::json rec;
    rec["step"] = step_idx;
    rec["agent"] = {world.agent_pos.x, world.agent_pos.y, world.agent_pos.z};
    rec["target"] = {world.target_pos.x, world.target_pos.y, world.target_pos.z};
    rec["action"] = {a.u[0], a.u[1], a.u[2]};
    rec["reward"] = r;
    rec["rays"] = s.rays;
    rec["status"] = to_string(status);
    lines << rec.dump() << "\n";
  };

  std::string components = "step,step_penalty,progress,obstacle_penalty,terminal,total\n";
  const auto emit_components = [&](int step_idx, const RewardTerms& t) {
    components += std::to_string(step_idx);
    components += ',';
    components += format_sig6(t.step_penalty);
    components += ',';
    components += format_sig6(t.progress);
    components += ',';
    components += format_sig6(t.obstacle_penalty);
    components += ',';
    components += format_sig6(t.terminal);
    components += ',';
    components += format_sig6(t.total());
    components += '\n';
  };

  emit(0, Action{}, 0.0, state, Status::running);
  int step_idx = 0;
  while (world.active()) {
    const double prev_dist = world.prev_target_distance;
    const Action a = controller_action(c, state);
    StepOutcome out = step(world, a, world_cfg, rays, reward);
    ++step_idx;
    emit(step_idx, a, out.reward, out.next_state, out.status);
    if (!components_csv_path.empty()) {
      // The reward's ray set is the fan at the post-move position; the
      // normalized state readings recover it exactly (hit iff < max_range).
      std::vector<RayReading> readings(out.next_state.rays.size());
      for (std::size_t i = 0; i < readings.size(); ++i) {
        readings[i].distance = out.next_state.rays[i] * rays.max_range;
        readings[i].hit = out.next_state.rays[i] < 1.0;
      }
      emit_components(step_idx,
                      compute_reward_terms(prev_dist, world.prev_target_distance, readings,
                                           out.status, reward));
    }
    state = std::move(out.next_state);
  }
  write_text_atomic(out_path, lines.str());
  if (!components_csv_path.empty()) write_text_atomic(components_csv_path, components);
}

std::string rounds_csv(const SweepResult& r) {
  std::string out = "density,round,successes,trials\n";
  for (const RoundResult& row : r.rounds) {
    out += format_sig6(row.density);
    out += ',';
    out += std::to_string(row.round);
    out += ',';
    out += std::to_string(row.successes);
    out += ',';
    out += std::to_string(row.trials);
    out += '\n';
  }
  return out;
}

std::string summary_csv(const SweepResult& r) {
  std::string out = "density,max,avg,median,min\n";
  for (const DensityStats& s : r.summary) {
    out += format_sig6(s.density);
    out += ',';
    out += format_sig6(s.max);
    out += ',';
    out += format_sig6(s.avg);
    out += ',';
    out += format_sig6(s.median);
    out += ',';
    out += format_sig6(s.min);
    out += '\n';
  }
  return out;
}

std::string improvement_csv(const ImprovementTable& t) {
  const auto cell = [](const ImprovementCell& c) {
    return c.defined ? format_sig6(c.value) : std::string("-");
  };
  std::string out = "density,max,avg,median,min\n";
  for (const ImprovementRow& row : t.rows) {
    out += format_sig6(row.density);
    out += ',';
    out += cell(row.max);
    out += ',';
    out += cell(row.avg);
    out += ',';
    out += cell(row.median);
    out += ',';
    out += cell(row.min);
    out += '\n';
  }
  return out;
}

std::vector<DensityStats> parse_summary_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "density,max,avg,median,min") {
    throw std::invalid_argument("summary csv: unexpected header");
  }
  std::vector<DensityStats> stats;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    DensityStats s;
    double* slots[5] = {&s.density, &s.max, &s.avg, &s.median, &s.min};
    for (int i = 0; i < 5; ++i) {
      if (!std::getline(row, field, ',')) {
        throw std::invalid_argument("summary csv: short row");
      }
      *slots[i] = std::stod(field);
    }
    stats.push_back(s);
  }
  return stats;
}

}  // namespace lmdc
