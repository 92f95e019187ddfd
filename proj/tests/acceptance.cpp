// End-to-end acceptance gate. Prints one [PASS]/[FAIL] line per criterion
// and exits with the number of failures. The first six checks are
// arithmetic, oracle, and determinism gates that finish in seconds; the
// back half trains the situation-aware and blind policies with default
// settings and sweeps both across the full density grid, which takes
// roughly half an hour on one desktop core.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lmdc/ddpg.hpp"
#include "lmdc/environment.hpp"
#include "lmdc/evaluation.hpp"
#include "lmdc/geometry.hpp"
#include "lmdc/io.hpp"
#include "lmdc/mlp.hpp"
#include "lmdc/rng.hpp"
#include "lmdc/training.hpp"

using namespace lmdc;

namespace {

struct CriterionResult {
  bool pass = false;
  std::string detail;
};

CriterionResult g_results[11];

void record(int id, bool pass, const std::string& detail) {
  g_results[id] = {pass, detail};
  std::cerr << "criterion " << id << (pass ? " ok" : " FAILED") << ": " << detail << "\n";
}

// Runs one criterion body, turning any exception into an honest failure.
void criterion(int id, const std::function<CriterionResult()>& body) {
  try {
    const CriterionResult r = body();
    record(id, r.pass, r.detail);
  } catch (const std::exception& err) {
    record(id, false, std::string("exception: ") + err.what());
  }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------- fixtures

// Per-round success counts of a known-good pair of full sweeps (10 rounds
// at each density), with the improvement percentages worked out by hand.
// They pin the summary and improvement arithmetic end to end.
const std::vector<std::vector<int>> kProposedCounts = {
    {20, 20, 20, 20, 20, 20, 20, 20, 20, 20}, {18, 15, 18, 16, 17, 18, 18, 15, 19, 18},
    {16, 17, 13, 18, 17, 17, 17, 19, 15, 17}, {14, 17, 12, 17, 14, 18, 17, 17, 16, 16},
    {14, 15, 17, 16, 16, 15, 16, 17, 16, 10}, {12, 10, 13, 11, 12, 12, 12, 14, 13, 10},
    {10, 7, 8, 9, 14, 6, 14, 8, 12, 11},     {13, 9, 9, 6, 11, 6, 13, 9, 7, 8},
    {10, 8, 11, 7, 5, 11, 6, 13, 7, 8},      {8, 7, 5, 8, 10, 9, 11, 5, 5, 9},
    {7, 7, 5, 7, 10, 8, 10, 4, 5, 10}};
const std::vector<std::vector<int>> kBaselineCounts = {
    {20, 20, 20, 20, 20, 20, 20, 20, 20, 20}, {13, 17, 17, 13, 18, 15, 13, 17, 18, 16},
    {17, 13, 15, 14, 18, 13, 11, 15, 10, 14}, {15, 13, 14, 9, 10, 14, 8, 11, 7, 8},
    {9, 10, 6, 11, 12, 7, 8, 6, 4, 13},      {4, 8, 6, 8, 6, 8, 4, 4, 7, 6},
    {5, 4, 4, 2, 9, 10, 5, 5, 4, 7},         {6, 4, 5, 6, 3, 4, 5, 5, 3, 3},
    {4, 2, 2, 3, 1, 4, 3, 2, 2, 4},          {2, 1, 3, 2, 3, 3, 1, 1, 0, 1},
    {2, 1, 1, 2, 1, 0, 2, 3, 0, 4}};

// Hand-computed summary rows of the two fixtures above.
const double kProposedMax[11] = {20, 19, 19, 18, 17, 14, 14, 13, 13, 11, 10};
const double kProposedAvg[11] = {20, 17.2, 16.6, 15.8, 15.2, 11.9, 9.9, 9.1, 8.6, 7.7, 7.3};
const double kProposedMedian[11] = {20, 18, 17, 16.5, 16, 12, 9.5, 9, 8, 8, 7};
const double kProposedMin[11] = {20, 15, 13, 12, 10, 10, 6, 6, 5, 5, 4};
const double kBaselineAvg[11] = {20, 15.7, 14, 10.9, 8.6, 6.1, 5.5, 4.4, 2.7, 1.7, 1.6};

// Hand-computed improvement table, rounded as in the worked fixture; NAN
// marks cells where the baseline statistic is zero.
const double kImpMax[11] = {0, 5.5, 5.5, 20, 30.77, 75, 40, 116.67, 225, 266.67, 150};
const double kImpAvg[11] = {0,      9.55,   18.57, 44.95,  76.74, 95.08,
                            80,     106.82, 218.52, 352.94, 356.25};
const double kImpMedian[11] = {0,   9.09, 21.43, 57.14, 88.24, 100,
                               90,  100,  220,   433.33, 366.67};
const double kImpMin[11] = {0, 15.38, 30, 71.43, 150, 150, 200, 100, 400, NAN, NAN};

DensityStats stats_of(double density, std::vector<int> counts) {
  std::sort(counts.begin(), counts.end());
  DensityStats s;
  s.density = density;
  s.min = counts.front();
  s.max = counts.back();
  s.avg = std::accumulate(counts.begin(), counts.end(), 0.0) / counts.size();
  const std::size_t h = counts.size() / 2;
  s.median = counts.size() % 2 ? counts[h] : (counts[h - 1] + counts[h]) / 2.0;
  return s;
}

CriterionResult check_improvement_arithmetic() {
  std::vector<DensityStats> proposed, baseline;
  for (int i = 0; i < 11; ++i) {
    proposed.push_back(stats_of(i / 10.0, kProposedCounts[i]));
    baseline.push_back(stats_of(i / 10.0, kBaselineCounts[i]));
  }
  for (int i = 0; i < 11; ++i) {
    if (std::abs(proposed[i].max - kProposedMax[i]) > 1e-9 ||
        std::abs(proposed[i].avg - kProposedAvg[i]) > 1e-9 ||
        std::abs(proposed[i].median - kProposedMedian[i]) > 1e-9 ||
        std::abs(proposed[i].min - kProposedMin[i]) > 1e-9 ||
        std::abs(baseline[i].avg - kBaselineAvg[i]) > 1e-9) {
      return {false, "summary statistics disagree with the fixture at density " +
                         format_sig6(i / 10.0)};
    }
  }

  const ImprovementTable table = improvement(proposed, baseline);
  if (table.rows.size() != 11) return {false, "improvement table has the wrong shape"};
  auto cell_ok = [](const ImprovementCell& c, double expected) {
    if (std::isnan(expected)) return !c.defined;
    // The fixture rounds to two decimals (two cells to one), hence 0.06.
    return c.defined && std::abs(c.value - expected) <= 0.06;
  };
  for (int i = 0; i < 11; ++i) {
    const ImprovementRow& row = table.rows[i];
    if (!cell_ok(row.max, kImpMax[i]) || !cell_ok(row.avg, kImpAvg[i]) ||
        !cell_ok(row.median, kImpMedian[i]) || !cell_ok(row.min, kImpMin[i])) {
      return {false, "improvement cell mismatch at density " + format_sig6(i / 10.0)};
    }
  }
  // One cell checked sharp: avg 11.9 over 6.1 is +95.0819672...%.
  const double sharp = 100.0 * (11.9 - 6.1) / 6.1;
  if (std::abs(table.rows[5].avg.value - sharp) > 1e-9) {
    return {false, "avg improvement at density 0.5 is not exact"};
  }
  return {true, "summary and improvement tables reproduce the worked fixtures"};
}

// ------------------------------------------------------------- gradients

State random_state(Rng& rng) {
  State s;
  s.rel_target = {rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
  s.velocity = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
  s.rays.resize(9);
  for (double& r : s.rays) r = rng.uniform(0.0, 1.0);
  return s;
}

// Minibatches view transitions by pointer, so the fixture owns the storage.
struct BatchFixture {
  std::vector<Transition> storage;
  Minibatch batch;
};

BatchFixture random_batch(Rng& rng, int k) {
  BatchFixture f;
  f.storage.reserve(k);
  for (int i = 0; i < k; ++i) {
    Transition t;
    t.state = random_state(rng);
    t.action.u = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    t.reward = rng.uniform(-1.0, 1.0);
    t.next_state = random_state(rng);
    t.terminal = i % 3 == 0;
    f.storage.push_back(t);
  }
  for (const Transition& t : f.storage) f.batch.push_back(&t);
  return f;
}

template <typename LossFn>
double max_loss_fd_error(Mlp& net, const GradientBundle& analytic, LossFn&& loss) {
  const double h = 1e-5;
  const auto grads = analytic.flatten();
  auto params = net.flatten();
  double worst = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double save = params[i];
    params[i] = save + h;
    net.unflatten(params);
    const double up = loss();
    params[i] = save - h;
    net.unflatten(params);
    const double down = loss();
    params[i] = save;
    const double numeric = (up - down) / (2.0 * h);
    const double rel = std::abs(grads[i] - numeric) / std::max(1e-8, std::abs(numeric));
    worst = std::max(worst, rel);
  }
  net.unflatten(params);
  return worst;
}

CriterionResult check_gradients() {
  Rng rng(0xFD15);
  AgentParams agent = make_agent(15, 3, {128, 128}, rng);

  // Raw backward passes at the shapes training uses.
  double worst_raw = 0.0;
  for (int i = 0; i < 3; ++i) {
    const auto s = random_state(rng).flatten();
    worst_raw = std::max(worst_raw, finite_difference_check(
                                        agent.actor, s, std::vector<double>{0.3, -0.7, 0.9}));
    std::vector<double> critic_in = s;
    critic_in.insert(critic_in.end(), {0.2, -0.4, 0.8});
    worst_raw = std::max(worst_raw, finite_difference_check(agent.critic, critic_in,
                                                            std::vector<double>{1.0}));
  }

  const BatchFixture fx = random_batch(rng, 4);
  const std::vector<double> targets =
      td_targets(fx.batch, agent.target_actor, agent.target_critic, 0.9);

  const LossGradient cg = critic_loss_gradient(agent.critic, fx.batch, targets);
  const double worst_critic = max_loss_fd_error(agent.critic, cg.grad, [&] {
    return critic_loss_gradient(agent.critic, fx.batch, targets).loss;
  });

  const LossGradient ag = actor_loss_gradient(agent.actor, agent.critic, fx.batch);
  const double worst_actor = max_loss_fd_error(agent.actor, ag.grad, [&] {
    return actor_loss_gradient(agent.actor, agent.critic, fx.batch).loss;
  });

  const double worst = std::max({worst_raw, worst_critic, worst_actor});
  return {worst < 1e-4, "max relative gradient error " + format_sig6(worst) +
                            " (raw " + format_sig6(worst_raw) + ", critic loss " +
                            format_sig6(worst_critic) + ", actor loss " +
                            format_sig6(worst_actor) + "); bound 1e-4"};
}

// -------------------------------------------------------------- geometry

CriterionResult check_geometry_oracle() {
  constexpr double kStep = 1e-3;
  constexpr double kRange = 40.0;
  Rng rng(0xACCE);
  int hits = 0;
  for (int c = 0; c < 1000; ++c) {
    Aabb box;
    const Vec3 corner{rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0),
                      rng.uniform(-10.0, 10.0)};
    const Vec3 size{rng.uniform(0.5, 8.0), rng.uniform(0.5, 8.0), rng.uniform(0.5, 8.0)};
    box.min = corner;
    box.max = corner + size;

    const Vec3 origin{rng.uniform(-15.0, 15.0), rng.uniform(-15.0, 15.0),
                      rng.uniform(-15.0, 15.0)};
    Vec3 dir{rng.normal(), rng.normal(), rng.normal()};
    // Aim half the rays at a point inside the box; random directions alone
    // almost always miss, which would leave the hit branch untested.
    if (c % 2 == 0) {
      dir = Vec3{rng.uniform(box.min.x, box.max.x), rng.uniform(box.min.y, box.max.y),
                 rng.uniform(box.min.z, box.max.z)} -
            origin;
    }
    const double n = dir.norm();
    if (n < 1e-9) continue;
    dir = dir * (1.0 / n);

    const std::optional<double> slab = ray_aabb_intersect(origin, dir, box, kRange);

    double march = -1.0;
    for (long i = 0;; ++i) {
      const double t = i * kStep;
      if (t >= kRange) break;
      if (box.contains(origin + dir * t)) {
        march = t;
        break;
      }
    }

    bool ok;
    if (march >= 0.0) {
      // The march lands inside at most one step past the true entry point.
      ok = slab.has_value() && *slab <= march + 1e-12 && march <= *slab + kStep + 1e-12;
      ++hits;
    } else if (slab.has_value()) {
      // Sub-step graze: the reported entry point must lie on the box.
      ok = box.contains(origin + dir * *slab, 1e-9);
    } else {
      ok = true;
    }
    if (!ok) {
      return {false, "slab and marching oracle disagree on case " + std::to_string(c)};
    }
  }
  return {hits > 200, "1000 random rays agree with the marching oracle (" +
                          std::to_string(hits) + " hits)"};
}

// -------------------------------------------------------- update arithmetic

Mlp constant_critic(const std::vector<int>& dims, double value) {
  Rng rng(0);
  Mlp net = make_mlp(dims, Activation::identity, rng);
  std::vector<double> params(net.parameter_count(), 0.0);
  params.back() = value;
  net.unflatten(params);
  return net;
}

CriterionResult check_update_arithmetic() {
  Rng rng(0x0801);

  // TD targets against a constant-output target critic.
  const Mlp target_critic = constant_critic({18, 8, 1}, 2.0);
  const Mlp target_actor = make_mlp({15, 8, 3}, Activation::tanh_bounded, rng);
  BatchFixture fx = random_batch(rng, 2);
  fx.storage[0].terminal = true;
  fx.storage[0].reward = -1.0;
  fx.storage[1].terminal = false;
  fx.storage[1].reward = 0.25;
  const auto y = td_targets(fx.batch, target_actor, target_critic, 0.9);
  if (!(y.size() == 2 && y[0] == -1.0 && y[1] == 0.25 + 0.9 * 2.0)) {
    return {false, "td targets do not match the closed form"};
  }

  // Soft update mixes per parameter with weight tau.
  Mlp online = make_mlp({4, 8, 2}, Activation::identity, rng);
  Mlp target = make_mlp({4, 8, 2}, Activation::identity, rng);
  const auto ov = online.flatten();
  const auto tv = target.flatten();
  soft_update(target, online, 0.005);
  const auto mixed = target.flatten();
  for (std::size_t i = 0; i < ov.size(); ++i) {
    const double expected = 0.005 * ov[i] + 0.995 * tv[i];
    if (std::abs(mixed[i] - expected) > 1e-15 * std::max(1.0, std::abs(expected))) {
      return {false, "soft update drifts from the closed form"};
    }
  }

  // Loss values with a constant critic: the regression loss is the mean
  // half-squared gap and the policy objective is -Q everywhere.
  Mlp critic = constant_critic({18, 8, 1}, 1.5);
  BatchFixture one = random_batch(rng, 1);
  one.storage[0].terminal = true;
  one.storage[0].reward = 2.5;
  const auto y1 = td_targets(one.batch, target_actor, target_critic, 0.9);
  const LossGradient cg = critic_loss_gradient(critic, one.batch, y1);
  if (cg.loss != 0.5) return {false, "critic loss value is not (y - Q)^2 / 2"};
  const Mlp actor = make_mlp({15, 8, 3}, Activation::tanh_bounded, rng);
  const LossGradient ag = actor_loss_gradient(actor, critic, one.batch);
  if (ag.loss != -1.5) return {false, "actor loss value is not -mean Q"};

  // First optimizer step has the closed form a * g / (|g| + eps) per entry.
  Mlp scalar = make_mlp({1, 1}, Activation::identity, rng);
  const auto before = scalar.flatten();
  const GradientBundle g = backward(scalar, std::vector<double>{2.0},
                                    std::vector<double>{1.0});
  OptimizerState opt = make_optimizer(scalar, OptimizerMethod::adam, 1e-3);
  apply_update(scalar, g, opt, UpdateDirection::descent);
  const auto after = scalar.flatten();
  const auto gv = g.flatten();
  for (std::size_t i = 0; i < before.size(); ++i) {
    const double expected = before[i] - 1e-3 * gv[i] / (std::abs(gv[i]) + 1e-8);
    if (std::abs(after[i] - expected) > 1e-15) {
      return {false, "first adam step drifts from the closed form"};
    }
  }
  return {true, "td targets, soft updates, loss values, and the first adam step "
                "match closed-form examples"};
}

// --------------------------------------------------------- actor ascent

CriterionResult check_quadratic_ascent() {
  const ActionValueFn q = [](std::span<const double>, std::span<const double> a,
                             std::span<double> dq_da) {
    double v = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
      const double d = a[j] - 0.5;
      v -= d * d;
      dq_da[j] = -2.0 * d;
    }
    return v;
  };
  Rng rng(27);
  Mlp actor = make_mlp({1, 16, 1}, Activation::tanh_bounded, rng);
  const std::vector<std::vector<double>> states{{0.3}, {-0.7}, {0.9}};
  OptimizerState opt = make_optimizer(actor, OptimizerMethod::adam, 1e-2);
  for (int i = 0; i < 5000; ++i) actor_update(actor, q, states, opt);
  double worst = 0.0;
  for (const auto& s : states) {
    worst = std::max(worst, std::abs(forward(actor, s)[0] - 0.5));
  }
  return {worst < 1e-3, "policy sits " + format_sig6(worst) +
                            " from the quadratic argmax after 5000 steps; bound 1e-3"};
}

// --------------------------------------------------------- determinism

int run_cli_quiet(const std::string& args) {
  const std::string cmd = std::string("\"") + LMDC_CLI_PATH + "\" " + args +
                          " > /dev/null 2> /dev/null";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

CriterionResult check_determinism() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "lmdc_acceptance";
  fs::create_directories(dir);

  const std::string tiny =
      "--set train.total_steps=400 --set train.warmup_transitions=64 "
      "--set train.batch_size=32 --set train.hidden_dims=16,16 "
      "--set train.probe_every=0 --set world.max_steps=50 --seed 7";
  const fs::path ck_a = dir / "a.ckpt";
  const fs::path ck_b = dir / "b.ckpt";
  if (run_cli_quiet("train " + tiny + " --out " + ck_a.string()) != 0 ||
      run_cli_quiet("train " + tiny + " --out " + ck_b.string()) != 0) {
    return {false, "train subprocess failed"};
  }
  const bool ck_equal = read_binary_file(ck_a.string()) == read_binary_file(ck_b.string());

  const std::string sweep_args = "sweep --controller lmc --densities 0,0.5,1 "
                                 "--rounds 2 --trials 5 --out ";
  const fs::path s1 = dir / "s1.csv";
  const fs::path s2 = dir / "s2.csv";
  if (run_cli_quiet(sweep_args + s1.string()) != 0 ||
      run_cli_quiet(sweep_args + s2.string()) != 0) {
    return {false, "sweep subprocess failed"};
  }
  const bool csv_equal =
      read_text_file(s1.string()) == read_text_file(s2.string()) &&
      read_text_file((dir / "s1.summary.csv").string()) ==
          read_text_file((dir / "s2.summary.csv").string());

  return {ck_equal && csv_equal,
          std::string("checkpoints ") + (ck_equal ? "identical" : "differ") +
              ", sweep tables " + (csv_equal ? "identical" : "differ")};
}

// ------------------------------------------------- trained-policy pipeline

EpisodeSink progress_sink(const char* label) {
  return [label](const EpisodeRecord& ep) {
    if (ep.episode % 200 == 0) {
      std::cerr << label << ": episode " << ep.episode << " step " << ep.step
                << " return " << format_sig6(ep.episode_return) << "\n";
    }
  };
}

struct TrainedPolicy {
  TrainResult result;
  double train_seconds = 0.0;
  SweepResult sweep;
  double sweep_seconds = 0.0;
};

TrainedPolicy train_and_sweep(bool blind, const char* label) {
  TrainConfig cfg;  // stock settings: 100000 steps, batch 128, gamma 0.9
  cfg.blind = blind;
  cfg.validate();

  std::cerr << "training " << label << " policy, " << cfg.total_steps << " steps...\n";
  TrainedPolicy p;
  const auto t0 = std::chrono::steady_clock::now();
  p.result = run_training(cfg, progress_sink(label));
  p.train_seconds = seconds_since(t0);
  std::cerr << label << " training took " << format_sig6(p.train_seconds) << "s\n";

  Controller c;
  c.kind = blind ? ControllerKind::blind_ddpg : ControllerKind::situation_aware;
  c.actor = &p.result.agent.actor;
  const SweepConfig sweep_cfg;  // full grid: 11 densities x 10 rounds x 20 trials
  const auto t1 = std::chrono::steady_clock::now();
  p.sweep = run_sweep(c, sweep_cfg);
  p.sweep_seconds = seconds_since(t1);
  std::cerr << label << " sweep took " << format_sig6(p.sweep_seconds) << "s\n"
            << summary_csv(p.sweep);
  return p;
}

CriterionResult check_zero_density(const TrainedPolicy& aware) {
  const DensityStats& row = aware.sweep.summary.front();
  const bool in_budget = aware.train_seconds <= 1200.0 && aware.sweep_seconds <= 300.0;
  return {row.avg >= 19.0 && in_budget,
          "density-0 average " + format_sig6(row.avg) + "/20 (need >= 19); train " +
              format_sig6(aware.train_seconds) + "s <= 1200s, sweep " +
              format_sig6(aware.sweep_seconds) + "s <= 300s"};
}

CriterionResult check_monotonicity(const TrainedPolicy& aware) {
  std::vector<double> densities, avgs;
  for (const DensityStats& s : aware.sweep.summary) {
    densities.push_back(s.density);
    avgs.push_back(s.avg);
  }
  const double rho = spearman(densities, avgs);
  return {rho <= -0.8, "spearman(density, avg success) = " + format_sig6(rho) +
                           " (need <= -0.8)"};
}

CriterionResult check_awareness_advantage(const TrainedPolicy& aware,
                                          const TrainedPolicy& blind) {
  std::ostringstream detail;
  bool pass = true;
  double gain_at_half = 0.0;
  for (std::size_t i = 0; i < aware.sweep.summary.size(); ++i) {
    const DensityStats& a = aware.sweep.summary[i];
    const DensityStats& b = blind.sweep.summary[i];
    if (a.density < 0.5 - 1e-9) continue;
    if (!(a.avg > b.avg)) {
      pass = false;
      detail << "not ahead at density " << format_sig6(a.density) << " ("
             << format_sig6(a.avg) << " vs " << format_sig6(b.avg) << "); ";
    }
    if (std::abs(a.density - 0.5) < 1e-9) {
      if (b.avg == 0.0) {
        gain_at_half = std::numeric_limits<double>::infinity();
      } else {
        gain_at_half = 100.0 * (a.avg - b.avg) / b.avg;
      }
    }
  }
  if (!(gain_at_half >= 30.0)) pass = false;
  detail << "gain at density 0.5 is " << format_sig6(gain_at_half) << "% (need >= 30%)";
  return {pass, detail.str()};
}

CriterionResult check_loss_decline(const TrainedPolicy& aware) {
  const std::vector<UpdateRecord>& u = aware.result.metrics.updates;
  if (u.size() < 20) return {false, "too few updates recorded"};
  const std::size_t k = u.size() / 10;
  auto mean = [&](std::size_t begin, std::size_t end, bool actor) {
    double s = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      s += actor ? u[i].actor_loss : u[i].critic_loss;
    }
    return s / (end - begin);
  };
  const double first_actor = mean(0, k, true);
  const double last_actor = mean(u.size() - k, u.size(), true);
  const double first_critic = mean(0, k, false);
  const double last_critic = mean(u.size() - k, u.size(), false);
  const bool pass = last_actor < first_actor && last_critic < first_critic;
  // The decile trajectory tells apart "noisy but declining" from a curve
  // whose first tenth simply precedes the value-scale ramp.
  std::cerr << "criterion 5 deciles (actor | critic):\n";
  for (int d = 0; d < 10; ++d) {
    const std::size_t b = u.size() * d / 10;
    const std::size_t e = u.size() * (d + 1) / 10;
    std::cerr << "  " << d << ": " << format_sig6(mean(b, e, true)) << " | "
              << format_sig6(mean(b, e, false)) << "\n";
  }
  return {pass, "actor loss " + format_sig6(first_actor) + " -> " + format_sig6(last_actor) +
                    ", critic loss " + format_sig6(first_critic) + " -> " +
                    format_sig6(last_critic) + " (first tenth -> last tenth of updates)"};
}

const char* kDescriptions[11] = {
    "",
    "default training reaches >= 19/20 average successes at density 0 in budget",
    "average success declines as density rises",
    "situation-aware beats blind at every density >= 0.5, by >= 30% at 0.5",
    "summary and improvement table arithmetic matches worked fixtures",
    "actor and critic losses decline from the first to the last tenth of updates",
    "finite differences confirm the gradients at production network shapes",
    "slab ray intersection agrees with a marching oracle on 1000 random cases",
    "td targets, soft updates, and loss values match closed-form examples",
    "identical seeds give byte-identical checkpoints and sweep tables",
    "a fixed quadratic action-value pulls the actor onto its argmax",
};

}  // namespace

int main() {
  criterion(4, check_improvement_arithmetic);
  criterion(7, check_geometry_oracle);
  criterion(8, check_update_arithmetic);
  criterion(10, check_quadratic_ascent);
  criterion(6, check_gradients);
  criterion(9, check_determinism);

  try {
    const TrainedPolicy aware = train_and_sweep(false, "situation-aware");
    criterion(1, [&] { return check_zero_density(aware); });
    criterion(2, [&] { return check_monotonicity(aware); });
    criterion(5, [&] { return check_loss_decline(aware); });

    const TrainedPolicy blind = train_and_sweep(true, "blind");
    criterion(3, [&] { return check_awareness_advantage(aware, blind); });
  } catch (const std::exception& err) {
    for (int id : {1, 2, 3, 5}) {
      if (g_results[id].detail.empty()) {
        record(id, false, std::string("pipeline exception: ") + err.what());
      }
    }
  }

  int failures = 0;
  for (int id = 1; id <= 10; ++id) {
    const CriterionResult& r = g_results[id];
    failures += r.pass ? 0 : 1;
    std::cout << (r.pass ? "[PASS]" : "[FAIL]") << " criterion " << id << ": "
              << kDescriptions[id] << " -- " << r.detail << "\n";
  }
  return failures;
}
