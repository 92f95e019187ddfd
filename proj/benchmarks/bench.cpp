// Microbenchmarks for the hot paths: world generation, ray casting, the
// environment step, network passes, and one full learning update. Build with
// -DLMDC_BUILD_BENCHMARKS=ON and run build/benchmarks/lmdc_bench.

#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "lmdc/ddpg.hpp"
#include "lmdc/environment.hpp"
#include "lmdc/mlp.hpp"
#include "lmdc/rng.hpp"

using namespace lmdc;

namespace {

void bench_generate_world(benchmark::State& state) {
  const WorldConfig cfg;
  const double density = static_cast<double>(state.range(0)) / 10.0;
  std::uint64_t seed = 1;
  for (auto _ : state) {
    WorldInstance w = generate_world(density, cfg, seed++);
    benchmark::DoNotOptimize(w.obstacles.data());
  }
}
BENCHMARK(bench_generate_world)->Arg(0)->Arg(5)->Arg(10);

// Cost of one observation's worth of rays as the box count grows.
void bench_ray_fan(benchmark::State& state) {
  const WorldConfig cfg;
  const double density = static_cast<double>(state.range(0)) / 10.0;
  const WorldInstance w = generate_world(density, cfg, 42);
  const RayConfig rays;
  const Vec3 pos{50.0, 10.0, 50.0};
  for (auto _ : state) {
    auto readings = cast_ray_fan(pos, w.obstacles, cfg.ground_height, rays);
    benchmark::DoNotOptimize(readings.data());
  }
}
BENCHMARK(bench_ray_fan)->Arg(0)->Arg(2)->Arg(5)->Arg(10);

void bench_env_step(benchmark::State& state) {
  const WorldConfig cfg;
  const RayConfig rays;
  const RewardConfig reward;
  const double density = static_cast<double>(state.range(0)) / 10.0;
  Rng act(8);
  WorldInstance w = generate_world(density, cfg, 7);
  for (auto _ : state) {
    if (!w.active()) {
      state.PauseTiming();
      w = generate_world(density, cfg, act.next_u64());
      state.ResumeTiming();
    }
    Action a;
    a.u = {act.uniform(-1.0, 1.0), act.uniform(-1.0, 1.0), act.uniform(-1.0, 1.0)};
    const StepOutcome out = step(w, a, cfg, rays, reward);
    benchmark::DoNotOptimize(out.reward);
  }
}
BENCHMARK(bench_env_step)->Arg(0)->Arg(5)->Arg(10);

void bench_actor_forward(benchmark::State& state) {
  Rng rng(3);
  const Mlp actor = make_mlp({15, 128, 128, 3}, Activation::tanh_bounded, rng);
  std::vector<double> input(15);
  for (double& v : input) v = rng.uniform(-1.0, 1.0);
  MlpWorkspace ws;
  ws.resize_like(actor);
  for (auto _ : state) {
    auto out = forward_ws(actor, input, ws);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(bench_actor_forward);

void bench_critic_backward(benchmark::State& state) {
  Rng rng(4);
  const Mlp critic = make_mlp({18, 128, 128, 1}, Activation::identity, rng);
  std::vector<double> input(18);
  for (double& v : input) v = rng.uniform(-1.0, 1.0);
  const std::vector<double> upstream{1.0};
  GradientBundle acc;
  acc.resize_like(critic);
  MlpWorkspace ws;
  ws.resize_like(critic);
  for (auto _ : state) {
    acc.zero();
    backward_into(critic, input, upstream, &acc, {}, ws);
    benchmark::DoNotOptimize(acc.layers.data());
  }
}
BENCHMARK(bench_critic_backward);

// One critic + actor + soft-update cycle at production shapes, the unit the
// training loop repeats after every environment step.
void bench_agent_update(benchmark::State& state) {
  Rng rng(5);
  AgentParams agent = make_agent(15, 3, {128, 128}, rng);
  OptimizerState actor_opt = make_optimizer(agent.actor, OptimizerMethod::adam, 1e-4);
  OptimizerState critic_opt = make_optimizer(agent.critic, OptimizerMethod::adam, 1e-3);

  const int batch_size = 128;
  std::vector<Transition> storage;
  storage.reserve(batch_size);
  for (int i = 0; i < batch_size; ++i) {
    Transition t;
    t.state.rel_target = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                          rng.uniform(-1.0, 1.0)};
    t.state.velocity = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                        rng.uniform(-1.0, 1.0)};
    t.state.rays.assign(9, rng.uniform(0.0, 1.0));
    t.action.u = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                  rng.uniform(-1.0, 1.0)};
    t.reward = rng.uniform(-1.0, 1.0);
    t.next_state = t.state;
    t.terminal = i % 7 == 0;
    storage.push_back(t);
  }
  Minibatch batch;
  batch.reserve(storage.size());
  for (const Transition& t : storage) batch.push_back(&t);

  for (auto _ : state) {
    const auto targets = td_targets(batch, agent.target_actor, agent.target_critic,
                                    agent.gamma);
    const double closs = critic_update(agent.critic, batch, targets, critic_opt);
    const double aloss = actor_update(agent.actor, agent.critic, batch, actor_opt);
    soft_update(agent.target_actor, agent.actor, agent.tau);
    soft_update(agent.target_critic, agent.critic, agent.tau);
    benchmark::DoNotOptimize(closs + aloss);
  }
}
BENCHMARK(bench_agent_update);

}  // namespace

BENCHMARK_MAIN();
