#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "lmdc/ddpg.hpp"
#include "lmdc/environment.hpp"

namespace lmdc {

enum class NoiseKind { gaussian, ou };
enum class DensityScheduleKind { uniform_grid, fixed };

struct TrainConfig {
  long total_steps = 100000;
  long warmup_transitions = 1000;
  int update_period = 1;
  int batch_size = 128;
  std::size_t buffer_capacity = 100000;
  std::uint64_t master_seed = 1;
  long checkpoint_every = 10000;

  // Per-episode obstacle density draw: uniform over {0, 0.1, ..., 1.0} by
  // default so one policy serves the whole evaluation sweep.
  DensityScheduleKind density_schedule = DensityScheduleKind::uniform_grid;
  double fixed_density = 0.0;

  std::vector<int> hidden_dims{128, 128};
  OptimizerMethod optimizer = OptimizerMethod::adam;
  double actor_lr = 1e-4;
  double critic_lr = 1e-3;

  double gamma = 0.9;
  double tau = 0.005;
  NoiseKind noise = NoiseKind::gaussian;
  double noise_sigma_start = 0.3;
  double noise_sigma_end = 0.05;
  long noise_decay_steps = 0;  // 0: decay over total_steps
  double ou_theta = 0.15;

  // Greedy learning-curve probe.
  long probe_every = 2000;
  int probe_episodes = 5;
  double probe_density = 0.5;

  // Train with ray entries zeroed in every observation the networks see;
  // the baseline agent that cannot perceive obstacles.
  bool blind = false;

  WorldConfig world;
  RayConfig rays;
  RewardConfig reward;

  void validate() const;
};

struct EpisodeRecord {
  long step = 0;  // global env step at episode end
  int episode = 0;
  double episode_return = 0.0;
  int length = 0;
  Status status = Status::running;
  double density = 0.0;
  std::uint64_t world = 0;  // layout digest, for seed-isolation checks
  // Mean losses over the updates that ran during this episode; NaN when no
  // update ran (warmup).
  double actor_loss = 0.0;
  double critic_loss = 0.0;
  bool has_losses = false;
};

struct UpdateRecord {
  long step = 0;
  double actor_loss = 0.0;
  double critic_loss = 0.0;
};

struct ProbeRecord {
  long step = 0;
  double mean_return = 0.0;
};

struct TrainMetrics {
  std::vector<EpisodeRecord> episodes;
  std::vector<UpdateRecord> updates;
  std::vector<ProbeRecord> probes;
  double wall_seconds = 0.0;
};

struct TrainResult {
  AgentParams agent;
  TrainMetrics metrics;
};

using EpisodeSink = std::function<void(const EpisodeRecord&)>;
using CheckpointHook = std::function<void(const AgentParams&, long step)>;

// The agent exactly as run_training constructs it before any learning;
// target networks equal the online networks.
AgentParams initial_agent(const TrainConfig& cfg);

// Runs the full training loop: per episode, generate a world at the
// scheduled density and roll out with decaying exploration noise; after the
// warmup, every update_period steps run one critic update, one actor
// update, and both soft target updates. Stops after exactly
// cfg.total_steps environment steps. Deterministic in master_seed: the
// world, noise, and minibatch streams are derived independently from it.
TrainResult run_training(const TrainConfig& cfg, const EpisodeSink& on_episode = {},
                         const CheckpointHook& on_checkpoint = {});

// Mean undiscounted return of n greedy (sigma = 0) episodes at one density.
double evaluate_greedy_return(const Mlp& actor, bool blind, double density, int n_episodes,
                              std::uint64_t seed, const WorldConfig& world,
                              const RayConfig& rays, const RewardConfig& reward);

}  // namespace lmdc
