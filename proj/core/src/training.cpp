#include "lmdc/training.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace lmdc {

namespace {

// Stream tags for deriving independent rng streams from the master seed.
constexpr std::uint64_t kInitTag = 0x494e4954;     // network initialization
constexpr std::uint64_t kWorldTag = 0x574f524c;    // world layouts
constexpr std::uint64_t kDensityTag = 0x44454e53;  // density schedule
constexpr std::uint64_t kNoiseTag = 0x4e4f4953;    // exploration noise
constexpr std::uint64_t kSampleTag = 0x53414d50;   // minibatch sampling
constexpr std::uint64_t kProbeTag = 0x50524f42;    // greedy probes

double draw_density(const TrainConfig& cfg, Rng& rng) {
  if (cfg.density_schedule == DensityScheduleKind::fixed) return cfg.fixed_density;
  return static_cast<double>(rng.uniform_index(11)) / 10.0;
}

}  // namespace

void TrainConfig::validate() const {
  world.validate();
  reward.validate();
  auto req = [](bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(std::string("TrainConfig: ") + msg);
  };
  req(total_steps >= warmup_transitions, "total_steps must cover warmup_transitions");
  req(warmup_transitions >= batch_size, "warmup_transitions must cover batch_size");
  req(batch_size >= 1, "batch_size must be positive");
  req(update_period >= 1, "update_period must be positive");
  req(buffer_capacity >= static_cast<std::size_t>(batch_size),
      "buffer_capacity must cover batch_size");
  req(gamma > 0.0 && gamma < 1.0, "gamma must lie in (0,1)");
  req(tau > 0.0 && tau <= 1.0, "tau must lie in (0,1]");
  req(noise_sigma_start >= 0.0 && noise_sigma_end >= 0.0, "noise sigma must be non-negative");
  req(actor_lr > 0.0 && critic_lr > 0.0, "learning rates must be positive");
  req(!hidden_dims.empty(), "need at least one hidden layer");
  for (int h : hidden_dims) req(h >= 1, "hidden dims must be positive");
  req(fixed_density >= 0.0 && fixed_density <= 1.0, "fixed_density must lie in [0,1]");
  req(probe_episodes >= 0 && probe_every >= 0, "probe settings must be non-negative");
  req(probe_density >= 0.0 && probe_density <= 1.0, "probe_density must lie in [0,1]");
  req(rays.n_horizontal >= 1, "need at least one horizontal ray");
  req(rays.max_range > 0.0, "ray max_range must be positive");
}

AgentParams initial_agent(const TrainConfig& cfg) {
  Rng init_rng(derive_seed(cfg.master_seed, kInitTag));
  const int state_dim = 6 + cfg.rays.n_readings();
  AgentParams agent = make_agent(state_dim, 3, cfg.hidden_dims, init_rng);
  agent.gamma = cfg.gamma;
  agent.tau = cfg.tau;
  agent.noise_sigma_start = cfg.noise_sigma_start;
  agent.noise_sigma_end = cfg.noise_sigma_end;
  agent.noise_decay_steps =
      cfg.noise_decay_steps > 0 ? cfg.noise_decay_steps : cfg.total_steps;
  return agent;
}

TrainResult run_training(const TrainConfig& cfg, const EpisodeSink& on_episode,
                         const CheckpointHook& on_checkpoint) {
  cfg.validate();
  const auto t_begin = std::chrono::steady_clock::now();

  Rng world_rng(derive_seed(cfg.master_seed, kWorldTag));
  Rng density_rng(derive_seed(cfg.master_seed, kDensityTag));
  Rng noise_rng(derive_seed(cfg.master_seed, kNoiseTag));
  Rng sample_rng(derive_seed(cfg.master_seed, kSampleTag));

  AgentParams agent = initial_agent(cfg);

  OptimizerState critic_opt = make_optimizer(agent.critic, cfg.optimizer, cfg.critic_lr);
  OptimizerState actor_opt = make_optimizer(agent.actor, cfg.optimizer, cfg.actor_lr);

  ReplayBuffer buffer(cfg.buffer_capacity);
  OuNoise ou(3, cfg.ou_theta);

  TrainMetrics metrics;
  long steps_done = 0;
  int episode = 0;

  while (steps_done < cfg.total_steps) {
    const double density = draw_density(cfg, density_rng);
    WorldInstance world = generate_world(density, cfg.world, world_rng.next_u64());
    const std::uint64_t layout = world_hash(world);
    State state = observe(world, cfg.world, cfg.rays);
    if (cfg.blind) std::fill(state.rays.begin(), state.rays.end(), 0.0);
    ou.reset();

    double ep_return = 0.0;
    int ep_len = 0;
    double ep_actor_loss = 0.0, ep_critic_loss = 0.0;
    int ep_updates = 0;

    while (world.active() && steps_done < cfg.total_steps) {
      const double sigma = noise_sigma_at(agent, steps_done);
      Action action;
      if (cfg.noise == NoiseKind::ou && sigma > 0.0) {
        action = select_action(agent.actor, state, 0.0, noise_rng);
        double eps[3];
        ou.sample(sigma, noise_rng, eps);
        for (int i = 0; i < 3; ++i) {
          action.u[i] = std::clamp(action.u[i] + eps[i], -1.0, 1.0);
        }
      } else {
        action = select_action(agent.actor, state, sigma, noise_rng);
      }

      StepOutcome out = step(world, action, cfg.world, cfg.rays, cfg.reward);
      if (cfg.blind) std::fill(out.next_state.rays.begin(), out.next_state.rays.end(), 0.0);
      const bool terminal = out.status == Status::success ||
                            out.status == Status::collision ||
                            out.status == Status::out_of_range;
      buffer.push({state, action, out.reward, out.next_state, terminal});
      ++steps_done;
      ++ep_len;
      ep_return += out.reward;

      // Updates start strictly after the warmup transition count; a run with
      // total_steps == warmup_transitions therefore never updates.
      if (steps_done > cfg.warmup_transitions &&
          buffer.size() >= static_cast<std::size_t>(cfg.batch_size) &&
          steps_done % cfg.update_period == 0) {
        const Minibatch batch = sample(buffer, cfg.batch_size, sample_rng);
        const std::vector<double> y =
            td_targets(batch, agent.target_actor, agent.target_critic, agent.gamma);
        const double closs = critic_update(agent.critic, batch, y, critic_opt);
        const double aloss = actor_update(agent.actor, agent.critic, batch, actor_opt);
        soft_update(agent.target_critic, agent.critic, agent.tau);
        soft_update(agent.target_actor, agent.actor, agent.tau);
        metrics.updates.push_back({steps_done, aloss, closs});
        ep_actor_loss += aloss;
        ep_critic_loss += closs;
        ++ep_updates;
      }

      if (cfg.probe_every > 0 && cfg.probe_episodes > 0 &&
          steps_done % cfg.probe_every == 0) {
        const double mean_ret = evaluate_greedy_return(
            agent.actor, cfg.blind, cfg.probe_density, cfg.probe_episodes,
            derive_seed(cfg.master_seed, kProbeTag, static_cast<std::uint64_t>(steps_done)),
            cfg.world, cfg.rays, cfg.reward);
        metrics.probes.push_back({steps_done, mean_ret});
      }

      if (on_checkpoint && cfg.checkpoint_every > 0 &&
          steps_done % cfg.checkpoint_every == 0) {
        on_checkpoint(agent, steps_done);
      }

      state = std::move(out.next_state);
    }

    if (!world.active()) {
      EpisodeRecord rec;
      rec.step = steps_done;
      rec.episode = episode;
      rec.episode_return = ep_return;
      rec.length = ep_len;
      rec.status = world.status;
      rec.density = density;
      rec.world = layout;
      rec.has_losses = ep_updates > 0;
      if (ep_updates > 0) {
        rec.actor_loss = ep_actor_loss / ep_updates;
        rec.critic_loss = ep_critic_loss / ep_updates;
      }
      metrics.episodes.push_back(rec);
      if (on_episode) on_episode(rec);
      ++episode;
    }
  }

  metrics.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin).count();
  return {std::move(agent), std::move(metrics)};
}

double evaluate_greedy_return(const Mlp& actor, bool blind, double density, int n_episodes,
                              std::uint64_t seed, const WorldConfig& world_cfg,
                              const RayConfig& rays, const RewardConfig& reward) {
  if (n_episodes < 1) throw std::invalid_argument("evaluate_greedy_return: need episodes");
  Rng unused(0);  // sigma = 0 draws nothing, but select_action wants a stream
  double total = 0.0;
  for (int ep = 0; ep < n_episodes; ++ep) {
    WorldInstance world = generate_world(
        density, world_cfg, derive_seed(seed, static_cast<std::uint64_t>(ep)));
    State state = observe(world, world_cfg, rays);
    if (blind) std::fill(state.rays.begin(), state.rays.end(), 0.0);
    double ep_return = 0.0;
    while (world.active()) {
      const Action a = select_action(actor, state, 0.0, unused);
      StepOutcome out = step(world, a, world_cfg, rays, reward);
      if (blind) std::fill(out.next_state.rays.begin(), out.next_state.rays.end(), 0.0);
      ep_return += out.reward;
      state = std::move(out.next_state);
    }
    total += ep_return;
  }
  return total / n_episodes;
}

}  // namespace lmdc
