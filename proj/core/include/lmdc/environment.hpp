#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "lmdc/geometry.hpp"
#include "lmdc/rng.hpp"

namespace lmdc {

struct Region3 {
  Vec3 min;
  Vec3 max;
  bool valid() const {
    return min.finite() && max.finite() && min.x <= max.x && min.y <= max.y &&
           min.z <= max.z;
  }
};

// The arena is [0, extent_x] x [0, extent_y] x [0, extent_z] with the ground
// at y = 0. Obstacle candidate sites form a sites_x by sites_z grid over the
// central band; a box placed at a site is centered in its cell footprint and
// rests on the ground.
struct WorldConfig {
  double extent_x = 100.0;
  double extent_y = 40.0;
  double extent_z = 100.0;

  // The band is bounded in x only: it spans the full arena depth so every
  // route from the agent strip to the target strip crosses the field.
  int sites_x = 10;
  int sites_z = 10;
  double band_x_min = 25.0;
  double band_x_max = 75.0;
  double band_z_min = 0.0;
  double band_z_max = 100.0;

  double obstacle_width_min = 2.0;
  double obstacle_width_max = 5.0;
  double obstacle_height_min = 5.0;
  double obstacle_height_max = 30.0;

  Region3 agent_spawn{{5.0, 5.0, 5.0}, {20.0, 15.0, 95.0}};
  Region3 target_spawn{{80.0, 0.0, 5.0}, {95.0, 0.0, 95.0}};

  double agent_max_speed = 2.0;
  double target_speed = 0.2;
  double success_radius = 2.0;
  double far_limit = 300.0;
  int max_steps = 500;
  double agent_radius = 0.5;
  double ground_height = 0.0;

  int n_sites() const { return sites_x * sites_z; }
  double diagonal() const {
    return std::sqrt(extent_x * extent_x + extent_y * extent_y + extent_z * extent_z);
  }
  void validate() const;  // throws std::invalid_argument on bad values
};

struct RewardConfig {
  double step_penalty = -0.01;
  double progress_gain = 0.1;
  double success_reward = 1.0;
  double failure_reward = -1.0;
  double obstacle_gain = 0.01;
  double obstacle_distance_floor = 0.5;
  void validate() const;
};

enum class Status { running, success, collision, out_of_range, timeout };

const char* to_string(Status s);
Status status_from_string(const std::string& s);

// Commanded motion, one component per axis, clamped to [-1, 1] before use.
struct Action {
  std::array<double, 3> u{0.0, 0.0, 0.0};
};

Action clamp_action(const Action& a);

// Observation layout (flattened, in order):
//   [0..2]  relative target position (target - agent) / world diagonal
//   [3..5]  agent velocity / agent_max_speed
//   [6..]   ray readings / max_range: n_horizontal fan readings at azimuths
//           2*pi*k/n (k = 0 along +x), then the down reading last.
// With the default 8+1 rays this is 15 entries, each in [-1, 1].
struct State {
  Vec3 rel_target;
  Vec3 velocity;
  std::vector<double> rays;

  int dim() const { return 6 + static_cast<int>(rays.size()); }
  std::vector<double> flatten() const;
  void write_flat(std::span<double> out) const;
};

struct WorldInstance {
  std::vector<Aabb> obstacles;
  Vec3 agent_pos;
  Vec3 agent_vel;  // displacement applied on the last step
  Vec3 target_pos;
  Vec3 target_heading;  // horizontal unit vector
  int step_count = 0;
  double prev_target_distance = 0.0;
  Status status = Status::running;
  double density = 0.0;

  bool active() const { return status == Status::running; }
};

struct StepOutcome {
  State next_state;
  double reward = 0.0;
  Status status = Status::running;
};

// Deterministic in (density, cfg, seed). round(density * n_sites) grid sites
// are chosen uniformly without replacement; each carries one box with width,
// depth, and height drawn uniformly from the configured ranges.
WorldInstance generate_world(double density, const WorldConfig& cfg, std::uint64_t seed);

State observe(const WorldInstance& w, const WorldConfig& cfg, const RayConfig& rays);

struct RewardTerms {
  double step_penalty = 0.0;
  double progress = 0.0;
  double obstacle_penalty = 0.0;
  double terminal = 0.0;
  double total() const { return step_penalty + progress + obstacle_penalty + terminal; }
};

RewardTerms compute_reward_terms(double prev_dist, double curr_dist,
                                 const std::vector<RayReading>& rays, Status status,
                                 const RewardConfig& rc);

double compute_reward(double prev_dist, double curr_dist,
                      const std::vector<RayReading>& rays, Status status,
                      const RewardConfig& rc);

// Advances the world one tick: agent moves by action * agent_max_speed and
// is clamped to the arena, the target advances at constant speed bouncing
// off the side walls, then status and reward are resolved. Status priority:
// success, collision, out_of_range, timeout. Stepping a finished episode
// throws std::logic_error.
StepOutcome step(WorldInstance& w, const Action& action, const WorldConfig& cfg,
                 const RayConfig& rays, const RewardConfig& rc);

// Order-sensitive digest of the obstacle layout and spawn poses.
std::uint64_t world_hash(const WorldInstance& w);

}  // namespace lmdc
