#include "lmdc/environment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "lmdc/hash.hpp"

namespace lmdc {

void WorldConfig::validate() const {
  auto req = [](bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(std::string("WorldConfig: ") + msg);
  };
  req(extent_x > 0 && extent_y > 0 && extent_z > 0, "extents must be positive");
  req(sites_x >= 1 && sites_z >= 1, "site grid must be at least 1x1");
  req(band_x_min < band_x_max && band_z_min < band_z_max, "obstacle band is empty");
  req(band_x_min >= 0 && band_x_max <= extent_x && band_z_min >= 0 && band_z_max <= extent_z,
      "obstacle band outside the arena");
  req(obstacle_width_min > 0 && obstacle_width_min <= obstacle_width_max,
      "bad obstacle width range");
  req(obstacle_height_min > 0 && obstacle_height_min <= obstacle_height_max,
      "bad obstacle height range");
  req(obstacle_height_max <= extent_y, "obstacles taller than the arena");
  req(agent_spawn.valid() && target_spawn.valid(), "malformed spawn region");
  req(agent_spawn.min.y >= ground_height, "agent spawn below ground");
  req(agent_max_speed > 0, "agent_max_speed must be positive");
  req(target_speed >= 0, "target_speed must be non-negative");
  req(success_radius > 0, "success_radius must be positive");
  req(far_limit > 0, "far_limit must be positive");
  req(max_steps >= 1, "max_steps must be at least 1");
  req(agent_radius >= 0, "agent_radius must be non-negative");
}

void RewardConfig::validate() const {
  if (obstacle_distance_floor <= 0) {
    throw std::invalid_argument("RewardConfig: obstacle_distance_floor must be positive");
  }
}

const char* to_string(Status s) {
  switch (s) {
    case Status::running: return "running";
    case Status::success: return "success";
    case Status::collision: return "collision";
    case Status::out_of_range: return "out_of_range";
    case Status::timeout: return "timeout";
  }
  return "running";
}

Status status_from_string(const std::string& s) {
  if (s == "running") return Status::running;
  if (s == "success") return Status::success;
  if (s == "collision") return Status::collision;
  if (s == "out_of_range") return Status::out_of_range;
  if (s == "timeout") return Status::timeout;
  throw std::invalid_argument("unknown status: " + s);
}

Action clamp_action(const Action& a) {
  Action out;
  for (int i = 0; i < 3; ++i) {
    const double v = a.u[i];
    if (!std::isfinite(v)) throw std::invalid_argument("action component not finite");
    out.u[i] = std::clamp(v, -1.0, 1.0);
  }
  return out;
}

std::vector<double> State::flatten() const {
  std::vector<double> out(dim());
  write_flat(out);
  return out;
}

void State::write_flat(std::span<double> out) const {
  if (static_cast<int>(out.size()) != dim()) {
    throw std::invalid_argument("State: flat buffer size mismatch");
  }
  out[0] = rel_target.x;
  out[1] = rel_target.y;
  out[2] = rel_target.z;
  out[3] = velocity.x;
  out[4] = velocity.y;
  out[5] = velocity.z;
  std::copy(rays.begin(), rays.end(), out.begin() + 6);
}

namespace {

Vec3 sample_region(const Region3& r, Rng& rng) {
  return {rng.uniform(r.min.x, r.max.x), rng.uniform(r.min.y, r.max.y),
          rng.uniform(r.min.z, r.max.z)};
}

}  // namespace

WorldInstance generate_world(double density, const WorldConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  if (!(density >= 0.0 && density <= 1.0)) {
    throw std::invalid_argument("generate_world: density must lie in [0, 1]");
  }

  Rng rng(seed);
  WorldInstance w;
  w.density = density;

  const int n_sites = cfg.n_sites();
  const int n_boxes = static_cast<int>(std::lround(density * n_sites));

  // Partial Fisher-Yates: the first n_boxes entries are a uniform draw
  // without replacement.
  std::vector<int> sites(n_sites);
  std::iota(sites.begin(), sites.end(), 0);
  for (int i = 0; i < n_boxes; ++i) {
    const int j = i + static_cast<int>(rng.uniform_index(n_sites - i));
    std::swap(sites[i], sites[j]);
  }

  const double pitch_x = (cfg.band_x_max - cfg.band_x_min) / cfg.sites_x;
  const double pitch_z = (cfg.band_z_max - cfg.band_z_min) / cfg.sites_z;
  w.obstacles.reserve(n_boxes);
  for (int i = 0; i < n_boxes; ++i) {
    const int site = sites[i];
    const int ix = site % cfg.sites_x;
    const int iz = site / cfg.sites_x;
    const double cx = cfg.band_x_min + (ix + 0.5) * pitch_x;
    const double cz = cfg.band_z_min + (iz + 0.5) * pitch_z;
    const double w_x = rng.uniform(cfg.obstacle_width_min, cfg.obstacle_width_max);
    const double w_z = rng.uniform(cfg.obstacle_width_min, cfg.obstacle_width_max);
    const double h = rng.uniform(cfg.obstacle_height_min, cfg.obstacle_height_max);
    w.obstacles.push_back({{cx - 0.5 * w_x, cfg.ground_height, cz - 0.5 * w_z},
                           {cx + 0.5 * w_x, cfg.ground_height + h, cz + 0.5 * w_z}});
  }

  w.agent_pos = sample_region(cfg.agent_spawn, rng);
  w.target_pos = sample_region(cfg.target_spawn, rng);
  const double phi = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
  w.target_heading = {std::cos(phi), 0.0, std::sin(phi)};
  w.agent_vel = {0.0, 0.0, 0.0};
  w.prev_target_distance = (w.target_pos - w.agent_pos).norm();
  w.step_count = 0;
  w.status = Status::running;
  return w;
}

namespace {

State build_state(const WorldInstance& w, const WorldConfig& cfg, const RayConfig& rcfg,
                  const std::vector<RayReading>& readings) {
  State s;
  const double diag = cfg.diagonal();
  s.rel_target = (w.target_pos - w.agent_pos) * (1.0 / diag);
  s.velocity = w.agent_vel * (1.0 / cfg.agent_max_speed);
  s.rays.resize(readings.size());
  for (std::size_t i = 0; i < readings.size(); ++i) {
    s.rays[i] = readings[i].distance / rcfg.max_range;
  }
  return s;
}

}  // namespace

State observe(const WorldInstance& w, const WorldConfig& cfg, const RayConfig& rays) {
  if (!w.active()) throw std::logic_error("observe: episode already finished");
  const auto readings = cast_ray_fan(w.agent_pos, w.obstacles, cfg.ground_height, rays);
  return build_state(w, cfg, rays, readings);
}

RewardTerms compute_reward_terms(double prev_dist, double curr_dist,
                                 const std::vector<RayReading>& rays, Status status,
                                 const RewardConfig& rc) {
  RewardTerms t;
  t.step_penalty = rc.step_penalty;
  t.progress = rc.progress_gain * (prev_dist - curr_dist);
  double prox = 0.0;
  for (const RayReading& r : rays) {
    if (r.hit) prox += 1.0 / std::max(r.distance, rc.obstacle_distance_floor);
  }
  t.obstacle_penalty = -rc.obstacle_gain * prox;
  // Timeout ends the attempt without a terminal bonus or penalty of its own.
  if (status == Status::success) t.terminal = rc.success_reward;
  if (status == Status::collision || status == Status::out_of_range) {
    t.terminal = rc.failure_reward;
  }
  return t;
}

double compute_reward(double prev_dist, double curr_dist,
                      const std::vector<RayReading>& rays, Status status,
                      const RewardConfig& rc) {
  return compute_reward_terms(prev_dist, curr_dist, rays, status, rc).total();
}

StepOutcome step(WorldInstance& w, const Action& action, const WorldConfig& cfg,
                 const RayConfig& rays, const RewardConfig& rc) {
  if (!w.active()) throw std::logic_error("step: episode already finished");

  const Action a = clamp_action(action);
  const Vec3 before = w.agent_pos;
  Vec3 pos = before + Vec3{a.u[0], a.u[1], a.u[2]} * cfg.agent_max_speed;
  pos.x = std::clamp(pos.x, 0.0, cfg.extent_x);
  pos.y = std::clamp(pos.y, 0.0, cfg.extent_y);
  pos.z = std::clamp(pos.z, 0.0, cfg.extent_z);
  w.agent_pos = pos;
  w.agent_vel = pos - before;  // actual displacement, wall clamping included

  // The target bounces off the side walls: flip the heading component first
  // when the move would leave the arena, then move, so each tick covers
  // exactly target_speed of distance.
  if (cfg.target_speed > 0.0) {
    Vec3 h = w.target_heading;
    const double nx = w.target_pos.x + cfg.target_speed * h.x;
    if (nx < 0.0 || nx > cfg.extent_x) h.x = -h.x;
    const double nz = w.target_pos.z + cfg.target_speed * h.z;
    if (nz < 0.0 || nz > cfg.extent_z) h.z = -h.z;
    w.target_heading = h;
    w.target_pos += h * cfg.target_speed;
  }

  ++w.step_count;
  const double curr_dist = (w.target_pos - w.agent_pos).norm();

  Status status = Status::running;
  if (curr_dist <= cfg.success_radius) {
    status = Status::success;
  } else if (point_in_any_box(w.agent_pos, w.obstacles, cfg.agent_radius,
                              -std::numeric_limits<double>::infinity())) {
    // Only box contact ends the episode. The arena clamp already keeps the
    // agent at or above the ground, and ground proximity is discouraged
    // through the down ray's share of the proximity penalty; a ground-level
    // target must stay reachable.
    status = Status::collision;
  } else if (curr_dist > cfg.far_limit) {
    status = Status::out_of_range;
  } else if (w.step_count >= cfg.max_steps) {
    status = Status::timeout;
  }
  w.status = status;

  const auto readings = cast_ray_fan(w.agent_pos, w.obstacles, cfg.ground_height, rays);

  StepOutcome out;
  out.reward = compute_reward(w.prev_target_distance, curr_dist, readings, status, rc);
  out.status = status;
  out.next_state = build_state(w, cfg, rays, readings);
  w.prev_target_distance = curr_dist;
  return out;
}

std::uint64_t world_hash(const WorldInstance& w) {
  std::uint64_t h = kFnvOffsetBasis;
  for (const Aabb& b : w.obstacles) {
    h = fnv1a64(b.min.x, h);
    h = fnv1a64(b.min.y, h);
    h = fnv1a64(b.min.z, h);
    h = fnv1a64(b.max.x, h);
    h = fnv1a64(b.max.y, h);
    h = fnv1a64(b.max.z, h);
  }
  h = fnv1a64(w.agent_pos.x, h);
  h = fnv1a64(w.agent_pos.y, h);
  h = fnv1a64(w.agent_pos.z, h);
  h = fnv1a64(w.target_pos.x, h);
  h = fnv1a64(w.target_pos.y, h);
  h = fnv1a64(w.target_pos.z, h);
  h = fnv1a64(w.target_heading.x, h);
  h = fnv1a64(w.target_heading.z, h);
  return h;
}

}  // namespace lmdc
