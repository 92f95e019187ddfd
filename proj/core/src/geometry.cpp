#include "lmdc/geometry.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace lmdc {

namespace {

constexpr double kUnitTol = 1e-9;

void check_ray_inputs(const Vec3& origin, const Vec3& direction, double max_range) {
  if (!origin.finite() || !direction.finite() || !std::isfinite(max_range)) {
    throw std::invalid_argument("ray_aabb_intersect: non-finite input");
  }
  if (max_range <= 0.0) {
    throw std::invalid_argument("ray_aabb_intersect: max_range must be positive");
  }
  // |d.d - 1| <= 2*tol keeps the norm within ~tol of 1 without a sqrt.
  const double sq = direction.dot(direction);
  if (std::abs(sq - 1.0) > 2.0 * kUnitTol) {
    throw std::invalid_argument("ray_aabb_intersect: direction must be unit length");
  }
}

// One slab; narrows [tlo, thi] in place. Returns false on a definite miss.
inline bool clip_axis(double o, double d, double mn, double mx, double& tlo, double& thi) {
  if (d == 0.0) {
    return o >= mn && o <= mx;  // parallel: inside the slab or never
  }
  double t1 = (mn - o) / d;
  double t2 = (mx - o) / d;
  if (t1 > t2) std::swap(t1, t2);
  tlo = std::max(tlo, t1);
  thi = std::min(thi, t2);
  return tlo <= thi;
}

}  // namespace

std::optional<double> ray_aabb_intersect(const Vec3& origin, const Vec3& direction,
                                         const Aabb& box, double max_range) {
  check_ray_inputs(origin, direction, max_range);
  if (!box.valid()) throw std::invalid_argument("ray_aabb_intersect: malformed box");

  double tlo = -std::numeric_limits<double>::infinity();
  double thi = std::numeric_limits<double>::infinity();
  if (!clip_axis(origin.x, direction.x, box.min.x, box.max.x, tlo, thi)) return std::nullopt;
  if (!clip_axis(origin.y, direction.y, box.min.y, box.max.y, tlo, thi)) return std::nullopt;
  if (!clip_axis(origin.z, direction.z, box.min.z, box.max.z, tlo, thi)) return std::nullopt;

  if (thi < 0.0) return std::nullopt;  // box entirely behind the origin
  const double t = std::max(tlo, 0.0);
  if (t >= max_range) return std::nullopt;
  return t;
}

std::vector<RayReading> cast_ray_fan(const Vec3& position, std::span<const Aabb> world,
                                     double ground_height, const RayConfig& cfg) {
  if (!position.finite()) throw std::invalid_argument("cast_ray_fan: non-finite position");
  if (cfg.n_horizontal < 1) throw std::invalid_argument("cast_ray_fan: need at least one ray");
  if (cfg.max_range <= 0.0) throw std::invalid_argument("cast_ray_fan: max_range must be positive");
  if (position.y < ground_height) {
    throw std::invalid_argument("cast_ray_fan: position below ground");
  }

  std::vector<RayReading> readings;
  readings.reserve(cfg.n_readings());

  const double two_pi = 2.0 * 3.14159265358979323846;
  for (int k = 0; k < cfg.n_horizontal; ++k) {
    const double az = two_pi * k / cfg.n_horizontal;
    const Vec3 dir{std::cos(az), 0.0, std::sin(az)};
    double best = cfg.max_range;
    for (const Aabb& box : world) {
      if (auto t = ray_aabb_intersect(position, dir, box, cfg.max_range)) {
        best = std::min(best, *t);
      }
    }
    readings.push_back({best, best < cfg.max_range});
  }

  if (cfg.include_down_ray) {
    const Vec3 down{0.0, -1.0, 0.0};
    double best = position.y - ground_height;  // the ground always answers
    for (const Aabb& box : world) {
      if (auto t = ray_aabb_intersect(position, down, box, cfg.max_range)) {
        best = std::min(best, *t);
      }
    }
    best = std::min(best, cfg.max_range);
    readings.push_back({best, best < cfg.max_range});
  }

  return readings;
}

bool point_in_any_box(const Vec3& p, std::span<const Aabb> world, double inflate,
                      double ground_height) {
  if (!p.finite()) throw std::invalid_argument("point_in_any_box: non-finite point");
  if (inflate < 0.0) throw std::invalid_argument("point_in_any_box: negative inflate");
  if (p.y - inflate < ground_height) return true;
  for (const Aabb& box : world) {
    if (box.contains(p, inflate)) return true;
  }
  return false;
}

}  // namespace lmdc
