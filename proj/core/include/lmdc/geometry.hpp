#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <vector>

namespace lmdc {

// World frame: y is up, the ground is the plane y = ground_height (0 by
// default). Obstacles are axis-aligned boxes resting on the ground.

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(dot(*this)); }
  bool finite() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
  }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

struct Aabb {
  Vec3 min;
  Vec3 max;

  bool valid() const {
    return min.finite() && max.finite() && min.x <= max.x && min.y <= max.y &&
           min.z <= max.z;
  }
  // Inclusive containment of a point, with every face pushed out by inflate.
  bool contains(const Vec3& p, double inflate = 0.0) const {
    return p.x >= min.x - inflate && p.x <= max.x + inflate &&
           p.y >= min.y - inflate && p.y <= max.y + inflate &&
           p.z >= min.z - inflate && p.z <= max.z + inflate;
  }
};

struct RayConfig {
  int n_horizontal = 8;
  bool include_down_ray = true;
  double max_range = 20.0;

  int n_readings() const { return n_horizontal + (include_down_ray ? 1 : 0); }
};

// hit == false implies distance == max_range exactly;
// hit == true implies 0 <= distance < max_range.
struct RayReading {
  double distance = 0.0;
  bool hit = false;
};

// Smallest t in [0, max_range) with origin + t*direction inside or on the
// box (slab method). An origin inside the box yields t = 0. direction must
// be unit length within 1e-9 and all inputs finite; violations throw.
std::optional<double> ray_aabb_intersect(const Vec3& origin, const Vec3& direction,
                                         const Aabb& box, double max_range);

// n_horizontal rays at world-frame azimuths 2*pi*k/n in the horizontal
// plane (k = 0 points along +x), each reading the nearest box hit, plus an
// optional straight-down reading that also sees the ground plane. Readings
// are ordered: horizontal fan first, down ray last.
std::vector<RayReading> cast_ray_fan(const Vec3& position, std::span<const Aabb> world,
                                     double ground_height, const RayConfig& cfg);

// True iff p lies inside any box expanded by inflate on every face, or p is
// within inflate of the ground plane (p.y - inflate < ground_height).
bool point_in_any_box(const Vec3& p, std::span<const Aabb> world, double inflate,
                      double ground_height = 0.0);

}  // namespace lmdc
