#include "sonarmvs/scene.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sonarmvs/errors.hpp"

namespace sonarmvs {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kHeightSlack = 1e-9;
constexpr double kMinRange = 1e-12;

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * (b - a).cross(c - a).norm();
}

// Smallest root of a*s^2 + b*s + c in [lo, hi], if any.
std::optional<double> first_root(double a, double b, double c, double lo, double hi) {
  const double scale = std::max({std::abs(a), std::abs(b), std::abs(c), 1e-300});
  if (std::abs(a) <= 1e-14 * scale) {
    if (b == 0.0) {
      if (c == 0.0) return lo;
      return std::nullopt;
    }
    const double s = -c / b;
    if (s >= lo && s <= hi) return s;
    return std::nullopt;
  }
  double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) {
    if (disc > -1e-14 * b * b) {
      disc = 0.0;
    } else {
      return std::nullopt;
    }
  }
  const double sq = std::sqrt(disc);
  // Numerically stable pair of roots.
  const double q = -0.5 * (b + std::copysign(sq, b));
  double r1 = q / a;
  double r2 = q != 0.0 ? c / q : r1;
  if (r1 > r2) std::swap(r1, r2);
  if (r1 >= lo && r1 <= hi) return r1;
  if (r2 >= lo && r2 <= hi) return r2;
  return std::nullopt;
}

}  // namespace

void Scene::validate() const {
  if (!(reflectivity > 0.0 && reflectivity <= 1.0)) {
    throw InvalidSceneError("scene reflectivity must lie in (0, 1]");
  }
  std::visit(
      [](const auto& g) {
        using G = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<G, SphereShape>) {
          if (!(g.radius > 0.0) || !g.center.allFinite()) {
            throw InvalidSceneError("sphere radius must be > 0 with a finite center");
          }
        } else if constexpr (std::is_same_v<G, Heightfield>) {
          if (g.heights.rows() < 2 || g.heights.cols() < 2) {
            throw InvalidSceneError("heightfield grid must be at least 2x2");
          }
          if (!(g.cell_size > 0.0)) throw InvalidSceneError("heightfield cell_size must be > 0");
          for (double h : g.heights.values()) {
            if (!std::isfinite(h)) throw InvalidSceneError("heightfield has non-finite heights");
          }
        } else if constexpr (std::is_same_v<G, TriangleMesh>) {
          double area = 0.0;
          for (const auto& f : g.faces) {
            for (auto idx : f) {
              if (idx >= g.vertices.size()) {
                throw InvalidSceneError("mesh face references a missing vertex");
              }
            }
            area += triangle_area(g.vertices[f[0]], g.vertices[f[1]], g.vertices[f[2]]);
          }
          if (!g.faces.empty() && !(area > 0.0)) {
            throw InvalidSceneError("mesh has zero total area");
          }
        }
      },
      geometry);
}

std::optional<double> ray_sphere_intersect(const Vec3& origin, const Vec3& dir,
                                           const Vec3& center, double radius) {
  const Vec3 oc = origin - center;
  const double b = oc.dot(dir);
  const double c = oc.squaredNorm() - radius * radius;
  double disc = b * b - c;
  if (disc < 0.0) {
    // Tangent rays lose the zero discriminant to rounding; accept them.
    if (disc < -1e-12 * std::max(oc.squaredNorm(), radius * radius)) return std::nullopt;
    disc = 0.0;
  }
  const double sq = std::sqrt(disc);
  const double t1 = -b - sq;
  if (t1 > kMinRange) return t1;
  const double t2 = -b + sq;
  if (t2 > kMinRange) return t2;
  return std::nullopt;
}

HeightBounds height_bounds(const Heightfield& field) {
  const auto v = field.heights.values();
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return {*lo, *hi};
}

std::optional<RayHit> ray_heightfield_intersect(const Vec3& origin, const Vec3& dir,
                                                const Heightfield& field) {
  return ray_heightfield_intersect(origin, dir, field, height_bounds(field));
}

std::optional<RayHit> ray_heightfield_intersect(const Vec3& origin, const Vec3& dir,
                                                const Heightfield& field,
                                                const HeightBounds& bounds) {
  const auto nx = static_cast<long>(field.heights.cols());
  const auto ny = static_cast<long>(field.heights.rows());
  const double c = field.cell_size;
  // The z slab is padded so a flat field (min == max) does not collapse the
  // clip interval to a single, rounding-sensitive point.
  const double pad = kHeightSlack * std::max({1.0, std::abs(bounds.min), std::abs(bounds.max)});
  const double lo[3] = {field.origin_x, field.origin_y, bounds.min - pad};
  const double hi[3] = {field.origin_x + static_cast<double>(nx - 1) * c,
                        field.origin_y + static_cast<double>(ny - 1) * c, bounds.max + pad};

  // Slab clip against the bounding box.
  double t0 = 0.0;
  double t1 = kInf;
  for (int a = 0; a < 3; ++a) {
    if (dir[a] == 0.0) {
      if (origin[a] < lo[a] || origin[a] > hi[a]) return std::nullopt;
      continue;
    }
    double ta = (lo[a] - origin[a]) / dir[a];
    double tb = (hi[a] - origin[a]) / dir[a];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
  }
  if (t0 > t1) return std::nullopt;

  const double start_x = origin.x() + t0 * dir.x();
  const double start_y = origin.y() + t0 * dir.y();
  long ix = std::clamp(static_cast<long>(std::floor((start_x - field.origin_x) / c)), 0L, nx - 2);
  long iy = std::clamp(static_cast<long>(std::floor((start_y - field.origin_y) / c)), 0L, ny - 2);

  const int step_x = dir.x() > 0.0 ? 1 : -1;
  const int step_y = dir.y() > 0.0 ? 1 : -1;
  auto next_boundary = [&](double o, double d, double origin0, long i, int step) {
    if (d == 0.0) return kInf;
    const double b = origin0 + static_cast<double>(i + (step > 0 ? 1 : 0)) * c;
    return (b - o) / d;
  };
  double t_max_x = next_boundary(origin.x(), dir.x(), field.origin_x, ix, step_x);
  double t_max_y = next_boundary(origin.y(), dir.y(), field.origin_y, iy, step_y);
  const double t_delta_x = dir.x() != 0.0 ? c / std::abs(dir.x()) : kInf;
  const double t_delta_y = dir.y() != 0.0 ? c / std::abs(dir.y()) : kInf;

  double t_enter = t0;
  while (true) {
    const double t_exit = std::min({t_max_x, t_max_y, t1});
    const double h00 = field.heights(iy, ix);
    const double h10 = field.heights(iy, ix + 1);
    const double h01 = field.heights(iy + 1, ix);
    const double h11 = field.heights(iy + 1, ix + 1);
    const double cell_lo = std::min({h00, h10, h01, h11});
    const double cell_hi = std::max({h00, h10, h01, h11});
    const double z_enter = origin.z() + t_enter * dir.z();
    const double z_exit = origin.z() + t_exit * dir.z();
    if (std::min(z_enter, z_exit) <= cell_hi + pad && std::max(z_enter, z_exit) >= cell_lo - pad) {
      // Local bilinear coordinates, parametrized from the cell entry point.
      const double xc = field.origin_x + static_cast<double>(ix) * c;
      const double yc = field.origin_y + static_cast<double>(iy) * c;
      const double ue = (origin.x() + t_enter * dir.x() - xc) / c;
      const double ve = (origin.y() + t_enter * dir.y() - yc) / c;
      const double du = dir.x() / c;
      const double dv = dir.y() / c;
      const double ka = h10 - h00;
      const double kb = h01 - h00;
      const double kk = h00 - h10 - h01 + h11;
      const double qa = -kk * du * dv;
      const double qb = dir.z() - ka * du - kb * dv - kk * (ue * dv + ve * du);
      const double qc = z_enter - (h00 + ka * ue + kb * ve + kk * ue * ve);
      const double span = t_exit - t_enter;
      const double slack = 1e-12 * std::max(1.0, span);
      const double s_lo = std::max(-slack, kMinRange - t_enter);
      if (auto s = first_root(qa, qb, qc, s_lo, span + slack)) {
        const double t = t_enter + *s;
        const double u = std::clamp(ue + *s * du, 0.0, 1.0);
        const double v = std::clamp(ve + *s * dv, 0.0, 1.0);
        const double gx = (ka + kk * v) / c;
        const double gy = (kb + kk * u) / c;
        RayHit hit;
        hit.range = t;
        hit.normal = Vec3(-gx, -gy, 1.0).normalized();
        return hit;
      }
    }
    if (t_exit >= t1) break;
    if (t_max_x < t_max_y) {
      ix += step_x;
      t_enter = t_max_x;
      t_max_x += t_delta_x;
    } else {
      iy += step_y;
      t_enter = t_max_y;
      t_max_y += t_delta_y;
    }
    if (ix < 0 || ix > nx - 2 || iy < 0 || iy > ny - 2) break;
  }
  return std::nullopt;
}

std::optional<RayHit> ray_mesh_intersect(const Vec3& origin, const Vec3& dir,
                                         const TriangleMesh& mesh) {
  double best = kInf;
  Vec3 best_normal = Vec3::UnitZ();
  for (const auto& f : mesh.faces) {
    const Vec3& v0 = mesh.vertices[f[0]];
    const Vec3 e1 = mesh.vertices[f[1]] - v0;
    const Vec3 e2 = mesh.vertices[f[2]] - v0;
    const Vec3 p = dir.cross(e2);
    const double det = e1.dot(p);
    if (std::abs(det) < 1e-15) continue;
    const double inv = 1.0 / det;
    const Vec3 s = origin - v0;
    const double u = s.dot(p) * inv;
    if (u < 0.0 || u > 1.0) continue;
    const Vec3 q = s.cross(e1);
    const double v = dir.dot(q) * inv;
    if (v < 0.0 || u + v > 1.0) continue;
    const double t = e2.dot(q) * inv;
    if (t > kMinRange && t < best) {
      best = t;
      best_normal = e1.cross(e2).normalized();
    }
  }
  if (best == kInf) return std::nullopt;
  if (best_normal.dot(dir) > 0.0) best_normal = -best_normal;
  return RayHit{best, best_normal};
}

std::optional<RayHit> intersect(const Scene& scene, const Vec3& origin, const Vec3& dir) {
  return std::visit(
      [&](const auto& g) -> std::optional<RayHit> {
        using G = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<G, EmptyGeometry>) {
          return std::nullopt;
        } else if constexpr (std::is_same_v<G, SphereShape>) {
          auto t = ray_sphere_intersect(origin, dir, g.center, g.radius);
          if (!t) return std::nullopt;
          return RayHit{*t, (origin + *t * dir - g.center).normalized()};
        } else if constexpr (std::is_same_v<G, Heightfield>) {
          return ray_heightfield_intersect(origin, dir, g);
        } else {
          return ray_mesh_intersect(origin, dir, g);
        }
      },
      scene.geometry);
}

}  // namespace sonarmvs
