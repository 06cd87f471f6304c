#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>

#include "manrect/geom.hpp"

// Vanishing-point/segment consistency: the minimum over all lines through a
// candidate point v of the summed squared distances from a segment's two
// endpoints to the line. Equals the smallest eigenvalue of the 2x2 endpoint
// scatter matrix about v, which gives a closed form and an analytic gradient.

namespace manrect {

// Symmetric 2x2 matrix [[a, b], [b, c]], units pixels^2. Positive
// semidefinite by construction up to round-off (a, c >= 0; ac - b^2 can dip
// below 0 by ~eps * (|ac| + b^2) at large coordinates).
struct ScatterMatrix {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
};

struct RobustThreshold {
  double t_d;  // pixels^2, > 0

  explicit RobustThreshold(double value) : t_d(value) {
    if (!(value > 0.0) || !std::isfinite(value))
      throw std::invalid_argument("RobustThreshold: must be positive");
  }
};

// M = sum over both endpoints of (x - v)(x - v)^T.
inline ScatterMatrix scatter(Point2 v, const Segment& s) {
  const Point2 d1 = s.p1 - v;
  const Point2 d2 = s.p2 - v;
  return {d1.x * d1.x + d2.x * d2.x, d1.x * d1.y + d2.x * d2.y, d1.y * d1.y + d2.y * d2.y};
}

// Smallest eigenvalue, clamped below at 0 to absorb negative round-off.
// sqrt instead of hypot: the radicand tops out near 1e32 for on-screen
// geometry, far from overflow, and sqrt stays vector-friendly in hot loops.
inline double lambda_min(ScatterMatrix m) {
  const double half_diff = 0.5 * (m.a - m.c);
  const double l = 0.5 * (m.a + m.c) - std::sqrt(half_diff * half_diff + m.b * m.b);
  return l > 0.0 ? l : 0.0;
}

inline double consistency(Point2 v, const Segment& s) { return lambda_min(scatter(v, s)); }

inline double robust_cost(Point2 v, std::span<const Segment> segments, RobustThreshold t) {
  double sum = 0.0;
  for (const Segment& s : segments) sum += std::min(t.t_d, consistency(v, s));
  return sum;
}

namespace detail {

// Unit eigenvector of the smallest eigenvalue. Valid only when the eigengap
// is resolvable; callers gate on it.
inline Point2 lambda_min_eigenvector(ScatterMatrix m, double lmin) {
  // (M - lmin I) u = 0: rows (a - lmin, b) and (b, c - lmin) are both
  // orthogonal to u; use the larger row for stability.
  const Point2 r1{m.a - lmin, m.b};
  const Point2 r2{m.b, m.c - lmin};
  const Point2 r = dot(r1, r1) >= dot(r2, r2) ? r1 : r2;
  const double n = std::sqrt(r.x * r.x + r.y * r.y);
  if (n == 0.0) return {1.0, 0.0};  // isotropic: any direction (caller rejects this case)
  return {-r.y / n, r.x / n};
}

}  // namespace detail

// Gradient of consistency with respect to v: -2 * sum_j (u . (x_j - v)) u
// with u the unit eigenvector of lambda_min. Returns nullopt when the
// eigengap is below 1e-9 * trace(M): the eigenvector is unstable there and
// the cost is locally conical, so callers fall back to finite differences.
inline std::optional<Point2> consistency_gradient(Point2 v, const Segment& s) {
  const ScatterMatrix m = scatter(v, s);
  const double half_diff = 0.5 * (m.a - m.c);
  const double gap = 2.0 * std::sqrt(half_diff * half_diff + m.b * m.b);  // lmax - lmin
  if (gap < 1e-9 * (m.a + m.c)) return std::nullopt;
  const double lmin = lambda_min(m);
  const Point2 u = detail::lambda_min_eigenvector(m, lmin);
  const double proj_sum = dot(u, s.p1 - v) + dot(u, s.p2 - v);
  return -2.0 * proj_sum * u;
}

namespace detail {

inline double fd_step(Point2 v) { return 1e-5 * (1.0 + norm(v)); }

// Central finite differences of consistency; backup for degenerate eigengaps.
inline Point2 consistency_gradient_fd(Point2 v, const Segment& s) {
  const double h = fd_step(v);
  return {(consistency({v.x + h, v.y}, s) - consistency({v.x - h, v.y}, s)) / (2.0 * h),
          (consistency({v.x, v.y + h}, s) - consistency({v.x, v.y - h}, s)) / (2.0 * h)};
}

}  // namespace detail

// Robust cost and its gradient at v over a fixed segment set. Segments at or
// above the cap contribute T_D with zero gradient (they are outliers for the
// current v); degenerate-eigengap segments use the finite-difference backup.
// The gradient comes from differentiating the closed form through the
// scatter entries, which equals the eigenvector form -2 sum_j (u.(x_j - v)) u
// wherever the eigengap resolves, sharing the value's square root:
//   dl/da = (1 - h/r)/2, dl/dc = (1 + h/r)/2, dl/db = -b/r
//   da/dvx = -2 sx, db/dvx = -sy, db/dvy = -sx, dc/dvy = -2 sy
// with h = (a - c)/2, r the root, sx, sy the summed endpoint offsets.
inline std::pair<double, Point2> robust_cost_with_gradient(Point2 v,
                                                           std::span<const Segment> segments,
                                                           RobustThreshold t) {
  double cost = 0.0;
  Point2 grad{0.0, 0.0};
  for (const Segment& s : segments) {
    const ScatterMatrix m = scatter(v, s);
    const double half_diff = 0.5 * (m.a - m.c);
    const double root = std::sqrt(half_diff * half_diff + m.b * m.b);
    const double raw = 0.5 * (m.a + m.c) - root;
    const double d = raw > 0.0 ? raw : 0.0;
    if (d >= t.t_d) {
      cost += t.t_d;
      continue;
    }
    cost += d;
    if (2.0 * root < 1e-9 * (m.a + m.c)) {
      grad = grad + detail::consistency_gradient_fd(v, s);
      continue;
    }
    const double ratio = half_diff / root;
    const double la = 0.5 * (1.0 - ratio);
    const double lc = 0.5 * (1.0 + ratio);
    const double lb = -m.b / root;
    const double sx = (s.p1.x - v.x) + (s.p2.x - v.x);
    const double sy = (s.p1.y - v.y) + (s.p2.y - v.y);
    grad.x -= 2.0 * la * sx + lb * sy;
    grad.y -= lb * sx + 2.0 * lc * sy;
  }
  return {cost, grad};
}

}  // namespace manrect
