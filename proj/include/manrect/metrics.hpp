#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "manrect/geom.hpp"

// Rectification quality for a known ground-truth quadrangle mapped through a
// candidate homography: corner-angle deviation from 90 degrees (d_rect),
// orientation deviation of the mid-lines from the image axes (d_rot), and
// aspect-ratio deviation from the template (d_ar).

namespace manrect {

struct DegenerateQuadError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EvalReport {
  double d_rect;   // degrees
  double d_rot;    // degrees
  double d_ar;     // unitless ratio (multiply by 100 to report %)
  bool rotated90;  // the 90-degree-rotated axis labeling fit better
};

namespace detail {

// Fold an undirected-line angle into (-90, 90] degrees.
inline double fold_half_turn(double deg) {
  double a = std::fmod(deg, 180.0);
  if (a > 90.0) a -= 180.0;
  if (a <= -90.0) a += 180.0;
  return a;
}

inline double x_axis_angle_deg(Point2 d) {
  return fold_half_turn(std::atan2(d.y, d.x) * 180.0 / std::numbers::pi);
}

inline double y_axis_angle_deg(Point2 d) {
  return fold_half_turn(std::atan2(d.x, d.y) * 180.0 / std::numbers::pi);
}

inline double corner_angle_deg(Point2 prev, Point2 cur, Point2 next) {
  const Point2 u = prev - cur;
  const Point2 w = next - cur;
  const double nu = norm(u);
  const double nw = norm(w);
  if (nu == 0.0 || nw == 0.0) throw DegenerateQuadError("coincident mapped corners");
  const double c = std::clamp(dot(u, w) / (nu * nw), -1.0, 1.0);
  return std::acos(c) * 180.0 / std::numbers::pi;
}

}  // namespace detail

// Corner order is the template's: p0 top-left, then clockwise, so sides
// p0p1/p2p3 are the template-horizontal pair regardless of how the mapped
// quadrangle sits in the image. The 90-degree rotation ambiguity of
// rectification affects only which image axis each mid-line is compared
// against; side labels stay with the template, so d_ar is unaffected.
inline EvalReport evaluate(const Quadrangle& q, double t, const Mat3& h) {
  if (!(t > 0.0) || !std::isfinite(t))
    throw std::invalid_argument("evaluate: aspect ratio must be positive");

  std::array<Point2, 4> m;
  for (int i = 0; i < 4; ++i) {
    const std::optional<Point2> mapped = apply_homography(h, q.corners[size_t(i)]);
    if (!mapped || !is_finite(*mapped))
      throw DegenerateQuadError("mapped corner at infinity");
    m[size_t(i)] = *mapped;
  }
  if (detail::segments_properly_cross(m[0], m[1], m[2], m[3]) ||
      detail::segments_properly_cross(m[1], m[2], m[3], m[0]))
    throw DegenerateQuadError("mapped quadrangle self-intersects");

  double d_rect = 0.0;
  for (int i = 0; i < 4; ++i)
    d_rect += std::abs(90.0 - detail::corner_angle_deg(m[size_t((i + 3) % 4)], m[size_t(i)],
                                                       m[size_t((i + 1) % 4)]));
  d_rect *= 0.25;

  const Point2 mid01 = 0.5 * (m[0] + m[1]);  // top side
  const Point2 mid12 = 0.5 * (m[1] + m[2]);  // right side
  const Point2 mid23 = 0.5 * (m[2] + m[3]);  // bottom side
  const Point2 mid30 = 0.5 * (m[3] + m[0]);  // left side
  const Point2 lr = mid12 - mid30;  // joins left/right mids: horizontal when rectified upright
  const Point2 tb = mid23 - mid01;  // joins top/bottom mids: vertical when rectified upright
  if (norm(lr) == 0.0 || norm(tb) == 0.0)
    throw DegenerateQuadError("mid-lines collapse to a point");

  const double rot_upright =
      0.5 * (std::abs(detail::x_axis_angle_deg(lr)) + std::abs(detail::y_axis_angle_deg(tb)));
  const double rot_sideways =
      0.5 * (std::abs(detail::x_axis_angle_deg(tb)) + std::abs(detail::y_axis_angle_deg(lr)));
  const bool rotated90 = rot_sideways < rot_upright;

  const double a = norm(m[1] - m[0]);
  const double b = norm(m[2] - m[1]);
  const double c = norm(m[3] - m[2]);
  const double d = norm(m[0] - m[3]);
  const double d_ar = std::abs((a + c) / (b + d) - t) / t;

  return {d_rect, rotated90 ? rot_sideways : rot_upright, d_ar, rotated90};
}

}  // namespace manrect
