#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "manrect/consistency.hpp"
#include "manrect/geom.hpp"
#include "manrect/rectify.hpp"

// Synthetic Manhattan scenes with exact ground truth: a planar rectangle at
// unit distance, rotated by a known orthonormal matrix, carrying an axis grid
// of segments projected through a pinhole camera, with Gaussian endpoint
// noise and uniform in-image outlier segments. Also the brute-force robust
// cost grid search used as an optimizer oracle.

namespace manrect {

// Plane pose with no usable finite vanishing point (or facing away).
struct PoseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SceneSpec {
  CameraIntrinsics intrinsics;
  Mat3 plane_rotation;       // orthonormal, det +1
  int n_h = 10;              // segments converging to the horizontal vanishing point
  int n_v = 10;
  double sigma = 0.0;        // endpoint noise std, pixels
  double outlier_fraction = 0.0;
  std::uint64_t seed = 0;
  ImageSize image_size{640, 480};
  double aspect = 1.5;       // object width / height
};

struct GroundTruth {
  Point2 v_h;
  Point2 v_v;
  Mat3 H_true;
  Quadrangle quad;  // projected object boundary, clockwise from the object's top-left
  double aspect;
};

namespace detail {

// Fixed engine and fixed transforms: mt19937_64 is bit-exact everywhere, and
// hand-rolled uniform/Box-Muller transforms avoid the implementation-defined
// sequences of std::*_distribution.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : eng_(seed) {}

  double uniform() { return double(eng_() >> 11) * 0x1.0p-53; }  // [0, 1)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double gauss() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = double((eng_() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

inline bool is_orthonormal(const Mat3& r) {
  const Mat3 g = transpose(r) * r;
  double max_err = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      max_err = std::max(max_err, std::abs(g(i, j) - (i == j ? 1.0 : 0.0)));
  return max_err < 1e-9 && std::abs(det(r) - 1.0) < 1e-9;
}

inline void validate(const SceneSpec& spec) {
  if (spec.n_h < 2 || spec.n_v < 2)
    throw std::invalid_argument("SceneSpec: need at least 2 segments per direction");
  if (!(spec.sigma >= 0.0)) throw std::invalid_argument("SceneSpec: sigma must be >= 0");
  if (!(spec.outlier_fraction >= 0.0 && spec.outlier_fraction < 1.0))
    throw std::invalid_argument("SceneSpec: outlier_fraction must be in [0, 1)");
  if (spec.image_size.width <= 0 || spec.image_size.height <= 0)
    throw std::invalid_argument("SceneSpec: image size must be positive");
  if (!(spec.aspect > 0.0)) throw std::invalid_argument("SceneSpec: aspect must be positive");
  if (!is_orthonormal(spec.plane_rotation))
    throw std::invalid_argument("SceneSpec: plane_rotation must be orthonormal with det +1");
}

inline Point2 project(const CameraIntrinsics& cam, Vec3 x) {
  return {cam.f * x.x / x.z + cam.p.x, cam.f * x.y / x.z + cam.p.y};
}

// Vanishing point of an in-plane direction: image of the direction ray.
// Poses sending it beyond 1e9 px from the principal point are degenerate.
inline Point2 vanishing_point(const CameraIntrinsics& cam, Vec3 d) {
  const double radial = cam.f * std::hypot(d.x, d.y);
  if (std::abs(d.z) * 1e9 <= radial)
    throw PoseError("vanishing point at infinity: plane direction parallel to the image plane");
  return {cam.f * d.x / d.z + cam.p.x, cam.f * d.y / d.z + cam.p.y};
}

}  // namespace detail

// Plane rotations as tilt about the camera x-axis then the y-axis; the
// convenient pose parametrization for specs and the CLI.
inline Mat3 rotation_about_x(double degrees) {
  const double r = degrees * std::numbers::pi / 180.0;
  const double c = std::cos(r), s = std::sin(r);
  return {{1, 0, 0, 0, c, -s, 0, s, c}};
}

inline Mat3 rotation_about_y(double degrees) {
  const double r = degrees * std::numbers::pi / 180.0;
  const double c = std::cos(r), s = std::sin(r);
  return {{c, 0, s, 0, 1, 0, -s, 0, c}};
}

inline std::pair<std::vector<Segment>, GroundTruth> generate(const SceneSpec& spec) {
  detail::validate(spec);
  const CameraIntrinsics& cam = spec.intrinsics;
  const Mat3& rot = spec.plane_rotation;

  // Object frame: u rightward, w downward, half extents scaled so the object
  // fills a comfortable fraction of the view at unit distance.
  const double hu = 0.25 * spec.aspect;
  const double hw = 0.25;
  const auto to_camera = [&](double u, double w) {
    return rot * Vec3{u, w, 0.0} + Vec3{0.0, 0.0, 1.0};
  };

  const Vec3 dir_h = rot * Vec3{1.0, 0.0, 0.0};
  const Vec3 dir_v = rot * Vec3{0.0, 1.0, 0.0};
  const Point2 v_h = detail::vanishing_point(cam, dir_h);
  const Point2 v_v = detail::vanishing_point(cam, dir_v);

  const std::array<std::pair<double, double>, 4> object_corners = {
      {{-hu, -hw}, {hu, -hw}, {hu, hw}, {-hu, hw}}};
  std::array<Point2, 4> corners;
  for (int i = 0; i < 4; ++i) {
    const Vec3 x = to_camera(object_corners[size_t(i)].first, object_corners[size_t(i)].second);
    if (!(x.z > 1e-9)) throw PoseError("object corner behind the camera");
    corners[size_t(i)] = detail::project(cam, x);
  }
  if (!(Quadrangle::signed_area_of(corners) > 0.0))
    throw PoseError("object faces away from the camera");

  detail::RandomStream rng(spec.seed);
  std::vector<Segment> segments;
  segments.reserve(size_t(spec.n_h + spec.n_v) * 2);
  const auto add_noisy = [&](Point2 a, Point2 b) {
    segments.emplace_back(Point2{a.x + spec.sigma * rng.gauss(), a.y + spec.sigma * rng.gauss()},
                          Point2{b.x + spec.sigma * rng.gauss(), b.y + spec.sigma * rng.gauss()});
  };
  for (int k = 0; k < spec.n_h; ++k) {
    const double w = -hw + 2.0 * hw * double(k) / double(spec.n_h - 1);
    add_noisy(detail::project(cam, to_camera(-hu, w)), detail::project(cam, to_camera(hu, w)));
  }
  for (int k = 0; k < spec.n_v; ++k) {
    const double u = -hu + 2.0 * hu * double(k) / double(spec.n_v - 1);
    add_noisy(detail::project(cam, to_camera(u, -hw)), detail::project(cam, to_camera(u, hw)));
  }

  const double diag = diagonal(spec.image_size);
  const double w_px = spec.image_size.width;
  const double h_px = spec.image_size.height;
  const int n_outliers = int(std::ceil(spec.outlier_fraction * double(spec.n_h + spec.n_v)));
  for (int k = 0; k < n_outliers; ++k) {
    for (;;) {  // rejection sampling: random in-image segment of bounded length
      const Point2 a{rng.uniform(0.0, w_px), rng.uniform(0.0, h_px)};
      const double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
      const double len = rng.uniform(0.05, 0.3) * diag;
      const Point2 b{a.x + len * std::cos(theta), a.y + len * std::sin(theta)};
      if (b.x >= 0.0 && b.x <= w_px && b.y >= 0.0 && b.y <= h_px) {
        segments.emplace_back(a, b);
        break;
      }
    }
  }

  const Rectification rect = rectification_from_vps(v_h, v_v, cam);
  GroundTruth truth{v_h, v_v, rect.H, Quadrangle(corners), spec.aspect};
  return {std::move(segments), std::move(truth)};
}

// Exhaustive robust-cost minimizer on a square grid: the slow, assumption-free
// oracle the optimizer is validated against. Ties keep the first point in
// row-major scan order.
inline Point2 grid_search_vp(std::span<const Segment> segments, double t_d, Point2 center,
                             double window, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("grid_search_vp: step must be positive");
  if (!(window >= 0.0)) throw std::invalid_argument("grid_search_vp: window must be >= 0");
  const RobustThreshold t(t_d);
  const int n = int(std::floor(window / step));
  Point2 best = center;
  double best_cost = std::numeric_limits<double>::infinity();
  for (int iy = -n; iy <= n; ++iy) {
    for (int ix = -n; ix <= n; ++ix) {
      const Point2 v{center.x + double(ix) * step, center.y + double(iy) * step};
      const double c = robust_cost(v, segments, t);
      if (c < best_cost) {
        best_cost = c;
        best = v;
      }
    }
  }
  return best;
}

}  // namespace manrect
