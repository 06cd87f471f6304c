#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>

// Planar projective geometry primitives: points, segments, 3x3 matrices,
// pinhole intrinsics. All arithmetic is double precision; pixel-scale noise
// combined with distant vanishing points rules out single precision.
//
// Image convention: origin at the top-left corner, x rightward, y downward.

namespace manrect {

inline constexpr double kEpsParallel = 1e-12;  // on the normalized direction cross product
inline constexpr double kEpsW = 1e-12;         // dehomogenization cutoff

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

struct ImageSize {
  int width = 0;
  int height = 0;
};

inline double diagonal(ImageSize s) { return std::hypot(double(s.width), double(s.height)); }

constexpr Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
constexpr Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
constexpr Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }
constexpr Point2 operator*(Point2 p, double s) { return s * p; }
constexpr double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 p) { return std::hypot(p.x, p.y); }
inline bool is_finite(Point2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

constexpr Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
constexpr Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
constexpr Vec3 operator*(double s, Vec3 v) { return {s * v.x, s * v.y, s * v.z}; }
constexpr Vec3 operator-(Vec3 v) { return {-v.x, -v.y, -v.z}; }
constexpr double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(Vec3 a, Vec3 b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(Vec3 v) { return std::sqrt(dot(v, v)); }
inline Vec3 normalized(Vec3 v) {
  const double n = norm(v);
  return {v.x / n, v.y / n, v.z / n};
}

// Line segment with distinct endpoints, in pixel coordinates.
struct Segment {
  Point2 p1;
  Point2 p2;

  Segment(Point2 a, Point2 b) : p1(a), p2(b) {
    if (!is_finite(a) || !is_finite(b))
      throw std::invalid_argument("Segment: endpoints must be finite");
    if (a.x == b.x && a.y == b.y)
      throw std::invalid_argument("Segment: endpoints must be distinct");
  }
};

inline double length(const Segment& s) { return norm(s.p2 - s.p1); }

// Row-major 3x3 matrix.
struct Mat3 {
  std::array<double, 9> m{};

  double& operator()(int r, int c) { return m[3 * r + c]; }
  double operator()(int r, int c) const { return m[3 * r + c]; }

  static Mat3 identity() { return {{1, 0, 0, 0, 1, 0, 0, 0, 1}}; }
  static Mat3 diagonal(double a, double b, double c) { return {{a, 0, 0, 0, b, 0, 0, 0, c}}; }
  static Mat3 from_rows(Vec3 r0, Vec3 r1, Vec3 r2) {
    return {{r0.x, r0.y, r0.z, r1.x, r1.y, r1.z, r2.x, r2.y, r2.z}};
  }
  static Mat3 from_columns(Vec3 c0, Vec3 c1, Vec3 c2) {
    return {{c0.x, c1.x, c2.x, c0.y, c1.y, c2.y, c0.z, c1.z, c2.z}};
  }
};

inline Mat3 operator*(const Mat3& a, const Mat3& b) {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      r(i, j) = a(i, 0) * b(0, j) + a(i, 1) * b(1, j) + a(i, 2) * b(2, j);
  return r;
}

inline Vec3 operator*(const Mat3& a, Vec3 v) {
  return {a(0, 0) * v.x + a(0, 1) * v.y + a(0, 2) * v.z,
          a(1, 0) * v.x + a(1, 1) * v.y + a(1, 2) * v.z,
          a(2, 0) * v.x + a(2, 1) * v.y + a(2, 2) * v.z};
}

inline Mat3 transpose(const Mat3& a) {
  return {{a(0, 0), a(1, 0), a(2, 0), a(0, 1), a(1, 1), a(2, 1), a(0, 2), a(1, 2), a(2, 2)}};
}

inline double det(const Mat3& a) {
  return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
         a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
         a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
}

// Adjugate over determinant. Throws std::domain_error on a singular matrix.
inline Mat3 inverse(const Mat3& a) {
  const double d = det(a);
  if (d == 0.0 || !std::isfinite(d)) throw std::domain_error("Mat3: singular matrix");
  Mat3 r;
  r(0, 0) = (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) / d;
  r(0, 1) = (a(0, 2) * a(2, 1) - a(0, 1) * a(2, 2)) / d;
  r(0, 2) = (a(0, 1) * a(1, 2) - a(0, 2) * a(1, 1)) / d;
  r(1, 0) = (a(1, 2) * a(2, 0) - a(1, 0) * a(2, 2)) / d;
  r(1, 1) = (a(0, 0) * a(2, 2) - a(0, 2) * a(2, 0)) / d;
  r(1, 2) = (a(0, 2) * a(1, 0) - a(0, 0) * a(1, 2)) / d;
  r(2, 0) = (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0)) / d;
  r(2, 1) = (a(0, 1) * a(2, 0) - a(0, 0) * a(2, 1)) / d;
  r(2, 2) = (a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0)) / d;
  return r;
}

// Pinhole camera with square pixels: focal length f and principal point p.
struct CameraIntrinsics {
  double f;
  Point2 p;

  CameraIntrinsics(double focal, Point2 principal) : f(focal), p(principal) {
    if (!(focal > 0.0) || !std::isfinite(focal))
      throw std::invalid_argument("CameraIntrinsics: focal length must be positive");
    if (!is_finite(principal))
      throw std::invalid_argument("CameraIntrinsics: principal point must be finite");
  }
};

//   K = | f 0 px |
//       | 0 f py |
//       | 0 0  1 |
inline Mat3 intrinsics_matrix(const CameraIntrinsics& c) {
  return {{c.f, 0, c.p.x, 0, c.f, c.p.y, 0, 0, 1}};
}

// Analytic inverse of K.
inline Mat3 intrinsics_inverse(const CameraIntrinsics& c) {
  return {{1.0 / c.f, 0, -c.p.x / c.f, 0, 1.0 / c.f, -c.p.y / c.f, 0, 0, 1}};
}

// Intersection of the two carrier lines (not of the segments themselves).
// Returns nullopt when the lines are parallel: the normalized direction cross
// product is below kEpsParallel. Nearly-parallel pairs intersect legitimately
// far away and are kept.
inline std::optional<Point2> line_intersection(const Segment& s1, const Segment& s2) {
  const Point2 d1 = s1.p2 - s1.p1;
  const Point2 d2 = s2.p2 - s2.p1;
  const double denom = cross(d1, d2);
  if (std::abs(denom) < kEpsParallel * norm(d1) * norm(d2)) return std::nullopt;
  const double t = cross(s2.p1 - s1.p1, d2) / denom;
  return s1.p1 + t * d1;
}

// Projective transform of a Euclidean point. Returns nullopt when the image
// lands within kEpsW of the line at infinity.
inline std::optional<Point2> apply_homography(const Mat3& h, Point2 p) {
  const double w = h(2, 0) * p.x + h(2, 1) * p.y + h(2, 2);
  if (std::abs(w) < kEpsW) return std::nullopt;
  return Point2{(h(0, 0) * p.x + h(0, 1) * p.y + h(0, 2)) / w,
                (h(1, 0) * p.x + h(1, 1) * p.y + h(1, 2)) / w};
}

namespace detail {
inline double orient(Point2 a, Point2 b, Point2 c) { return cross(b - a, c - a); }

inline bool segments_properly_cross(Point2 a, Point2 b, Point2 c, Point2 d) {
  return orient(a, b, c) * orient(a, b, d) < 0 && orient(c, d, a) * orient(c, d, b) < 0;
}
}  // namespace detail

// Four corners ordered clockwise on screen (y down) starting from the top-left
// corner. Clockwise-on-screen order gives a positive shoelace sum in this
// coordinate convention.
struct Quadrangle {
  std::array<Point2, 4> corners;

  explicit Quadrangle(const std::array<Point2, 4>& c) : corners(c) {
    for (const auto& p : c)
      if (!is_finite(p)) throw std::invalid_argument("Quadrangle: corners must be finite");
    if (detail::segments_properly_cross(c[0], c[1], c[2], c[3]) ||
        detail::segments_properly_cross(c[1], c[2], c[3], c[0]))
      throw std::invalid_argument("Quadrangle: self-intersecting");
    if (!(signed_area_of(c) > 0.0))
      throw std::invalid_argument("Quadrangle: corners must wind clockwise with positive area");
  }

  static double signed_area_of(const std::array<Point2, 4>& c) {
    double s = 0.0;
    for (int i = 0; i < 4; ++i) s += cross(c[i], c[(i + 1) % 4]);
    return 0.5 * s;
  }

  double signed_area() const { return signed_area_of(corners); }
};

}  // namespace manrect
