#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <utility>

#include "manrect/geom.hpp"
#include "manrect/vp_detect.hpp"

// Metric rectification from a pair of orthogonal-direction vanishing points:
// recover the camera rotation that maps the two back-projected directions to
// the image axes, correct residual skew (non-orthogonal directions arise from
// an approximate focal length) with an upper-triangular shear, and compose
// the rectifying homography H = K * A * R^T * K^{-1}.

namespace manrect {

struct CollinearVpsError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Object plane contains the optical axis; no finite rectified view exists.
struct DegeneratePlaneError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class FocalSource { provided, estimated, diagonal_fallback };

inline const char* to_string(FocalSource s) {
  switch (s) {
    case FocalSource::provided: return "provided";
    case FocalSource::estimated: return "estimated";
    default: return "diagonal-fallback";
  }
}

struct Rectification {
  Mat3 H;             // K * A * R^T * K^{-1}
  Mat3 R;             // orthonormal, det +1, columns (CX', CY'', CZ')
  Mat3 A;             // upper-triangular skew correction, unit third row/column
  double beta;        // degrees, angle between the back-projected directions
  double f_used;      // pixels
  FocalSource f_source;
};

// v_h maps to the ideal point along x, v_v to the ideal point along y.
// Throws CollinearVpsError when the back-projected directions are parallel
// and DegeneratePlaneError when the rectified plane normal has no z
// component. The f_source tag is carried through for consumers that need to
// know whether length ratios are trustworthy (the diagonal fallback is not).
inline Rectification rectification_from_vps(Point2 v_h, Point2 v_v,
                                            const CameraIntrinsics& intrinsics,
                                            FocalSource f_source = FocalSource::provided) {
  const Mat3 kinv = intrinsics_inverse(intrinsics);
  const Vec3 cx = normalized(kinv * Vec3{v_h.x, v_h.y, 1.0});
  Vec3 cy = normalized(kinv * Vec3{v_v.x, v_v.y, 1.0});

  const Vec3 raw_cz = cross(cx, cy);
  if (norm(raw_cz) < 1e-9) throw CollinearVpsError("vanishing points back-project to parallel directions");
  Vec3 cz = normalized(raw_cz);
  if (cz.z < 0.0) {  // keep the plane normal toward the camera: no mirror
    cy = -cy;
    cz = -cz;
  }
  if (std::abs(cz.z) < 1e-12)
    throw DegeneratePlaneError("object plane contains the optical axis");

  // Skew angle between the recovered directions, measured after the flip so
  // the shear pushes v_v onto +y rather than -y.
  const double cos_beta = dot(cx, cy);
  double beta_deg;
  Vec3 cyy;
  Mat3 a;
  if (cos_beta == 0.0) {
    beta_deg = 90.0;
    cyy = cy;
    a = Mat3::identity();
  } else {
    beta_deg = std::clamp(std::acos(std::clamp(cos_beta, -1.0, 1.0)) * 180.0 / std::numbers::pi,
                          1.0, 179.0);
    const double b = beta_deg * std::numbers::pi / 180.0;
    a = Mat3{{1.0, -std::cos(b) / std::sin(b), 0.0, 0.0, 1.0 / std::sin(b), 0.0, 0.0, 0.0, 1.0}};
    cyy = normalized(cross(cz, cx));  // orthogonalized second axis, same half-plane as cy
  }

  const Mat3 r = Mat3::from_columns(cx, cyy, cz);
  const Mat3 k = intrinsics_matrix(intrinsics);
  return {k * (a * (transpose(r) * kinv)), r, a, beta_deg, intrinsics.f, f_source};
}

// Focal-length precedence for rectification: caller-provided, else the
// detector's orthogonality-based estimate, else the image diagonal (a rough
// stand-in that preserves angles far less faithfully).
inline std::pair<double, FocalSource> focal_for_rectification(const VpPair& pair,
                                                              std::optional<double> provided_f,
                                                              ImageSize image_size) {
  if (provided_f) {
    if (!(*provided_f > 0.0)) throw std::invalid_argument("focal length must be positive");
    return {*provided_f, FocalSource::provided};
  }
  if (pair.f_estimated) return {*pair.f_estimated, FocalSource::estimated};
  if (image_size.width <= 0 || image_size.height <= 0)
    throw std::invalid_argument("image size must be positive");
  return {std::hypot(double(image_size.width), double(image_size.height)),
          FocalSource::diagonal_fallback};
}

}  // namespace manrect
