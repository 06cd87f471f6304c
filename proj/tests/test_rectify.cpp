#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <optional>

#include "manrect/metrics.hpp"
#include "manrect/rectify.hpp"
#include "manrect/synth.hpp"
#include "test_util.hpp"

using namespace manrect;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// How far H * (v, 1) is from the ideal point along the given axis (0 = x,
// 1 = y): the off-axis and homogeneous components relative to the axis one.
double ideal_point_error(const Mat3& h, Point2 v, int axis) {
  const Vec3 q = h * Vec3{v.x, v.y, 1.0};
  const double on = axis == 0 ? q.x : q.y;
  const double off = axis == 0 ? q.y : q.x;
  return std::max(std::abs(off), std::abs(q.z)) / std::abs(on);
}

}  // namespace

TEST_CASE("rectification of the unit-focal right-angle pair") {
  // f = 1, p = 0, v_h = (1, 0), v_v = (0, 1): back-projections (1,0,1)/sqrt2
  // and (0,1,1)/sqrt2 meet at 60 degrees, plane normal (-1,-1,1)/sqrt3.
  const CameraIntrinsics cam(1.0, {0.0, 0.0});
  const Rectification r = rectification_from_vps({1, 0}, {0, 1}, cam);

  CHECK_THAT(r.beta, WithinAbs(60.0, 1e-12));
  const double s2 = 1.0 / std::sqrt(2.0);
  CHECK_THAT(r.R(0, 0), WithinAbs(s2, 1e-15));  // CX' = (1, 0, 1)/sqrt2
  CHECK_THAT(r.R(1, 0), WithinAbs(0.0, 1e-15));
  CHECK_THAT(r.R(2, 0), WithinAbs(s2, 1e-15));
  // CY'' = CZ' x CX' = (-1, 2, 1)/sqrt6.
  CHECK_THAT(r.R(0, 1), WithinAbs(-0.4082482904638631, 1e-15));
  CHECK_THAT(r.R(1, 1), WithinAbs(0.8164965809277261, 1e-15));
  CHECK_THAT(r.R(2, 1), WithinAbs(0.4082482904638631, 1e-15));
  // CZ' = (-1, -1, 1)/sqrt3.
  CHECK_THAT(r.R(0, 2), WithinAbs(-0.5773502691896258, 1e-15));
  CHECK_THAT(r.R(1, 2), WithinAbs(-0.5773502691896258, 1e-15));
  CHECK_THAT(r.R(2, 2), WithinAbs(0.5773502691896258, 1e-15));
  // A = [[1, -cot60, 0], [0, 1/sin60, 0], [0, 0, 1]].
  CHECK_THAT(r.A(0, 1), WithinAbs(-0.5773502691896258, 1e-15));
  CHECK_THAT(r.A(1, 1), WithinAbs(1.1547005383792517, 1e-15));
  CHECK(r.A(0, 0) == 1.0);
  CHECK(r.A(1, 0) == 0.0);
  CHECK(r.A(2, 2) == 1.0);

  CHECK(ideal_point_error(r.H, {1, 0}, 0) < 1e-12);
  CHECK(ideal_point_error(r.H, {0, 1}, 1) < 1e-12);
  CHECK(r.f_used == 1.0);
  CHECK(r.f_source == FocalSource::provided);
}

TEST_CASE("rectification flips the frame rather than mirroring") {
  // v_v below the x-axis sends the raw plane normal away from the camera;
  // the y direction and normal are negated, beta measured after the flip.
  const CameraIntrinsics cam(1.0, {0.0, 0.0});
  const Rectification r = rectification_from_vps({1, 0}, {0, -1}, cam);
  CHECK_THAT(r.beta, WithinAbs(120.0, 1e-12));
  CHECK(r.R(2, 2) > 0.0);  // normal kept toward the camera
  CHECK(det(r.R) > 0.99);
  CHECK(ideal_point_error(r.H, {1, 0}, 0) < 1e-12);
  CHECK(ideal_point_error(r.H, {0, -1}, 1) < 1e-12);
}

TEST_CASE("rectification of exact synthetic truth is metric") {
  const SceneSpec spec{CameraIntrinsics(800.0, {320.0, 240.0}),
                       rotation_about_x(30.0) * rotation_about_y(20.0)};
  const auto [segments, truth] = generate(spec);
  (void)segments;
  const Rectification r = rectification_from_vps(truth.v_h, truth.v_v, spec.intrinsics);

  CHECK_THAT(r.beta, WithinAbs(90.0, 1e-9));
  CHECK(ideal_point_error(r.H, truth.v_h, 0) < 1e-9);
  CHECK(ideal_point_error(r.H, truth.v_v, 1) < 1e-9);

  const EvalReport rep = evaluate(truth.quad, truth.aspect, r.H);
  CHECK(rep.d_rect < 1e-10);
  CHECK(rep.d_rot < 1e-10);
  CHECK(rep.d_ar < 1e-10);
  CHECK_FALSE(rep.rotated90);

  // R is a rotation: R^T R = I, det +1.
  const Mat3 g = transpose(r.R) * r.R;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK_THAT(g(i, j), WithinAbs(i == j ? 1.0 : 0.0, 1e-12));
  CHECK_THAT(det(r.R), WithinAbs(1.0, 1e-12));
}

TEST_CASE("wrong focal length shears angles right but distorts the aspect ratio") {
  const SceneSpec spec{CameraIntrinsics(800.0, {320.0, 240.0}),
                       rotation_about_x(30.0) * rotation_about_y(20.0)};
  const auto [segments, truth] = generate(spec);
  (void)segments;
  const CameraIntrinsics wrong(640.0, {320.0, 240.0});
  const Rectification r = rectification_from_vps(truth.v_h, truth.v_v, wrong);

  CHECK(std::abs(r.beta - 90.0) > 1.0);  // directions no longer orthogonal
  const EvalReport rep = evaluate(truth.quad, truth.aspect, r.H);
  CHECK(rep.d_rect < 1e-9);  // the shear restores right angles exactly
  CHECK(rep.d_ar > 0.01);    // but length ratios are off
}

TEST_CASE("beta is clamped to [1, 179] degrees") {
  const CameraIntrinsics cam(800.0, {0.0, 0.0});
  // Rays 0.04 degrees apart: clamped up to 1.
  const Rectification narrow = rectification_from_vps({800, 0}, {800, 0.8}, cam);
  CHECK(narrow.beta == 1.0);
  // Rays 179.8 degrees apart: clamped down to 179.
  const Rectification wide = rectification_from_vps({8e5, 800}, {-8e5, 800}, cam);
  CHECK(wide.beta == 179.0);
  for (double x : wide.H.m) CHECK(std::isfinite(x));
}

TEST_CASE("collinear and degenerate-plane inputs are rejected") {
  const CameraIntrinsics cam(800.0, {320.0, 240.0});
  CHECK_THROWS_AS(rectification_from_vps({900, 500}, {900, 500}, cam), CollinearVpsError);
  CHECK_THROWS_AS(rectification_from_vps({900, 500}, {900 + 1e-8, 500}, cam), CollinearVpsError);
  // Both vanishing points on a line through the principal point: the plane
  // contains the optical axis.
  CHECK_THROWS_AS(rectification_from_vps({320 + 800, 240}, {320 - 800, 240}, cam),
                  DegeneratePlaneError);
}

TEST_CASE("focal_for_rectification precedence") {
  VpPair pair{{1000, 0}, {0, 1000}, std::nullopt, {}, {}};
  const ImageSize size{640, 480};

  const auto provided = focal_for_rectification(pair, 850.0, size);
  CHECK(provided.first == 850.0);
  CHECK(provided.second == FocalSource::provided);

  pair.f_estimated = 790.0;
  const auto estimated = focal_for_rectification(pair, std::nullopt, size);
  CHECK(estimated.first == 790.0);
  CHECK(estimated.second == FocalSource::estimated);

  pair.f_estimated = std::nullopt;
  const auto fallback = focal_for_rectification(pair, std::nullopt, size);
  CHECK(fallback.first == 800.0);  // hypot(640, 480)
  CHECK(fallback.second == FocalSource::diagonal_fallback);

  CHECK_THROWS_AS(focal_for_rectification(pair, -1.0, size), std::invalid_argument);
  CHECK_THROWS_AS(focal_for_rectification(pair, std::nullopt, ImageSize{0, 0}),
                  std::invalid_argument);
}

TEST_CASE("FocalSource labels") {
  CHECK(std::string(to_string(FocalSource::provided)) == "provided");
  CHECK(std::string(to_string(FocalSource::estimated)) == "estimated");
  CHECK(std::string(to_string(FocalSource::diagonal_fallback)) == "diagonal-fallback");
}

TEST_CASE("f_source tag is carried through") {
  const CameraIntrinsics cam(800.0, {320.0, 240.0});
  const Rectification r =
      rectification_from_vps({2000, 240}, {320, 1800}, cam, FocalSource::estimated);
  CHECK(r.f_source == FocalSource::estimated);
  CHECK(r.f_used == 800.0);
}

TEST_CASE("rectifying homography is invertible") {
  testutil::Rng rng(77);
  for (int k = 0; k < 20; ++k) {
    const double tx = rng.uniform(10.0, 40.0) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
    const double ty = rng.uniform(10.0, 40.0) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
    const SceneSpec spec{CameraIntrinsics(800.0, {320.0, 240.0}),
                         rotation_about_x(tx) * rotation_about_y(ty)};
    const auto [segments, truth] = generate(spec);
    (void)segments;
    const Mat3 h = rectification_from_vps(truth.v_h, truth.v_v, spec.intrinsics).H;
    CHECK(std::abs(det(h)) > 1e-12);
    const Mat3 round = h * inverse(h);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        CHECK_THAT(round(i, j), WithinAbs(i == j ? 1.0 : 0.0, 1e-9));
  }
}
