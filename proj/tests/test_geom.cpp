#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "manrect/geom.hpp"
#include "test_util.hpp"

using namespace manrect;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("Point2 arithmetic") {
  const Point2 a{3.0, -1.0};
  const Point2 b{2.0, 5.0};
  CHECK((a + b).x == 5.0);
  CHECK((a + b).y == 4.0);
  CHECK((a - b).x == 1.0);
  CHECK((a - b).y == -6.0);
  CHECK((2.0 * a).y == -2.0);
  CHECK((a * 2.0).x == 6.0);
  CHECK(dot(a, b) == 1.0);
  CHECK(cross(a, b) == 17.0);
}

TEST_CASE("norm stays finite at extreme coordinates") {
  CHECK(norm(Point2{3.0, 4.0}) == 5.0);
  // Naive sqrt(x*x + y*y) would overflow to inf here; the libm scaling path
  // is only guaranteed to the last ulp or so, not exact.
  CHECK(std::isfinite(norm(Point2{3e200, 4e200})));
  CHECK_THAT(norm(Point2{3e200, 4e200}), WithinRel(5e200, 1e-14));
  CHECK(norm(Point2{0.0, 0.0}) == 0.0);
}

TEST_CASE("Vec3 cross and normalize") {
  const Vec3 x{1, 0, 0};
  const Vec3 y{0, 1, 0};
  const Vec3 z = cross(x, y);
  CHECK(z.x == 0.0);
  CHECK(z.y == 0.0);
  CHECK(z.z == 1.0);
  CHECK(dot(x, y) == 0.0);
  const Vec3 n = normalized({3, 0, 4});
  CHECK_THAT(n.x, WithinAbs(0.6, 1e-15));
  CHECK_THAT(n.z, WithinAbs(0.8, 1e-15));
  CHECK((-x).x == -1.0);
}

TEST_CASE("Segment rejects degenerate endpoints") {
  CHECK_THROWS_AS(Segment({1, 2}, {1, 2}), std::invalid_argument);
  const double nan = std::nan("");
  CHECK_THROWS_AS(Segment({nan, 0}, {1, 2}), std::invalid_argument);
  CHECK_THROWS_AS(Segment({0, 0}, {1, std::numeric_limits<double>::infinity()}),
                  std::invalid_argument);
  const Segment s({0, 0}, {3, 4});
  CHECK(length(s) == 5.0);
}

TEST_CASE("ImageSize diagonal") {
  CHECK(diagonal({640, 480}) == 800.0);
  CHECK(diagonal({1, 0}) == 1.0);
}

TEST_CASE("Mat3 product, transpose, determinant") {
  const Mat3 a{{1, 2, 3, 4, 5, 6, 7, 8, 10}};
  const Mat3 b{{2, 0, 1, 0, 1, 0, 1, 0, 2}};
  const Mat3 c = a * b;
  // Hand-computed row by row.
  CHECK(c(0, 0) == 5.0);
  CHECK(c(0, 1) == 2.0);
  CHECK(c(0, 2) == 7.0);
  CHECK(c(1, 0) == 14.0);
  CHECK(c(2, 2) == 27.0);
  CHECK(det(a) == -3.0);
  CHECK(transpose(a)(0, 1) == 4.0);
  CHECK(transpose(a)(1, 0) == 2.0);
  const Vec3 v = a * Vec3{1, 1, 1};
  CHECK(v.x == 6.0);
  CHECK(v.y == 15.0);
  CHECK(v.z == 25.0);
  CHECK(Mat3::identity()(1, 1) == 1.0);
  CHECK(Mat3::diagonal(2, 3, 4)(2, 2) == 4.0);
  const Mat3 cols = Mat3::from_columns({1, 2, 3}, {4, 5, 6}, {7, 8, 9});
  CHECK(cols(0, 1) == 4.0);
  CHECK(cols(2, 0) == 3.0);
  const Mat3 rows = Mat3::from_rows({1, 2, 3}, {4, 5, 6}, {7, 8, 9});
  CHECK(rows(0, 1) == 2.0);
  CHECK(rows(1, 0) == 4.0);
}

TEST_CASE("Mat3 inverse round-trips and rejects singular input") {
  testutil::Rng rng(11);
  for (int k = 0; k < 20; ++k) {
    Mat3 a = Mat3::identity();
    for (double& x : a.m) x += rng.uniform(-0.4, 0.4);
    const Mat3 prod = a * inverse(a);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        CHECK_THAT(prod(i, j), WithinAbs(i == j ? 1.0 : 0.0, 1e-12));
  }
  const Mat3 singular{{1, 2, 3, 2, 4, 6, 0, 0, 1}};  // rank 2
  CHECK_THROWS_AS(inverse(singular), std::domain_error);
}

TEST_CASE("intrinsics matrix and its analytic inverse") {
  const CameraIntrinsics cam(800.0, {320.0, 240.0});
  const Mat3 k = intrinsics_matrix(cam);
  CHECK(k(0, 0) == 800.0);
  CHECK(k(0, 2) == 320.0);
  CHECK(k(1, 1) == 800.0);
  CHECK(k(2, 2) == 1.0);
  const Mat3 prod = k * intrinsics_inverse(cam);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK_THAT(prod(i, j), WithinAbs(i == j ? 1.0 : 0.0, 1e-15));
  // Back-projection of the principal point is the optical axis.
  const Vec3 axis = intrinsics_inverse(cam) * Vec3{320.0, 240.0, 1.0};
  CHECK_THAT(axis.x, WithinAbs(0.0, 1e-15));
  CHECK_THAT(axis.y, WithinAbs(0.0, 1e-15));
  CHECK(axis.z == 1.0);
}

TEST_CASE("CameraIntrinsics validates focal length") {
  CHECK_THROWS_AS(CameraIntrinsics(0.0, {0, 0}), std::invalid_argument);
  CHECK_THROWS_AS(CameraIntrinsics(-5.0, {0, 0}), std::invalid_argument);
  CHECK_THROWS_AS(CameraIntrinsics(std::nan(""), {0, 0}), std::invalid_argument);
  CHECK_THROWS_AS(CameraIntrinsics(1.0, {std::nan(""), 0}), std::invalid_argument);
}

TEST_CASE("line_intersection on carrier lines") {
  const Segment h({0, 0}, {2, 0});
  const Segment v({1, -1}, {1, 1});
  const auto p = line_intersection(h, v);
  REQUIRE(p);
  CHECK(p->x == 1.0);
  CHECK(p->y == 0.0);

  // Carrier lines intersect even when the segments themselves do not.
  const Segment far({10, 5}, {10, 6});
  const auto q = line_intersection(h, far);
  REQUIRE(q);
  CHECK(q->x == 10.0);
  CHECK(q->y == 0.0);
}

TEST_CASE("line_intersection declares parallel only below the direction cross threshold") {
  const Segment a({0, 0}, {1, 0});
  CHECK_FALSE(line_intersection(a, Segment({0, 1}, {1, 1})));
  CHECK_FALSE(line_intersection(a, Segment({5, 3}, {9, 3})));
  // Normalized direction cross 1e-13 < threshold: treated as parallel.
  CHECK_FALSE(line_intersection(a, Segment({0, 1}, {1, 1 + 1e-13})));
  // 1e-6: legitimate distant intersection near x = -1e6.
  const auto far = line_intersection(a, Segment({0, 1}, {1, 1 + 1e-6}));
  REQUIRE(far);
  CHECK_THAT(far->x, WithinRel(-1e6, 1e-9));
}

TEST_CASE("apply_homography dehomogenizes and flags the line at infinity") {
  const Mat3 shift{{1, 0, 5, 0, 1, -3, 0, 0, 1}};
  const auto p = apply_homography(shift, {2, 2});
  REQUIRE(p);
  CHECK(p->x == 7.0);
  CHECK(p->y == -1.0);

  const Mat3 proj{{1, 0, 0, 0, 1, 0, 1, 0, 0}};  // w = x
  CHECK_FALSE(apply_homography(proj, {0.0, 5.0}));
  const auto ok = apply_homography(proj, {2.0, 6.0});
  REQUIRE(ok);
  CHECK(ok->x == 1.0);
  CHECK(ok->y == 3.0);
}

TEST_CASE("homography round-trip through the inverse") {
  testutil::Rng rng(23);
  for (int k = 0; k < 20; ++k) {
    Mat3 h = Mat3::identity();
    h(0, 2) = rng.uniform(-50, 50);
    h(1, 2) = rng.uniform(-50, 50);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) h(i, j) += rng.uniform(-0.3, 0.3);
    h(2, 0) = rng.uniform(-1e-4, 1e-4);
    h(2, 1) = rng.uniform(-1e-4, 1e-4);
    const Mat3 hinv = inverse(h);
    for (int n = 0; n < 10; ++n) {
      const Point2 p{rng.uniform(-100, 100), rng.uniform(-100, 100)};
      const auto fwd = apply_homography(h, p);
      REQUIRE(fwd);
      const auto back = apply_homography(hinv, *fwd);
      REQUIRE(back);
      CHECK_THAT(back->x, WithinAbs(p.x, 1e-9));
      CHECK_THAT(back->y, WithinAbs(p.y, 1e-9));
    }
  }
}

TEST_CASE("Quadrangle accepts clockwise-on-screen corners and reports area") {
  const Quadrangle q({{{0, 0}, {2, 0}, {2, 1}, {0, 1}}});
  CHECK(q.signed_area() == 2.0);
}

TEST_CASE("Quadrangle rejects counterclockwise and self-intersecting corners") {
  CHECK_THROWS_AS(Quadrangle({{{0, 0}, {0, 1}, {2, 1}, {2, 0}}}), std::invalid_argument);
  // Bowtie: sides 0-1 and 2-3 cross.
  CHECK_THROWS_AS(Quadrangle({{{0, 0}, {2, 1}, {2, 0}, {0, 1}}}), std::invalid_argument);
  const double nan = std::nan("");
  CHECK_THROWS_AS(Quadrangle({{{0, 0}, {2, 0}, {nan, 1}, {0, 1}}}), std::invalid_argument);
}
