#include <cmath>

#include "coprep/geometry.hpp"
#include "coprep/rng.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace coprep;

TEST_CASE("homogeneous representatives and dehomogenization") {
  const Vec3d p(2.0, 4.0, 2.0);
  CHECK(normalized_representative(p).norm() == doctest::Approx(1.0));
  const Vec2d q = dehomogenize(p);
  CHECK(q.x() == doctest::Approx(1.0));
  CHECK(q.y() == doctest::Approx(2.0));

  CHECK_THROWS_AS(dehomogenize(Vec3d(1.0, 0.0, 0.0)), MapsToInfinity);
  const Vec3d zero = Vec3d::Zero();
  CHECK_THROWS_AS(normalized_representative(zero), Error);
  CHECK(is_finite_point(Vec3d(5.0, -3.0, 0.1)));
  CHECK_FALSE(is_finite_point(Vec3d(5.0, -3.0, 0.0)));
}

TEST_CASE("rotation_to_z aligns any unit vector and stays orthogonal") {
  Rng rng(7);
  std::vector<Vec3d> dirs;
  for (int t = 0; t < 50; ++t) dirs.push_back(rng.normal3().normalized());
  dirs.push_back(Vec3d(0, 0, 1));
  dirs.push_back(Vec3d(0, 0, -1));                       // exactly antipodal
  dirs.push_back(Vec3d(1e-7, -2e-7, -1.0).normalized());  // nearly antipodal

  for (const Vec3d& a : dirs) {
    const Mat3d r = rotation_to_z(a);
    CHECK((r * a - Vec3d(0, 0, 1)).norm() < 1e-12);
    CHECK((r * r.transpose() - Mat3d::Identity()).norm() < 1e-12);
    CHECK(r.determinant() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((r.row(2).transpose() - a).norm() < 1e-12);
  }
}

TEST_CASE("rectifier sends the line to infinity") {
  const HomLine l(Vec3d(0.3, -0.2, 1.0));
  const Mat3d h = rectifier_from_line(l);
  CHECK((h.row(2).transpose() - l.coords()).norm() < 1e-12);

  // Two independent points on the line map to ideal points.
  const Vec3d p1 = l.coords().cross(Vec3d(1, 0, 0));
  const Vec3d p2 = l.coords().cross(Vec3d(0, 1, 0));
  CHECK(std::abs((h * p1).z()) < 1e-12);
  CHECK(std::abs((h * p2).z()) < 1e-12);
}

TEST_CASE("the two rectified-scale routes agree") {
  Rng rng(11);
  for (int t = 0; t < 40; ++t) {
    const double cx = rng.uniform(50, 450);
    const double cy = rng.uniform(50, 450);
    const double r = rng.uniform(4, 25);
    const Keypoint k = testutil::tri_keypoint(cx, cy, r, rng.uniform(0, 6), rng.random_unit_vector(8));
    const Vec3d raw(rng.uniform(-4e-4, 4e-4), rng.uniform(-4e-4, 4e-4), 1.0);
    const HomLine l(raw);
    REQUIRE(same_side(l, k));

    const double via_chain = rectified_log_scale(l, k);
    const double via_formula = rectified_log_scale_direct(l.coords(), k);
    CHECK(via_chain == doctest::Approx(via_formula).epsilon(1e-10));
    // The closed form ignores the representative's magnitude.
    CHECK(rectified_log_scale_direct(7.3 * raw, k) == doctest::Approx(via_formula).epsilon(1e-12));
  }
}

TEST_CASE("fronto-parallel rectification keeps the raw scale") {
  const Keypoint k = testutil::tri_keypoint(200, 150, 12, 0.7, testutil::axis_descriptor(4, 2));
  const HomLine l(Vec3d(0, 0, 1));
  CHECK(rectified_log_scale(l, k) == doctest::Approx(std::log(keypoint_scale(k))).epsilon(1e-12));
}

TEST_CASE("side violations are detected and rejected") {
  const Keypoint k = testutil::tri_keypoint(100, 100, 10, 0.0, testutil::axis_descriptor(4, 0));
  const HomLine below(Vec3d(0, 0, -1));
  CHECK_FALSE(same_side(below, k));
  CHECK_THROWS_AS(rectified_log_scale(below, k), SideViolation);
  CHECK_THROWS_AS(rectified_log_scale_direct(below.coords(), k), SideViolation);

  // A line cutting through the frame triangle splits its points.
  const HomLine cutting(Vec3d(1.0, 0.0, -100.0));
  CHECK_FALSE(same_side(cutting, k));
}

TEST_CASE("keypoint construction validates its invariants") {
  const VecXd d = testutil::axis_descriptor(4, 0);
  const std::array<Vec3d, 3> collinear = {Vec3d(0, 0, 1), Vec3d(1, 1, 1), Vec3d(2, 2, 1)};
  CHECK_THROWS_AS(make_keypoint(collinear, d), Error);

  const std::array<Vec3d, 3> good = {Vec3d(0, 0, 1), Vec3d(10, 0, 1), Vec3d(0, 10, 1)};
  CHECK_THROWS_AS(make_keypoint(good, 2.0 * d), Error);
  CHECK_THROWS_AS(make_keypoint(good, d, Vec3d(1.2, 0.0, 0.0)), Error);

  const Keypoint k = make_keypoint(good, d, Vec3d(0.5, 0.5, 0.5));
  CHECK(keypoint_scale(k) == doctest::Approx(50.0));
  CHECK(k.color.has_value());
  const HomPoint c = keypoint_centroid(k);
  CHECK(c.z() == doctest::Approx(1.0));
  CHECK(c.x() == doctest::Approx(10.0 / 3.0));
}

TEST_CASE("keypoint scale is affine-covariant") {
  Rng rng(3);
  const Keypoint k = testutil::tri_keypoint(120, 80, 15, 0.2, rng.random_unit_vector(4));
  Mat3d h = Mat3d::Identity();
  h(0, 0) = 2.0;
  h(0, 1) = 0.5;
  h(1, 1) = -1.5;
  h(0, 2) = 30.0;
  h(1, 2) = -7.0;
  const double det = h(0, 0) * h(1, 1) - h(0, 1) * h(1, 0);
  const Keypoint mapped = apply_homography(h, k);
  CHECK(keypoint_scale(mapped) == doctest::Approx(std::abs(det) * keypoint_scale(k)).epsilon(1e-10));
}
