#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "pshape/blocks.hpp"
#include "pshape/cloud.hpp"
#include "pshape/errors.hpp"

using namespace pshape;
using namespace pshape::testing;

TEST_CASE("normalize centers and scales the symmetric pair") {
  PointCloud p = Tensor2::from_rows({{0, 0, 0}, {2, 0, 0}});
  CHECK(normalize(p) == Tensor2::from_rows({{-1, 0, 0}, {1, 0, 0}}));
}

TEST_CASE("normalize is idempotent within 1e-12") {
  Rng rng(19);
  for (int rep = 0; rep < 20; ++rep) {
    PointCloud p = normalize(random_cloud(rng, 32));
    PointCloud q = normalize(p);
    for (Index i = 0; i < p.size(); ++i) {
      CHECK(std::fabs(p.data()[i] - q.data()[i]) <= 1e-12);
    }
  }
}

TEST_CASE("normalize contract: centroid < 1e-12, max norm within 1e-12 of 1") {
  Rng rng(31);
  for (int rep = 0; rep < 50; ++rep) {
    PointCloud p = random_cloud(rng, 24);
    // Arbitrary scale and shift.
    for (Index i = 0; i < p.rows(); ++i) {
      p(i, 0) = p(i, 0) * 13.0 + 4.0;
      p(i, 1) = p(i, 1) * 13.0 - 2.5;
      p(i, 2) = p(i, 2) * 13.0 + 0.1;
    }
    PointCloud n = normalize(p);
    const auto c = centroid(n);
    CHECK(std::sqrt(c[0] * c[0] + c[1] * c[1] + c[2] * c[2]) < 1e-12);
    CHECK(std::fabs(max_point_norm(n) - 1.0) < 1e-12);
  }
}

TEST_CASE("normalize is similarity-equivariant: normalize(s R p + t) == R normalize(p)") {
  Rng rng(57);
  for (int rep = 0; rep < 25; ++rep) {
    PointCloud p = random_cloud(rng, 20);
    const std::array<double, 3> theta{rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3)};
    const Tensor2 rot = rotation_matrix(theta);
    const double s = rng.uniform(0.2, 8.0);
    const double t[3] = {rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)};

    PointCloud transformed(p.rows(), 3);
    for (Index i = 0; i < p.rows(); ++i) {
      for (int r = 0; r < 3; ++r) {
        transformed(i, r) =
            s * (rot(r, 0) * p(i, 0) + rot(r, 1) * p(i, 1) + rot(r, 2) * p(i, 2)) + t[r];
      }
    }
    const PointCloud lhs = normalize(transformed);
    const PointCloud base = normalize(p);
    PointCloud rhs(p.rows(), 3);
    for (Index i = 0; i < p.rows(); ++i) {
      for (int r = 0; r < 3; ++r) {
        rhs(i, r) = rot(r, 0) * base(i, 0) + rot(r, 1) * base(i, 1) + rot(r, 2) * base(i, 2);
      }
    }
    for (Index i = 0; i < lhs.size(); ++i) {
      CHECK(lhs.data()[i] == doctest::Approx(rhs.data()[i]).epsilon(1e-9));
    }
  }
}

TEST_CASE("normalize rejects degenerate clouds") {
  CHECK_THROWS_AS(normalize(Tensor2::from_rows({{1, 1, 1}, {1, 1, 1}})), DegeneracyError);
  CHECK_THROWS_AS(normalize(Tensor2::from_rows({{1, 1, 1}})), DataError);
}

TEST_CASE("resample: permutation at equal size, seeded determinism, replacement") {
  Rng rng(5);
  PointCloud p = random_cloud(rng, 10);

  PointCloud same = resample(p, 10, 99);
  // A permutation: sorted multisets of rows match.
  auto row_key = [](const PointCloud& c, Index i) {
    return std::array<double, 3>{c(i, 0), c(i, 1), c(i, 2)};
  };
  std::vector<std::array<double, 3>> a, b;
  for (Index i = 0; i < 10; ++i) {
    a.push_back(row_key(p, i));
    b.push_back(row_key(same, i));
  }
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  CHECK(a == b);

  CHECK(resample(p, 7, 3) == resample(p, 7, 3));
  CHECK(resample(p, 512, 3).rows() == 512);
  CHECK(resample(p, 1024, 4).rows() == 1024);

  // With replacement below the source size: all rows come from p.
  PointCloud up = resample(p, 25, 8);
  for (Index i = 0; i < up.rows(); ++i) {
    bool found = false;
    for (Index j = 0; j < p.rows() && !found; ++j) {
      found = up(i, 0) == p(j, 0) && up(i, 1) == p(j, 1) && up(i, 2) == p(j, 2);
    }
    CHECK(found);
  }
}
