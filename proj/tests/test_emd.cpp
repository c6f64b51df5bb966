#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "pshape/emd.hpp"
#include "pshape/errors.hpp"

using namespace pshape;
using namespace pshape::testing;

TEST_CASE("cost_matrix values and errors") {
  PointCloud a = Tensor2::from_rows({{0, 0, 0}});
  PointCloud b = Tensor2::from_rows({{1, 2, 3}});
  CHECK(cost_matrix(a, b, GroundMetric::L1).entries == Tensor2::from_rows({{6}}));

  Rng rng(3);
  PointCloud cloud = random_cloud(rng, 9);
  const CostMatrix self = cost_matrix(cloud, cloud, GroundMetric::L1);
  for (Index i = 0; i < self.n; ++i) CHECK(self.entries(i, i) == 0.0);

  PointCloud a2 = Tensor2::from_rows({{0, 0, 0}, {1, 0, 0}});
  PointCloud b2 = Tensor2::from_rows({{0, 1, 0}, {1, 1, 0}});
  const CostMatrix c2 = cost_matrix(a2, b2, GroundMetric::L1);
  CHECK(c2.entries == Tensor2::from_rows({{1, 2}, {2, 1}}));
  // Loop oracle over every entry.
  for (Index i = 0; i < 2; ++i)
    for (Index j = 0; j < 2; ++j) {
      double acc = 0.0;
      for (Index d = 0; d < 3; ++d) acc += std::fabs(a2(i, d) - b2(j, d));
      CHECK(c2.entries(i, j) == acc);
    }

  CHECK_THROWS_AS(cost_matrix(a, b2, GroundMetric::L1), CardinalityError);
}

TEST_CASE("emd_exact on the 2x2 example, zero matrices, and the solver cap") {
  CostMatrix c;
  c.n = 2;
  c.entries = Tensor2::from_rows({{1, 2}, {2, 1}});
  const Assignment sol = emd_exact(c);
  CHECK(sol.mapping == std::vector<Index>{0, 1});
  CHECK(sol.cost == 2.0);

  CostMatrix zero;
  zero.n = 5;
  zero.entries = Tensor2(5, 5);
  CHECK(emd_exact(zero).cost == 0.0);

  CostMatrix big;
  big.n = 4;
  big.entries = Tensor2(4, 4);
  CHECK_THROWS_WITH_AS(emd_exact(big, 3), doctest::Contains("approx"), SolverCapError);
}

TEST_CASE("emd_exact equals the brute-force permutation minimum on random 5x5 instances") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    CostMatrix c;
    c.n = 5;
    c.entries = random_tensor(rng, 5, 5, 0.0, 2.0);
    const Assignment sol = emd_exact(c);
    CHECK(sol.cost == doctest::Approx(brute_force_emd(c.entries)).epsilon(1e-12));
    // The reported cost matches the reported mapping.
    double acc = 0.0;
    for (Index i = 0; i < c.n; ++i) acc += c.entries(i, sol.mapping[static_cast<std::size_t>(i)]);
    CHECK(sol.cost == doctest::Approx(acc).epsilon(1e-12));
  }
}

TEST_CASE("emd_approx trivial cases") {
  CostMatrix one;
  one.n = 1;
  one.entries = Tensor2::from_rows({{0.37}});
  const ApproxTransport sol = emd_approx(one, 0.01, 100);
  CHECK(sol.cost == 0.37);
  CHECK(sol.converged);

  // Identical clouds: zero-cost feasibility.
  Rng rng(5);
  PointCloud cloud = random_normalized_cloud(rng, 12);
  const CostMatrix c = cost_matrix(cloud, cloud, GroundMetric::L1);
  CHECK(emd_approx(c, 0.01, 20000).cost < 1e-6);
}

TEST_CASE("emd_approx cost stays within [exact, exact * 1.05] on random n=16 pairs") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Rng rng(seed * 17);
    PointCloud a = random_cloud(rng, 16);
    PointCloud b = random_cloud(rng, 16);
    const CostMatrix c = cost_matrix(a, b, GroundMetric::L1);
    const double exact = emd_exact(c).cost;
    const ApproxTransport approx = emd_approx(c, 0.01, 20000);
    CHECK(approx.cost >= exact - 1e-9);
    CHECK(approx.cost <= exact * 1.05);
  }
}

TEST_CASE("emd_gradient signs, zero case, and directional finite differences") {
  PointCloud a = Tensor2::from_rows({{1, 0, 0}});
  PointCloud b = Tensor2::from_rows({{0, 0, 0}});
  Assignment id;
  id.mapping = {0};
  const EmdGradient g = emd_gradient(a, b, id, GroundMetric::L1);
  CHECK(g.grad_a == Tensor2::from_rows({{1, 0, 0}}));
  CHECK(g.grad_b == Tensor2::from_rows({{-1, 0, 0}}));

  const EmdGradient gz = emd_gradient(a, a, id, GroundMetric::L1);
  CHECK(max_abs(gz.grad_a) == 0.0);

  // Directional derivative with re-solve, away from assignment switches.
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    Rng rng(900 + seed);
    PointCloud pa = random_cloud(rng, 7);
    PointCloud pb = random_cloud(rng, 7);
    Tensor2 dir = random_tensor(rng, 7, 3);
    const Assignment sol = emd_exact(cost_matrix(pa, pb, GroundMetric::L1));
    const EmdGradient grad = emd_gradient(pa, pb, sol, GroundMetric::L1);
    double analytic = 0.0;
    for (Index i = 0; i < dir.size(); ++i) analytic += grad.grad_a.data()[i] * dir.data()[i];

    const double h = 1e-7;
    PointCloud up = pa, down = pa;
    axpy(up, h, dir);
    axpy(down, -h, dir);
    const double fd = (emd_exact(cost_matrix(up, pb, GroundMetric::L1)).cost -
                       emd_exact(cost_matrix(down, pb, GroundMetric::L1)).cost) /
                      (2 * h);
    CHECK(analytic == doctest::Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("exact transport is symmetric and permutation invariant") {
  Rng rng(42);
  for (int rep = 0; rep < 10; ++rep) {
    PointCloud a = random_cloud(rng, 8);
    PointCloud b = random_cloud(rng, 8);
    const double ab = emd_exact(cost_matrix(a, b, GroundMetric::L1)).cost;
    const double ba = emd_exact(cost_matrix(b, a, GroundMetric::L1)).cost;
    CHECK(ab == ba);

    const double shuffled = emd_exact(cost_matrix(permuted(a, rng), b, GroundMetric::L1)).cost;
    CHECK(shuffled == ab);
  }
}

TEST_CASE("identity of indiscernibles") {
  Rng rng(7);
  PointCloud a = random_cloud(rng, 9);
  CHECK(emd_exact(cost_matrix(a, a, GroundMetric::L1)).cost == 0.0);

  PointCloud b = permuted(a, rng);  // equal as multisets
  CHECK(emd_exact(cost_matrix(a, b, GroundMetric::L1)).cost == 0.0);

  PointCloud c = a;
  c(0, 0) += 0.25;
  CHECK(emd_exact(cost_matrix(a, c, GroundMetric::L1)).cost > 0.0);
}

TEST_CASE("triangle inequality on 30 random triples of n=8 clouds") {
  Rng rng(11);
  for (int rep = 0; rep < 30; ++rep) {
    PointCloud a = random_cloud(rng, 8);
    PointCloud b = random_cloud(rng, 8);
    PointCloud c = random_cloud(rng, 8);
    const double ab = emd_exact(cost_matrix(a, b, GroundMetric::L1)).cost;
    const double bc = emd_exact(cost_matrix(b, c, GroundMetric::L1)).cost;
    const double ac = emd_exact(cost_matrix(a, c, GroundMetric::L1)).cost;
    CHECK(ac <= ab + bc + 1e-9);
  }
}

TEST_CASE("any feasible coupling cost lower-bounds at the exact optimum") {
  Rng rng(23);
  for (int rep = 0; rep < 10; ++rep) {
    PointCloud a = random_cloud(rng, 12);
    PointCloud b = random_cloud(rng, 12);
    const CostMatrix c = cost_matrix(a, b, GroundMetric::L1);
    const double exact = emd_exact(c).cost;
    const ApproxTransport approx = emd_approx(c, 0.05, 20000);
    CHECK(approx.cost >= exact - 1e-9);
  }
}

TEST_CASE("L2 metric option") {
  PointCloud a = Tensor2::from_rows({{0, 0, 0}});
  PointCloud b = Tensor2::from_rows({{3, 4, 0}});
  CHECK(cost_matrix(a, b, GroundMetric::L2).entries(0, 0) == doctest::Approx(5.0).epsilon(1e-15));
  Assignment id;
  id.mapping = {0};
  const EmdGradient g = emd_gradient(a, b, id, GroundMetric::L2);
  CHECK(g.grad_a(0, 0) == doctest::Approx(-0.6).epsilon(1e-12));
  CHECK(g.grad_a(0, 1) == doctest::Approx(-0.8).epsilon(1e-12));
}
