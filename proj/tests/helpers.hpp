#pragma once

// Shared test utilities: random generators and the independent oracles
// (finite differences, brute-force assignment, plain-loop MLP) the suites
// check the library against.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include "pshape/cloud.hpp"
#include "pshape/rng.hpp"
#include "pshape/tape.hpp"

namespace pshape::testing {

inline Tensor2 random_tensor(Rng& rng, Index rows, Index cols, double lo = -1.0, double hi = 1.0) {
  Tensor2 out(rows, cols);
  for (Index i = 0; i < out.size(); ++i) out.data()[i] = rng.uniform(lo, hi);
  return out;
}

// Random cloud inside the unit ball (not exactly normalized).
inline PointCloud random_cloud(Rng& rng, Index n) {
  PointCloud out(n, 3);
  for (Index i = 0; i < out.size(); ++i) out.data()[i] = rng.uniform(-0.9, 0.9);
  return out;
}

inline PointCloud random_normalized_cloud(Rng& rng, Index n) {
  return normalize(random_cloud(rng, n));
}

// Central finite differences of `loss_fn` w.r.t. every coordinate of every
// parameter, compared against the provided analytic gradients. Returns the
// worst relative error.
inline double max_fd_rel_err(const std::vector<Parameter*>& params,
                             const std::function<double()>& loss_fn,
                             const std::vector<Tensor2>& analytic, double h = 1e-6) {
  double worst = 0.0;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Parameter& p = *params[pi];
    for (Index i = 0; i < p.value.size(); ++i) {
      const double saved = p.value.data()[i];
      p.value.data()[i] = saved + h;
      const double up = loss_fn();
      p.value.data()[i] = saved - h;
      const double down = loss_fn();
      p.value.data()[i] = saved;
      const double fd = (up - down) / (2.0 * h);
      const double a = analytic[pi].data()[i];
      const double denom = std::max({std::fabs(a), std::fabs(fd), 1e-3});
      worst = std::max(worst, std::fabs(a - fd) / denom);
    }
  }
  return worst;
}

// Exhaustive minimum-cost assignment over all n! permutations.
inline double brute_force_emd(const Tensor2& cost) {
  const Index n = cost.rows();
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  double best = std::numeric_limits<double>::infinity();
  do {
    double acc = 0.0;
    for (Index i = 0; i < n; ++i) acc += cost(i, perm[static_cast<std::size_t>(i)]);
    best = std::min(best, acc);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// Plain-loop shared-weight MLP + max pool, independent of the tape path.
// layers: vector of (w, b) pairs applied with ReLU after every layer.
inline std::vector<double> loop_gsn_oracle(const Tensor2& points,
                                           const std::vector<std::pair<Tensor2, Tensor2>>& layers) {
  const Index n = points.rows();
  std::vector<std::vector<double>> acts(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    std::vector<double> cur(points.row(i), points.row(i) + points.cols());
    for (const auto& [w, b] : layers) {
      std::vector<double> next(static_cast<std::size_t>(w.cols()), 0.0);
      for (Index j = 0; j < w.cols(); ++j) {
        double acc = 0.0;
        for (Index k = 0; k < w.rows(); ++k) acc += cur[static_cast<std::size_t>(k)] * w(k, j);
        acc += b(0, j);
        next[static_cast<std::size_t>(j)] = acc < 0.0 ? 0.0 : acc;
      }
      cur = std::move(next);
    }
    acts[static_cast<std::size_t>(i)] = std::move(cur);
  }
  std::vector<double> pooled = acts[0];
  for (Index i = 1; i < n; ++i) {
    for (std::size_t j = 0; j < pooled.size(); ++j) {
      pooled[j] = std::max(pooled[j], acts[static_cast<std::size_t>(i)][j]);
    }
  }
  return pooled;
}

// Seeded row permutation of a cloud.
inline PointCloud permuted(const PointCloud& p, Rng& rng) {
  std::vector<Index> idx(static_cast<std::size_t>(p.rows()));
  std::iota(idx.begin(), idx.end(), Index{0});
  for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[rng.uniform_index(i)]);
  PointCloud out(p.rows(), p.cols());
  for (Index i = 0; i < p.rows(); ++i) {
    for (Index j = 0; j < p.cols(); ++j) out(i, j) = p(idx[static_cast<std::size_t>(i)], j);
  }
  return out;
}

}  // namespace pshape::testing
