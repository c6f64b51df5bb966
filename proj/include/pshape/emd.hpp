#pragma once

#include <cstdint>
#include <vector>

#include "pshape/tensor.hpp"

namespace pshape {

enum class GroundMetric { L1, L2 };

// Pairwise ground distances between two equal-size clouds.
struct CostMatrix {
  Index n = 0;
  Tensor2 entries;  // n x n, entries(i, j) = d(a_i, b_j)
};

// Perfect matching between the two clouds plus its total cost.
struct Assignment {
  std::vector<Index> mapping;  // point i of A -> point mapping[i] of B
  double cost = 0.0;
};

// Result of the entropic approximate solver. `cost` is the transport cost of
// a feasible coupling (never below the exact optimum); `assignment` is the
// permutation that coupling was rounded to.
struct ApproxTransport {
  double cost = 0.0;
  bool converged = false;
  int iterations = 0;
  Assignment assignment;
};

inline constexpr Index kDefaultExactCap = 512;

// clouds are N x 3 tensors. Throws CardinalityError when sizes differ.
CostMatrix cost_matrix(const Tensor2& a, const Tensor2& b, GroundMetric metric);

// Exact minimum-cost perfect matching (Jonker-Volgenant style shortest
// augmenting paths, O(n^3)). Throws SolverCapError above `exact_cap`.
Assignment emd_exact(const CostMatrix& c, Index exact_cap = kDefaultExactCap);

// Entropic-regularized transport between uniform marginals, annealed down to
// `epsilon` and iterated until the coupling's marginal violation drops below
// 1e-6 or `max_iters` Sinkhorn sweeps are spent. The coupling is rounded to
// a permutation before costing, so cost >= the exact optimum.
ApproxTransport emd_approx(const CostMatrix& c, double epsilon, int max_iters);

// Subgradient of the total assignment cost w.r.t. the coordinates of both
// clouds, holding the optimal bijection fixed. Componentwise sign for L1
// (zero at exact ties), unit direction for L2.
struct EmdGradient {
  Tensor2 grad_a;
  Tensor2 grad_b;
};
EmdGradient emd_gradient(const Tensor2& a, const Tensor2& b, const Assignment& assignment,
                         GroundMetric metric);

// Solver selection for losses and the CLI.
struct EmdSolverConfig {
  enum class Kind : std::uint8_t { Auto, Exact, Approx };
  Kind kind = Kind::Auto;
  Index exact_cap = kDefaultExactCap;
  double epsilon = 0.01;
  int max_iters = 20000;
};

// Solves with the configured solver (Auto: exact up to the cap, approximate
// above it). Returns the assignment used for gradients plus the reported cost.
struct EmdSolution {
  Assignment assignment;
  double cost = 0.0;
  bool exact = true;
};
EmdSolution solve_emd(const CostMatrix& c, const EmdSolverConfig& cfg);

}  // namespace pshape
