#include "pshape/emd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "pshape/errors.hpp"

namespace pshape {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Sums the matched entries in sorted order, so the same multiset of costs
// always rounds identically (symmetry and permutation invariance hold
// exactly, not just within an ulp).
double assignment_cost(const CostMatrix& c, const std::vector<Index>& mapping) {
  std::vector<double> addends(static_cast<std::size_t>(c.n));
  for (Index i = 0; i < c.n; ++i) addends[static_cast<std::size_t>(i)] = c.entries(i, mapping[i]);
  std::sort(addends.begin(), addends.end());
  double cost = 0.0;
  for (double v : addends) cost += v;
  return cost;
}

}  // namespace

CostMatrix cost_matrix(const Tensor2& a, const Tensor2& b, GroundMetric metric) {
  if (a.rows() != b.rows()) {
    throw CardinalityError("clouds have unequal cardinality (" + std::to_string(a.rows()) + " vs " +
                           std::to_string(b.rows()) + "); resample to a common size first");
  }
  if (a.rows() < 1) throw CardinalityError("cost_matrix needs at least one point");
  if (a.cols() != b.cols()) {
    throw DimensionError("point dimensionality mismatch: " + a.shape_str() + " vs " + b.shape_str());
  }
  const Index n = a.rows(), d = a.cols();
  CostMatrix c;
  c.n = n;
  c.entries = Tensor2(n, n);
  for (Index i = 0; i < n; ++i) {
    const double* ai = a.row(i);
    double* out = c.entries.row(i);
    for (Index j = 0; j < n; ++j) {
      const double* bj = b.row(j);
      double acc = 0.0;
      if (metric == GroundMetric::L1) {
        for (Index k = 0; k < d; ++k) acc += std::fabs(ai[k] - bj[k]);
      } else {
        for (Index k = 0; k < d; ++k) {
          const double diff = ai[k] - bj[k];
          acc += diff * diff;
        }
        acc = std::sqrt(acc);
      }
      out[j] = acc;
    }
  }
  return c;
}

Assignment emd_exact(const CostMatrix& c, Index exact_cap) {
  const Index n = c.n;
  if (n > exact_cap) {
    throw SolverCapError("exact solver capped at " + std::to_string(exact_cap) + " points, got " +
                         std::to_string(n) + "; use the approximate solver (emd_approx)");
  }
  // Shortest augmenting path assignment with dual potentials (1-based
  // internally, column 0 is the virtual root).
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1, 0.0);
  std::vector<Index> match(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1, 0);
  for (Index i = 1; i <= n; ++i) {
    match[0] = i;
    Index j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const Index i0 = match[j0];
      const double* row = c.entries.row(i0 - 1);
      double delta = kInf;
      Index j1 = 0;
      for (Index j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = row[j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (Index j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const Index j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  Assignment out;
  out.mapping.assign(n, 0);
  for (Index j = 1; j <= n; ++j) out.mapping[match[j] - 1] = j - 1;
  out.cost = assignment_cost(c, out.mapping);
  return out;
}

namespace {

// Greedy rounding of a coupling to a permutation: repeatedly take the
// largest remaining coupling entry with free row and column.
std::vector<Index> round_to_permutation(const Tensor2& plan) {
  const Index n = plan.rows();
  std::vector<std::pair<double, Index>> cells;
  cells.reserve(static_cast<std::size_t>(n * n));
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) cells.emplace_back(plan(i, j), i * n + j);
  std::sort(cells.begin(), cells.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<Index> mapping(n, -1);
  std::vector<char> col_used(n, 0);
  Index assigned = 0;
  for (const auto& [mass, idx] : cells) {
    const Index i = idx / n, j = idx % n;
    if (mapping[i] >= 0 || col_used[j]) continue;
    mapping[i] = j;
    col_used[j] = 1;
    if (++assigned == n) break;
  }
  return mapping;
}

// Local pairwise exchange until no swap lowers the cost. Keeps the result a
// permutation, i.e. still a feasible coupling.
void two_opt(const CostMatrix& c, std::vector<Index>& mapping) {
  const Index n = c.n;
  bool improved = true;
  int sweeps = 0;
  while (improved && sweeps < 64) {
    improved = false;
    ++sweeps;
    for (Index i = 0; i < n; ++i) {
      for (Index j = i + 1; j < n; ++j) {
        const double before = c.entries(i, mapping[i]) + c.entries(j, mapping[j]);
        const double after = c.entries(i, mapping[j]) + c.entries(j, mapping[i]);
        if (after + 1e-15 < before) {
          std::swap(mapping[i], mapping[j]);
          improved = true;
        }
      }
    }
  }
}

}  // namespace

ApproxTransport emd_approx(const CostMatrix& c, double epsilon, int max_iters) {
  if (epsilon <= 0.0) throw ContractError("emd_approx requires epsilon > 0");
  const Index n = c.n;
  ApproxTransport result;
  if (n == 1) {
    result.cost = c.entries(0, 0);
    result.converged = true;
    result.assignment.mapping = {0};
    result.assignment.cost = result.cost;
    return result;
  }

  // Log-domain Sinkhorn with epsilon annealing; uniform marginals 1/n.
  const double log_marginal = -std::log(static_cast<double>(n));
  double cmax = 0.0;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) cmax = std::max(cmax, c.entries(i, j));

  std::vector<double> f(n, 0.0), g(n, 0.0), scratch(n, 0.0);
  double eps_cur = std::max(epsilon, cmax > 0.0 ? cmax * 0.5 : epsilon);
  int iters = 0;
  bool converged = false;
  constexpr double kTol = 1e-6;

  auto lse_cols = [&](std::vector<double>& out, double eps) {
    // out[i] = log sum_j exp((g[j] - C_ij) / eps)
    for (Index i = 0; i < n; ++i) {
      const double* row = c.entries.row(i);
      double m = -kInf;
      for (Index j = 0; j < n; ++j) m = std::max(m, (g[j] - row[j]) / eps);
      double s = 0.0;
      for (Index j = 0; j < n; ++j) s += std::exp((g[j] - row[j]) / eps - m);
      out[i] = m + std::log(s);
    }
  };
  auto lse_rows = [&](std::vector<double>& out, double eps) {
    // out[j] = log sum_i exp((f[i] - C_ij) / eps)
    for (Index j = 0; j < n; ++j) {
      double m = -kInf;
      for (Index i = 0; i < n; ++i) m = std::max(m, (f[i] - c.entries(i, j)) / eps);
      double s = 0.0;
      for (Index i = 0; i < n; ++i) s += std::exp((f[i] - c.entries(i, j)) / eps - m);
      out[j] = m + std::log(s);
    }
  };
  auto marginal_violation = [&](double eps) {
    // L1 distance of the coupling P_ij = exp((f_i + g_j - C_ij)/eps) from
    // uniform marginals.
    double worst = 0.0;
    for (Index i = 0; i < n; ++i) {
      const double* row = c.entries.row(i);
      double s = 0.0;
      for (Index j = 0; j < n; ++j) s += std::exp((f[i] + g[j] - row[j]) / eps);
      worst += std::fabs(s - 1.0 / n);
    }
    for (Index j = 0; j < n; ++j) {
      double s = 0.0;
      for (Index i = 0; i < n; ++i) s += std::exp((f[i] + g[j] - c.entries(i, j)) / eps);
      worst += std::fabs(s - 1.0 / n);
    }
    return worst;
  };

  while (iters < max_iters) {
    lse_cols(scratch, eps_cur);
    for (Index i = 0; i < n; ++i) f[i] = eps_cur * (log_marginal - scratch[i]);
    lse_rows(scratch, eps_cur);
    for (Index j = 0; j < n; ++j) g[j] = eps_cur * (log_marginal - scratch[j]);
    ++iters;
    if (eps_cur > epsilon) {
      eps_cur = std::max(epsilon, eps_cur * 0.5);
      continue;
    }
    if (iters % 4 == 0 || iters >= max_iters) {
      if (marginal_violation(eps_cur) < kTol) {
        converged = true;
        break;
      }
    }
  }
  if (!converged && marginal_violation(eps_cur) < kTol) converged = true;

  // Materialize the coupling (mass n so that costs are comparable with the
  // exact assignment's total cost), round to a permutation, polish locally.
  Tensor2 plan(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      plan(i, j) = std::exp((f[i] + g[j] - c.entries(i, j)) / eps_cur) * static_cast<double>(n);
  std::vector<Index> mapping = round_to_permutation(plan);
  two_opt(c, mapping);

  result.assignment.mapping = std::move(mapping);
  result.assignment.cost = assignment_cost(c, result.assignment.mapping);
  result.cost = result.assignment.cost;
  result.converged = converged;
  result.iterations = iters;
  return result;
}

EmdGradient emd_gradient(const Tensor2& a, const Tensor2& b, const Assignment& assignment,
                         GroundMetric metric) {
  const Index n = a.rows(), d = a.cols();
  EmdGradient out;
  out.grad_a = Tensor2(n, d);
  out.grad_b = Tensor2(b.rows(), d);
  for (Index i = 0; i < n; ++i) {
    const Index j = assignment.mapping[i];
    const double* ai = a.row(i);
    const double* bj = b.row(j);
    double* ga = out.grad_a.row(i);
    double* gb = out.grad_b.row(j);
    if (metric == GroundMetric::L1) {
      for (Index k = 0; k < d; ++k) {
        const double diff = ai[k] - bj[k];
        const double s = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
        ga[k] += s;
        gb[k] -= s;
      }
    } else {
      double norm = 0.0;
      for (Index k = 0; k < d; ++k) {
        const double diff = ai[k] - bj[k];
        norm += diff * diff;
      }
      norm = std::sqrt(norm);
      if (norm > 0.0) {
        for (Index k = 0; k < d; ++k) {
          const double dir = (ai[k] - bj[k]) / norm;
          ga[k] += dir;
          gb[k] -= dir;
        }
      }
    }
  }
  return out;
}

EmdSolution solve_emd(const CostMatrix& c, const EmdSolverConfig& cfg) {
  EmdSolution out;
  const bool use_exact = cfg.kind == EmdSolverConfig::Kind::Exact ||
                         (cfg.kind == EmdSolverConfig::Kind::Auto && c.n <= cfg.exact_cap);
  if (use_exact) {
    out.assignment = emd_exact(c, cfg.kind == EmdSolverConfig::Kind::Exact
                                      ? std::max(cfg.exact_cap, c.n)
                                      : cfg.exact_cap);
    out.cost = out.assignment.cost;
    out.exact = true;
  } else {
    ApproxTransport approx = emd_approx(c, cfg.epsilon, cfg.max_iters);
    out.assignment = std::move(approx.assignment);
    out.cost = approx.cost;
    out.exact = false;
  }
  return out;
}

}  // namespace pshape
