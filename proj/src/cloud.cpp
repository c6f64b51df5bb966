#include "pshape/cloud.hpp"

#include <cmath>
#include <numeric>
#include <vector>

#include "pshape/errors.hpp"
#include "pshape/rng.hpp"

namespace pshape {

std::array<double, 3> centroid(const PointCloud& p) {
  std::array<double, 3> c{0.0, 0.0, 0.0};
  for (Index i = 0; i < p.rows(); ++i) {
    const double* row = p.row(i);
    c[0] += row[0];
    c[1] += row[1];
    c[2] += row[2];
  }
  const double inv = 1.0 / static_cast<double>(p.rows());
  c[0] *= inv;
  c[1] *= inv;
  c[2] *= inv;
  return c;
}

double max_point_norm(const PointCloud& p) {
  double best = 0.0;
  for (Index i = 0; i < p.rows(); ++i) {
    const double* row = p.row(i);
    const double n2 = row[0] * row[0] + row[1] * row[1] + row[2] * row[2];
    if (n2 > best) best = n2;
  }
  return std::sqrt(best);
}

PointCloud normalize(const PointCloud& p) {
  if (p.cols() != 3) throw DimensionError("point cloud must be Nx3, got " + p.shape_str());
  if (p.rows() < 2) throw DataError("normalize needs at least two points");
  const auto c = centroid(p);
  PointCloud out = p;
  for (Index i = 0; i < out.rows(); ++i) {
    double* row = out.row(i);
    row[0] -= c[0];
    row[1] -= c[1];
    row[2] -= c[2];
  }
  const double radius = max_point_norm(out);
  if (radius <= 0.0) throw DegeneracyError("degenerate cloud: all points coincide");
  const double inv = 1.0 / radius;
  for (Index i = 0; i < out.rows(); ++i) {
    double* row = out.row(i);
    row[0] *= inv;
    row[1] *= inv;
    row[2] *= inv;
  }
  return out;
}

bool is_normalized(const PointCloud& p, double tol) {
  if (p.rows() < 1 || p.cols() != 3) return false;
  const auto c = centroid(p);
  const double cnorm = std::sqrt(c[0] * c[0] + c[1] * c[1] + c[2] * c[2]);
  return cnorm <= tol && std::fabs(max_point_norm(p) - 1.0) <= tol;
}

PointCloud resample(const PointCloud& p, Index n, std::uint64_t seed) {
  if (p.rows() < 1) throw DataError("cannot resample an empty cloud");
  if (n < 1) throw ContractError("resample target must be positive");
  Rng rng(Rng::mix(seed, 0x7265736d70ULL));
  PointCloud out(n, p.cols());
  if (p.rows() >= n) {
    // Partial Fisher-Yates: first n entries of a seeded permutation.
    std::vector<Index> idx(static_cast<std::size_t>(p.rows()));
    std::iota(idx.begin(), idx.end(), Index{0});
    for (Index i = 0; i < n; ++i) {
      const Index j = i + static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(p.rows() - i)));
      std::swap(idx[i], idx[j]);
      const double* src = p.row(idx[i]);
      double* dst = out.row(i);
      for (Index k = 0; k < p.cols(); ++k) dst[k] = src[k];
    }
  } else {
    for (Index i = 0; i < n; ++i) {
      const Index j = static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(p.rows())));
      const double* src = p.row(j);
      double* dst = out.row(i);
      for (Index k = 0; k < p.cols(); ++k) dst[k] = src[k];
    }
  }
  return out;
}

}  // namespace pshape
