#include "pshape/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "pshape/errors.hpp"

namespace pshape {

Tensor2::Tensor2(Index rows, Index cols) : rows_(rows), cols_(cols), values_(static_cast<std::size_t>(rows * cols), 0.0) {
  if (rows < 0 || cols < 0) throw DimensionError("negative tensor dimensions " + shape_str());
}

Tensor2::Tensor2(Index rows, Index cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (static_cast<Index>(values_.size()) != rows * cols) {
    throw DimensionError("value count " + std::to_string(values_.size()) + " does not fill shape " + shape_str());
  }
}

Tensor2 Tensor2::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const Index r = static_cast<Index>(rows.size());
  const Index c = r == 0 ? 0 : static_cast<Index>(rows.begin()->size());
  Tensor2 out(r, c);
  Index i = 0;
  for (const auto& row : rows) {
    if (static_cast<Index>(row.size()) != c) throw DimensionError("ragged initializer rows");
    Index j = 0;
    for (double v : row) out(i, j++) = v;
    ++i;
  }
  return out;
}

std::string Tensor2::shape_str() const {
  return std::to_string(rows_) + "x" + std::to_string(cols_);
}

void Tensor2::fill(double v) { std::fill(values_.begin(), values_.end(), v); }

Tensor2 matmul(const Tensor2& a, const Tensor2& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul shape mismatch: " + a.shape_str() + " * " + b.shape_str());
  }
  Tensor2 out(a.rows(), b.cols());
  const Index n = a.rows(), k_dim = a.cols(), m = b.cols();
  for (Index i = 0; i < n; ++i) {
    double* out_row = out.row(i);
    const double* a_row = a.row(i);
    for (Index k = 0; k < k_dim; ++k) {
      const double av = a_row[k];
      const double* b_row = b.row(k);
      for (Index j = 0; j < m; ++j) out_row[j] += av * b_row[j];
    }
  }
  return out;
}

Tensor2 transposed(const Tensor2& a) {
  Tensor2 out(a.cols(), a.rows());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

void axpy(Tensor2& y, double alpha, const Tensor2& x) {
  if (!y.same_shape(x)) throw DimensionError("axpy shape mismatch: " + y.shape_str() + " vs " + x.shape_str());
  double* yd = y.data();
  const double* xd = x.data();
  const Index n = y.size();
  for (Index i = 0; i < n; ++i) yd[i] += alpha * xd[i];
}

void add_in_place(Tensor2& y, const Tensor2& x) { axpy(y, 1.0, x); }

void scale_in_place(Tensor2& y, double alpha) {
  double* yd = y.data();
  const Index n = y.size();
  for (Index i = 0; i < n; ++i) yd[i] *= alpha;
}

bool all_finite(const Tensor2& a) {
  const double* d = a.data();
  const Index n = a.size();
  for (Index i = 0; i < n; ++i)
    if (!std::isfinite(d[i])) return false;
  return true;
}

double max_abs(const Tensor2& a) {
  double m = 0.0;
  const double* d = a.data();
  const Index n = a.size();
  for (Index i = 0; i < n; ++i) m = std::max(m, std::fabs(d[i]));
  return m;
}

}  // namespace pshape
