#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace pshape {

using Index = std::ptrdiff_t;

// Dense row-major matrix of doubles. The one numeric container everything
// else in the library is built on.
class Tensor2 {
 public:
  Tensor2() = default;
  Tensor2(Index rows, Index cols);  // zero-filled
  Tensor2(Index rows, Index cols, std::vector<double> values);

  static Tensor2 from_rows(std::initializer_list<std::initializer_list<double>> rows);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Index size() const { return rows_ * cols_; }
  bool empty() const { return size() == 0; }

  double& operator()(Index r, Index c) { return values_[r * cols_ + c]; }
  double operator()(Index r, Index c) const { return values_[r * cols_ + c]; }

  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }
  double* row(Index r) { return values_.data() + r * cols_; }
  const double* row(Index r) const { return values_.data() + r * cols_; }

  bool same_shape(const Tensor2& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }
  std::string shape_str() const;

  void fill(double v);
  void set_zero() { fill(0.0); }

  bool operator==(const Tensor2& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && values_ == o.values_;
  }

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<double> values_;
};

// out = a * b. Accumulation runs in ascending-k order per output entry, the
// same order a naive triple loop would use, so results are reproducible and
// comparable against loop oracles bit for bit.
Tensor2 matmul(const Tensor2& a, const Tensor2& b);

Tensor2 transposed(const Tensor2& a);

// y += alpha * x (shapes must match).
void axpy(Tensor2& y, double alpha, const Tensor2& x);
void add_in_place(Tensor2& y, const Tensor2& x);
void scale_in_place(Tensor2& y, double alpha);

bool all_finite(const Tensor2& a);

// Frobenius-style max absolute entry; handy for tests and diagnostics.
double max_abs(const Tensor2& a);

}  // namespace pshape
