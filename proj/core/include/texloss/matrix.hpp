#pragma once

#include <vector>

#include "texloss/error.hpp"

namespace texloss {

// Dense row-major matrix of doubles.  Deliberately minimal: the library
// only needs element access, fill construction, and iteration.
class Matrix {
 public:
  Matrix() : rows_(0), cols_(0) {}

  Matrix(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols), v_(static_cast<size_t>(rows) * cols, fill) {
    if (rows < 0 || cols < 0) {
      throw InvalidArgumentError("matrix dimensions must be non-negative");
    }
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  size_t size() const { return v_.size(); }

  double& operator()(int r, int c) { return v_[static_cast<size_t>(r) * cols_ + c]; }
  double operator()(int r, int c) const { return v_[static_cast<size_t>(r) * cols_ + c]; }

  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }
  const std::vector<double>& values() const { return v_; }

  auto begin() { return v_.begin(); }
  auto end() { return v_.end(); }
  auto begin() const { return v_.begin(); }
  auto end() const { return v_.end(); }

  bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

 private:
  int rows_;
  int cols_;
  std::vector<double> v_;
};

}  // namespace texloss
