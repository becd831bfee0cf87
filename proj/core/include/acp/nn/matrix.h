// Copyright 2026 The Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ACP_NN_MATRIX_H_
#define ACP_NN_MATRIX_H_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace acp::nn {

// Dense row-major matrix of doubles with value semantics.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix RowVector(std::span<const double> values);
  static Matrix Identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) {
    return data_[r * cols_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  std::span<double> row(std::size_t r) {
    return std::span<double>(data_).subspan(r * cols_, cols_);
  }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(data_).subspan(r * cols_, cols_);
  }

  void Fill(double value);
  bool AllFinite() const;
  bool SameShape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  std::string ShapeString() const;

  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(double s);

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(Matrix a, double s);

// a * b
Matrix MatMul(const Matrix& a, const Matrix& b);
// a * b^T
Matrix MatMulTransB(const Matrix& a, const Matrix& b);
// a^T * b
Matrix MatMulTransA(const Matrix& a, const Matrix& b);
Matrix Transpose(const Matrix& a);
// Element-wise product.
Matrix Hadamard(const Matrix& a, const Matrix& b);
// Column sums as a 1 x cols matrix.
Matrix ColumnSums(const Matrix& a);
// [a | b], same row count.
Matrix ConcatCols(const Matrix& a, const Matrix& b);
// Columns [begin, begin + count) of a.
Matrix SliceCols(const Matrix& a, std::size_t begin, std::size_t count);
double SumSquares(const Matrix& a);

// Throws NumericError naming `what` if any entry is NaN or Inf.
void RequireFinite(const Matrix& m, const char* what);
// Throws ShapeError unless the shapes match.
void RequireSameShape(const Matrix& a, const Matrix& b, const char* what);

}  // namespace acp::nn

#endif  // ACP_NN_MATRIX_H_
