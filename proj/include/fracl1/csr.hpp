#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

#include "fracl1/detail/parallel.hpp"

namespace fracl1 {

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

/// Compressed sparse row matrix with sorted column indices per row.
class CsrMatrix {
 public:
  CsrMatrix() = default;

  static CsrMatrix from_triplets(std::size_t rows, std::size_t cols,
                                 std::span<const Triplet> entries) {
    std::vector<std::map<std::size_t, double>> accum(rows);
    for (const Triplet& t : entries) {
      if (t.row >= rows || t.col >= cols)
        throw std::out_of_range("CsrMatrix::from_triplets: index out of range");
      accum[t.row][t.col] += t.value;
    }
    CsrMatrix A;
    A.rows_ = rows;
    A.cols_ = cols;
    A.row_offsets_.resize(rows + 1, 0);
    for (std::size_t i = 0; i < rows; ++i)
      A.row_offsets_[i + 1] = A.row_offsets_[i] + accum[i].size();
    A.col_indices_.reserve(A.row_offsets_[rows]);
    A.values_.reserve(A.row_offsets_[rows]);
    for (std::size_t i = 0; i < rows; ++i) {
      for (const auto& [c, v] : accum[i]) {
        A.col_indices_.push_back(c);
        A.values_.push_back(v);
      }
    }
    return A;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }

  std::span<const std::size_t> row_offsets() const { return row_offsets_; }
  std::span<const std::size_t> col_indices() const { return col_indices_; }
  std::span<const double> values() const { return values_; }
  std::span<double> values_mut() { return values_; }

  /// Position of each diagonal entry in the value array; throws when a
  /// row lacks a structural diagonal.
  std::vector<std::size_t> diagonal_positions() const {
    std::vector<std::size_t> pos(rows_, 0);
    for (std::size_t i = 0; i < rows_; ++i) {
      bool found = false;
      for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
        if (col_indices_[k] == i) {
          pos[i] = k;
          found = true;
          break;
        }
      if (!found) throw std::invalid_argument("CsrMatrix: missing structural diagonal");
    }
    return pos;
  }

  double value_at(std::size_t i, std::size_t j) const {
    for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
      if (col_indices_[k] == j) return values_[k];
    return 0.0;
  }

  /// y = A x, parallel over rows.
  void multiply(std::span<const double> x, std::span<double> y, int threads = 1) const {
    if (x.size() != cols_ || y.size() != rows_)
      throw std::invalid_argument("CsrMatrix::multiply: size mismatch");
    detail::parallel_for(rows_, threads, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t i = lo; i < hi; ++i) {
        double acc = 0.0;
        for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
          acc += values_[k] * x[col_indices_[k]];
        y[i] = acc;
      }
    });
  }

  std::vector<double> diagonal() const {
    std::vector<double> d(std::min(rows_, cols_), 0.0);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = value_at(i, i);
    return d;
  }

  /// A + shift * diag(d) on the diagonal (d empty means identity).
  CsrMatrix shifted(double shift, std::span<const double> d = {}) const {
    std::vector<Triplet> t;
    t.reserve(nnz() + rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
        t.push_back({i, col_indices_[k], values_[k]});
    for (std::size_t i = 0; i < rows_; ++i)
      t.push_back({i, i, shift * (d.empty() ? 1.0 : d[i])});
    return from_triplets(rows_, cols_, t);
  }

  bool is_tridiagonal() const {
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
        const std::size_t j = col_indices_[k];
        if ((j > i ? j - i : i - j) > 1) return false;
      }
    return true;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_offsets_;
  std::vector<std::size_t> col_indices_;
  std::vector<double> values_;
};

}  // namespace fracl1
