#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace monmf {

using Index = Eigen::Index;

using RowMajorMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Dense real matrix with contiguous row-major storage.
///
/// This is the carrier type at the library boundary (data matrices, factor
/// matrices, CSV I/O). Algorithm internals work on Eigen types; `view()`
/// exposes the storage as an Eigen map without copying.
///
/// Invariants enforced at construction: positive dimensions, every entry
/// finite. Default construction yields the empty 0 x 0 sentinel.
class DenseMatrix {
 public:
  DenseMatrix() = default;

  DenseMatrix(Index rows, Index cols)
      : rows_(rows),
        cols_(cols),
        data_(static_cast<std::size_t>(checked_size(rows, cols)), 0.0) {}

  DenseMatrix(Index rows, Index cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != static_cast<std::size_t>(checked_size(rows, cols)))
      throw std::invalid_argument(
          "DenseMatrix: data length does not match rows*cols");
    check_finite();
  }

  template <typename Derived>
  static DenseMatrix from_eigen(const Eigen::MatrixBase<Derived>& m) {
    DenseMatrix out(m.rows(), m.cols());
    out.view() = m;
    out.check_finite();
    return out;
  }

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Index size() const { return rows_ * cols_; }
  bool empty() const { return data_.empty(); }

  double operator()(Index i, Index j) const {
    return data_[static_cast<std::size_t>(i * cols_ + j)];
  }
  double& operator()(Index i, Index j) {
    return data_[static_cast<std::size_t>(i * cols_ + j)];
  }

  const std::vector<double>& data() const { return data_; }

  Eigen::Map<const RowMajorMatrix> view() const {
    return {data_.data(), rows_, cols_};
  }
  Eigen::Map<RowMajorMatrix> view() { return {data_.data(), rows_, cols_}; }

  /// Column-major copy for use in Eigen expressions.
  Eigen::MatrixXd eigen() const { return view(); }

  bool operator==(const DenseMatrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_ &&
           data_ == other.data_;
  }

 private:
  static Index checked_size(Index rows, Index cols) {
    if (rows <= 0 || cols <= 0)
      throw std::invalid_argument("DenseMatrix: dimensions must be positive");
    return rows * cols;
  }

  void check_finite() const {
    for (double v : data_)
      if (!std::isfinite(v))
        throw std::invalid_argument("DenseMatrix: non-finite entry");
  }

  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<double> data_;
};

}  // namespace monmf
