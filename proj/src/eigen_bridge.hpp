#pragma once

#include <Eigen/Dense>

#include "tnf/tensor.hpp"

namespace tnf::detail {

using RowMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMap = Eigen::Map<RowMatrix>;
using ConstRowMap = Eigen::Map<const RowMatrix>;

template <typename Derived>
Tensor from_matrix(const Eigen::MatrixBase<Derived>& m, Extents extents) {
  RowMatrix row = m;
  std::vector<Complex> data(row.data(), row.data() + row.size());
  return Tensor(std::move(extents), std::move(data));
}

/// Rank-2 tensor viewed as a column-major Eigen matrix (copy).
inline Eigen::MatrixXcd to_matrix(const Tensor& t) {
  return ConstRowMap(t.data().data(), static_cast<Eigen::Index>(t.extent(0)),
                     static_cast<Eigen::Index>(t.extent(1)));
}

}  // namespace tnf::detail
