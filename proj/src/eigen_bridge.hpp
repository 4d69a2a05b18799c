#pragma once

#include <Eigen/Dense>

#include "mmv/complex_matrix.hpp"

namespace mmv::detail {

inline Eigen::MatrixXcd to_eigen(const ComplexMatrix& m) {
  Eigen::MatrixXcd out(m.rows(), m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) out(r, c) = m(r, c);
  }
  return out;
}

inline ComplexMatrix from_eigen(const Eigen::MatrixXcd& m) {
  ComplexMatrix out(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      out.set(static_cast<std::size_t>(r), static_cast<std::size_t>(c), m(r, c));
    }
  }
  return out;
}

}  // namespace mmv::detail
