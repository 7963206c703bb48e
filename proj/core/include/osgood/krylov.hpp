#pragma once

#include "osgood/types.hpp"

#include <Eigen/Sparse>

namespace osgood {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct KrylovOptions {
  double tolerance = 1e-10;  // relative to ||v||
  int max_dimension = 40;
};

struct KrylovStats {
  int substeps = 0;
  int matvecs = 0;
  int rejections = 0;
};

/// e^{-tA} v for symmetric positive semidefinite A by Lanczos with full
/// reorthogonalization and adaptive time stepping. The a posteriori error
/// estimate beta_0 h_{m+1,m} |[e^{-tau T_m} e_1]_m| is kept below
/// tolerance * ||v|| * tau / t on every substep.
Vector expv_symmetric(const SparseMatrix& A, double t, const Vector& v,
                      const KrylovOptions& options = {}, KrylovStats* stats = nullptr);

}  // namespace osgood
