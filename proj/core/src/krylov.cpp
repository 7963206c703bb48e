#include "osgood/krylov.hpp"

#include "osgood/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace osgood {
namespace {

double one_norm_bound(const SparseMatrix& A) {
  double best = 0.0;
  for (Eigen::Index r = 0; r < A.outerSize(); ++r) {
    double row = 0.0;
    for (SparseMatrix::InnerIterator it(A, r); it; ++it) {
      row += std::abs(it.value());
    }
    best = std::max(best, row);
  }
  return best;
}

// e^{-tau T} e_1 for the leading k x k block of the Lanczos tridiagonal.
Vector small_exp_e1(const Vector& diag, const Vector& offdiag, Eigen::Index k, double tau) {
  if (k == 1) {
    return Vector::Constant(1, std::exp(-tau * diag[0]));
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver;
  solver.computeFromTridiagonal(diag.head(k), offdiag.head(k - 1), Eigen::ComputeEigenvectors);
  const Vector& lambda = solver.eigenvalues();
  const Matrix& Q = solver.eigenvectors();
  Vector coeff = Q.row(0).transpose();
  for (Eigen::Index i = 0; i < k; ++i) {
    coeff[i] *= std::exp(-tau * lambda[i]);
  }
  return Q * coeff;
}

}  // namespace

Vector expv_symmetric(const SparseMatrix& A, double t, const Vector& v,
                      const KrylovOptions& options, KrylovStats* stats) {
  if (t < 0.0) {
    throw DomainError("expv: negative time");
  }
  const Eigen::Index n = v.size();
  const double v_norm = v.norm();
  if (t == 0.0 || v_norm == 0.0) {
    return v;
  }
  const double a_norm = one_norm_bound(A);
  if (a_norm == 0.0) {
    return v;
  }
  const int m_max = std::max(2, std::min<int>(options.max_dimension, static_cast<int>(n)));

  Vector w = v;
  double done = 0.0;
  double tau = std::min(t, 0.5 * m_max / a_norm);
  Matrix V(n, m_max + 1);
  Vector diag(m_max);
  Vector offdiag(m_max);
  KrylovStats local;

  while (done < t) {
    tau = std::min(tau, t - done);
    const double beta0 = w.norm();
    if (beta0 == 0.0) {
      break;
    }
    V.col(0) = w / beta0;

    Eigen::Index built = 0;
    bool breakdown = false;
    for (Eigen::Index j = 0; j < m_max; ++j) {
      Vector u = A * V.col(j);
      ++local.matvecs;
      diag[j] = V.col(j).dot(u);
      // Full reorthogonalization, applied twice for stability.
      for (int pass = 0; pass < 2; ++pass) {
        const Vector h = V.leftCols(j + 1).transpose() * u;
        u.noalias() -= V.leftCols(j + 1) * h;
      }
      offdiag[j] = u.norm();
      built = j + 1;
      if (offdiag[j] <= 1e-14 * a_norm) {
        breakdown = true;
        break;
      }
      V.col(j + 1) = u / offdiag[j];
    }

    // Shrink tau until the error estimate on this basis is acceptable.
    Vector y;
    bool shrunk = false;
    for (;;) {
      y = small_exp_e1(diag, offdiag, built, tau);
      if (breakdown) {
        break;
      }
      const double err = beta0 * offdiag[built - 1] * std::abs(y[built - 1]);
      if (err <= options.tolerance * v_norm * (tau / t)) {
        break;
      }
      ++local.rejections;
      shrunk = true;
      tau *= 0.5;
      if (tau < 1e-15 * t) {
        throw DomainError("expv: step size underflow");
      }
    }
    w = beta0 * (V.leftCols(built) * y);
    done += tau;
    ++local.substeps;
    if (!shrunk) {
      tau *= 2.0;
    }
  }
  if (stats != nullptr) {
    *stats = local;
  }
  return w;
}

}  // namespace osgood
