#pragma once

#include <Eigen/Dense>
#include <Eigen/Jacobi>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "cubreg/error.hpp"

namespace cubreg {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// |mu_i + lambda| at or below this is a pole of the shifted system. Every
/// module that needs to decide "singular mode or not" reads it from here.
template <typename Scalar>
constexpr Scalar kSingularModeTol = Scalar(1e-12);

/// Dense symmetric matrix. Construction from arbitrary data checks symmetry
/// entrywise and stores the symmetric part (A + A^T) / 2.
template <typename Scalar>
class SymmetricMatrix {
 public:
  using Matrix = MatrixX<Scalar>;

  explicit SymmetricMatrix(const Matrix& a, Scalar tol = Scalar(1e-12)) {
    check_shape(a);
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      for (Eigen::Index i = 0; i < j; ++i) {
        using std::abs;
        if (abs(a(i, j) - a(j, i)) > tol * (Scalar(1) + abs(a(i, j)))) {
          std::ostringstream msg;
          msg << "entry (" << i << "," << j << ") = " << a(i, j) << " differs from (" << j << ","
              << i << ") = " << a(j, i);
          throw Error(ErrorCode::NotSymmetric, msg.str());
        }
      }
    }
    data_ = (a + a.transpose()) / Scalar(2);
  }

  /// Takes the symmetric part of `a` without checking how far from
  /// symmetric it was. Used for Hessians assembled by user callbacks.
  template <typename Derived>
  static SymmetricMatrix symmetrized(const Eigen::MatrixBase<Derived>& a) {
    Matrix m = a;
    check_shape(m);
    SymmetricMatrix out;
    out.data_ = (m + m.transpose()) / Scalar(2);
    return out;
  }

  static SymmetricMatrix identity(Eigen::Index n) {
    return symmetrized(Matrix::Identity(n, n));
  }

  Eigen::Index size() const { return data_.rows(); }
  const Matrix& matrix() const { return data_; }
  Scalar operator()(Eigen::Index i, Eigen::Index j) const { return data_(i, j); }
  Scalar max_abs() const { return data_.cwiseAbs().maxCoeff(); }

 private:
  SymmetricMatrix() = default;

  static void check_shape(const Matrix& a) {
    if (a.rows() < 1 || a.rows() != a.cols()) {
      std::ostringstream msg;
      msg << "symmetric matrix must be square with n >= 1, got " << a.rows() << "x" << a.cols();
      throw Error(ErrorCode::DimensionMismatch, msg.str());
    }
    if (!a.allFinite()) throw Error(ErrorCode::InvalidArgument, "matrix has non-finite entries");
  }

  Matrix data_;
};

/// Ascending eigenvalues and the matching orthonormal eigenvectors (columns).
template <typename Scalar>
struct EigenDecomposition {
  VectorX<Scalar> values;
  MatrixX<Scalar> vectors;

  Eigen::Index size() const { return values.size(); }
  Scalar smallest() const { return values(0); }
};

/// Cyclic Jacobi eigensolver.
///
/// Sweeps the strict upper triangle in row-major order and stops once the
/// off-diagonal Frobenius norm falls below 1e-12 * ||A||_F. Eigenvalues are
/// sorted ascending (stable in the original index for ties) and each
/// eigenvector is signed so its largest-magnitude entry is positive, which
/// makes the output a deterministic function of the input.
template <typename Scalar>
EigenDecomposition<Scalar> sym_eigen(const SymmetricMatrix<Scalar>& a, int max_sweeps = 100) {
  using std::abs;
  using std::sqrt;
  const Eigen::Index n = a.size();
  MatrixX<Scalar> work = a.matrix();
  MatrixX<Scalar> v = MatrixX<Scalar>::Identity(n, n);

  const Scalar frob = work.norm();
  const Scalar target = Scalar(1e-12) * frob;
  auto off_norm = [&] {
    Scalar sum = 0;
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < j; ++i) sum += Scalar(2) * work(i, j) * work(i, j);
    return sqrt(sum);
  };

  bool converged = off_norm() <= target;
  for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (work(p, q) == Scalar(0)) continue;
        Eigen::JacobiRotation<Scalar> rot;
        rot.makeJacobi(work, p, q);
        work.applyOnTheLeft(p, q, rot.adjoint());
        work.applyOnTheRight(p, q, rot);
        work(p, q) = work(q, p) = Scalar(0);
        v.applyOnTheRight(p, q, rot);
      }
    }
    converged = off_norm() <= target;
  }
  if (!converged) {
    std::ostringstream msg;
    msg << "Jacobi did not converge in " << max_sweeps << " sweeps (n = " << n
        << ", off-diagonal norm " << off_norm() << ", target " << target << ")";
    throw Error(ErrorCode::NoConvergence, msg.str());
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return work(i, i) < work(j, j); });

  EigenDecomposition<Scalar> out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index src = order[static_cast<std::size_t>(k)];
    out.values(k) = work(src, src);
    VectorX<Scalar> col = v.col(src);
    Eigen::Index arg = 0;
    col.cwiseAbs().maxCoeff(&arg);
    if (col(arg) < Scalar(0)) col = -col;
    out.vectors.col(k) = col;
  }
  return out;
}

template <typename Scalar>
EigenDecomposition<Scalar> sym_eigen(const MatrixX<Scalar>& a) {
  return sym_eigen(SymmetricMatrix<Scalar>(a));
}

/// Solves (Q + lambda I) x = b through the spectral factors of Q.
template <typename Scalar, typename Derived>
VectorX<Scalar> solve_shifted(const EigenDecomposition<Scalar>& eig, Scalar lambda,
                              const Eigen::MatrixBase<Derived>& b) {
  using std::abs;
  if (b.size() != eig.size()) throw Error(ErrorCode::DimensionMismatch, "solve_shifted: rhs size");
  VectorX<Scalar> coeff = eig.vectors.transpose() * b;
  for (Eigen::Index i = 0; i < coeff.size(); ++i) {
    const Scalar shifted = eig.values(i) + lambda;
    if (abs(shifted) <= kSingularModeTol<Scalar>) {
      if (abs(coeff(i)) > kSingularModeTol<Scalar>) {
        std::ostringstream msg;
        msg << "mode " << i << " has mu + lambda = " << shifted << " but coupling " << coeff(i);
        throw SingularModeError(static_cast<long>(i), msg.str());
      }
      coeff(i) = Scalar(0);
    } else {
      coeff(i) /= shifted;
    }
  }
  return eig.vectors * coeff;
}

template <typename Scalar>
struct PseudoSolution {
  VectorX<Scalar> x;
  /// Orthonormal basis of the (near-)null space of Q + lambda I, one column per mode.
  MatrixX<Scalar> null_basis;
};

/// Minimum-norm solution of (Q + lambda I) x = b when the shift is singular.
/// The right-hand side must not excite any null mode.
template <typename Scalar, typename Derived>
PseudoSolution<Scalar> pseudo_solve_shifted(const EigenDecomposition<Scalar>& eig, Scalar lambda,
                                            const Eigen::MatrixBase<Derived>& b) {
  using std::abs;
  if (b.size() != eig.size())
    throw Error(ErrorCode::DimensionMismatch, "pseudo_solve_shifted: rhs size");
  const Scalar b_norm = b.norm();
  VectorX<Scalar> coeff = eig.vectors.transpose() * b;
  std::vector<Eigen::Index> null_modes;
  for (Eigen::Index i = 0; i < coeff.size(); ++i) {
    const Scalar shifted = eig.values(i) + lambda;
    if (abs(shifted) <= kSingularModeTol<Scalar>) {
      if (abs(coeff(i)) > Scalar(1e-10) * b_norm) {
        std::ostringstream msg;
        msg << "null mode " << i << " carries coupling " << coeff(i) << " (|b| = " << b_norm << ")";
        throw Error(ErrorCode::Inconsistent, msg.str());
      }
      null_modes.push_back(i);
      coeff(i) = Scalar(0);
    } else {
      coeff(i) /= shifted;
    }
  }
  PseudoSolution<Scalar> out;
  out.x = eig.vectors * coeff;
  out.null_basis.resize(eig.size(), static_cast<Eigen::Index>(null_modes.size()));
  for (std::size_t k = 0; k < null_modes.size(); ++k)
    out.null_basis.col(static_cast<Eigen::Index>(k)) = eig.vectors.col(null_modes[k]);
  return out;
}

}  // namespace cubreg
