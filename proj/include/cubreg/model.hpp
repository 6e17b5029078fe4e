#pragma once

#include <cmath>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>

#include "cubreg/linalg.hpp"

namespace cubreg {

/// m(s) = c^T s + 1/2 s^T Q s + sigma/3 ||s||^3.
///
/// The model is an immutable value. The eigendecomposition of Q is computed
/// on first use and shared between copies.
template <typename Scalar>
class CubicModel {
 public:
  using Vector = VectorX<Scalar>;

  CubicModel(Vector c, SymmetricMatrix<Scalar> q, Scalar sigma)
      : c_(std::move(c)), q_(std::move(q)), sigma_(sigma), cache_(std::make_shared<Cache>()) {
    if (!(sigma_ > Scalar(0)) || !std::isfinite(static_cast<double>(sigma_))) {
      std::ostringstream msg;
      msg << "sigma must be positive and finite, got " << sigma_;
      throw Error(ErrorCode::InvalidArgument, msg.str());
    }
    if (c_.size() != q_.size()) {
      std::ostringstream msg;
      msg << "c has " << c_.size() << " entries but Q is " << q_.size() << "x" << q_.size();
      throw Error(ErrorCode::DimensionMismatch, msg.str());
    }
    if (!c_.allFinite()) throw Error(ErrorCode::InvalidArgument, "c has non-finite entries");
  }

  CubicModel(Vector c, const MatrixX<Scalar>& q, Scalar sigma)
      : CubicModel(std::move(c), SymmetricMatrix<Scalar>(q), sigma) {}

  Eigen::Index dim() const { return c_.size(); }
  const Vector& c() const { return c_; }
  const SymmetricMatrix<Scalar>& q() const { return q_; }
  Scalar sigma() const { return sigma_; }

  const EigenDecomposition<Scalar>& eig() const {
    std::call_once(cache_->once, [this] { cache_->value = sym_eigen(q_); });
    return *cache_->value;
  }

 private:
  struct Cache {
    std::once_flag once;
    std::optional<EigenDecomposition<Scalar>> value;
  };

  Vector c_;
  SymmetricMatrix<Scalar> q_;
  Scalar sigma_;
  std::shared_ptr<Cache> cache_;
};

namespace detail {

template <typename Scalar, typename Derived>
void check_dim(const CubicModel<Scalar>& m, const Eigen::MatrixBase<Derived>& s, const char* op) {
  if (s.size() != m.dim()) {
    std::ostringstream msg;
    msg << op << ": point has dimension " << s.size() << ", model has " << m.dim();
    throw Error(ErrorCode::DimensionMismatch, msg.str());
  }
}

}  // namespace detail

template <typename Scalar, typename Derived>
Scalar eval(const CubicModel<Scalar>& m, const Eigen::MatrixBase<Derived>& s) {
  detail::check_dim(m, s, "eval");
  const Scalar r = s.norm();
  return m.c().dot(s) + Scalar(0.5) * s.dot(m.q().matrix() * s) + m.sigma() / Scalar(3) * r * r * r;
}

template <typename Scalar, typename Derived>
VectorX<Scalar> grad(const CubicModel<Scalar>& m, const Eigen::MatrixBase<Derived>& s) {
  detail::check_dim(m, s, "grad");
  return m.c() + m.q().matrix() * s + (m.sigma() * s.norm()) * s;
}

/// Q + sigma ||s|| I + sigma s s^T / ||s||, and Q itself at s = 0 where the
/// cubic term has zero second derivative.
template <typename Scalar, typename Derived>
SymmetricMatrix<Scalar> hess(const CubicModel<Scalar>& m, const Eigen::MatrixBase<Derived>& s) {
  detail::check_dim(m, s, "hess");
  const Scalar r = s.norm();
  if (r == Scalar(0)) return m.q();
  MatrixX<Scalar> h = m.q().matrix();
  h.diagonal().array() += m.sigma() * r;
  h.noalias() += (m.sigma() / r) * (s * s.transpose());
  return SymmetricMatrix<Scalar>::symmetrized(h);
}

/// m(s + d) - m(s), evaluated without subtracting two nearly equal objective
/// values. The first-order part is grad(s)^T d; the remainder is assembled
/// from terms that are all second order in d, so the result keeps its
/// relative accuracy when the step is tiny.
template <typename Scalar, typename DerivedS, typename DerivedD>
Scalar increment(const CubicModel<Scalar>& m, const Eigen::MatrixBase<DerivedS>& s,
                 const Eigen::MatrixBase<DerivedD>& d) {
  detail::check_dim(m, s, "increment");
  detail::check_dim(m, d, "increment");
  const Scalar r0 = s.norm();
  const Scalar r1 = (s + d).norm();
  const Scalar dd = d.squaredNorm();
  const Scalar sd = s.dot(d);
  Scalar cubic = 0;
  if (r0 + r1 > Scalar(0)) {
    const Scalar delta = (Scalar(2) * sd + dd) / (r0 + r1);
    cubic = r0 * (r0 * dd - delta * sd) / (r0 + r1) + r0 * delta * delta + delta * delta * delta / Scalar(3);
  }
  return grad(m, s).dot(d) + Scalar(0.5) * d.dot(m.q().matrix() * d) + m.sigma() * cubic;
}

template <typename Scalar>
Scalar default_tol_grad(const CubicModel<Scalar>& m) {
  return Scalar(1e-8) * (Scalar(1) + m.c().norm());
}

template <typename Scalar>
Scalar default_tol_psd(const CubicModel<Scalar>& m) {
  return Scalar(1e-8) * (Scalar(1) + m.q().max_abs());
}

/// A point together with its multiplier sigma ||s||, objective and gradient
/// residual. The multiplier is always derived from s.
template <typename Scalar>
class StationaryPoint {
 public:
  template <typename Derived>
  static StationaryPoint at(const CubicModel<Scalar>& m, const Eigen::MatrixBase<Derived>& s) {
    StationaryPoint p;
    p.s_ = s;
    p.lambda_ = m.sigma() * p.s_.norm();
    p.objective_ = eval(m, p.s_);
    p.residual_ = grad(m, p.s_).norm();
    return p;
  }

  const VectorX<Scalar>& s() const { return s_; }
  Scalar lambda() const { return lambda_; }
  Scalar objective() const { return objective_; }
  Scalar residual() const { return residual_; }

 private:
  StationaryPoint() = default;

  VectorX<Scalar> s_;
  Scalar lambda_ = 0;
  Scalar objective_ = 0;
  Scalar residual_ = 0;
};

template <typename Scalar>
struct GlobalCertificate {
  /// Smallest eigenvalue of Q + sigma ||s|| I.
  Scalar psd_margin = 0;
  Scalar residual = 0;
  bool is_global = false;
};

/// s is a global minimizer iff it is stationary and Q + sigma ||s|| I is PSD.
template <typename Scalar, typename Derived>
GlobalCertificate<Scalar> is_global(const CubicModel<Scalar>& m, const Eigen::MatrixBase<Derived>& s,
                                    Scalar tol_grad, Scalar tol_psd) {
  detail::check_dim(m, s, "is_global");
  if (!(tol_grad > Scalar(0)) || !(tol_psd > Scalar(0)))
    throw Error(ErrorCode::InvalidArgument, "is_global: tolerances must be positive");
  GlobalCertificate<Scalar> cert;
  cert.psd_margin = m.eig().smallest() + m.sigma() * s.norm();
  cert.residual = grad(m, s).norm();
  cert.is_global = cert.residual <= tol_grad && cert.psd_margin >= -tol_psd;
  return cert;
}

template <typename Scalar, typename Derived>
GlobalCertificate<Scalar> is_global(const CubicModel<Scalar>& m, const Eigen::MatrixBase<Derived>& s) {
  return is_global(m, s, default_tol_grad(m), default_tol_psd(m));
}

using CubicModeld = CubicModel<double>;
using StationaryPointd = StationaryPoint<double>;

}  // namespace cubreg
