#pragma once

#include <cmath>
#include <optional>
#include <sstream>
#include <string_view>
#include <type_traits>

#include "cubreg/model.hpp"

namespace cubreg {

enum class EscapeCase { A, B_I, B_II, B_III, NoneGlobal };

constexpr std::string_view to_string(EscapeCase c) {
  switch (c) {
    case EscapeCase::A: return "A";
    case EscapeCase::B_I: return "B_I";
    case EscapeCase::B_II: return "B_II";
    case EscapeCase::B_III: return "B_III";
    case EscapeCase::NoneGlobal: return "NONE_GLOBAL";
  }
  return "?";
}

template <typename Scalar>
struct EscapeOutcome {
  EscapeCase case_tag = EscapeCase::NoneGlobal;
  std::optional<VectorX<Scalar>> s_hat;
  VectorX<Scalar> direction;  ///< d, cases B_*
  Scalar alpha = 0;           ///< cases B_I and B_III
  VectorX<Scalar> z;          ///< case B_III
  Scalar decrease = 0;        ///< m(s_bar) - m(s_hat)
};

template <typename Scalar>
struct ApproxTolerances {
  Scalar eps_grad = 0;  ///< residual the caller certifies at s_bar
  Scalar eps_curv = 0;  ///< required curvature margin epsilon_2
};

template <typename Scalar>
struct CurvatureDirection {
  VectorX<Scalar> d;  ///< unit eigenvector for the smallest eigenvalue of Q + sigma ||s|| I
  Scalar curv = 0;    ///< that eigenvalue
};

/// Reflection tolerance: |s^T d| <= kOrthTol ||s|| ||d|| counts as orthogonal.
template <typename Scalar>
constexpr Scalar kOrthTol = Scalar(1e-10);

template <typename Scalar, typename Derived>
CurvatureDirection<Scalar> negative_curvature_direction(const CubicModel<Scalar>& m,
                                                        const Eigen::MatrixBase<Derived>& s_bar) {
  detail::check_dim(m, s_bar, "negative_curvature_direction");
  const auto& eig = m.eig();
  return {eig.vectors.col(0), eig.smallest() + m.sigma() * s_bar.norm()};
}

/// Smallest alpha beyond which z = s + alpha d has negative curvature with
/// respect to Q + sigma ||s|| I, for stationary s with s^T d = 0.
template <typename Scalar, typename DerivedS, typename DerivedD>
Scalar alpha_threshold_biii(const CubicModel<Scalar>& m, const Eigen::MatrixBase<DerivedS>& s_bar,
                            const Eigen::MatrixBase<DerivedD>& d) {
  using std::sqrt;
  detail::check_dim(m, s_bar, "alpha_threshold_biii");
  detail::check_dim(m, d, "alpha_threshold_biii");
  const Scalar dhd = d.dot(m.q().matrix() * d) + m.sigma() * s_bar.norm() * d.squaredNorm();
  if (!(dhd < Scalar(0))) {
    std::ostringstream msg;
    msg << "d^T (Q + sigma ||s|| I) d = " << dhd << " is not negative";
    throw Error(ErrorCode::NonNegativeCurvature, msg.str());
  }
  const Scalar cd = m.c().dot(d);
  const Scalar cs = m.c().dot(s_bar);
  const Scalar disc = std::max(Scalar(0), cd * cd + cs * dhd);
  return (cd - sqrt(disc)) / dhd;
}

namespace detail {

enum class EscapeMode { Exact, Approx };

template <typename Scalar>
VectorX<Scalar> reflect(const VectorX<Scalar>& s, const VectorX<Scalar>& axis) {
  return s - (Scalar(2) * s.dot(axis) / axis.squaredNorm()) * axis;
}

/// Shared body of the exact and approximate escapes. In exact mode every
/// epsilon test is skipped; in approximate mode each sub-case checks its
/// threshold and the final decrease is verified. Both modes make identical
/// sign choices, so exactly stationary input gives identical output.
template <typename Scalar>
EscapeOutcome<Scalar> escape_core(const CubicModel<Scalar>& m, const VectorX<Scalar>& s_bar,
                                  Scalar curv_tol, EscapeMode mode,
                                  const std::optional<VectorX<Scalar>>& forced_d) {
  using std::abs;
  EscapeOutcome<Scalar> out;
  const VectorX<Scalar> g = grad(m, s_bar);
  const Scalar s_norm = s_bar.norm();
  const Scalar cs = m.c().dot(s_bar);

  auto finish = [&](EscapeCase tag, VectorX<Scalar> s_hat) {
    out.case_tag = tag;
    out.decrease = -increment(m, s_bar, VectorX<Scalar>(s_hat - s_bar));
    out.s_hat = std::move(s_hat);
    if (mode == EscapeMode::Approx && !(out.decrease > Scalar(0))) {
      std::ostringstream msg;
      msg << "case " << to_string(tag) << " did not decrease the model (" << out.decrease << ")";
      throw Error(ErrorCode::ThresholdNotMet, msg.str());
    }
    return out;
  };

  if (cs > Scalar(1e-12) * m.c().norm() * s_norm) return finish(EscapeCase::A, VectorX<Scalar>(-s_bar));

  VectorX<Scalar> d;
  Scalar curv;
  if (forced_d) {
    d = *forced_d;
    if (d.size() != m.dim()) throw Error(ErrorCode::DimensionMismatch, "escape: direction size");
    curv = (d.dot(m.q().matrix() * d) + m.sigma() * s_norm * d.squaredNorm()) / d.squaredNorm();
    if (!(curv < Scalar(0))) {
      std::ostringstream msg;
      msg << "supplied direction has curvature " << curv;
      throw Error(ErrorCode::NonNegativeCurvature, msg.str());
    }
  } else {
    auto nc = negative_curvature_direction(m, s_bar);
    d = std::move(nc.d);
    curv = nc.curv;
  }
  if (curv >= -curv_tol) return out;

  const Scalar d_norm = d.norm();
  if (s_norm == Scalar(0)) {
    if (m.c().dot(d) > Scalar(0)) d = -d;
    out.direction = d;
    out.alpha = Scalar(-0.75) * d.dot(m.q().matrix() * d) / (m.sigma() * d_norm * d_norm * d_norm);
    return finish(EscapeCase::B_I, VectorX<Scalar>(out.alpha * d));
  }

  const Scalar sd = s_bar.dot(d);
  if (abs(sd) > kOrthTol<Scalar> * s_norm * d_norm) {
    out.direction = d;
    if (mode == EscapeMode::Approx) {
      const Scalar gd = g.dot(d);
      const Scalar step = Scalar(2) * sd / (d_norm * d_norm);
      const bool plain = curv_tol >= abs(gd / sd);
      const bool strengthened = Scalar(0.5) * step * step * curv * d_norm * d_norm - step * gd < Scalar(0);
      if (!plain && !strengthened) {
        std::ostringstream msg;
        msg << "b-(ii): eps_2 = " << curv_tol << " < |grad^T d / s^T d| = " << abs(gd / sd);
        throw Error(ErrorCode::ThresholdNotMet, msg.str());
      }
    }
    return finish(EscapeCase::B_II, reflect(s_bar, d));
  }

  if (g.dot(d) < Scalar(0)) d = -d;
  out.direction = d;
  if (mode == EscapeMode::Approx) {
    const Scalar needed = abs(g.dot(s_bar)) / (s_norm * s_norm);
    if (!(curv_tol > needed)) {
      std::ostringstream msg;
      msg << "b-(iii): eps_2 = " << curv_tol << " <= |grad^T s| / ||s||^2 = " << needed;
      throw Error(ErrorCode::ThresholdNotMet, msg.str());
    }
  }
  const Scalar alpha_bar = alpha_threshold_biii(m, s_bar, d);
  Scalar alpha = Scalar(2) * std::max(alpha_bar, s_norm / d_norm);
  if (mode == EscapeMode::Exact) {
    out.alpha = alpha;
    out.z = s_bar + alpha * d;
    return finish(EscapeCase::B_III, reflect(s_bar, out.z));
  }

  MatrixX<Scalar> shifted = m.q().matrix();
  shifted.diagonal().array() += m.sigma() * s_norm;
  for (int doubling = 0; doubling <= 60; ++doubling, alpha *= Scalar(2)) {
    const VectorX<Scalar> z = s_bar + alpha * d;
    if (!(z.dot(shifted * z) < -curv_tol * z.squaredNorm())) continue;
    const VectorX<Scalar> s_hat = reflect(s_bar, z);
    if (!(increment(m, s_bar, VectorX<Scalar>(s_hat - s_bar)) < Scalar(0))) continue;
    out.alpha = alpha;
    out.z = z;
    return finish(EscapeCase::B_III, s_hat);
  }
  throw Error(ErrorCode::ThresholdNotMet, "b-(iii): no alpha within 60 doublings gives a decrease");
}

}  // namespace detail

/// Closed-form descent from an exactly stationary point.
///
/// Case A flips the sign of s when c^T s > 0. Otherwise d is the extreme
/// eigenvector of Q + sigma ||s|| I; if its curvature is non-negative the
/// point is a global minimizer (NONE_GLOBAL). Else: B_I steps along d from
/// s = 0, B_II reflects s through the hyperplane orthogonal to d, and B_III
/// (s orthogonal to d) reflects through z = s + alpha d instead.
template <typename Scalar>
EscapeOutcome<Scalar> escape_exact(const CubicModel<Scalar>& m, const StationaryPoint<Scalar>& s_bar,
                                   const std::optional<VectorX<std::type_identity_t<Scalar>>>& direction = std::nullopt) {
  detail::check_dim(m, s_bar.s(), "escape_exact");
  const Scalar recomputed = grad(m, s_bar.s()).norm();
  if (recomputed > default_tol_grad(m)) {
    std::ostringstream msg;
    msg << "residual " << recomputed << " exceeds " << default_tol_grad(m);
    throw Error(ErrorCode::NotStationary, msg.str());
  }
  return detail::escape_core(m, s_bar.s(), default_tol_psd(m), detail::EscapeMode::Exact, direction);
}

/// Escape from an approximately stationary point (||grad m(s)|| <= eps_grad).
/// Throws ThresholdNotMet when the curvature is negative but eps_curv is too
/// small for the applicable sub-case; the caller should tighten the local solve.
template <typename Scalar, typename Derived>
EscapeOutcome<Scalar> escape_approx(const CubicModel<Scalar>& m, const Eigen::MatrixBase<Derived>& s_bar,
                                    const ApproxTolerances<Scalar>& tol,
                                    const std::optional<VectorX<std::type_identity_t<Scalar>>>& direction = std::nullopt) {
  detail::check_dim(m, s_bar, "escape_approx");
  if (tol.eps_grad < Scalar(0) || tol.eps_curv < Scalar(0))
    throw Error(ErrorCode::InvalidArgument, "escape_approx: tolerances must be non-negative");
  const VectorX<Scalar> s = s_bar;
  const Scalar residual = grad(m, s).norm();
  if (residual > tol.eps_grad) {
    std::ostringstream msg;
    msg << "residual " << residual << " exceeds eps_grad " << tol.eps_grad;
    throw Error(ErrorCode::NotStationary, msg.str());
  }
  return detail::escape_core(m, s, tol.eps_curv, detail::EscapeMode::Approx, direction);
}

}  // namespace cubreg
