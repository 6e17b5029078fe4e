#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "cubreg/model.hpp"

namespace cubreg {

template <typename Scalar>
struct LocalSolveOptions {
  /// Target residual; unset means 1e-8 (1 + ||c||).
  std::optional<Scalar> eps_grad;
  int max_iters = 5000;
  Scalar armijo_c = Scalar(1e-4);
  Scalar backtrack = Scalar(0.5);
  /// Newton steps are tried once the residual drops below this.
  Scalar newton_threshold = Scalar(1e-2);
};

template <typename Scalar>
struct LocalSolveReport {
  VectorX<Scalar> s;
  Scalar residual = 0;
  int iterations = 0;
  /// m(s0) followed by the objective after every accepted step. Entries are
  /// accumulated from stable increments, so the sequence is monotone even
  /// when steps are below the resolution of m itself.
  std::vector<Scalar> objective_trace;
  bool converged = false;
};

/// Approximate stationary point of m from s0.
///
/// Armijo-backtracked steepest descent; once the residual is below
/// `newton_threshold` and the Hessian is positive definite, a regularized
/// Newton step is tried first and kept if it passes the same Armijo test.
/// Never throws on non-convergence: the report carries converged = false and
/// the best iterate.
template <typename Scalar, typename Derived>
LocalSolveReport<Scalar> local_minimize(const CubicModel<Scalar>& m, const Eigen::MatrixBase<Derived>& s0,
                                        const LocalSolveOptions<Scalar>& opts = {}) {
  detail::check_dim(m, s0, "local_minimize");
  const Scalar eps = opts.eps_grad.value_or(default_tol_grad(m));
  if (!(eps > Scalar(0)) || !(opts.backtrack > Scalar(0) && opts.backtrack < Scalar(1)) ||
      !(opts.armijo_c > Scalar(0) && opts.armijo_c < Scalar(1)))
    throw Error(ErrorCode::InvalidArgument, "local_minimize: invalid options");

  LocalSolveReport<Scalar> rep;
  VectorX<Scalar> s = s0;
  Scalar f = eval(m, s);
  rep.objective_trace.push_back(f);
  VectorX<Scalar> g = grad(m, s);
  Scalar step = Scalar(1) / (Scalar(1) + m.q().max_abs() + m.sigma() * s.norm());

  // Tries s + t d for t = t0, t0 * backtrack, ...; returns the accepted t.
  auto armijo = [&](const VectorX<Scalar>& d, Scalar t0, int max_cuts) -> std::optional<Scalar> {
    const Scalar slope = g.dot(d);
    if (!(slope < Scalar(0))) return std::nullopt;
    Scalar t = t0;
    for (int cut = 0; cut <= max_cuts; ++cut, t *= opts.backtrack) {
      const Scalar delta = increment(m, s, VectorX<Scalar>(t * d));
      if (delta <= opts.armijo_c * t * slope && delta < Scalar(0)) {
        s += t * d;
        f += delta;
        return t;
      }
    }
    return std::nullopt;
  };

  int it = 0;
  for (; it < opts.max_iters; ++it) {
    if (g.norm() <= eps) break;

    bool moved = false;
    if (g.norm() < opts.newton_threshold) {
      const auto h_eig = sym_eigen(hess(m, s));
      if (h_eig.smallest() > Scalar(0)) {
        const Scalar eta = std::max(Scalar(0), Scalar(1e-10) - h_eig.smallest()) + Scalar(1e-12);
        const VectorX<Scalar> d = -solve_shifted(h_eig, eta, g);
        moved = armijo(d, Scalar(1), 30).has_value();
      }
    }
    if (!moved) {
      const VectorX<Scalar> d = -g;
      if (auto t = armijo(d, step, 80)) {
        step = *t * Scalar(2);
        moved = true;
      }
    }
    if (!moved) break;
    rep.objective_trace.push_back(f);
    g = grad(m, s);
  }

  rep.s = std::move(s);
  rep.residual = g.norm();
  rep.iterations = it;
  rep.converged = rep.residual <= eps;
  return rep;
}

}  // namespace cubreg
