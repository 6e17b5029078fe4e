#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "cubreg/model.hpp"

namespace cubreg {

/// Secular reformulation of the stationarity system in the eigenbasis of Q.
///
/// With beta = -V^T c, a point s = V a is stationary with multiplier
/// lambda > 0 iff a_i = beta_i / (mu_i + lambda) and
///
///   g(lambda) = 1/lambda^2 sum_i beta_i^2 / (mu_i + lambda)^2 = 1 / sigma^2.
///
/// Only modes with |beta_i| > pole_tol contribute poles; a mode with vanishing
/// coupling drops out of g, which then extends continuously across -mu_i.
template <typename Scalar>
class SecularProblem {
 public:
  explicit SecularProblem(const CubicModel<Scalar>& m)
      : model_(m), beta_(-(m.eig().vectors.transpose() * m.c())),
        pole_tol_(Scalar(1e-10) * (Scalar(1) + m.c().norm())) {
    const auto& mu = m.eig().values;
    coupled_.resize(static_cast<std::size_t>(mu.size()));
    for (Eigen::Index i = 0; i < mu.size(); ++i) {
      using std::abs;
      coupled_[static_cast<std::size_t>(i)] = abs(beta_(i)) > pole_tol_;
      if (coupled_[static_cast<std::size_t>(i)]) poles_.push_back(-mu(i));
    }
    std::sort(poles_.begin(), poles_.end());
    std::vector<Scalar> dedup;
    for (Scalar p : poles_)
      if (dedup.empty() || p - dedup.back() > Scalar(1e-10)) dedup.push_back(p);
    poles_ = std::move(dedup);
  }

  const CubicModel<Scalar>& model() const { return model_; }
  const EigenDecomposition<Scalar>& eig() const { return model_.eig(); }
  const VectorX<Scalar>& beta() const { return beta_; }
  Scalar sigma() const { return model_.sigma(); }
  Scalar pole_tol() const { return pole_tol_; }
  bool coupled(Eigen::Index i) const { return coupled_[static_cast<std::size_t>(i)]; }
  bool any_coupled() const { return !poles_.empty(); }
  /// Sorted, deduplicated -mu_i over coupled modes.
  const std::vector<Scalar>& poles() const { return poles_; }

  /// a(lambda) restricted to coupled modes; uncoupled modes are zero.
  VectorX<Scalar> coefficients(Scalar lambda) const {
    const auto& mu = eig().values;
    VectorX<Scalar> a = VectorX<Scalar>::Zero(mu.size());
    for (Eigen::Index i = 0; i < mu.size(); ++i)
      if (coupled(i)) a(i) = beta_(i) / (mu(i) + lambda);
    return a;
  }

 private:
  CubicModel<Scalar> model_;
  VectorX<Scalar> beta_;
  Scalar pole_tol_;
  std::vector<bool> coupled_;
  std::vector<Scalar> poles_;
};

template <typename Scalar>
Scalar g_eval(const SecularProblem<Scalar>& sp, Scalar lambda) {
  using std::abs;
  if (abs(lambda) <= kSingularModeTol<Scalar>)
    throw Error(ErrorCode::PoleEvaluation, "g is undefined at lambda = 0");
  for (Scalar p : sp.poles()) {
    if (abs(lambda - p) <= kSingularModeTol<Scalar>) {
      std::ostringstream msg;
      msg << "lambda = " << lambda << " sits on the pole " << p;
      throw Error(ErrorCode::PoleEvaluation, msg.str());
    }
  }
  const auto& mu = sp.eig().values;
  Scalar sum = 0;
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    if (!sp.coupled(i)) continue;
    const Scalar t = sp.beta()(i) / (mu(i) + lambda);
    sum += t * t;
  }
  return sum / (lambda * lambda);
}

enum class RootKind {
  Regular,   ///< solves g(lambda) = 1 / sigma^2
  Boundary,  ///< lambda = -mu_i of an uncoupled negative eigenvalue (degenerate family)
};

template <typename Scalar>
struct LambdaRoot {
  Scalar lambda = 0;
  Scalar lo = 0;
  Scalar hi = 0;
  RootKind kind = RootKind::Regular;
};

namespace detail {

template <typename Scalar, typename F>
Scalar bisect(F&& f, Scalar lo, Scalar hi) {
  const Scalar eps = std::numeric_limits<Scalar>::epsilon();
  const bool lo_positive = f(lo) > Scalar(0);
  for (int it = 0; it < 400; ++it) {
    const Scalar mid = lo + (hi - lo) / Scalar(2);
    if (mid <= lo || mid >= hi) break;
    const Scalar v = f(mid);
    if (v == Scalar(0)) return mid;
    if ((v > Scalar(0)) == lo_positive)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= Scalar(2) * eps * std::max(std::abs(lo), std::abs(hi))) break;
  }
  return lo + (hi - lo) / Scalar(2);
}

template <typename Scalar, typename F>
Scalar golden_min(F&& f, Scalar a, Scalar b, Scalar tol) {
  const Scalar inv_phi = (std::sqrt(Scalar(5)) - Scalar(1)) / Scalar(2);
  Scalar x1 = b - inv_phi * (b - a);
  Scalar x2 = a + inv_phi * (b - a);
  Scalar f1 = f(x1);
  Scalar f2 = f(x2);
  for (int it = 0; it < 500 && b - a > tol; ++it) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    }
  }
  return f1 < f2 ? x1 : x2;
}

/// Moves an endpoint `edge` toward a pole/origin until g exceeds the target,
/// so the flank between it and the interior point brackets a root.
template <typename Scalar, typename G>
Scalar bracket_near(G&& g, Scalar edge, Scalar direction, Scalar target, Scalar limit_gap) {
  Scalar off = Scalar(1e-9) * (Scalar(1) + std::abs(edge));
  off = std::min(off, limit_gap / Scalar(4));
  const Scalar floor = std::max(Scalar(8) * std::numeric_limits<Scalar>::epsilon() * (Scalar(1) + std::abs(edge)),
                                Scalar(4) * kSingularModeTol<Scalar>);
  Scalar x = edge + direction * off;
  while (g(x) <= target && off > floor) {
    off /= Scalar(16);
    x = edge + direction * off;
  }
  return x;
}

template <typename Scalar>
Scalar cluster_tol(const EigenDecomposition<Scalar>& eig) {
  return Scalar(1e-9) * (Scalar(1) + std::abs(eig.smallest()));
}

}  // namespace detail

/// Every lambda > 0 with g(lambda) = 1 / sigma^2, ascending.
///
/// The positive poles cut (0, inf) into subintervals on which g is strictly
/// convex and blows up at finite ends, so each bounded piece holds at most
/// two roots (one per flank of its minimum) and the unbounded piece, where g
/// decreases to zero, exactly one.
template <typename Scalar>
std::vector<LambdaRoot<Scalar>> enumerate_lambda(const SecularProblem<Scalar>& sp) {
  std::vector<LambdaRoot<Scalar>> roots;
  if (!sp.any_coupled()) return roots;

  const Scalar target = Scalar(1) / (sp.sigma() * sp.sigma());
  auto g = [&](Scalar lambda) { return g_eval(sp, lambda); };
  auto shifted = [&](Scalar lambda) { return g(lambda) - target; };

  std::vector<Scalar> edges{Scalar(0)};
  for (Scalar p : sp.poles())
    if (p > kSingularModeTol<Scalar>) edges.push_back(p);

  for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
    const Scalar lo = edges[k];
    const Scalar hi = edges[k + 1];
    const Scalar width = hi - lo;
    const Scalar a = detail::bracket_near(g, lo, Scalar(1), target, width);
    const Scalar b = detail::bracket_near(g, hi, Scalar(-1), target, width);
    if (!(a < b)) continue;
    const Scalar lmin = detail::golden_min(g, a, b, Scalar(1e-12));
    const Scalar gmin = g(lmin);
    if (gmin > target * (Scalar(1) + Scalar(1e-10))) continue;
    if (gmin >= target * (Scalar(1) - Scalar(1e-10))) {
      roots.push_back({lmin, lo, hi, RootKind::Regular});
      continue;
    }
    if (g(a) > target) roots.push_back({detail::bisect(shifted, a, lmin), lo, hi, RootKind::Regular});
    if (g(b) > target) roots.push_back({detail::bisect(shifted, lmin, b), lo, hi, RootKind::Regular});
  }

  const Scalar lo = edges.back();
  const Scalar a = detail::bracket_near(g, lo, Scalar(1), target, Scalar(1) + lo);
  if (g(a) > target) {
    Scalar hi = std::max(Scalar(2) * a, Scalar(1));
    while (g(hi) >= target) hi *= Scalar(2);
    roots.push_back({detail::bisect(shifted, a, hi), lo, std::numeric_limits<Scalar>::infinity(),
                     RootKind::Regular});
  }
  return roots;
}

/// Stationary points carrying multiplier `root.lambda`.
///
/// A regular root gives one point. When lambda coincides with -mu_i of a
/// mode that carries no coupling, the free component along v_i is fixed (up
/// to sign) by ||s|| = lambda / sigma and both representatives are returned.
template <typename Scalar>
std::vector<StationaryPoint<Scalar>> stationary_from_lambda(const SecularProblem<Scalar>& sp,
                                                             const LambdaRoot<Scalar>& root) {
  using std::abs;
  using std::sqrt;
  const auto& eig = sp.eig();
  const auto& mu = eig.values;
  const Scalar lambda = root.lambda;
  const Scalar null_tol = root.kind == RootKind::Boundary
                              ? std::max(kSingularModeTol<Scalar>, detail::cluster_tol(eig))
                              : kSingularModeTol<Scalar>;

  VectorX<Scalar> a = VectorX<Scalar>::Zero(mu.size());
  Eigen::Index free_mode = -1;
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    const Scalar shifted = mu(i) + lambda;
    if (abs(shifted) <= null_tol) {
      if (sp.coupled(i)) {
        std::ostringstream msg;
        msg << "lambda = " << lambda << " sits on the coupled pole of mode " << i;
        throw Error(ErrorCode::NormMismatch, msg.str());
      }
      if (free_mode < 0) free_mode = i;
      continue;
    }
    if (sp.coupled(i)) a(i) = sp.beta()(i) / shifted;
  }

  const auto& v = eig.vectors;
  std::vector<StationaryPoint<Scalar>> out;
  if (free_mode < 0) {
    out.push_back(StationaryPoint<Scalar>::at(sp.model(), v * a));
    return out;
  }

  const Scalar radius = lambda / sp.sigma();
  const Scalar partial = a.norm();
  if (partial > radius + Scalar(1e-8) * (Scalar(1) + radius)) {
    std::ostringstream msg;
    msg << "||V a|| = " << partial << " exceeds lambda / sigma = " << radius;
    throw Error(ErrorCode::NormMismatch, msg.str());
  }
  const Scalar tau = sqrt(std::max(Scalar(0), radius * radius - partial * partial));
  const VectorX<Scalar> base = v * a;
  out.push_back(StationaryPoint<Scalar>::at(sp.model(), base + tau * v.col(free_mode)));
  out.push_back(StationaryPoint<Scalar>::at(sp.model(), base - tau * v.col(free_mode)));
  return out;
}

/// Number of distinct negative eigenvalues of Q, clustered at 1e-9 (1 + |mu_1|).
template <typename Scalar>
int negative_eigen_count(const EigenDecomposition<Scalar>& eig) {
  const Scalar tol = detail::cluster_tol(eig);
  int k = 0;
  Scalar last = std::numeric_limits<Scalar>::quiet_NaN();
  for (Eigen::Index i = 0; i < eig.size(); ++i) {
    const Scalar mu = eig.values(i);
    if (!(mu < Scalar(0))) break;
    if (k == 0 || mu - last > tol) ++k;
    last = mu;
  }
  return k;
}

/// Upper bound 2(k + 1) on distinct stationary multipliers and objective values.
template <typename Scalar>
int count_bound(const CubicModel<Scalar>& m) {
  return 2 * (negative_eigen_count(m.eig()) + 1);
}

/// All stationary points, ascending in lambda: s = 0 when c vanishes, one
/// point per secular root, and two representatives of every hard-case family
/// sitting at lambda = -mu_i for an uncoupled negative eigenvalue.
template <typename Scalar>
std::vector<StationaryPoint<Scalar>> enumerate_stationary(const CubicModel<Scalar>& m) {
  std::vector<StationaryPoint<Scalar>> points;
  if (m.c().norm() <= default_tol_grad(m))
    points.push_back(StationaryPoint<Scalar>::at(m, VectorX<Scalar>::Zero(m.dim())));

  const SecularProblem<Scalar> sp(m);
  for (const auto& root : enumerate_lambda(sp))
    for (auto& p : stationary_from_lambda(sp, root)) points.push_back(std::move(p));

  const auto& eig = m.eig();
  const Scalar tol = detail::cluster_tol(eig);
  Eigen::Index i = 0;
  while (i < eig.size() && eig.values(i) < Scalar(0)) {
    Eigen::Index j = i;
    bool uncoupled = true;
    while (j < eig.size() && eig.values(j) - eig.values(i) <= tol) {
      uncoupled = uncoupled && !sp.coupled(j);
      ++j;
    }
    if (uncoupled) {
      const Scalar lambda = -eig.values(i);
      const VectorX<Scalar> a = sp.coefficients(lambda);
      // Modes inside the cluster are free; their coefficients stay zero.
      VectorX<Scalar> partial = a;
      for (Eigen::Index t = i; t < j; ++t) partial(t) = 0;
      if (partial.norm() <= lambda / m.sigma() + Scalar(1e-12) * (Scalar(1) + lambda / m.sigma())) {
        LambdaRoot<Scalar> root{lambda, Scalar(0), std::numeric_limits<Scalar>::infinity(),
                                RootKind::Boundary};
        for (auto& p : stationary_from_lambda(sp, root)) points.push_back(std::move(p));
      }
    }
    i = j;
  }

  std::stable_sort(points.begin(), points.end(),
                   [](const auto& x, const auto& y) { return x.lambda() < y.lambda(); });
  return points;
}

/// Number of distinct multipliers among `points`, merging values closer than
/// tol * (1 + lambda).
template <typename Scalar>
int count_distinct_lambda(const std::vector<StationaryPoint<Scalar>>& points, Scalar tol = Scalar(1e-8)) {
  std::vector<Scalar> lambdas;
  for (const auto& p : points) lambdas.push_back(p.lambda());
  std::sort(lambdas.begin(), lambdas.end());
  int count = 0;
  Scalar last = 0;
  for (Scalar l : lambdas) {
    if (count == 0 || l - last > tol * (Scalar(1) + last)) ++count;
    last = l;
  }
  return count;
}

template <typename Scalar>
struct GlobalSolution {
  VectorX<Scalar> s_star;
  Scalar lambda_star = 0;
  Scalar objective = 0;
  GlobalCertificate<Scalar> certificate;
  bool hard_case = false;
  std::vector<std::string> trace;
};

/// Global minimizer through the rightmost secular root.
///
/// Searches lambda in (max(0, -mu_1), inf) for ||(Q + lambda I)^{-1} c|| =
/// lambda / sigma, where the left side minus the right is strictly
/// decreasing. Without a sign change the problem is in the hard case:
/// lambda* = -mu_1 and the minimum-norm solution is completed along v_1.
/// The result is certified before it is returned.
template <typename Scalar>
GlobalSolution<Scalar> global_minimize(const CubicModel<Scalar>& m) {
  using std::abs;
  using std::sqrt;
  const auto& eig = m.eig();
  const Scalar mu1 = eig.smallest();
  const Scalar sigma = m.sigma();
  const Scalar c_norm = m.c().norm();
  GlobalSolution<Scalar> sol;
  auto note = [&](const std::string& s) { sol.trace.push_back(s); };
  {
    std::ostringstream msg;
    msg << "mu_1 = " << mu1 << ", ||c|| = " << c_norm << ", sigma = " << sigma;
    note(msg.str());
  }

  auto finish = [&](VectorX<Scalar> s) {
    sol.s_star = std::move(s);
    sol.lambda_star = sigma * sol.s_star.norm();
    sol.objective = eval(m, sol.s_star);
    sol.certificate = is_global(m, sol.s_star);
    std::ostringstream msg;
    msg << "certificate: residual " << sol.certificate.residual << ", psd margin "
        << sol.certificate.psd_margin;
    note(msg.str());
    if (!sol.certificate.is_global) throw Error(ErrorCode::CertificateFailure, msg.str());
    return sol;
  };

  if (c_norm <= default_tol_grad(m) && mu1 >= Scalar(0)) {
    note("convex with vanishing linear term: s* = 0");
    return finish(VectorX<Scalar>::Zero(m.dim()));
  }

  const SecularProblem<Scalar> sp(m);
  const Scalar floor = std::max(Scalar(0), -mu1);
  auto gap = [&](Scalar lambda) { return sp.coefficients(lambda).norm() - lambda / sigma; };

  Scalar delta = std::max(Scalar(1e-8), Scalar(1e-8) * abs(mu1));
  const Scalar delta_floor = Scalar(4) * std::numeric_limits<Scalar>::epsilon() * (Scalar(1) + floor);
  while (gap(floor + delta) <= Scalar(0) && delta > delta_floor) delta /= Scalar(16);
  const Scalar lo = floor + delta;

  if (gap(lo) > Scalar(0)) {
    // lambda* <= ||Q||_2 + sqrt(sigma ||c||)
    const Scalar cap = eig.values.cwiseAbs().maxCoeff() + sqrt(sigma * c_norm);
    Scalar hi = std::max(Scalar(2) * lo, floor + Scalar(1));
    while (gap(hi) > Scalar(0)) {
      hi *= Scalar(2);
      if (hi > Scalar(4) * (cap + Scalar(1)) + Scalar(4) * lo) {
        throw Error(ErrorCode::CertificateFailure, "no sign change of the secular gap below the cap");
      }
    }
    const Scalar lambda = detail::bisect(gap, lo, hi);
    std::ostringstream msg;
    msg << "regular root lambda = " << lambda << " bracketed in [" << lo << ", " << hi << "]";
    note(msg.str());
    return finish(eig.vectors * sp.coefficients(lambda));
  }

  sol.hard_case = true;
  {
    std::ostringstream msg;
    msg << "hard case: no sign change right of " << floor << ", lambda* = -mu_1";
    note(msg.str());
  }
  PseudoSolution<Scalar> ps;
  try {
    ps = pseudo_solve_shifted(eig, floor, VectorX<Scalar>(-m.c()));
  } catch (const Error& e) {
    throw Error(ErrorCode::CertificateFailure, std::string("hard case: ") + e.what());
  }
  const Scalar radius = floor / sigma;
  const Scalar tau = sqrt(std::max(Scalar(0), radius * radius - ps.x.squaredNorm()));
  VectorX<Scalar> s = ps.x;
  if (ps.null_basis.cols() > 0) s += tau * ps.null_basis.col(0);
  return finish(std::move(s));
}

using GlobalSolutiond = GlobalSolution<double>;

}  // namespace cubreg
