#include "cubreg/driver.hpp"

#include <algorithm>
#include <cmath>
#include <cctype>
#include <limits>
#include <random>
#include <sstream>

namespace cubreg {

namespace {

bool detect_hard_case(const CubicModeld& m, const Vec& s, double tol_psd) {
  const auto& eig = m.eig();
  if (eig.smallest() >= 0) return false;
  const double margin = eig.smallest() + m.sigma() * s.norm();
  const double coupling = std::abs(eig.vectors.col(0).dot(m.c()));
  return std::abs(margin) <= tol_psd && coupling <= 1e-10 * (1 + m.c().norm());
}

}  // namespace

EscapeSolveResult solve_via_escapes(const CubicModeld& m, const Vec& s0, double eps_grad, double eps_curv) {
  EscapeLoopOptions opts;
  opts.eps_grad = eps_grad;
  opts.eps_curv = eps_curv;
  return solve_via_escapes(m, s0, opts);
}

EscapeSolveResult solve_via_escapes(const CubicModeld& m, const Vec& s0, const EscapeLoopOptions& opts) {
  if (!(opts.eps_grad > 0) || opts.eps_curv < 0 || !(opts.eps_curv_max > 0) ||
      (opts.policy == CurvaturePolicy::Fixed && !(opts.eps_curv > 0)))
    throw Error(ErrorCode::InvalidArgument, "solve_via_escapes: tolerances must be positive");

  EscapeSolveResult result;
  auto& trace = result.trace;
  auto& sol = result.solution;
  const int cap = count_bound(m) + 2;
  double eps = opts.eps_grad;
  Vec s = s0;

  for (;;) {
    LocalSolveOptions<double> local = opts.local;
    local.eps_grad = eps;
    const auto rep = local_minimize(m, s, local);
    s = rep.s;
    const double tol_grad = std::max(eps, rep.residual);
    double eps2 = opts.eps_curv;
    if (opts.policy == CurvaturePolicy::ScaledByResidual)
      eps2 = std::min(std::max(eps2, 10 * tol_grad / std::max(s.norm(), 1e-8)), opts.eps_curv_max);

    EscapeOutcome<double> out;
    try {
      out = escape_approx(m, s, ApproxTolerances<double>{tol_grad, eps2});
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ThresholdNotMet) throw;
      if (trace.tightenings >= opts.max_tightenings || eps / 10 < 1e-15) {
        std::ostringstream msg;
        msg << "escape thresholds still unmet after " << trace.tightenings
            << " tightenings (eps_grad = " << eps << "): " << e.what();
        throw Error(ErrorCode::ToleranceFloor, msg.str());
      }
      eps /= 10;
      ++trace.tightenings;
      sol.trace.push_back(std::string("tightened eps_grad after ") + e.what());
      continue;
    }

    trace.steps.push_back({s, rep.residual, out.case_tag, eval(m, s)});
    if (out.case_tag == EscapeCase::NoneGlobal) {
      sol.s_star = s;
      sol.lambda_star = m.sigma() * s.norm();
      sol.objective = eval(m, s);
      sol.certificate = is_global(m, s, tol_grad, std::max(eps2, 1e-300));
      sol.hard_case = detect_hard_case(m, s, std::max(eps2, default_tol_psd(m)));
      std::ostringstream msg;
      msg << "certified after " << trace.escape_count << " escapes, psd margin "
          << sol.certificate.psd_margin;
      sol.trace.push_back(msg.str());
      return result;
    }

    ++trace.escape_count;
    sol.trace.push_back(std::string("escape ") + std::string(to_string(out.case_tag)));
    if (trace.escape_count > cap) {
      std::ostringstream msg;
      msg << trace.escape_count << " escapes exceed the bound " << cap;
      throw Error(ErrorCode::BoundExceeded, msg.str());
    }
    s = *out.s_hat;
  }
}

double gradient_check(const ObjectiveFunction& f, const Vec& probe) {
  const Vec g = f.gradient(probe);
  double worst = 0;
  for (int i = 0; i < f.n; ++i) {
    const double h = 1e-6 * (1 + std::abs(probe(i)));
    Vec plus = probe, minus = probe;
    plus(i) += h;
    minus(i) -= h;
    const double fd = (f.value(plus) - f.value(minus)) / (2 * h);
    worst = std::max(worst, std::abs(fd - g(i)) / (1 + std::abs(g(i))));
  }
  return worst;
}

void validate_objective(const ObjectiveFunction& f, const Vec& probe, double rel_tol) {
  if (f.n < 1 || probe.size() != f.n) throw Error(ErrorCode::DimensionMismatch, f.name + ": bad probe size");
  const double err = gradient_check(f, probe);
  if (err > rel_tol) {
    std::ostringstream msg;
    msg << f.name << ": gradient disagrees with finite differences (" << err << ")";
    throw Error(ErrorCode::InvalidArgument, msg.str());
  }
}

std::string_view to_string(Variant v) { return v == Variant::ARC ? "ARC" : "ARC_PLUS"; }

Variant parse_variant(std::string_view text) {
  std::string t(text);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char ch) { return std::toupper(ch); });
  if (t == "ARC") return Variant::ARC;
  if (t == "ARC_PLUS" || t == "ARC+" || t == "ARCPLUS") return Variant::ARC_PLUS;
  throw Error(ErrorCode::InvalidArgument, "unknown variant '" + std::string(text) + "'");
}

namespace {

Vec sphere_point(std::mt19937_64& rng, Eigen::Index n, double radius) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec v(n);
  do {
    for (Eigen::Index i = 0; i < n; ++i) v(i) = normal(rng);
  } while (v.norm() == 0);
  return radius * v / v.norm();
}

constexpr double kArcPlusPsdTol = 1e-6;

Vec cauchy_point(const CubicModeld& m) {
  const Vec& g = m.c();
  const double gn = g.norm();
  if (gn == 0) return Vec::Zero(g.size());
  const double ghg = g.dot(m.q().matrix() * g);
  const double s3 = m.sigma() * gn * gn * gn;
  const double alpha = (-ghg + std::sqrt(ghg * ghg + 4 * s3 * gn * gn)) / (2 * s3);
  return -alpha * g;
}

}  // namespace

OuterReport arc_plus_minimize(const ObjectiveFunction& f, const Vec& x0, Variant variant,
                              const OuterOptions& opts) {
  if (x0.size() != f.n) throw Error(ErrorCode::DimensionMismatch, f.name + ": x0 has wrong size");
  OuterReport rep;
  rep.variant = variant;
  rep.min_accepted_psd_margin = std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(opts.seed);

  Vec x = x0;
  double fx = f.value(x);
  double sigma = opts.sigma0;
  long k = 0;
  for (; k < opts.max_iters; ++k) {
    const Vec g = f.gradient(x);
    if (g.lpNorm<Eigen::Infinity>() <= opts.grad_tol) {
      rep.converged = true;
      break;
    }
    const CubicModeld m(g, SymmetricMatrix<double>::symmetrized(f.hessian(x)), sigma);
    const double radius = std::min(1.0, 1.0 / sigma);
    const Vec s0 = opts.start == SubproblemStart::Cauchy ? cauchy_point(m) : sphere_point(rng, f.n, radius);
    const double gn = g.norm();
    const double eps_sub = std::max(1e-12 * (1 + gn), 0.1 * std::min(1.0, std::sqrt(gn)) * gn);

    Vec s;
    double psd_margin = 0;
    if (variant == Variant::ARC) {
      LocalSolveOptions<double> lo;
      lo.eps_grad = eps_sub;
      s = local_minimize(m, s0, lo).s;
    } else {
      EscapeLoopOptions eo;
      eo.eps_grad = eps_sub;
      eo.eps_curv = 0;
      eo.eps_curv_max = kArcPlusPsdTol;
      eo.policy = CurvaturePolicy::ScaledByResidual;
      bool certified = false;
      try {
        auto res = solve_via_escapes(m, s0, eo);
        rep.escapes += res.trace.escape_count;
        s = res.solution.s_star;
        psd_margin = res.solution.certificate.psd_margin;
        certified = psd_margin >= -kArcPlusPsdTol;
      } catch (const Error&) {
      }
      if (!certified) {
        // Fall back to the exact secular solve.
        ++rep.global_fallbacks;
        auto gs = global_minimize(m);
        s = gs.s_star;
        psd_margin = gs.certificate.psd_margin;
      }
    }

    const double predicted = -eval(m, s);
    const Vec trial = x + s;
    const double f_trial = f.value(trial);
    const double rho = predicted > 0 ? (fx - f_trial) / predicted : -1.0;
    if (rho >= opts.eta1 && std::isfinite(f_trial)) {
      x = trial;
      fx = f_trial;
      ++rep.accepted;
      rep.f_history.push_back(fx);
      if (variant == Variant::ARC_PLUS)
        rep.min_accepted_psd_margin = std::min(rep.min_accepted_psd_margin, psd_margin);
      if (rho >= opts.eta2) sigma = std::max(sigma / 2, opts.sigma_min);
    } else {
      sigma *= 2;
    }
    rep.sigma_history.push_back(sigma);
  }

  rep.x_final = x;
  rep.f_final = fx;
  rep.grad_inf_norm = f.gradient(x).lpNorm<Eigen::Infinity>();
  rep.iterations = k;
  rep.converged = rep.grad_inf_norm <= opts.grad_tol;
  if (rep.accepted == 0 || variant == Variant::ARC) rep.min_accepted_psd_margin = 0;
  return rep;
}

}  // namespace cubreg
