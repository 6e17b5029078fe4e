// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cubreg/driver.hpp"
#include "cubreg/problems.hpp"
#include "support.hpp"

using namespace cubreg;
using cubreg::testing::constructed_fixtures;
using cubreg::testing::random_suite;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// 500 random models (n <= 6) followed by the constructed fixtures.
const std::vector<CubicModeld>& escape_suite() {
  static const std::vector<CubicModeld> suite = [] {
    auto s = random_suite(500, 6, 1001);
    for (auto& m : constructed_fixtures()) s.push_back(m);
    return s;
  }();
  return suite;
}

/// Independent evaluation of the model, used by the grid oracle.
double model_value(const Mat& q, const Vec& c, double sigma, const Vec& s) {
  const double r = s.norm();
  return c.dot(s) + 0.5 * s.dot(q * s) + sigma / 3 * r * r * r;
}

/// Brute-force minimum: a uniform grid on [-R, R]^n followed by a compass
/// search from the eight best grid points.
double grid_minimum(const CubicModeld& m) {
  const int n = static_cast<int>(m.dim());
  const Mat q = m.q().matrix();
  const Vec c = m.c();
  const double sigma = m.sigma();
  const double spec_radius = 1.5 * std::sqrt(c.norm() / sigma) + 2 * m.q().max_abs() / sigma;
  const double safe_radius = q.norm() / sigma + std::sqrt(c.norm() / sigma);
  const double radius = std::max(spec_radius, safe_radius);
  const int per_dim[] = {0, 20001, 1001, 121, 41};
  const int k = per_dim[n];
  const double h = 2 * radius / (k - 1);

  std::vector<std::pair<double, Vec>> best;
  Vec s(n);
  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  for (;;) {
    for (int i = 0; i < n; ++i) s(i) = -radius + h * idx[static_cast<std::size_t>(i)];
    const double v = model_value(q, c, sigma, s);
    if (best.size() < 8 || v < best.back().first) {
      best.emplace_back(v, s);
      std::sort(best.begin(), best.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
      if (best.size() > 8) best.pop_back();
    }
    int d = 0;
    while (d < n && ++idx[static_cast<std::size_t>(d)] == k) idx[static_cast<std::size_t>(d++)] = 0;
    if (d == n) break;
  }

  double overall = best.front().first;
  for (auto [v, x] : best) {
    double step = h;
    while (step > 1e-10 * (1 + x.norm())) {
      bool improved = false;
      for (int i = 0; i < n && !improved; ++i) {
        for (double sign : {1.0, -1.0}) {
          Vec y = x;
          y(i) += sign * step;
          const double w = model_value(q, c, sigma, y);
          if (w < v) {
            v = w;
            x = y;
            improved = true;
            break;
          }
        }
      }
      if (!improved) step /= 2;
    }
    overall = std::min(overall, v);
  }
  return overall;
}

Vec sphere_start(const CubicModeld& m, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Vec v(m.dim());
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = normal(rng);
  return std::min(1.0, 1.0 / m.sigma()) * v / v.norm();
}

Outcome criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  std::map<EscapeCase, int> cases;
  int checked = 0;
  int failures = 0;
  std::ostringstream first;
  for (std::size_t k = 0; k < escape_suite().size(); ++k) {
    const auto& m = escape_suite()[k];
    for (const auto& p : enumerate_stationary(m)) {
      if (is_global(m, p.s()).is_global) continue;
      ++checked;
      try {
        const auto out = escape_exact(m, p);
        const bool ok = out.case_tag != EscapeCase::NoneGlobal && out.s_hat &&
                        eval(m, *out.s_hat) < eval(m, p.s()) - 1e-12;
        if (ok) {
          ++cases[out.case_tag];
        } else if (failures++ == 0) {
          first << "model " << k << " lambda " << p.lambda() << " case " << to_string(out.case_tag);
        }
      } catch (const std::exception& e) {
        if (failures++ == 0) first << "model " << k << ": " << e.what();
      }
    }
  }
  const double secs = seconds_since(t0);
  const bool coverage = cases[EscapeCase::A] > 0 && cases[EscapeCase::B_I] > 0 && cases[EscapeCase::B_II] > 0 &&
                        cases[EscapeCase::B_III] > 0;
  std::ostringstream d;
  d << checked << " non-global points, " << failures << " failures; A=" << cases[EscapeCase::A]
    << " B_I=" << cases[EscapeCase::B_I] << " B_II=" << cases[EscapeCase::B_II]
    << " B_III=" << cases[EscapeCase::B_III] << "; " << secs << " s";
  if (failures) d << "; first: " << first.str();
  return {failures == 0 && coverage && secs < 60, d.str()};
}

Outcome criterion2() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto suite = random_suite(200, 4, 2002);
  int failures = 0;
  double worst_gap = -std::numeric_limits<double>::infinity();
  std::ostringstream first;
  for (std::size_t k = 0; k < suite.size(); ++k) {
    const auto& m = suite[k];
    try {
      const auto sol = global_minimize(m);
      const double oracle = grid_minimum(m);
      const double obj = eval(m, sol.s_star);
      worst_gap = std::max(worst_gap, obj - oracle);
      const bool ok = obj <= oracle + 1e-3 && sol.certificate.residual <= 1e-7 * (1 + m.c().norm()) &&
                      sol.certificate.psd_margin >= -1e-8 * (1 + m.q().max_abs());
      if (!ok && failures++ == 0)
        first << "model " << k << ": objective " << obj << " oracle " << oracle << " residual "
              << sol.certificate.residual << " margin " << sol.certificate.psd_margin;
    } catch (const std::exception& e) {
      if (failures++ == 0) first << "model " << k << ": " << e.what();
    }
  }
  const double secs = seconds_since(t0);
  std::ostringstream d;
  d << suite.size() << " models, " << failures << " failures, max(objective - oracle) = " << worst_gap << "; "
    << secs << " s";
  if (failures) d << "; first: " << first.str();
  return {failures == 0 && secs < 120, d.str()};
}

Outcome criterion3() {
  int violations = 0;
  int max_distinct = 0;
  for (const auto& m : escape_suite()) {
    const int distinct = count_distinct_lambda(enumerate_stationary(m));
    if (distinct > count_bound(m)) ++violations;
    max_distinct = std::max(max_distinct, distinct);
  }
  std::ostringstream d;
  d << escape_suite().size() << " models, " << violations << " violations, max distinct lambda " << max_distinct;
  return {violations == 0 && max_distinct >= 4, d.str()};
}

Outcome criterion4() {
  int pairs = 0;
  int violations = 0;
  for (const auto& m : escape_suite()) {
    const auto pts = enumerate_stationary(m);
    for (std::size_t i = 0; i < pts.size(); ++i)
      for (std::size_t j = i + 1; j < pts.size(); ++j) {
        if (std::abs(pts[i].lambda() - pts[j].lambda()) > 1e-8) continue;
        ++pairs;
        if (std::abs(pts[i].objective() - pts[j].objective()) > 1e-7 * (1 + std::abs(pts[i].objective())))
          ++violations;
      }
  }
  const auto pts = enumerate_stationary(cubreg::testing::worked_instance());
  int at1 = 0;
  int at3 = 0;
  for (const auto& p : pts) {
    if (std::abs(p.lambda() - 1) < 1e-9 && std::abs(p.objective() + 7.0 / 6.0) < 1e-10) ++at1;
    if (std::abs(p.lambda() - 3) < 1e-9 && std::abs(p.objective() + 5.0) < 1e-10) ++at3;
  }
  std::ostringstream d;
  d << pairs << " equal-lambda pairs, " << violations << " violations; worked instance: " << at1
    << " point(s) at lambda 1 with m = -7/6, " << at3 << " at lambda 3 with m = -5 (of " << pts.size() << ")";
  return {violations == 0 && at1 == 1 && at3 == 2 && pts.size() == 3, d.str()};
}

Outcome criterion5() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto suite = random_suite(300, 6, 5005);
  std::mt19937_64 rng(55);
  int failures = 0;
  int max_escapes = 0;
  std::ostringstream first;
  for (std::size_t k = 0; k < suite.size(); ++k) {
    const auto& m = suite[k];
    try {
      const auto ref = global_minimize(m);
      EscapeLoopOptions opts;
      opts.policy = CurvaturePolicy::ScaledByResidual;
      const auto res = solve_via_escapes(m, sphere_start(m, rng), opts);
      max_escapes = std::max(max_escapes, res.trace.escape_count);
      const bool ok = std::abs(res.solution.objective - ref.objective) <= 1e-6 &&
                      res.trace.escape_count <= count_bound(m) + 2;
      if (!ok && failures++ == 0)
        first << "model " << k << ": escapes " << res.solution.objective << " secular " << ref.objective;
    } catch (const std::exception& e) {
      if (failures++ == 0) first << "model " << k << ": " << e.what();
    }
  }
  std::ostringstream d;
  d << suite.size() << " models, " << failures << " failures, max escapes " << max_escapes << "; "
    << seconds_since(t0) << " s";
  if (failures) d << "; first: " << first.str();
  return {failures == 0, d.str()};
}

Outcome criterion6() {
  int checked = 0;
  int failures = 0;
  std::ostringstream first;
  for (std::size_t k = 0; k < escape_suite().size(); ++k) {
    const auto& m = escape_suite()[k];
    for (const auto& p : enumerate_stationary(m)) {
      ++checked;
      try {
        const auto exact = escape_exact(m, p);
        const auto approx = escape_approx(m, p.s(), ApproxTolerances<double>{p.residual(), default_tol_psd(m)});
        bool ok = exact.case_tag == approx.case_tag && exact.s_hat.has_value() == approx.s_hat.has_value();
        if (ok && exact.s_hat) ok = (*exact.s_hat - *approx.s_hat).norm() <= 1e-12 * (1 + exact.s_hat->norm());
        if (!ok && failures++ == 0)
          first << "model " << k << " lambda " << p.lambda() << ": exact " << to_string(exact.case_tag)
                << " approx " << to_string(approx.case_tag);
      } catch (const std::exception& e) {
        if (failures++ == 0) first << "model " << k << " lambda " << p.lambda() << ": " << e.what();
      }
    }
  }
  std::ostringstream d;
  d << checked << " stationary points, " << failures << " mismatches";
  if (failures) d << "; first: " << first.str();
  return {failures == 0, d.str()};
}

Outcome criterion7() {
  std::mt19937_64 rng(7007);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  double worst_grad = 0;
  double worst_hess = 0;
  for (int k = 0; k < 100; ++k) {
    const int n = 1 + k % 8;
    const auto m = cubreg::testing::random_model(rng, n, cubreg::testing::kSigmas[k % 3]);
    Vec s(n);
    for (int i = 0; i < n; ++i) s(i) = u(rng);
    const double h = 1e-5 * (1 + s.norm());
    const Vec g = grad(m, s);
    Vec fd(n);
    for (int i = 0; i < n; ++i) {
      Vec e = Vec::Zero(n);
      e(i) = h;
      fd(i) = (eval(m, Vec(s + e)) - eval(m, Vec(s - e))) / (2 * h);
    }
    worst_grad = std::max(worst_grad, (fd - g).norm() / g.norm());
    if (s.norm() < 1e-6) continue;
    Vec dir(n);
    for (int i = 0; i < n; ++i) dir(i) = u(rng);
    dir.normalize();
    const Vec hd = hess(m, s).matrix() * dir;
    const Vec fd_h = (grad(m, Vec(s + h * dir)) - grad(m, Vec(s - h * dir))) / (2 * h);
    worst_hess = std::max(worst_hess, (fd_h - hd).norm() / hd.norm());
  }
  std::ostringstream d;
  d << "100 (m, s) pairs; worst relative gradient error " << worst_grad << ", Hessian-vector " << worst_hess;
  return {worst_grad <= 1e-5 && worst_hess <= 1e-4, d.str()};
}

Outcome criterion8() {
  const auto t0 = std::chrono::steady_clock::now();
  std::ostringstream d;
  bool rosen_ok = true;
  const auto rosen = builtin_problem("rosenbrock2");
  for (Variant v : {Variant::ARC, Variant::ARC_PLUS}) {
    const auto rep = arc_plus_minimize(rosen, rosen.x0, v);
    rosen_ok = rosen_ok && rep.converged && rep.grad_inf_norm <= 1e-5 && rep.iterations <= 100000;
    d << "rosenbrock2 " << to_string(v) << ": " << rep.iterations << " iterations, |g|_inf " << rep.grad_inf_norm
      << "; ";
  }
  int cells = 0;
  int plus_wins = 0;
  int strict = 0;
  int ties = 0;
  for (const auto& name : nonconvex_suite_names()) {
    const auto f = builtin_problem(name);
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      OuterOptions opts;
      opts.seed = seed;
      const Vec x0 = seeded_start(f, seed);
      auto iters = [&](Variant v) {
        try {
          const auto rep = arc_plus_minimize(f, x0, v, opts);
          return rep.converged ? static_cast<double>(rep.iterations) : std::numeric_limits<double>::infinity();
        } catch (const std::exception&) {
          return std::numeric_limits<double>::infinity();
        }
      };
      const double arc = iters(Variant::ARC);
      const double plus = iters(Variant::ARC_PLUS);
      ++cells;
      if (plus <= arc && std::isfinite(plus)) ++plus_wins;
      if (plus < arc) ++strict;
      if (plus == arc) ++ties;
    }
  }
  d << "nonconvex suite: ARC_PLUS <= ARC on " << plus_wins << " of " << cells << " cells (" << strict
    << " fewer, " << ties << " equal, " << cells - plus_wins << " more or failed); " << seconds_since(t0) << " s";
  return {rosen_ok && 2 * plus_wins > cells, d.str()};
}

Outcome criterion9() {
  const auto suite = random_suite(50, 6, 9009);
  long samples = 0;
  long violations = 0;
  for (const auto& m : suite) {
    const SecularProblem<double> sp(m);
    const auto& mu = m.eig().values;
    const Vec beta = -(m.eig().vectors.transpose() * m.c());
    auto g = [&](double lambda) {
      double sum = 0;
      for (Eigen::Index i = 0; i < mu.size(); ++i) {
        if (!sp.coupled(i)) continue;
        const double t = beta(i) / (mu(i) + lambda);
        sum += t * t;
      }
      return sum / (lambda * lambda);
    };
    std::vector<double> edges{0.0};
    for (double p : sp.poles())
      if (p > 0) edges.push_back(p);
    const double last = edges.back();
    edges.push_back(last + std::max(10.0, 10 * last));
    for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
      const double lo = edges[e];
      const double hi = edges[e + 1];
      for (int j = 0; j < 100; ++j) {
        const double lambda = lo + (hi - lo) * (j + 0.5) / 100;
        const double h = 1e-3 * std::min(lambda - lo, hi - lambda);
        const double second = g(lambda + h) - 2 * g(lambda) + g(lambda - h);
        ++samples;
        if (!(second > 0)) ++violations;
      }
    }
  }
  std::ostringstream d;
  d << samples << " interior samples over 50 models, " << violations << " non-positive second differences";
  return {violations == 0 && samples > 0, d.str()};
}

Outcome criterion10() {
  const std::string cmd = std::string("bash '") + CUBREG_E2E_SCRIPT + "' '" + CUBREG_CLI_PATH + "'";
  const int rc = std::system(cmd.c_str());
  std::ostringstream d;
  d << "end-to-end shell test exit status " << rc;
  return {rc == 0, d.str()};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"escape decrease and case coverage", criterion1},
      {"global optimality against grid oracle", criterion2},
      {"stationary multiplier count bound", criterion3},
      {"equal multipliers give equal objectives", criterion4},
      {"escape loop matches global solver", criterion5},
      {"approximate escape coincides with exact", criterion6},
      {"derivative correctness", criterion7},
      {"outer optimizer sanity", criterion8},
      {"secular function convexity", criterion9},
      {"command-line contract", criterion10},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int number = static_cast<int>(i) + 1;
    if (!selected.empty() && std::find(selected.begin(), selected.end(), number) == selected.end()) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << "criterion " << number << " [" << (o.pass ? "PASS" : "FAIL") << "] " << criteria[i].first << ": "
              << o.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
