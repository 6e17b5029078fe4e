#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "cubreg/escape.hpp"
#include "cubreg/local_solver.hpp"
#include "cubreg/stationary.hpp"

namespace cubreg {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class CurvaturePolicy {
  Fixed,             ///< epsilon_2 = eps_curv throughout
  ScaledByResidual,  ///< epsilon_2 = max(eps_curv, 10 eps_grad / max(||s||, 1e-8)), clamped to eps_curv_max
};

struct EscapeLoopOptions {
  double eps_grad = 1e-8;
  double eps_curv = 1e-8;
  double eps_curv_max = std::numeric_limits<double>::infinity();
  CurvaturePolicy policy = CurvaturePolicy::Fixed;
  int max_tightenings = 6;
  LocalSolveOptions<double> local;
};

struct SubproblemStep {
  Vec s;
  double residual = 0;
  EscapeCase escape = EscapeCase::NoneGlobal;
  double objective = 0;
};

struct SubproblemTrace {
  std::vector<SubproblemStep> steps;
  int escape_count = 0;
  int tightenings = 0;
};

struct EscapeSolveResult {
  GlobalSolutiond solution;
  SubproblemTrace trace;
};

/// Local solve, escape, repeat. Each escape strictly lowers the model and
/// stationary objective values are finitely many, so the loop ends at a
/// certified global minimizer. Throws BoundExceeded past count_bound(m) + 2
/// escapes and ToleranceFloor when repeated tightening does not help.
EscapeSolveResult solve_via_escapes(const CubicModeld& m, const Vec& s0, const EscapeLoopOptions& opts);
EscapeSolveResult solve_via_escapes(const CubicModeld& m, const Vec& s0, double eps_grad, double eps_curv);

struct ObjectiveFunction {
  std::string name;
  int n = 0;
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;
  std::function<Mat(const Vec&)> hessian;
  Vec x0;
};

/// Compares the gradient with central differences of the value at `probe`.
/// Returns the worst relative mismatch.
double gradient_check(const ObjectiveFunction& f, const Vec& probe);

/// Throws InvalidArgument when gradient_check exceeds rel_tol.
void validate_objective(const ObjectiveFunction& f, const Vec& probe, double rel_tol = 1e-4);

enum class Variant { ARC, ARC_PLUS };
std::string_view to_string(Variant v);
Variant parse_variant(std::string_view text);

enum class SubproblemStart { RandomSphere, Cauchy };

struct OuterOptions {
  double grad_tol = 1e-5;
  long max_iters = 100000;
  double sigma0 = 1.0;
  double eta1 = 0.1;
  double eta2 = 0.9;
  double sigma_min = 1e-8;
  std::uint64_t seed = 0;
  SubproblemStart start = SubproblemStart::RandomSphere;
};

struct OuterReport {
  Vec x_final;
  double f_final = 0;
  double grad_inf_norm = 0;
  long iterations = 0;
  long accepted = 0;
  std::vector<double> sigma_history;
  Variant variant = Variant::ARC;
  bool converged = false;
  int escapes = 0;
  /// ARC_PLUS subproblems handed to global_minimize because the escape loop
  /// did not certify.
  int global_fallbacks = 0;
  /// Smallest psd margin over accepted ARC_PLUS subproblem solutions.
  double min_accepted_psd_margin = 0;
  /// f after each accepted step.
  std::vector<double> f_history;
};

/// Adaptive cubic regularization. ARC minimizes each cubic model locally
/// from a seeded random start; ARC_PLUS runs the escape loop from the same
/// start so every step is a global minimizer of its model.
OuterReport arc_plus_minimize(const ObjectiveFunction& f, const Vec& x0, Variant variant,
                              const OuterOptions& opts = {});

}  // namespace cubreg
