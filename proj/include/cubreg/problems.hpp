#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cubreg/driver.hpp"

namespace cubreg {

/// Registered analytic test functions.
///
///   sphere2           1/2 ||x||^2
///   quadratic4        convex quadratic with condition number 100
///   rosenbrock2       100 (x2 - x1^2)^2 + (1 - x1)^2
///   rosenbrock10      chained Rosenbrock, n = 10
///   coupled_quartic6  sum x_i^4 / 4 - 1/2 x^T A x, A tridiagonal and PSD (nonconvex at 0)
///   rosen_concave6    chained Rosenbrock minus a concave rank-one coupling, quartic guard
///   cubic_model6      fixed indefinite cubic model used as an objective
std::vector<std::string> builtin_names();
std::vector<std::string> nonconvex_suite_names();
ObjectiveFunction builtin_problem(const std::string& name);

/// Cubic model m(x) = c^T x + 1/2 x^T Q x + sigma/3 ||x||^3 as an objective.
ObjectiveFunction cubic_model_objective(const CubicModeld& m, std::string name);

/// x0 perturbed by a seeded N(0, 0.25^2) draw per coordinate.
Vec seeded_start(const ObjectiveFunction& f, std::uint64_t seed);

}  // namespace cubreg
