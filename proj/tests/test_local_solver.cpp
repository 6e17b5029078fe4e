#include <gtest/gtest.h>

#include <random>

#include "cubreg/local_solver.hpp"
#include "cubreg/stationary.hpp"
#include "support.hpp"

using namespace cubreg;
using cubreg::testing::diag_model;
using cubreg::testing::random_model;

namespace {

double spectral_norm(const CubicModeld& m) {
  return Eigen::SelfAdjointEigenSolver<Mat>(m.q().matrix()).eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

TEST(LocalMinimize, ConvexConvergesToOrigin) {
  const auto m = diag_model({0, 0, 0}, {1, 1, 1}, 1);
  const auto rep = local_minimize(m, Vec((Vec(3) << 2, -1, 0.5).finished()));
  EXPECT_TRUE(rep.converged);
  EXPECT_LE(rep.s.norm(), 1e-7);
}

TEST(LocalMinimize, OneDimensional) {
  const auto m = diag_model({1}, {0}, 1);
  const auto rep = local_minimize(m, Vec::Constant(1, -0.5));
  EXPECT_TRUE(rep.converged);
  EXPECT_NEAR(rep.s(0), -1, 1e-7);
  EXPECT_LE(rep.residual, default_tol_grad(m));
}

TEST(LocalMinimize, WorkedInstanceLandsOnAnEnumeratedMultiplier) {
  const auto m = cubreg::testing::worked_instance();
  const auto rep = local_minimize(m, Vec((Vec(2) << 0.9, 0.05).finished()));
  EXPECT_TRUE(rep.converged);
  const double lambda = m.sigma() * rep.s.norm();
  EXPECT_TRUE(std::abs(lambda - 1) <= 1e-6 || std::abs(lambda - 3) <= 1e-6) << lambda;
}

TEST(LocalMinimize, RejectsInvalidOptions) {
  LocalSolveOptions<double> opts;
  opts.backtrack = 1.5;
  EXPECT_THROW(local_minimize(diag_model({1}, {0}, 1), Vec::Zero(1), opts), Error);
}

TEST(LocalMinimizeProperty, MonotoneTrace) {
  std::mt19937_64 rng(1000);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int k = 0; k < 1000; ++k) {
    const int n = 1 + k % 8;
    const auto m = random_model(rng, n, cubreg::testing::kSigmas[k % 3]);
    Vec s0(n);
    for (int i = 0; i < n; ++i) s0(i) = u(rng);
    const auto rep = local_minimize(m, s0);
    for (std::size_t i = 1; i < rep.objective_trace.size(); ++i)
      ASSERT_LE(rep.objective_trace[i], rep.objective_trace[i - 1]) << "run " << k << " step " << i;
    ASSERT_NEAR(rep.objective_trace.back(), eval(m, rep.s), 1e-8 * (1 + std::abs(eval(m, rep.s))));
  }
}

TEST(LocalMinimizeProperty, ConvergedPointsMatchEnumeration) {
  std::mt19937_64 rng(396);
  std::uniform_real_distribution<double> u(-2, 2);
  int converged = 0;
  for (int k = 0; k < 300; ++k) {
    const int n = 1 + k % 4;
    const auto m = random_model(rng, n, cubreg::testing::kSigmas[k % 3]);
    Vec s0(n);
    for (int i = 0; i < n; ++i) s0(i) = u(rng);
    const auto rep = local_minimize(m, s0);
    if (!rep.converged) continue;
    ++converged;
    const double lambda = m.sigma() * rep.s.norm();
    bool matched = false;
    for (const auto& p : enumerate_stationary(m)) matched = matched || std::abs(p.lambda() - lambda) <= 1e-5;
    ASSERT_TRUE(matched) << "run " << k << " lambda " << lambda;
  }
  EXPECT_GE(converged, 290);
}

TEST(LocalMinimizeProperty, IteratesStayInsideCoercivityRadius) {
  std::mt19937_64 rng(397);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int k = 0; k < 60; ++k) {
    const int n = 1 + k % 6;
    const auto m = random_model(rng, n, cubreg::testing::kSigmas[k % 3]);
    const double radius = 2 * (spectral_norm(m) / m.sigma() + std::sqrt(m.c().norm() / m.sigma()) + 1);
    Vec s0(n);
    for (int i = 0; i < n; ++i) s0(i) = u(rng);
    // The solver is deterministic, so a run capped at `it` iterations ends
    // on the it-th iterate.
    for (int it = 10; it <= 60; it += 5) {
      LocalSolveOptions<double> opts;
      opts.max_iters = it;
      ASSERT_LE(local_minimize(m, s0, opts).s.norm(), radius) << "run " << k << " iterate " << it;
    }
  }
}

TEST(LocalMinimizeProperty, EntrywiseRadiusCanExcludeTheGlobalMinimizer) {
  // Q = -(all ones): max entry 1, mu_min = -n.
  const int n = 4;
  const double sigma = 0.1;
  const CubicModeld m(Vec::Zero(n), Mat(-Mat::Ones(n, n)), sigma);
  const double entrywise = 2 * (m.q().max_abs() / sigma + 1);
  const auto rep = local_minimize(m, Vec::Constant(n, 0.5));
  ASSERT_TRUE(rep.converged);
  // sigma ||s*|| = -mu_min = n
  EXPECT_NEAR(rep.s.norm(), n / sigma, 1e-6);
  EXPECT_GT(rep.s.norm(), entrywise);
  EXPECT_LE(rep.s.norm(), 2 * (spectral_norm(m) / sigma + 1));
}

TEST(LocalMinimize, Deterministic) {
  std::mt19937_64 rng(5);
  const auto m = random_model(rng, 5, 1);
  const Vec s0 = Vec::Constant(5, 0.3);
  const auto a = local_minimize(m, s0);
  const auto b = local_minimize(m, s0);
  EXPECT_EQ(a.s, b.s);
  EXPECT_EQ(a.objective_trace, b.objective_trace);
}
