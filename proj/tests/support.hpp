#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "cubreg/driver.hpp"

namespace cubreg::testing {

inline constexpr double kSigmas[] = {0.1, 1.0, 10.0};

/// c and the upper triangle of Q drawn from U[-5, 5].
inline CubicModeld random_model(std::mt19937_64& rng, int n, double sigma) {
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  Vec c(n);
  for (int i = 0; i < n; ++i) c(i) = u(rng);
  Mat q(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i <= j; ++i) q(i, j) = q(j, i) = u(rng);
  return CubicModeld(c, q, sigma);
}

/// Instance k has dimension 1 + k % max_n and sigma kSigmas[(k / max_n) % 3].
inline std::vector<CubicModeld> random_suite(int count, int max_n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<CubicModeld> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k)
    out.push_back(random_model(rng, 1 + k % max_n, kSigmas[(k / max_n) % 3]));
  return out;
}

inline CubicModeld diag_model(std::vector<double> c, std::vector<double> mu, double sigma) {
  const int n = static_cast<int>(c.size());
  Vec cv = Eigen::Map<Vec>(c.data(), n);
  Mat q = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) q(i, i) = mu[static_cast<std::size_t>(i)];
  return CubicModeld(cv, q, sigma);
}

/// c = (-2, 0), Q = diag(1, -3), sigma = 1: stationary at (1, 0) with m = -7/6
/// and along (0.5, +-sqrt(35)/2) with m = -5.
inline CubicModeld worked_instance() { return diag_model({-2, 0}, {1, -3}, 1); }

/// Structured models that drive each escape case: c = 0 (s = 0 stationary,
/// B_I), c orthogonal to the extreme eigenvector (B_III), a rotated copy of
/// the worked instance, and random Q with c = 0.
inline std::vector<CubicModeld> constructed_fixtures() {
  std::vector<CubicModeld> out;
  out.push_back(diag_model({0, 0}, {-1, 1}, 1));
  out.push_back(worked_instance());
  out.push_back(diag_model({0, 0, 0}, {-2, -1, 3}, 0.5));
  out.push_back(diag_model({-1, 0, 2}, {2, -4, 1}, 1));
  out.push_back(diag_model({0.1, 0.1}, {-2, -1}, 1));
  {
    const double t = 0.3;
    Mat r(2, 2);
    r << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
    Mat q = r * Vec((Vec(2) << 1, -3).finished()).asDiagonal() * r.transpose();
    q = (q + q.transpose()) / 2;
    out.push_back(CubicModeld(r * Vec((Vec(2) << -2, 0).finished()), q, 1));
  }
  std::mt19937_64 rng(2024);
  for (int k = 0; k < 6; ++k) {
    auto m = random_model(rng, 2 + k % 4, kSigmas[k % 3]);
    out.push_back(CubicModeld(Vec::Zero(m.dim()), m.q(), m.sigma()));
  }
  return out;
}

}  // namespace cubreg::testing
