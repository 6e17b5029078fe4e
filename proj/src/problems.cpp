#include "cubreg/problems.hpp"

#include <cmath>
#include <random>

namespace cubreg {

namespace {

ObjectiveFunction sphere(int n, Vec x0) {
  ObjectiveFunction f;
  f.name = "sphere" + std::to_string(n);
  f.n = n;
  f.value = [](const Vec& x) { return 0.5 * x.squaredNorm(); };
  f.gradient = [](const Vec& x) { return Vec(x); };
  f.hessian = [n](const Vec&) { return Mat(Mat::Identity(n, n)); };
  f.x0 = std::move(x0);
  return f;
}

ObjectiveFunction quadratic4() {
  Vec diag(4);
  diag << 1, 10, 50, 100;
  ObjectiveFunction f;
  f.name = "quadratic4";
  f.n = 4;
  f.value = [diag](const Vec& x) { return 0.5 * x.dot(diag.cwiseProduct(x)); };
  f.gradient = [diag](const Vec& x) { return Vec(diag.cwiseProduct(x)); };
  f.hessian = [diag](const Vec&) { return Mat(diag.asDiagonal()); };
  f.x0 = Vec::Constant(4, 1.0);
  return f;
}

double rosen_value(const Vec& x) {
  double v = 0;
  for (Eigen::Index i = 0; i + 1 < x.size(); ++i) {
    const double a = x(i + 1) - x(i) * x(i);
    const double b = 1 - x(i);
    v += 100 * a * a + b * b;
  }
  return v;
}

Vec rosen_gradient(const Vec& x) {
  Vec g = Vec::Zero(x.size());
  for (Eigen::Index i = 0; i + 1 < x.size(); ++i) {
    const double a = x(i + 1) - x(i) * x(i);
    g(i) += -400 * x(i) * a - 2 * (1 - x(i));
    g(i + 1) += 200 * a;
  }
  return g;
}

Mat rosen_hessian(const Vec& x) {
  Mat h = Mat::Zero(x.size(), x.size());
  for (Eigen::Index i = 0; i + 1 < x.size(); ++i) {
    h(i, i) += 1200 * x(i) * x(i) - 400 * x(i + 1) + 2;
    h(i, i + 1) += -400 * x(i);
    h(i + 1, i) += -400 * x(i);
    h(i + 1, i + 1) += 200;
  }
  return h;
}

ObjectiveFunction rosenbrock(int n) {
  ObjectiveFunction f;
  f.name = "rosenbrock" + std::to_string(n);
  f.n = n;
  f.value = rosen_value;
  f.gradient = rosen_gradient;
  f.hessian = rosen_hessian;
  f.x0.resize(n);
  for (int i = 0; i < n; ++i) f.x0(i) = i % 2 == 0 ? -1.2 : 1.0;
  return f;
}

Mat coupling_matrix(int n) {
  Mat a = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    a(i, i) = 1.0;
    if (i + 1 < n) a(i, i + 1) = a(i + 1, i) = 0.5;
  }
  return a;
}

ObjectiveFunction coupled_quartic(int n) {
  const Mat a = coupling_matrix(n);
  ObjectiveFunction f;
  f.name = "coupled_quartic" + std::to_string(n);
  f.n = n;
  f.value = [a](const Vec& x) { return 0.25 * x.array().pow(4).sum() - 0.5 * x.dot(a * x) + 0.1 * x.sum(); };
  f.gradient = [a](const Vec& x) {
    return Vec(x.array().cube().matrix() - a * x + Vec::Constant(x.size(), 0.1));
  };
  f.hessian = [a](const Vec& x) { return Mat(Mat(3 * x.array().square().matrix().asDiagonal()) - a); };
  f.x0 = Vec::Constant(n, 0.05);
  return f;
}

ObjectiveFunction rosen_concave(int n) {
  static constexpr double kCoupling = 2.0;
  static constexpr double kGuard = 0.5;
  ObjectiveFunction f;
  f.name = "rosen_concave" + std::to_string(n);
  f.n = n;
  f.value = [](const Vec& x) {
    const double sum = x.sum();
    return rosen_value(x) - 0.5 * kCoupling * sum * sum + kGuard * x.array().pow(4).sum();
  };
  f.gradient = [](const Vec& x) {
    return Vec(rosen_gradient(x) - Vec::Constant(x.size(), kCoupling * x.sum()) +
               4 * kGuard * x.array().cube().matrix());
  };
  f.hessian = [](const Vec& x) {
    Mat h = rosen_hessian(x) - Mat::Constant(x.size(), x.size(), kCoupling);
    h.diagonal() += 12 * kGuard * x.array().square().matrix();
    return h;
  };
  f.x0 = Vec::Zero(n);
  return f;
}

CubicModeld fixed_cubic6() {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  Vec c(6);
  Mat q(6, 6);
  for (int i = 0; i < 6; ++i) c(i) = u(rng);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) q(i, j) = u(rng);
  return {c, SymmetricMatrix<double>::symmetrized(q), 1.0};
}

}  // namespace

ObjectiveFunction cubic_model_objective(const CubicModeld& m, std::string name) {
  ObjectiveFunction f;
  f.name = std::move(name);
  f.n = static_cast<int>(m.dim());
  f.value = [m](const Vec& x) { return eval(m, x); };
  f.gradient = [m](const Vec& x) { return grad(m, x); };
  f.hessian = [m](const Vec& x) { return hess(m, x).matrix(); };
  f.x0 = Vec::Zero(m.dim());
  return f;
}

std::vector<std::string> builtin_names() {
  return {"sphere2",          "quadratic4",     "rosenbrock2", "rosenbrock10",
          "coupled_quartic6", "rosen_concave6", "cubic_model6"};
}

std::vector<std::string> nonconvex_suite_names() {
  return {"coupled_quartic6", "rosen_concave6", "cubic_model6"};
}

ObjectiveFunction builtin_problem(const std::string& name) {
  if (name == "sphere2") {
    Vec x0(2);
    x0 << 3, -4;
    return sphere(2, x0);
  }
  if (name == "quadratic4") return quadratic4();
  if (name == "rosenbrock2") return rosenbrock(2);
  if (name == "rosenbrock10") return rosenbrock(10);
  if (name == "coupled_quartic6") return coupled_quartic(6);
  if (name == "rosen_concave6") return rosen_concave(6);
  if (name == "cubic_model6") return cubic_model_objective(fixed_cubic6(), "cubic_model6");
  throw Error(ErrorCode::InvalidArgument, "unknown built-in problem '" + name + "'");
}

Vec seeded_start(const ObjectiveFunction& f, std::uint64_t seed) {
  std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + 1);
  std::normal_distribution<double> normal(0.0, 0.25);
  Vec x = f.x0;
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) += normal(rng);
  return x;
}

}  // namespace cubreg
