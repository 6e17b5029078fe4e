#include "cubreg/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include "cubreg/bench.hpp"
#include "cubreg/problem_io.hpp"
#include "cubreg/problems.hpp"

namespace cubreg {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct GlobalFlags {
  std::string format = "text";
  std::optional<std::uint64_t> seed;
  unsigned jobs = 0;
  std::string out_path;
  bool color = false;
};

struct SolveFlags {
  std::string path;
  std::string method = "secular";
  double eps = 1e-8;
  double eps2 = 1e-8;
};

struct EscapeFlags {
  std::string path;
  std::string point;
  std::optional<double> eps;
  double eps2 = 1e-8;
};

struct MinimizeFlags {
  std::string problem;
  std::string variant = "arc_plus";
  std::string start = "random";
  bool perturb = false;
};

struct BenchFlags {
  std::string suite;
  std::string problems;
  std::string variants = "arc,arc_plus";
  int seeds = 5;
};

struct ProfileFlags {
  std::string csv;
  double step = 0.05;
};

bool structured(const GlobalFlags& g) { return g.format == "structured"; }

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

Vec parse_point(const std::string& text, Eigen::Index n) {
  const auto items = split_list(text);
  if (static_cast<Eigen::Index>(items.size()) != n) {
    std::ostringstream msg;
    msg << "--point has " << items.size() << " entries, problem has n = " << n;
    throw Error(ErrorCode::Schema, msg.str());
  }
  Vec s(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::string& item = items[static_cast<std::size_t>(i)];
    double v = 0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size())
      throw Error(ErrorCode::Schema, "--point entry " + std::to_string(i) + " is not a number: '" + item + "'");
    s(i) = v;
  }
  return s;
}

std::string vec_text(const Vec& v) {
  std::string s = "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += format_number(v(i));
  }
  return s + "]";
}

std::vector<double> to_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

Vec sphere_start(Eigen::Index n, double sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = normal(rng);
  return std::min(1.0, 1.0 / sigma) * v / v.norm();
}

void print_kv(std::ostream& out, const std::vector<std::pair<std::string, std::string>>& rows) {
  std::size_t width = 0;
  for (const auto& [k, v] : rows) width = std::max(width, k.size());
  for (const auto& [k, v] : rows) out << std::left << std::setw(static_cast<int>(width + 2)) << k << v << '\n';
}

int cmd_solve(const SolveFlags& f, const GlobalFlags& g, std::ostream& out) {
  const ProblemFile p = read_problem(f.path);
  const CubicModeld m = p.model();
  ResultRecord r;
  r.method = f.method;
  const auto t0 = std::chrono::steady_clock::now();
  GlobalSolutiond sol;
  if (f.method == "secular") {
    sol = global_minimize(m);
  } else if (f.method == "escapes") {
    EscapeLoopOptions opts;
    opts.eps_grad = f.eps;
    opts.eps_curv = f.eps2;
    opts.policy = CurvaturePolicy::ScaledByResidual;
    auto res = solve_via_escapes(m, sphere_start(m.dim(), m.sigma(), g.seed.value_or(0)), opts);
    sol = std::move(res.solution);
    r.escapes = res.trace.escape_count;
    r.tightenings = res.trace.tightenings;
    for (const auto& step : res.trace.steps)
      if (step.escape != EscapeCase::NoneGlobal) r.escape_cases.emplace_back(to_string(step.escape));
  } else {
    throw Error(ErrorCode::InvalidArgument, "--method must be secular or escapes, got '" + f.method + "'");
  }
  r.wall_ms = elapsed_ms(t0);
  r.solution = sol.s_star;
  r.lambda = sol.lambda_star;
  r.objective = sol.objective;
  r.psd_margin = sol.certificate.psd_margin;
  r.residual = sol.certificate.residual;
  r.is_global = sol.certificate.is_global;
  r.hard_case = sol.hard_case;

  if (structured(g)) {
    out << to_json(r).dump(2) << '\n';
  } else {
    std::string cases;
    for (const auto& c : r.escape_cases) cases += (cases.empty() ? "" : ",") + c;
    print_kv(out, {{"method", r.method},
                   {"objective", format_number(r.objective)},
                   {"lambda", format_number(r.lambda)},
                   {"solution", vec_text(r.solution)},
                   {"psd_margin", format_number(r.psd_margin)},
                   {"residual", format_number(r.residual)},
                   {"global", r.is_global ? "yes" : "no"},
                   {"hard_case", r.hard_case ? "yes" : "no"},
                   {"escapes", std::to_string(r.escapes) + (cases.empty() ? "" : " (" + cases + ")")},
                   {"wall_ms", format_number(r.wall_ms)}});
  }
  if (!r.is_global) throw Error(ErrorCode::CertificateFailure, "solution failed the global certificate");
  return kExitOk;
}

int cmd_stationary(const std::string& path, const GlobalFlags& g, std::ostream& out) {
  const CubicModeld m = read_problem(path).model();
  const auto points = enumerate_stationary(m);
  const int k = negative_eigen_count(m.eig());
  const int bound = count_bound(m);
  const int distinct = count_distinct_lambda(points);

  if (structured(g)) {
    json rows = json::array();
    for (const auto& p : points) {
      rows.push_back({{"lambda", p.lambda()},
                      {"norm_s", p.s().norm()},
                      {"objective", p.objective()},
                      {"residual", p.residual()},
                      {"global", is_global(m, p.s()).is_global},
                      {"s", to_std(p.s())}});
    }
    json j{{"points", rows}, {"k", k}, {"bound", bound}, {"distinct_lambda", distinct}};
    out << j.dump(2) << '\n';
    return kExitOk;
  }

  out << std::left << std::setw(24) << "lambda" << std::setw(24) << "norm_s" << std::setw(24) << "objective"
      << "global\n";
  for (const auto& p : points) {
    const bool glob = is_global(m, p.s()).is_global;
    std::string flag = glob ? "yes" : "no";
    if (glob && g.color) flag = "\x1b[32myes\x1b[0m";
    out << std::setw(24) << format_number(p.lambda()) << std::setw(24) << format_number(p.s().norm())
        << std::setw(24) << format_number(p.objective()) << flag << '\n';
  }
  out << "points " << points.size() << ", distinct lambda " << distinct << ", k " << k << ", bound 2(k+1) "
      << bound << '\n';
  return kExitOk;
}

int cmd_escape(const EscapeFlags& f, const GlobalFlags& g, std::ostream& out) {
  const CubicModeld m = read_problem(f.path).model();
  const Vec s = parse_point(f.point, m.dim());
  const auto outcome = f.eps ? escape_approx(m, s, ApproxTolerances<double>{*f.eps, f.eps2})
                             : escape_exact(m, StationaryPointd::at(m, s));
  if (structured(g)) {
    json j{{"case", std::string(to_string(outcome.case_tag))},
           {"mode", f.eps ? "approx" : "exact"},
           {"decrease", outcome.decrease},
           {"objective_before", eval(m, s)}};
    if (outcome.s_hat) {
      j["s_hat"] = to_std(*outcome.s_hat);
      j["objective_after"] = eval(m, *outcome.s_hat);
    } else {
      j["s_hat"] = nullptr;
    }
    if (outcome.direction.size()) j["direction"] = to_std(outcome.direction);
    if (outcome.z.size()) j["z"] = to_std(outcome.z);
    j["alpha"] = outcome.alpha;
    out << j.dump(2) << '\n';
    return kExitOk;
  }
  std::vector<std::pair<std::string, std::string>> rows{{"case", std::string(to_string(outcome.case_tag))},
                                                        {"objective_before", format_number(eval(m, s))}};
  if (outcome.s_hat) {
    rows.emplace_back("s_hat", vec_text(*outcome.s_hat));
    rows.emplace_back("objective_after", format_number(eval(m, *outcome.s_hat)));
    rows.emplace_back("decrease", format_number(outcome.decrease));
  }
  if (outcome.direction.size()) rows.emplace_back("direction", vec_text(outcome.direction));
  if (outcome.case_tag == EscapeCase::B_I || outcome.case_tag == EscapeCase::B_III)
    rows.emplace_back("alpha", format_number(outcome.alpha));
  if (outcome.z.size()) rows.emplace_back("z", vec_text(outcome.z));
  print_kv(out, rows);
  return kExitOk;
}

int cmd_minimize(const MinimizeFlags& f, const GlobalFlags& g, std::ostream& out) {
  const ObjectiveFunction fn = builtin_problem(f.problem);
  OuterOptions opts;
  opts.seed = g.seed.value_or(0);
  if (f.start == "cauchy")
    opts.start = SubproblemStart::Cauchy;
  else if (f.start != "random")
    throw Error(ErrorCode::InvalidArgument, "--start must be random or cauchy");
  const Vec x0 = f.perturb ? seeded_start(fn, opts.seed) : fn.x0;
  const auto t0 = std::chrono::steady_clock::now();
  const auto rep = arc_plus_minimize(fn, x0, parse_variant(f.variant), opts);
  const double ms = elapsed_ms(t0);
  if (structured(g)) {
    json j{{"problem", fn.name},         {"variant", std::string(to_string(rep.variant))},
           {"converged", rep.converged}, {"iterations", rep.iterations},
           {"accepted", rep.accepted},   {"f_final", rep.f_final},
           {"grad_inf_norm", rep.grad_inf_norm}, {"escapes", rep.escapes},
           {"x_final", to_std(rep.x_final)},     {"wall_ms", ms},
           {"version", std::string(kToolVersion)}};
    out << j.dump(2) << '\n';
  } else {
    print_kv(out, {{"problem", fn.name},
                   {"variant", std::string(to_string(rep.variant))},
                   {"converged", rep.converged ? "yes" : "no"},
                   {"iterations", std::to_string(rep.iterations)},
                   {"accepted", std::to_string(rep.accepted)},
                   {"f_final", format_number(rep.f_final)},
                   {"grad_inf_norm", format_number(rep.grad_inf_norm)},
                   {"escapes", std::to_string(rep.escapes)},
                   {"x_final", vec_text(rep.x_final)},
                   {"wall_ms", format_number(ms)}});
  }
  return rep.converged ? kExitOk : kExitSolver;
}

std::vector<ObjectiveFunction> suite_problems(const BenchFlags& f) {
  std::vector<ObjectiveFunction> problems;
  if (!f.suite.empty()) {
    if (!fs::is_directory(f.suite)) throw Error(ErrorCode::Schema, "suite '" + f.suite + "' is not a directory");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(f.suite))
      if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
      const ProblemFile p = read_problem(file);
      problems.push_back(cubic_model_objective(p.model(), p.name.empty() ? file.stem().string() : p.name));
    }
  }
  const auto names = split_list(f.problems);
  for (const auto& name : names) problems.push_back(builtin_problem(name));
  if (f.suite.empty() && names.empty())
    for (const auto& name : builtin_names()) problems.push_back(builtin_problem(name));
  if (problems.empty()) throw Error(ErrorCode::EmptyInput, "bench suite is empty");
  return problems;
}

/// Writes to --out when given, otherwise to `out`.
template <typename Fn>
void emit(const GlobalFlags& g, std::ostream& out, Fn&& write) {
  if (g.out_path.empty()) {
    write(out);
    return;
  }
  std::ofstream file(g.out_path, std::ios::binary);
  if (!file) throw Error(ErrorCode::Schema, "cannot open '" + g.out_path + "' for writing");
  write(file);
  if (!file) throw Error(ErrorCode::Schema, "write to '" + g.out_path + "' failed");
}

int cmd_bench(const BenchFlags& f, const GlobalFlags& g, std::ostream& out) {
  const auto problems = suite_problems(f);
  std::vector<Variant> variants;
  for (const auto& v : split_list(f.variants)) variants.push_back(parse_variant(v));
  if (variants.empty()) throw Error(ErrorCode::EmptyInput, "no variants given");
  if (f.seeds < 1) throw Error(ErrorCode::EmptyInput, "--seeds must be at least 1");
  const std::uint64_t base = g.seed.value_or(0);
  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < f.seeds; ++i) seeds.push_back(base + static_cast<std::uint64_t>(i));
  const unsigned jobs = g.jobs ? g.jobs : std::max(1u, std::thread::hardware_concurrency());
  const auto rows = run_bench(problems, variants, seeds, jobs);
  emit(g, out, [&](std::ostream& o) { write_bench_csv(o, rows); });
  return kExitOk;
}

int cmd_profile(const ProfileFlags& f, const GlobalFlags& g, std::ostream& out) {
  std::ifstream in(f.csv, std::ios::binary);
  if (!in) throw Error(ErrorCode::Schema, "cannot open '" + f.csv + "'");
  const auto rows = read_bench_csv(in);
  const auto table = performance_profile(to_run_records(rows), f.step);
  emit(g, out, [&](std::ostream& o) { write_profile_csv(o, table); });
  return kExitOk;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::Schema:
    case ErrorCode::EmptyInput:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::InvalidArgument:
    case ErrorCode::NotSymmetric:
      return kExitInput;
    default:
      return kExitSolver;
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err, bool color) {
  CLI::App app{"Cubic-regularized model solver"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  GlobalFlags g;
  app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"text", "structured"}));
  app.add_option("--seed", g.seed, "Seed for every random choice");
  app.add_option("--jobs", g.jobs, "Worker threads for bench (default: hardware threads)");
  app.add_option("--out", g.out_path, "Write CSV output to this file");

  SolveFlags solve;
  auto* c_solve = app.add_subcommand("solve", "Global minimizer of a problem file");
  c_solve->add_option("path", solve.path, "Problem file")->required();
  c_solve->add_option("--method", solve.method, "secular or escapes")
      ->check(CLI::IsMember({"secular", "escapes"}));
  c_solve->add_option("--eps", solve.eps, "Gradient tolerance of the escape loop");
  c_solve->add_option("--eps2", solve.eps2, "Curvature tolerance of the escape loop");

  std::string validate_path;
  auto* c_val = app.add_subcommand("validate", "Check a problem file and print it in canonical form");
  c_val->add_option("path", validate_path, "Problem file")->required();

  std::string stationary_path;
  auto* c_stat = app.add_subcommand("stationary", "List all stationary points");
  c_stat->add_option("path", stationary_path, "Problem file")->required();

  EscapeFlags esc;
  auto* c_esc = app.add_subcommand("escape", "Escape move from a stationary point");
  c_esc->add_option("path", esc.path, "Problem file")->required();
  c_esc->add_option("--point", esc.point, "Comma-separated coordinates")->required();
  c_esc->add_option("--eps", esc.eps, "Treat the point as approximately stationary with this residual bound");
  c_esc->add_option("--eps2", esc.eps2, "Curvature tolerance for the approximate escape");

  MinimizeFlags mini;
  auto* c_min = app.add_subcommand("minimize", "Run ARC or ARC+ on a built-in function");
  c_min->add_option("--problem", mini.problem, "Built-in function name")->required();
  c_min->add_option("--variant", mini.variant, "arc or arc_plus");
  c_min->add_option("--start", mini.start, "Subproblem start: random or cauchy");
  c_min->add_flag("--perturb", mini.perturb, "Perturb the standard starting point using --seed");

  BenchFlags bench;
  auto* c_bench = app.add_subcommand("bench", "Benchmark variants over a suite");
  c_bench->add_option("suite", bench.suite, "Directory of problem files");
  c_bench->add_option("--problems", bench.problems, "Comma-separated built-in functions");
  c_bench->add_option("--variants", bench.variants, "Comma-separated variants");
  c_bench->add_option("--seeds", bench.seeds, "Number of seeds, starting at --seed");

  ProfileFlags prof;
  auto* c_prof = app.add_subcommand("profile", "Performance profile from a bench CSV");
  c_prof->add_option("csv", prof.csv, "Bench CSV")->required();
  c_prof->add_option("--step", prof.step, "tau sampling step");

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }
  g.color = color && std::getenv("NO_COLOR") == nullptr && g.out_path.empty();

  try {
    if (*c_solve) return cmd_solve(solve, g, out);
    if (*c_val) {
      emit(g, out, [&](std::ostream& o) { o << serialize_problem(read_problem(validate_path)) << '\n'; });
      return kExitOk;
    }
    if (*c_stat) return cmd_stationary(stationary_path, g, out);
    if (*c_esc) return cmd_escape(esc, g, out);
    if (*c_min) return cmd_minimize(mini, g, out);
    if (*c_bench) return cmd_bench(bench, g, out);
    if (*c_prof) return cmd_profile(prof, g, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitSolver;
  }
  return kExitInput;
}

}  // namespace cubreg
