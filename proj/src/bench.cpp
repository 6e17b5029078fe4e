#include "cubreg/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <thread>
#include <tuple>

#include "cubreg/problems.hpp"

namespace cubreg {

std::vector<BenchRow> run_bench(const std::vector<ObjectiveFunction>& problems,
                                const std::vector<Variant>& variants,
                                const std::vector<std::uint64_t>& seeds, unsigned jobs,
                                const OuterOptions& base) {
  if (problems.empty()) throw Error(ErrorCode::EmptyInput, "bench suite has no problems");
  if (variants.empty() || seeds.empty()) throw Error(ErrorCode::EmptyInput, "bench needs variants and seeds");

  struct Cell {
    std::size_t problem;
    Variant variant;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (std::size_t p = 0; p < problems.size(); ++p)
    for (Variant v : variants)
      for (std::uint64_t s : seeds) cells.push_back({p, v, s});

  std::vector<BenchRow> rows(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      const Cell& cell = cells[i];
      const ObjectiveFunction& f = problems[cell.problem];
      BenchRow row;
      row.name = f.name;
      row.n = f.n;
      row.variant = std::string(to_string(cell.variant));
      row.seed = cell.seed;
      const auto t0 = std::chrono::steady_clock::now();
      try {
        OuterOptions opts = base;
        opts.seed = cell.seed;
        const auto rep = arc_plus_minimize(f, seeded_start(f, cell.seed), cell.variant, opts);
        row.converged = rep.converged;
        row.iterations = rep.iterations;
        row.f_final = rep.f_final;
        row.grad_inf_norm = rep.grad_inf_norm;
      } catch (const std::exception&) {
        row.converged = false;
        row.f_final = std::numeric_limits<double>::quiet_NaN();
        row.grad_inf_norm = std::numeric_limits<double>::quiet_NaN();
      }
      row.wall_ms =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      rows[i] = std::move(row);
    }
  };

  const unsigned n_threads = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(cells.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  std::sort(rows.begin(), rows.end(), [](const BenchRow& a, const BenchRow& b) {
    return std::tie(a.name, a.variant, a.seed) < std::tie(b.name, b.variant, b.seed);
  });
  return rows;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

namespace {

// Stream insertion of integers honours the imbued locale (digit grouping).
template <typename Int>
std::string format_int(Int v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

}  // namespace

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
  out << kBenchHeader << '\n';
  for (const auto& r : rows) {
    std::string line = r.name + ',' + format_int(r.n) + ',' + r.variant + ',' + format_int(r.seed) + ',' +
                       (r.converged ? "true" : "false") + ',' + format_int(r.iterations) + ',' +
                       format_number(r.f_final) + ',' + format_number(r.grad_inf_norm) + ',' +
                       format_number(r.wall_ms) + '\n';
    out << line;
  }
}

namespace {

[[noreturn]] void csv_error(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::Schema, "csv line " + std::to_string(line) + ": " + what);
}

template <typename T>
T parse_field(const std::string& text, std::size_t line, const char* field) {
  T value{};
  if constexpr (std::is_floating_point_v<T>) {
    if (text == "nan") return std::numeric_limits<T>::quiet_NaN();
    if (text == "inf") return std::numeric_limits<T>::infinity();
    if (text == "-inf") return -std::numeric_limits<T>::infinity();
  }
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
    csv_error(line, std::string("bad ") + field + " '" + text + "'");
  return value;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

std::vector<BenchRow> read_bench_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::EmptyInput, "csv is empty");
  if (line != kBenchHeader) csv_error(1, "unexpected header '" + line + "'");
  std::vector<BenchRow> rows;
  std::size_t number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') csv_error(number, "CR line ending");
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 9) csv_error(number, "expected 9 fields, got " + std::to_string(f.size()));
    BenchRow r;
    r.name = f[0];
    r.n = parse_field<int>(f[1], number, "n");
    r.variant = f[2];
    r.seed = parse_field<std::uint64_t>(f[3], number, "seed");
    if (f[4] != "true" && f[4] != "false") csv_error(number, "bad converged '" + f[4] + "'");
    r.converged = f[4] == "true";
    r.iterations = parse_field<long>(f[5], number, "iterations");
    r.f_final = parse_field<double>(f[6], number, "f_final");
    r.grad_inf_norm = parse_field<double>(f[7], number, "grad_inf_norm");
    r.wall_ms = parse_field<double>(f[8], number, "wall_ms");
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<RunRecord> to_run_records(const std::vector<BenchRow>& rows) {
  std::vector<RunRecord> out;
  out.reserve(rows.size());
  for (const auto& r : rows)
    out.push_back({r.name + "#" + std::to_string(r.seed), r.variant, r.iterations, r.converged});
  return out;
}

void write_profile_csv(std::ostream& out, const ProfileTable& table) {
  out << "tau";
  for (const auto& v : table.variants) out << ',' << v;
  out << '\n';
  for (std::size_t t = 0; t < table.tau.size(); ++t) {
    out << format_number(table.tau[t]);
    for (std::size_t v = 0; v < table.variants.size(); ++v) out << ',' << format_number(table.rho[v][t]);
    out << '\n';
  }
}

}  // namespace cubreg
