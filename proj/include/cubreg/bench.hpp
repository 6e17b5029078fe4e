#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "cubreg/driver.hpp"
#include "cubreg/profile.hpp"

namespace cubreg {

inline constexpr const char* kBenchHeader =
    "name,n,variant,seed,converged,iterations,f_final,grad_inf_norm,wall_ms";

struct BenchRow {
  std::string name;
  int n = 0;
  std::string variant;
  std::uint64_t seed = 0;
  bool converged = false;
  long iterations = 0;
  double f_final = 0;
  double grad_inf_norm = 0;
  double wall_ms = 0;
};

/// Runs every (problem, variant, seed) cell on `jobs` worker threads. Each
/// cell starts from seeded_start(problem, seed) and seeds its subproblem
/// generator with the same value, so both variants see identical draws.
/// Rows come back sorted by (name, variant, seed); a failing cell yields a
/// row with converged = false rather than aborting the batch.
std::vector<BenchRow> run_bench(const std::vector<ObjectiveFunction>& problems,
                                const std::vector<Variant>& variants,
                                const std::vector<std::uint64_t>& seeds, unsigned jobs,
                                const OuterOptions& base = {});

/// Shortest round-trip decimal form, independent of the global locale.
std::string format_number(double v);

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows);
/// Strict reader: exact header, nine fields per row, '.' decimals. Throws Schema.
std::vector<BenchRow> read_bench_csv(std::istream& in);

/// Groups rows by (name, seed) into profile problems.
std::vector<RunRecord> to_run_records(const std::vector<BenchRow>& rows);

void write_profile_csv(std::ostream& out, const ProfileTable& table);

}  // namespace cubreg
