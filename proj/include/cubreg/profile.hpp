#pragma once

#include <string>
#include <vector>

namespace cubreg {

struct RunRecord {
  std::string problem;
  std::string variant;
  long iterations = 0;
  bool converged = true;
};

/// rho[v][t] is the fraction of problems that variant v solves within
/// tau[t] times the best iteration count.
struct ProfileTable {
  std::vector<std::string> variants;
  std::vector<double> tau;
  std::vector<std::vector<double>> rho;
};

/// Dolan-More performance profile over iteration counts.
///
/// For each problem the ratio of a variant is its iteration count over the
/// best count among variants; failed or missing runs get an infinite ratio.
/// tau is sampled at 1, 1 + step, ... and always ends at the largest finite
/// ratio. Throws EmptyInput when no problem has a finite best count.
ProfileTable performance_profile(const std::vector<RunRecord>& runs, double step = 0.05);

}  // namespace cubreg
