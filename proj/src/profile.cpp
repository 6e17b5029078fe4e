#include "cubreg/profile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "cubreg/error.hpp"

namespace cubreg {

ProfileTable performance_profile(const std::vector<RunRecord>& runs, double step) {
  if (runs.empty()) throw Error(ErrorCode::EmptyInput, "performance profile of no runs");
  if (!(step > 0)) throw Error(ErrorCode::InvalidArgument, "profile step must be positive");
  constexpr double kInf = std::numeric_limits<double>::infinity();

  ProfileTable table;
  std::map<std::string, std::map<std::string, double>> counts;
  for (const auto& r : runs) {
    if (std::find(table.variants.begin(), table.variants.end(), r.variant) == table.variants.end())
      table.variants.push_back(r.variant);
    const double it = r.converged ? static_cast<double>(r.iterations) : kInf;
    auto [pos, inserted] = counts[r.problem].emplace(r.variant, it);
    if (!inserted) pos->second = std::min(pos->second, it);
  }
  std::sort(table.variants.begin(), table.variants.end());

  std::vector<std::vector<double>> ratios(table.variants.size());
  double max_ratio = 1;
  std::size_t problems = 0;
  for (const auto& [problem, by_variant] : counts) {
    double best = kInf;
    for (const auto& [v, it] : by_variant) best = std::min(best, it);
    if (!std::isfinite(best)) continue;
    ++problems;
    for (std::size_t v = 0; v < table.variants.size(); ++v) {
      auto found = by_variant.find(table.variants[v]);
      double ratio = kInf;
      if (found != by_variant.end() && std::isfinite(found->second))
        ratio = best > 0 ? found->second / best : (found->second > 0 ? kInf : 1.0);
      ratios[v].push_back(ratio);
      if (std::isfinite(ratio)) max_ratio = std::max(max_ratio, ratio);
    }
  }
  if (problems == 0) throw Error(ErrorCode::EmptyInput, "no problem was solved by any variant");

  for (long i = 0;; ++i) {
    const double t = 1.0 + step * static_cast<double>(i);
    if (t >= max_ratio - 1e-12) break;
    table.tau.push_back(t);
  }
  table.tau.push_back(max_ratio);

  table.rho.assign(table.variants.size(), {});
  for (std::size_t v = 0; v < table.variants.size(); ++v) {
    for (double t : table.tau) {
      const auto within = std::count_if(ratios[v].begin(), ratios[v].end(),
                                        [t](double r) { return r <= t * (1 + 1e-12); });
      table.rho[v].push_back(static_cast<double>(within) / static_cast<double>(problems));
    }
  }
  return table;
}

}  // namespace cubreg
