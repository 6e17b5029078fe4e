#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cubreg/driver.hpp"

namespace cubreg {

inline constexpr std::string_view kToolVersion = "0.3.0";

/// Problem file, a JSON object:
///
///   { "name": "optional", "n": 2, "c": [-2, 0], "Q": [[1, 0], [0, -3]], "sigma": 1 }
///
/// Q must be symmetric to 1e-9 relative; it is stored as (Q + Q^T) / 2.
struct ProblemFile {
  std::string name;
  Vec c;
  Mat q;
  double sigma = 1;

  CubicModeld model() const;
};

/// Throws Error(Schema) naming the offending field, or the line and column
/// for malformed JSON.
ProblemFile parse_problem(std::string_view text);
ProblemFile read_problem(const std::filesystem::path& path);
std::string serialize_problem(const ProblemFile& p);

struct ResultRecord {
  std::string method;
  Vec solution;
  double lambda = 0;
  double objective = 0;
  double psd_margin = 0;
  double residual = 0;
  bool is_global = false;
  bool hard_case = false;
  int escapes = 0;
  int tightenings = 0;
  std::vector<std::string> escape_cases;
  double wall_ms = 0;
  std::string version{kToolVersion};
};

nlohmann::json to_json(const ResultRecord& r);
ResultRecord result_from_json(const nlohmann::json& j);

}  // namespace cubreg
