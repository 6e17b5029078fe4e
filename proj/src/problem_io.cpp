#include "cubreg/problem_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace cubreg {

using nlohmann::json;

namespace {

[[noreturn]] void schema_error(const std::string& what) { throw Error(ErrorCode::Schema, what); }

double number_at(const json& j, const std::string& where) {
  if (!j.is_number()) schema_error(where + ": expected a number, got " + std::string(j.type_name()));
  const double v = j.get<double>();
  if (!std::isfinite(v)) schema_error(where + ": not finite");
  return v;
}

std::string line_col(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

CubicModeld ProblemFile::model() const {
  return {c, SymmetricMatrix<double>::symmetrized(q), sigma};
}

ProblemFile parse_problem(std::string_view text) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    schema_error("malformed JSON at " + line_col(text, e.byte > 0 ? e.byte - 1 : 0) + ": " + e.what());
  }
  if (!j.is_object()) schema_error("top level must be an object");
  for (const char* key : {"n", "c", "Q", "sigma"})
    if (!j.contains(key)) schema_error(std::string("missing field '") + key + "'");
  for (const auto& [key, value] : j.items())
    if (key != "n" && key != "c" && key != "Q" && key != "sigma" && key != "name")
      schema_error("unknown field '" + key + "'");

  ProblemFile p;
  if (j.contains("name")) {
    if (!j["name"].is_string()) schema_error("name: expected a string");
    p.name = j["name"].get<std::string>();
  }
  if (!j["n"].is_number_integer() || j["n"].get<long>() < 1) schema_error("n: expected a positive integer");
  const long n = j["n"].get<long>();

  const json& c = j["c"];
  if (!c.is_array() || static_cast<long>(c.size()) != n)
    schema_error("c: expected an array of " + std::to_string(n) + " numbers");
  p.c.resize(n);
  for (long i = 0; i < n; ++i) p.c(i) = number_at(c[i], "c[" + std::to_string(i) + "]");

  const json& q = j["Q"];
  if (!q.is_array() || static_cast<long>(q.size()) != n)
    schema_error("Q: expected " + std::to_string(n) + " rows");
  p.q.resize(n, n);
  for (long i = 0; i < n; ++i) {
    if (!q[i].is_array() || static_cast<long>(q[i].size()) != n)
      schema_error("Q[" + std::to_string(i) + "]: expected " + std::to_string(n) + " numbers");
    for (long k = 0; k < n; ++k)
      p.q(i, k) = number_at(q[i][k], "Q[" + std::to_string(i) + "][" + std::to_string(k) + "]");
  }
  for (long i = 0; i < n; ++i) {
    for (long k = i + 1; k < n; ++k) {
      const double a = p.q(i, k), b = p.q(k, i);
      if (std::abs(a - b) > 1e-9 * std::max({1.0, std::abs(a), std::abs(b)})) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "Q[" << i << "][" << k << "] = " << a << " but Q[" << k << "][" << i << "] = " << b
            << " (Q must be symmetric)";
        schema_error(msg.str());
      }
    }
  }
  p.q = (p.q + p.q.transpose()) / 2;

  p.sigma = number_at(j["sigma"], "sigma");
  if (!(p.sigma > 0)) schema_error("sigma: must be positive");
  return p;
}

ProblemFile read_problem(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) schema_error("cannot read '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_problem(buf.str());
  } catch (const Error& e) {
    schema_error(path.string() + ": " + e.message());
  }
}

std::string serialize_problem(const ProblemFile& p) {
  json j;
  if (!p.name.empty()) j["name"] = p.name;
  j["n"] = p.c.size();
  j["c"] = std::vector<double>(p.c.data(), p.c.data() + p.c.size());
  json rows = json::array();
  for (Eigen::Index i = 0; i < p.q.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < p.q.cols(); ++k) row.push_back(p.q(i, k));
    rows.push_back(std::move(row));
  }
  j["Q"] = std::move(rows);
  j["sigma"] = p.sigma;
  return j.dump(2) + "\n";
}

json to_json(const ResultRecord& r) {
  json j;
  j["method"] = r.method;
  j["solution"] = std::vector<double>(r.solution.data(), r.solution.data() + r.solution.size());
  j["lambda"] = r.lambda;
  j["objective"] = r.objective;
  j["psd_margin"] = r.psd_margin;
  j["residual"] = r.residual;
  j["is_global"] = r.is_global;
  j["hard_case"] = r.hard_case;
  j["escapes"] = {{"count", r.escapes}, {"tightenings", r.tightenings}, {"cases", r.escape_cases}};
  j["wall_ms"] = r.wall_ms;
  j["version"] = r.version;
  return j;
}

ResultRecord result_from_json(const json& j) {
  try {
    ResultRecord r;
    r.method = j.at("method").get<std::string>();
    const auto sol = j.at("solution").get<std::vector<double>>();
    r.solution = Eigen::Map<const Vec>(sol.data(), static_cast<Eigen::Index>(sol.size()));
    r.lambda = j.at("lambda").get<double>();
    r.objective = j.at("objective").get<double>();
    r.psd_margin = j.at("psd_margin").get<double>();
    r.residual = j.at("residual").get<double>();
    r.is_global = j.at("is_global").get<bool>();
    r.hard_case = j.at("hard_case").get<bool>();
    r.escapes = j.at("escapes").at("count").get<int>();
    r.tightenings = j.at("escapes").at("tightenings").get<int>();
    r.escape_cases = j.at("escapes").at("cases").get<std::vector<std::string>>();
    r.wall_ms = j.at("wall_ms").get<double>();
    r.version = j.at("version").get<std::string>();
    return r;
  } catch (const json::exception& e) {
    schema_error(std::string("result record: ") + e.what());
  }
}

}  // namespace cubreg
