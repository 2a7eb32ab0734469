#pragma once

#include <fmt/format.h>

#include <cmath>
#include <cstdlib>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace watatani {

using json = nlohmann::json;

/// Outcome of one verification check.
struct CheckRecord {
  std::string name;
  std::string target;
  std::string mode = "exact";  // exact | float
  json quantities = json::object();
  bool pass = false;
  json metadata = json::object();
};

struct Report {
  std::vector<CheckRecord> checks;
  std::optional<double> wall_time;

  std::size_t passed() const {
    std::size_t n = 0;
    for (const auto& c : checks) n += c.pass ? 1 : 0;
    return n;
  }
  std::size_t failed() const { return checks.size() - passed(); }
  bool all_pass() const { return failed() == 0; }
};

enum class ReportFormat { json, text };

/// Upper bound on enumerated monomials / basis dimensions; WATATANI_COST_GUARD overrides.
inline std::size_t cost_guard(std::size_t fallback) {
  if (const char* env = std::getenv("WATATANI_COST_GUARD")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return fallback;
}

namespace detail {

inline std::string format_double(double v) {
  if (!std::isfinite(v)) return "null";
  if (v == 0.0) return "0";
  std::string s = fmt::format("{:.15g}", v);
  // keep JSON numbers unambiguous as floats
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

/// Compact serializer with sorted keys (nlohmann objects are ordered maps) and
/// 15-significant-digit floats.
inline void write_json(std::ostringstream& os, const json& j) {
  switch (j.type()) {
    case json::value_t::object: {
      os << '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ',';
        first = false;
        os << json(it.key()).dump() << ':';
        write_json(os, it.value());
      }
      os << '}';
      break;
    }
    case json::value_t::array: {
      os << '[';
      bool first = true;
      for (const auto& e : j) {
        if (!first) os << ',';
        first = false;
        write_json(os, e);
      }
      os << ']';
      break;
    }
    case json::value_t::number_float: os << format_double(j.get<double>()); break;
    default: os << j.dump(); break;
  }
}

}  // namespace detail

inline json to_json(const CheckRecord& c) {
  return json{{"name", c.name},     {"target", c.target}, {"mode", c.mode},
              {"quantities", c.quantities}, {"pass", c.pass},   {"metadata", c.metadata}};
}

inline json to_json(const Report& r, bool deterministic) {
  json checks = json::array();
  for (const auto& c : r.checks) checks.push_back(to_json(c));
  json summary{{"total", r.checks.size()}, {"passed", r.passed()}, {"failed", r.failed()}};
  if (deterministic || !r.wall_time) {
    summary["wall_time"] = nullptr;
  } else {
    summary["wall_time"] = *r.wall_time;
  }
  return json{{"checks", checks}, {"summary", summary}};
}

inline std::string dump_json(const json& j) {
  std::ostringstream os;
  detail::write_json(os, j);
  return os.str();
}

inline std::string emit_report(const Report& r, ReportFormat format, bool deterministic = true) {
  if (format == ReportFormat::json) return dump_json(to_json(r, deterministic));
  std::ostringstream os;
  for (const auto& c : r.checks) {
    os << (c.pass ? "PASS" : "FAIL") << "  " << c.name;
    if (!c.target.empty()) os << " [" << c.target << "]";
    os << "  (" << c.mode << ")\n";
    for (auto it = c.quantities.begin(); it != c.quantities.end(); ++it) {
      os << "      " << it.key() << " = " << dump_json(it.value()) << "\n";
    }
    for (auto it = c.metadata.begin(); it != c.metadata.end(); ++it) {
      os << "      # " << it.key() << ": " << dump_json(it.value()) << "\n";
    }
  }
  os << "total " << r.checks.size() << ", passed " << r.passed() << ", failed " << r.failed();
  if (!deterministic && r.wall_time) os << fmt::format(", wall time {:.3f} s", *r.wall_time);
  os << "\n";
  return os.str();
}

}  // namespace watatani
