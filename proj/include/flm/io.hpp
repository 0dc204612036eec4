#pragma once

// CSV and JSON writers. Numbers are written with 17 significant digits.

#include <cstdio>
#include <ostream>
#include <span>
#include <string>

#include <json.hpp>

#include "flm/asymptotics.hpp"
#include "flm/density.hpp"
#include "flm/error.hpp"
#include "flm/simulate.hpp"

namespace flm {

enum class Format { csv, json };

inline Format format_from_string(const std::string& s) {
  if (s == "csv") return Format::csv;
  if (s == "json") return Format::json;
  throw ConfigError("format must be csv or json, got '" + s + "'");
}

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline void csv_row(std::ostream& os, std::initializer_list<double> vals) {
  bool first = true;
  for (double v : vals) {
    if (!first) os << ',';
    os << fmt17(v);
    first = false;
  }
  os << '\n';
}

// nlohmann dumps doubles with max_digits10 (17) already.
inline void dump(std::ostream& os, const nlohmann::json& j) { os << j.dump(2) << '\n'; }

}  // namespace detail

inline void write_density(std::ostream& os, const DensityGrid& g, Format f) {
  if (f == Format::csv) {
    os << "x,p,err\n";
    for (std::size_t i = 0; i < g.x_values.size(); ++i)
      detail::csv_row(os, {g.x_values[i], g.p_values[i], g.err_values[i]});
    return;
  }
  nlohmann::json j{{"t", g.t}, {"x", g.x_values}, {"p", g.p_values}, {"err", g.err_values}};
  detail::dump(os, j);
}

inline void write_tail_report(std::ostream& os, const TailReport& r, Format f) {
  if (f == Format::csv) {
    os << "t,x,exact,asymptote,ratio,err\n";
    for (const auto& row : r.rows) detail::csv_row(os, {row.t, row.x, row.exact, row.asymptote, row.ratio, row.err});
    return;
  }
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"t", row.t},
                    {"x", row.x},
                    {"exact", row.exact},
                    {"asymptote", row.asymptote},
                    {"ratio", row.ratio},
                    {"err", row.err}});
  nlohmann::json j{{"regime", to_string(r.regime)}, {"rows", rows}};
  if (!r.note.empty()) j["note"] = r.note;
  detail::dump(os, j);
}

inline void write_samples_csv(std::ostream& os, std::span<const double> xs) {
  os << "x\n";
  for (double v : xs) os << fmt17(v) << '\n';
}

inline void write_empirical(std::ostream& os, const EmpiricalDensity& e, Format f) {
  if (f == Format::csv) {
    os << "x,p,se\n";
    for (std::size_t i = 0; i < e.x.size(); ++i) detail::csv_row(os, {e.x[i], e.p[i], e.se[i]});
    return;
  }
  nlohmann::json j{{"bandwidth", e.bandwidth}, {"n", e.n}, {"x", e.x}, {"p", e.p}, {"se", e.se}};
  detail::dump(os, j);
}

}  // namespace flm
