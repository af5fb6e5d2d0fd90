#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sigrule/errors.hpp"
#include "sigrule/miner.hpp"
#include "sigrule/redundancy.hpp"
#include "sigrule/relation.hpp"

namespace sigrule {

/// Value rounded to 9 significant digits. Records hold rounded values so the
/// TSV and JSON forms print the same numbers and parse back unchanged.
inline double round9(double v) {
  if (!std::isfinite(v)) return v;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return std::strtod(buf, nullptr);
}

inline std::optional<double> round9(std::optional<double> v) {
  if (!v) return v;
  return round9(*v);
}

inline std::string format9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

/// One scored rule as emitted by the CLI.
struct RuleRecord {
  std::string antecedent;
  std::string consequent;
  std::int64_t n = 0, c11 = 0, c10 = 0, c01 = 0, c00 = 0;
  std::optional<double> fr, cf, gamma, t, p_exact, p_normal, chi2, phi, j, imp;
  std::optional<std::string> classic, closed, productive, improvement, superiority;

  friend bool operator==(const RuleRecord&, const RuleRecord&) = default;
};

inline RuleRecord make_record(const Relation& rel, const Rule& r,
                              const RedundancyVerdict* verdict = nullptr) {
  RuleRecord out;
  out.antecedent = rel.describe(r.antecedent);
  out.consequent = rel.describe(r.consequent);
  out.n = r.table.n();
  out.c11 = r.table.c11;
  out.c10 = r.table.c10;
  out.c01 = r.table.c01;
  out.c00 = r.table.c00;
  out.fr = round9(r.scores.fr);
  out.cf = round9(r.scores.cf);
  out.gamma = round9(r.scores.gamma);
  out.t = round9(r.scores.t);
  if (r.scores.t) {
    out.p_exact = round9(r.significance.p_exact);
    out.p_normal = round9(r.significance.p_normal);
  }
  out.chi2 = round9(r.scores.chi2);
  out.phi = round9(r.scores.phi);
  out.j = round9(r.scores.j);
  if (verdict) {
    out.imp = round9(verdict->improvement_value);
    out.classic = to_string(verdict->classic.status);
    out.closed = to_string(verdict->closed.status);
    out.productive = verdict->productive.redundant() ? "non-productive" : "productive";
    out.improvement = to_string(verdict->improvement.status);
    out.superiority = to_string(verdict->superiority.status);
  }
  return out;
}

inline const std::vector<std::string>& record_columns() {
  static const std::vector<std::string> cols{
      "antecedent", "consequent", "n",     "c11",      "c10",    "c01",        "c00",
      "fr",         "cf",         "gamma", "t",        "p_exact", "p_normal",  "chi2",
      "phi",        "j",          "imp",   "classic",  "closed", "productive", "improvement",
      "superiority"};
  return cols;
}

namespace detail {

// Visits every field of a record in column order as (name, reference).
template <typename R, typename F>
void visit_fields(R& r, F&& f) {
  f("antecedent", r.antecedent);
  f("consequent", r.consequent);
  f("n", r.n);
  f("c11", r.c11);
  f("c10", r.c10);
  f("c01", r.c01);
  f("c00", r.c00);
  f("fr", r.fr);
  f("cf", r.cf);
  f("gamma", r.gamma);
  f("t", r.t);
  f("p_exact", r.p_exact);
  f("p_normal", r.p_normal);
  f("chi2", r.chi2);
  f("phi", r.phi);
  f("j", r.j);
  f("imp", r.imp);
  f("classic", r.classic);
  f("closed", r.closed);
  f("productive", r.productive);
  f("improvement", r.improvement);
  f("superiority", r.superiority);
}

inline std::string tsv_cell(const std::string& s) { return s; }
inline std::string tsv_cell(std::int64_t v) { return std::to_string(v); }
inline std::string tsv_cell(const std::optional<double>& v) { return v ? format9(*v) : "NA"; }
inline std::string tsv_cell(const std::optional<std::string>& v) { return v ? *v : "NA"; }

inline void parse_cell(std::string_view cell, std::string& out) { out = cell; }
inline void parse_cell(std::string_view cell, std::int64_t& out) {
  std::size_t used = 0;
  const std::string s(cell);
  try {
    out = std::stoll(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw usage_error("bad integer '" + s + "'");
}
inline void parse_cell(std::string_view cell, std::optional<double>& out) {
  if (cell == "NA") {
    out.reset();
    return;
  }
  const std::string s(cell);
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) throw usage_error("bad number '" + s + "'");
}
inline void parse_cell(std::string_view cell, std::optional<std::string>& out) {
  if (cell == "NA") {
    out.reset();
  } else {
    out = std::string(cell);
  }
}

}  // namespace detail

inline std::string tsv_header() {
  std::string out;
  for (const std::string& c : record_columns()) out += (out.empty() ? "" : "\t") + c;
  return out;
}

inline std::string to_tsv(const RuleRecord& r) {
  std::string out;
  bool first = true;
  detail::visit_fields(r, [&](const char*, const auto& v) {
    if (!first) out += '\t';
    first = false;
    out += detail::tsv_cell(v);
  });
  return out;
}

inline RuleRecord record_from_tsv(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    cells.push_back(line.substr(start, tab == std::string_view::npos ? tab : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  if (cells.size() != record_columns().size()) {
    throw usage_error("record has " + std::to_string(cells.size()) + " cells, expected " +
                      std::to_string(record_columns().size()));
  }
  RuleRecord r;
  std::size_t i = 0;
  detail::visit_fields(r, [&](const char*, auto& v) { detail::parse_cell(cells[i++], v); });
  return r;
}

inline void to_json(nlohmann::json& j, const RuleRecord& r) {
  j = nlohmann::json::object();
  detail::visit_fields(r, [&](const char* name, const auto& v) {
    using V = std::decay_t<decltype(v)>;
    if constexpr (std::is_same_v<V, std::optional<double>> ||
                  std::is_same_v<V, std::optional<std::string>>) {
      j[name] = v ? nlohmann::json(*v) : nlohmann::json(nullptr);
    } else {
      j[name] = v;
    }
  });
}

inline void from_json(const nlohmann::json& j, RuleRecord& r) {
  detail::visit_fields(r, [&](const char* name, auto& v) {
    using V = std::decay_t<decltype(v)>;
    const nlohmann::json& cell = j.at(name);
    if constexpr (std::is_same_v<V, std::optional<double>> ||
                  std::is_same_v<V, std::optional<std::string>>) {
      if (cell.is_null()) {
        v.reset();
      } else {
        v = cell.get<typename V::value_type>();
      }
    } else {
      cell.get_to(v);
    }
  });
}

/// Parses `lit(,lit)*=>lit(,lit)*` with `lit := [!]name` against `rel`.
inline std::pair<Event, Event> parse_rule_spec(const Relation& rel, std::string_view spec) {
  const auto arrow = spec.find("=>");
  if (arrow == std::string_view::npos) throw usage_error("rule spec needs '=>': " + std::string(spec));
  auto side = [&](std::string_view text, const char* which) {
    std::vector<Literal> lits;
    std::size_t start = 0;
    while (true) {
      const auto comma = text.find(',', start);
      std::string_view tok =
          detail::trim(text.substr(start, comma == std::string_view::npos ? comma : comma - start));
      bool value = true;
      if (!tok.empty() && tok.front() == '!') {
        value = false;
        tok = detail::trim(tok.substr(1));
      }
      if (tok.empty()) throw usage_error(std::string("empty literal in rule ") + which);
      lits.push_back({rel.attribute(tok), value});
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    return Event(std::move(lits));
  };
  Event x = side(spec.substr(0, arrow), "antecedent");
  Event y = side(spec.substr(arrow + 2), "consequent");
  if (x.shares_attribute_with(y)) throw usage_error("antecedent and consequent share an attribute");
  return {std::move(x), std::move(y)};
}

}  // namespace sigrule
