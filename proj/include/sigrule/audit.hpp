#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sigrule/errors.hpp"
#include "sigrule/measures.hpp"
#include "sigrule/significance.hpp"
#include "sigrule/synth.hpp"
#include "sigrule/table.hpp"

// Type 1 / type 2 error audit of rule-selection measures. Ground truth is
// always t >= K. Each scenario yields the four companion rules X->Y, X->~Y,
// ~X->Y and ~X->~Y, where Y is the last attribute of the family and X the
// conjunction of the others.

namespace sigrule {

enum class AuditMeasure { fr_cf, fr_gamma, chi2, phi, j };

inline constexpr AuditMeasure all_audit_measures[] = {AuditMeasure::fr_cf, AuditMeasure::fr_gamma,
                                                      AuditMeasure::chi2, AuditMeasure::phi,
                                                      AuditMeasure::j};

inline const char* to_string(AuditMeasure m) {
  switch (m) {
    case AuditMeasure::fr_cf: return "fr_cf";
    case AuditMeasure::fr_gamma: return "fr_gamma";
    case AuditMeasure::chi2: return "chi2";
    case AuditMeasure::phi: return "phi";
    case AuditMeasure::j: return "j";
  }
  return "?";
}

inline const char* display_name(AuditMeasure m) {
  switch (m) {
    case AuditMeasure::fr_cf: return "fr&cf";
    case AuditMeasure::fr_gamma: return "fr&gamma";
    case AuditMeasure::chi2: return "chi2";
    case AuditMeasure::phi: return "phi";
    case AuditMeasure::j: return "J";
  }
  return "?";
}

inline AuditMeasure audit_measure_from_string(std::string_view s) {
  for (AuditMeasure m : all_audit_measures) {
    if (s == to_string(m) || s == display_name(m)) return m;
  }
  throw usage_error("unknown measure '" + std::string(s) + "'");
}

struct Scenario {
  std::string name;
  TableFamily family;
  std::vector<double> n_values;     // empty: use AuditConfig::n_values
  std::optional<double> t_target;   // two_by_two only: choose d so that t(X->Y) equals this
};

struct AuditConfig {
  double K = 2.0;
  double min_fr = 0.1;
  double min_cf = 0.6;
  std::optional<double> chi2_cutoff;  // default K^2
  double phi_cutoff = 0.5;
  std::vector<double> n_values{1e4};
  std::vector<AuditMeasure> measures =
      std::vector<AuditMeasure>(std::begin(all_audit_measures), std::end(all_audit_measures));
  std::vector<Scenario> scenarios;    // empty: default_scenarios()

  double chi2_level() const { return chi2_cutoff.value_or(K * K); }
};

struct Witness {
  std::string scenario;
  std::string rule;
  double n = 0;
  double t = 0;
  double score = 0;
  std::string partner;  // J only: the rule on the other side of the ordering contradiction
  std::map<std::string, double> params;

  friend bool operator==(const Witness&, const Witness&) = default;
};

struct MeasureAudit {
  AuditMeasure measure = AuditMeasure::fr_cf;
  bool type1 = false;
  bool type2 = false;
  std::vector<Witness> type1_witnesses;
  std::vector<Witness> type2_witnesses;
  std::size_t evaluated = 0;
  std::size_t undefined = 0;

  friend bool operator==(const MeasureAudit&, const MeasureAudit&) = default;
};

struct AuditReport {
  double K = 2.0;
  std::vector<MeasureAudit> rows;

  friend bool operator==(const AuditReport&, const AuditReport&) = default;
};

inline std::vector<Scenario> default_scenarios() {
  auto two = [](double px, double py, double d) {
    TableFamily f;
    f.kind = FamilyKind::two_by_two;
    f.px = px;
    f.py = py;
    f.d = d;
    return f;
  };
  auto eps = [](FamilyKind kind, double e) {
    TableFamily f;
    f.kind = kind;
    f.epsilon = e;
    return f;
  };
  auto three = [](FamilyKind kind) {
    TableFamily f;
    f.kind = kind;
    f.pa = 0.5;
    f.pb = 0.5;
    f.pc = 0.4;
    f.d = 0.05;
    return f;
  };
  return {
      {"chi2_epsilon", eps(FamilyKind::epsilon_chi2, 0.0004), {}, {}},
      {"phi_epsilon", eps(FamilyKind::epsilon_phi, 0.0004), {}, {}},
      {"phi_small_marginals", two(0.1, 0.1, 0), {1e3, 1e5, 1e7}, 3.0},
      {"j_complement_confidence", two(0.5, 0.5, -0.25), {}, {}},
      {"j_low_frequency", two(0.25, 0.5, 0.0625), {}, {}},
      {"frcf_independent_high_py", two(0.5, 0.9, 0), {}, {}},
      {"frcf_low_frequency_high_gamma", two(0.05, 0.05, 0.0175), {}, {}},
      {"frcf_confidence_example", two(0.5, 0.5, 0), {}, 10.0},
      {"probesim", three(FamilyKind::probesim), {}, {}},
      {"probesim2", three(FamilyKind::probesim2), {}, {}},
  };
}

/// One audited rule at one data size.
struct AuditCase {
  std::string scenario;
  std::string rule;
  ProbabilityTable table;
  double t = 0;
  std::map<std::string, double> params;
};

namespace detail {

inline std::map<std::string, double> family_params(const TableFamily& f) {
  switch (f.kind) {
    case FamilyKind::probesim:
    case FamilyKind::probesim2:
      return {{"pa", f.pa}, {"pb", f.pb}, {"pc", f.pc}, {"pab", f.pab.value_or(f.pa * f.pb)}, {"d", f.d}};
    case FamilyKind::two_by_two: return {{"px", f.px}, {"py", f.py}, {"d", f.d}};
    case FamilyKind::epsilon_phi:
    case FamilyKind::epsilon_chi2: return {{"epsilon", f.epsilon}};
  }
  return {};
}

/// The family at data size n, with d solved from t_target when set.
inline TableFamily family_at(const Scenario& s, double n) {
  TableFamily f = s.family;
  if (s.t_target) {
    if (f.kind != FamilyKind::two_by_two) throw usage_error("t_target needs the two_by_two family");
    const double p0 = f.px * f.py;
    f.d = *s.t_target * std::sqrt(p0 * (1 - p0)) / std::sqrt(n);
  }
  return f;
}

inline void add_companions(std::vector<AuditCase>& out, const std::string& scenario,
                           const std::vector<std::string>& names, const ProbabilityTable& base,
                           const std::map<std::string, double>& params) {
  std::string x, y = names.back();
  for (std::size_t i = 0; i + 1 < names.size(); ++i) x += (i ? "," : "") + names[i];
  const std::string nx = names.size() > 2 ? "!(" + x + ")" : "!" + x;
  const std::pair<std::string, ProbabilityTable> rules[] = {
      {x + "->" + y, base},
      {x + "->!" + y, base.negate_consequent()},
      {nx + "->" + y, base.negate_antecedent()},
      {nx + "->!" + y, base.negate_antecedent().negate_consequent()},
  };
  for (const auto& [label, table] : rules) {
    auto t = guarded([&] { return t_statistic(table); });
    if (!t) continue;
    out.push_back({scenario, label, table, *t, params});
  }
}

template <typename TableOf>
std::vector<AuditCase> collect_cases(const AuditConfig& cfg, TableOf table_of) {
  std::vector<AuditCase> out;
  const std::vector<Scenario> scenarios = cfg.scenarios.empty() ? default_scenarios() : cfg.scenarios;
  for (const Scenario& s : scenarios) {
    const std::vector<double>& ns = s.n_values.empty() ? cfg.n_values : s.n_values;
    for (double n : ns) {
      if (!(n >= 1)) throw usage_error("scenario '" + s.name + "' has n < 1");
      const TableFamily f = family_at(s, n);
      const JointDistribution dist = build_distribution(f);
      std::vector<std::string> names(dist.names().begin(), dist.names().end());
      add_companions(out, s.name, names, table_of(dist, n), family_params(f));
    }
  }
  return out;
}

inline Witness witness_of(const AuditCase& c, double score) {
  return {c.scenario, c.rule, c.table.size(), c.t, score, {}, c.params};
}

/// Accept/reject decision of a threshold measure, or nullopt if undefined.
inline std::optional<bool> accepts(AuditMeasure m, const AuditCase& c, const AuditConfig& cfg,
                                   double& score) {
  const ProbabilityTable& tb = c.table;
  switch (m) {
    case AuditMeasure::fr_cf: {
      const auto cf = guarded([&] { return confidence(tb); });
      if (!cf) return std::nullopt;
      score = *cf;
      return frequency(tb) >= cfg.min_fr && *cf >= cfg.min_cf;
    }
    case AuditMeasure::fr_gamma: {
      const auto g = guarded([&] { return gamma(tb); });
      const CellProbabilities cells = tb.cells();
      const double p_min = std::min(cells.y, cells.ny);
      if (!g || !(p_min > 0)) return std::nullopt;
      const double fr = cells.xy;
      const double floor = safe_min_frequency(p_min, tb.size(), cfg.K);
      const auto t_hat = guarded([&] { return t_hat_frequency_gamma(fr, *g); });
      score = t_hat ? std::sqrt(tb.size()) * *t_hat : 0.0;
      return fr >= floor && t_hat && score >= cfg.K;
    }
    case AuditMeasure::chi2: {
      const auto chi2 = guarded([&] { return chi2_rule(tb); });
      if (!chi2) return std::nullopt;
      score = *chi2;
      return dependence_value(tb) > 0 && *chi2 >= cfg.chi2_level();
    }
    case AuditMeasure::phi: {
      const auto p = guarded([&] { return phi(tb); });
      if (!p) return std::nullopt;
      score = *p;
      return *p >= cfg.phi_cutoff;
    }
    case AuditMeasure::j: break;
  }
  return std::nullopt;
}

inline MeasureAudit audit_threshold(AuditMeasure m, const std::vector<AuditCase>& cases,
                                    const AuditConfig& cfg) {
  MeasureAudit row;
  row.measure = m;
  for (const AuditCase& c : cases) {
    double score = 0;
    const auto accepted = accepts(m, c, cfg, score);
    if (!accepted) {
      ++row.undefined;
      continue;
    }
    ++row.evaluated;
    const bool significant = c.t >= cfg.K;
    if (*accepted && !significant) row.type1_witnesses.push_back(witness_of(c, score));
    if (!*accepted && significant) row.type2_witnesses.push_back(witness_of(c, score));
  }
  return row;
}

/// J has no cutoff; an error is an ordering contradiction where a spurious
/// rule has larger J than a significant one. Every cutoff then either accepts
/// the spurious rule or rejects the significant one.
inline MeasureAudit audit_j(const std::vector<AuditCase>& cases, const AuditConfig& cfg) {
  MeasureAudit row;
  row.measure = AuditMeasure::j;
  struct Scored {
    const AuditCase* c;
    double j;
  };
  std::vector<Scored> spurious, significant;
  for (const AuditCase& c : cases) {
    const auto j = guarded([&] { return j_measure(c.table); });
    if (!j) {
      ++row.undefined;
      continue;
    }
    ++row.evaluated;
    (c.t >= cfg.K ? significant : spurious).push_back({&c, *j});
  }
  if (spurious.empty() || significant.empty()) return row;
  auto by_j = [](const Scored& a, const Scored& b) { return a.j < b.j; };
  const Scored top_spurious = *std::max_element(spurious.begin(), spurious.end(), by_j);
  const Scored low_significant = *std::min_element(significant.begin(), significant.end(), by_j);
  auto label = [](const Scored& s) { return s.c->scenario + ":" + s.c->rule; };
  for (const Scored& s : spurious) {
    if (s.j > low_significant.j) {
      Witness w = witness_of(*s.c, s.j);
      w.partner = label(low_significant);
      row.type1_witnesses.push_back(std::move(w));
    }
  }
  for (const Scored& s : significant) {
    if (s.j < top_spurious.j) {
      Witness w = witness_of(*s.c, s.j);
      w.partner = label(top_spurious);
      row.type2_witnesses.push_back(std::move(w));
    }
  }
  return row;
}

inline AuditReport audit_cases(const std::vector<AuditCase>& cases, const AuditConfig& cfg) {
  AuditReport report;
  report.K = cfg.K;
  for (AuditMeasure m : cfg.measures) {
    MeasureAudit row = m == AuditMeasure::j ? audit_j(cases, cfg) : audit_threshold(m, cases, cfg);
    row.type1 = !row.type1_witnesses.empty();
    row.type2 = !row.type2_witnesses.empty();
    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace detail

/// Audit on exact distributions: each table is the family's probabilities at
/// nominal size n, free of sampling noise.
inline std::vector<AuditCase> analytic_cases(const AuditConfig& cfg) {
  return detail::collect_cases(cfg, [](const JointDistribution& dist, double n) {
    const std::size_t l = dist.attributes();
    std::vector<Literal> x;
    for (std::uint32_t i = 0; i + 1 < l; ++i) x.push_back(positive(i));
    return dist.table(Event(std::move(x)), Event{positive(static_cast<std::uint32_t>(l - 1))}, n);
  });
}

/// Audit on relations sampled from each family; a smoke test of the analytic
/// path, subject to sampling noise.
inline std::vector<AuditCase> empirical_cases(const AuditConfig& cfg, std::uint64_t seed) {
  std::uint64_t stream = 0;
  return detail::collect_cases(cfg, [&](const JointDistribution& dist, double n) {
    const Relation rel = sample_relation(dist, static_cast<std::size_t>(n), seed + stream++);
    const std::size_t l = dist.attributes();
    std::vector<Literal> x;
    for (std::uint32_t i = 0; i + 1 < l; ++i) x.push_back(positive(i));
    const auto ct = ContingencyTable::from_relation(
        rel, Event(std::move(x)), Event{positive(static_cast<std::uint32_t>(l - 1))});
    return ProbabilityTable::from_counts(ct);
  });
}

inline AuditReport audit_measures(const AuditConfig& cfg = {}) {
  return detail::audit_cases(analytic_cases(cfg), cfg);
}

inline AuditReport audit_measures_empirical(const AuditConfig& cfg, std::uint64_t seed) {
  return detail::audit_cases(empirical_cases(cfg, seed), cfg);
}

// JSON forms of the config and report.

inline void to_json(nlohmann::json& j, const Witness& w) {
  j = {{"scenario", w.scenario}, {"rule", w.rule}, {"n", w.n},          {"t", w.t},
       {"score", w.score},       {"partner", w.partner}, {"params", w.params}};
}

inline void from_json(const nlohmann::json& j, Witness& w) {
  j.at("scenario").get_to(w.scenario);
  j.at("rule").get_to(w.rule);
  j.at("n").get_to(w.n);
  j.at("t").get_to(w.t);
  j.at("score").get_to(w.score);
  w.partner = j.value("partner", std::string{});
  w.params = j.value("params", std::map<std::string, double>{});
}

inline void to_json(nlohmann::json& j, const MeasureAudit& m) {
  j = {{"measure", to_string(m.measure)},
       {"type1", m.type1},
       {"type2", m.type2},
       {"type1_witnesses", m.type1_witnesses},
       {"type2_witnesses", m.type2_witnesses},
       {"evaluated", m.evaluated},
       {"undefined", m.undefined}};
}

inline void from_json(const nlohmann::json& j, MeasureAudit& m) {
  m.measure = audit_measure_from_string(j.at("measure").get<std::string>());
  j.at("type1").get_to(m.type1);
  j.at("type2").get_to(m.type2);
  j.at("type1_witnesses").get_to(m.type1_witnesses);
  j.at("type2_witnesses").get_to(m.type2_witnesses);
  m.evaluated = j.value("evaluated", std::size_t{0});
  m.undefined = j.value("undefined", std::size_t{0});
}

inline void to_json(nlohmann::json& j, const AuditReport& r) { j = {{"K", r.K}, {"measures", r.rows}}; }

inline void from_json(const nlohmann::json& j, AuditReport& r) {
  j.at("K").get_to(r.K);
  j.at("measures").get_to(r.rows);
}

/// Scenario config document. Every key is optional; unknown keys are errors so
/// typos do not silently fall back to defaults.
inline AuditConfig audit_config_from_json(const nlohmann::json& j) {
  static const std::vector<std::string> top_keys{"K",          "min_fr",   "min_cf",   "chi2_cutoff",
                                                 "phi_cutoff", "n_values", "measures", "scenarios"};
  static const std::vector<std::string> scenario_keys{"name", "family", "pa", "pb", "pc", "pab",
                                                      "px",   "py",     "d",  "epsilon", "n_values",
                                                      "t_target"};
  auto check_keys = [](const nlohmann::json& obj, const std::vector<std::string>& allowed,
                       const std::string& where) {
    if (!obj.is_object()) throw usage_error(where + " must be an object");
    for (const auto& [key, value] : obj.items()) {
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        throw usage_error("unknown key '" + key + "' in " + where);
      }
    }
  };
  check_keys(j, top_keys, "audit config");
  AuditConfig cfg;
  try {
    cfg.K = j.value("K", cfg.K);
    cfg.min_fr = j.value("min_fr", cfg.min_fr);
    cfg.min_cf = j.value("min_cf", cfg.min_cf);
    if (j.contains("chi2_cutoff")) cfg.chi2_cutoff = j.at("chi2_cutoff").get<double>();
    cfg.phi_cutoff = j.value("phi_cutoff", cfg.phi_cutoff);
    if (j.contains("n_values")) cfg.n_values = j.at("n_values").get<std::vector<double>>();
    if (j.contains("measures")) {
      cfg.measures.clear();
      for (const auto& m : j.at("measures")) cfg.measures.push_back(audit_measure_from_string(m.get<std::string>()));
    }
    if (j.contains("scenarios")) {
      for (const auto& s : j.at("scenarios")) {
        check_keys(s, scenario_keys, "scenario");
        Scenario sc;
        sc.name = s.at("name").get<std::string>();
        sc.family.kind = family_from_string(s.at("family").get<std::string>());
        sc.family.pa = s.value("pa", sc.family.pa);
        sc.family.pb = s.value("pb", sc.family.pb);
        sc.family.pc = s.value("pc", sc.family.pc);
        if (s.contains("pab")) sc.family.pab = s.at("pab").get<double>();
        sc.family.px = s.value("px", sc.family.px);
        sc.family.py = s.value("py", sc.family.py);
        sc.family.d = s.value("d", sc.family.d);
        sc.family.epsilon = s.value("epsilon", sc.family.epsilon);
        if (s.contains("n_values")) sc.n_values = s.at("n_values").get<std::vector<double>>();
        if (s.contains("t_target")) sc.t_target = s.at("t_target").get<double>();
        cfg.scenarios.push_back(std::move(sc));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw usage_error(std::string("audit config: ") + e.what());
  }
  if (cfg.measures.empty()) throw usage_error("audit config selects no measures");
  return cfg;
}

}  // namespace sigrule
