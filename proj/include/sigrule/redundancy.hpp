#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "sigrule/errors.hpp"
#include "sigrule/measures.hpp"
#include "sigrule/miner.hpp"
#include "sigrule/relation.hpp"
#include "sigrule/significance.hpp"
#include "sigrule/table.hpp"

// Post-processing checks of a rule X -> Y against its generalizations Z -> Y'
// with Z a strict subset of X. Count equalities are exact; real-valued
// comparisons use a relative tolerance and treat ties as "not greater".

namespace sigrule {

enum class CheckStatus { minimal, redundant, inapplicable };

inline const char* to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::minimal: return "minimal";
    case CheckStatus::redundant: return "redundant";
    case CheckStatus::inapplicable: return "inapplicable";
  }
  return "?";
}

struct CheckResult {
  CheckStatus status = CheckStatus::minimal;
  std::vector<Rule> witnesses;

  bool redundant() const noexcept { return status == CheckStatus::redundant; }
};

inline constexpr double relative_tolerance = 1e-12;

namespace detail {

inline bool strict_generalization(const Rule& general, const Rule& rule) {
  return general.antecedent.size() < rule.antecedent.size() &&
         general.antecedent.is_subset_of(rule.antecedent);
}

/// a/b < c/d for non-negative counts with positive denominators.
inline bool ratio_less(std::int64_t a, std::int64_t b, std::int64_t c, std::int64_t d) {
  __extension__ using wide = __int128;
  return static_cast<wide>(a) * d < static_cast<wide>(c) * b;
}

inline CheckResult finish(std::vector<Rule> witnesses) {
  CheckResult r;
  r.status = witnesses.empty() ? CheckStatus::minimal : CheckStatus::redundant;
  r.witnesses = std::move(witnesses);
  return r;
}

}  // namespace detail

/// Rule whose t may be undefined (t is NaN then). Used for generalizations such
/// as the baseline with an empty antecedent.
inline Rule describe_rule(Event antecedent, Event consequent, const ContingencyTable& table) {
  Rule r{std::move(antecedent), std::move(consequent), table, measure_report(table),
         std::numeric_limits<double>::quiet_NaN(), {}};
  if (r.scores.t) {
    r.significance = assess(table);
    r.t = *r.scores.t;
  }
  return r;
}

inline Rule describe_rule(const Relation& rel, Event antecedent, Event consequent) {
  const auto table = ContingencyTable::from_relation(rel, antecedent, consequent);
  return describe_rule(std::move(antecedent), std::move(consequent), table);
}

/// Redundant if some nonempty Z, strict subset of X, has the same consequent
/// and the same count m(Z,Y) = m(X,Y).
inline CheckResult check_classic_redundancy(const Rule& rule, std::span<const Rule> generalizations) {
  std::vector<Rule> w;
  for (const Rule& g : generalizations) {
    if (g.antecedent.empty() || !detail::strict_generalization(g, rule)) continue;
    if (g.consequent != rule.consequent) continue;
    if (g.table.c11 == rule.table.c11) w.push_back(g);
  }
  return detail::finish(std::move(w));
}

/// Redundant if some X' -> Y' with X' a nonempty strict subset of X and Y' a
/// nonempty subset of Y has m(X',Y') = m(X,Y) and m(X') = m(X).
inline CheckResult check_closed_redundancy(const Rule& rule, std::span<const Rule> candidates) {
  std::vector<Rule> w;
  for (const Rule& g : candidates) {
    if (g.antecedent.empty() || !detail::strict_generalization(g, rule)) continue;
    if (g.consequent.empty() || !g.consequent.is_subset_of(rule.consequent)) continue;
    if (g.table.c11 == rule.table.c11 && g.table.m_x() == rule.table.m_x()) w.push_back(g);
  }
  return detail::finish(std::move(w));
}

/// Non-productive (status redundant) if P(Y|X) <= P(Y|Z) for some Z strictly
/// inside X, the empty antecedent included. The baseline cf = P(Y) is taken
/// from the rule's own table, so it need not appear in `generalizations`.
inline CheckResult check_productive(const Rule& rule, std::span<const Rule> generalizations) {
  const ContingencyTable& t = rule.table;
  if (t.m_x() == 0) throw undefined_measure("productivity needs P(X) > 0");
  std::vector<Rule> w;
  bool baseline_seen = false;
  for (const Rule& g : generalizations) {
    if (!detail::strict_generalization(g, rule) || g.consequent != rule.consequent) continue;
    baseline_seen = baseline_seen || g.antecedent.empty();
    if (!detail::ratio_less(g.table.c11, g.table.m_x(), t.c11, t.m_x())) w.push_back(g);
  }
  if (!baseline_seen && !rule.antecedent.empty() &&
      !detail::ratio_less(t.m_y(), t.n(), t.c11, t.m_x())) {
    const auto base = ContingencyTable::from_supports(t.n(), t.n(), t.m_y(), t.m_y());
    w.push_back(describe_rule(Event{}, rule.consequent, base));
  }
  return detail::finish(std::move(w));
}

/// cf(X -> Y) - max cf(Z -> Y) over strict generalizations Z, the empty
/// antecedent (cf = P(Y)) always included.
inline double improvement(const Rule& rule, std::span<const Rule> generalizations) {
  const ContingencyTable& t = rule.table;
  const double cf = confidence(t);
  double best = static_cast<double>(t.m_y()) / static_cast<double>(t.n());
  for (const Rule& g : generalizations) {
    if (!detail::strict_generalization(g, rule) || g.consequent != rule.consequent) continue;
    if (g.table.m_x() > 0) best = std::max(best, confidence(g.table));
  }
  return cf - best;
}

namespace detail {

struct SuperiorityTerms {
  double ratio;      // (P(Y|X) - P(Y)) / (P(Y|Z) - P(Y))
  double threshold;  // sqrt(1 - P(X)P(Y)) / sqrt(P(Q|Z) (1 - P(Z)P(Y)))
  double p_q_given_z;
};

template <TwoByTwoTable T>
std::optional<SuperiorityTerms> superiority_terms(const T& x_table, const T& z_table) {
  const CellProbabilities x = x_table.cells();
  const CellProbabilities z = z_table.cells();
  if (!(x.x > 0 && z.x > 0 && x.y > 0 && x.y < 1)) return std::nullopt;
  if (x.x > z.x) return std::nullopt;  // X must be a specialization of Z
  const double p_y = x.y;
  const double cf_x = x.xy / x.x;
  const double cf_z = z.xy / z.x;
  if (!(cf_z > p_y)) return std::nullopt;
  if (!(x.x * p_y < 1 && z.x * p_y < 1)) return std::nullopt;
  const double p_q = x.x / z.x;
  return SuperiorityTerms{(cf_x - p_y) / (cf_z - p_y),
                          std::sqrt(1 - x.x * p_y) / std::sqrt(p_q * (1 - z.x * p_y)), p_q};
}

}  // namespace detail

/// Whether X -> Y (X = Z and Q) is strictly more significant than Z -> Y,
/// decided from confidences and marginals. Empty when P(Y|Z) <= P(Y) or the
/// tables are degenerate.
template <TwoByTwoTable T>
std::optional<bool> superiority_condition(const T& x_table, const T& z_table) {
  const auto terms = detail::superiority_terms(x_table, z_table);
  if (!terms) return std::nullopt;
  return terms->ratio > terms->threshold * (1 + relative_tolerance);
}

/// True when the ratio form guarantees X -> Y is less significant than
/// Z -> Y: (P(Y|X) - P(Y)) / (P(Y|Z) - P(Y)) < 1 / sqrt(P(Q|Z)). Ties do not prune.
template <TwoByTwoTable T>
std::optional<bool> corollary_prune(const T& x_table, const T& z_table) {
  const auto terms = detail::superiority_terms(x_table, z_table);
  if (!terms) return std::nullopt;
  return terms->ratio < (1.0 / std::sqrt(terms->p_q_given_z)) * (1 - relative_tolerance);
}

/// Improvement at or below which the ratio form prunes:
/// (P(Y|Z) - P(Y)) (1 - sqrt(P(Q|Z))) / sqrt(P(Q|Z)).
inline double corollary_improvement_threshold(double cf_z, double p_y, double p_q_given_z) {
  if (!(p_q_given_z > 0 && p_q_given_z <= 1)) throw usage_error("P(Q|Z) must lie in (0,1]");
  const double s = std::sqrt(p_q_given_z);
  return (cf_z - p_y) * (1 - s) / s;
}

inline std::optional<bool> superiority_condition(const Rule& rule, const Rule& generalization) {
  return superiority_condition(rule.table, generalization.table);
}

inline std::optional<bool> corollary_prune(const Rule& rule, const Rule& generalization) {
  return corollary_prune(rule.table, generalization.table);
}

struct RedundancyVerdict {
  Rule rule;
  CheckResult classic, closed, productive, improvement, superiority;
  double improvement_value = 0;
};

/// Z -> Y for every strict subset Z of X; the empty Z only if include_empty.
inline std::vector<Rule> strict_generalizations(const Relation& rel, const Rule& rule,
                                                bool include_empty) {
  const std::size_t l = rule.antecedent.size();
  if (l > 30) throw usage_error("antecedent too long for exhaustive generalization");
  std::vector<Rule> out;
  const std::uint64_t full = (std::uint64_t{1} << l) - 1;
  for (std::uint64_t mask = 0; mask < full; ++mask) {
    if (mask == 0 && !include_empty) continue;
    out.push_back(describe_rule(rel, rule.antecedent.subset(mask), rule.consequent));
  }
  return out;
}

/// X' -> Y' with X' a nonempty strict subset of X and Y' a nonempty subset of Y.
inline std::vector<Rule> closed_candidates(const Relation& rel, const Rule& rule) {
  const std::size_t lx = rule.antecedent.size();
  const std::size_t ly = rule.consequent.size();
  if (lx + ly > 30) throw usage_error("rule too long for exhaustive generalization");
  std::vector<Rule> out;
  for (std::uint64_t mx = 1; mx < (std::uint64_t{1} << lx) - 1; ++mx) {
    for (std::uint64_t my = 1; my < (std::uint64_t{1} << ly); ++my) {
      out.push_back(describe_rule(rel, rule.antecedent.subset(mx), rule.consequent.subset(my)));
    }
  }
  return out;
}

inline RedundancyVerdict analyze(const Relation& rel, const Rule& rule, double min_imp = 0.0) {
  RedundancyVerdict v{rule, {}, {}, {}, {}, {}, 0};
  const std::vector<Rule> gens = strict_generalizations(rel, rule, true);
  v.classic = check_classic_redundancy(rule, gens);
  v.closed = check_closed_redundancy(rule, closed_candidates(rel, rule));
  v.productive = check_productive(rule, gens);
  v.improvement_value = improvement(rule, gens);
  if (v.improvement_value < min_imp) {
    v.improvement.status = CheckStatus::redundant;
    const Rule* best = nullptr;
    for (const Rule& g : gens) {
      if (g.table.m_x() == 0) continue;
      if (!best || confidence(g.table) > confidence(best->table)) best = &g;
    }
    if (best) v.improvement.witnesses.push_back(*best);
  }

  bool applicable = false;
  for (const Rule& g : gens) {
    if (g.antecedent.empty()) continue;
    const auto cond = superiority_condition(rule, g);
    if (!cond) continue;
    applicable = true;
    if (!*cond) v.superiority.witnesses.push_back(g);
  }
  if (!v.superiority.witnesses.empty()) {
    v.superiority.status = CheckStatus::redundant;
  } else if (!applicable) {
    v.superiority.status = CheckStatus::inapplicable;
  }
  return v;
}

}  // namespace sigrule
