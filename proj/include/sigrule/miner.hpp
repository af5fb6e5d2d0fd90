#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <thread>
#include <vector>

#include "sigrule/errors.hpp"
#include "sigrule/measures.hpp"
#include "sigrule/relation.hpp"
#include "sigrule/significance.hpp"
#include "sigrule/table.hpp"

namespace sigrule {

enum class LiteralPolicy { positive_only, all };

struct MineConfig {
  double K = 2.0;
  std::size_t max_len = 0;         // 0: no limit beyond k
  std::optional<double> min_fr;    // unset: safe floor from K, n and p_min
  std::optional<Literal> consequent;
  LiteralPolicy literals = LiteralPolicy::positive_only;
  bool bonferroni = false;
  std::optional<std::int64_t> bonferroni_tests;  // implies bonferroni
  unsigned threads = 1;
};

struct FrequentSet {
  Event items;
  std::int64_t support = 0;
};

struct FrequentSets {
  std::vector<FrequentSet> sets;  // sorted by Event
  std::vector<Literal> admitted;
  double floor = 0;
  std::int64_t min_count = 1;
  double p_min = 0;
  bool floor_exceeds_one = false;

  /// Support of a mined event, or nullopt if it was not frequent.
  std::optional<std::int64_t> find(const Event& e) const {
    auto it = std::lower_bound(sets.begin(), sets.end(), e,
                               [](const FrequentSet& s, const Event& x) { return s.items < x; });
    if (it == sets.end() || it->items != e) return std::nullopt;
    return it->support;
  }
};

struct Rule {
  Event antecedent;
  Event consequent;
  ContingencyTable table;
  MeasureReport scores;
  double t = 0;
  SignificanceResult significance;
};

/// Scores X -> Y from its contingency table. Throws undefined_measure if t is
/// undefined.
inline Rule make_rule(Event antecedent, Event consequent, const ContingencyTable& table) {
  if (consequent.empty()) throw usage_error("rule needs a nonempty consequent");
  if (antecedent.shares_attribute_with(consequent)) {
    throw usage_error("antecedent and consequent share an attribute");
  }
  Rule r{std::move(antecedent), std::move(consequent), table, measure_report(table), 0, {}};
  r.significance = assess(table);
  r.t = r.significance.t_value;
  return r;
}

/// The empty antecedent is allowed and gives the baseline rule with cf = P(Y).
inline Rule make_rule(const Relation& rel, Event antecedent, Event consequent) {
  const ContingencyTable table = ContingencyTable::from_relation(rel, antecedent, consequent);
  return make_rule(std::move(antecedent), std::move(consequent), table);
}

namespace detail {

inline std::size_t effective_max_len(const Relation& rel, const MineConfig& cfg) {
  if (cfg.max_len == 0) return rel.attributes();
  return std::min(cfg.max_len, rel.attributes());
}

/// Literals that may appear in mined sets, in Literal order. Zero-probability
/// literals are dropped; a fixed consequent is always admitted and its
/// opposite polarity never is.
inline std::vector<Literal> admitted_literals(const Relation& rel, const MineConfig& cfg) {
  std::vector<Literal> out;
  for (std::uint32_t a = 0; a < rel.attributes(); ++a) {
    for (bool value : {false, true}) {
      const Literal l{AttributeId{a}, value};
      const bool fixed = cfg.consequent && *cfg.consequent == l;
      const bool opposite = cfg.consequent && cfg.consequent->attr == l.attr && !fixed;
      if (opposite) continue;
      if (!fixed && !value && cfg.literals == LiteralPolicy::positive_only) continue;
      if (rel.support(Event{l}) == 0) continue;
      out.push_back(l);
    }
  }
  return out;
}

inline void extend(const Relation& rel, std::span<const Literal> lits, std::size_t last,
                   const Event& prefix, const BitVector& cover, std::size_t max_len,
                   std::int64_t min_count, std::vector<FrequentSet>& out) {
  for (std::size_t j = last + 1; j < lits.size(); ++j) {
    if (lits[j].attr == lits[last].attr) continue;
    BitVector next = cover;
    next &= rel.column(lits[j]);
    const auto support = static_cast<std::int64_t>(next.count());
    if (support < min_count) continue;
    Event e = prefix.with(lits[j]);
    if (e.size() < max_len) extend(rel, lits, j, e, next, max_len, min_count, out);
    out.push_back({std::move(e), support});
  }
}

}  // namespace detail

/// Depth-first enumeration of every event over the admitted literals with
/// support >= the floor and size <= max_len. Top-level branches run in
/// parallel; output order does not depend on the thread count.
inline FrequentSets mine_frequent_sets(const Relation& rel, const MineConfig& cfg) {
  if (cfg.min_fr && !(*cfg.min_fr > 0 && *cfg.min_fr <= 1)) {
    throw usage_error("explicit min_fr must lie in (0,1]");
  }
  const double n = static_cast<double>(rel.rows());
  FrequentSets result;
  result.admitted = detail::admitted_literals(rel, cfg);

  double p_min = 1.0;
  for (const Literal& l : result.admitted) p_min = std::min(p_min, rel.probability(Event{l}));
  result.p_min = std::max(p_min, 1.0 / n);

  if (cfg.min_fr) {
    result.floor = *cfg.min_fr;
  } else if (result.p_min < 1.0) {
    result.floor = safe_min_frequency(result.p_min, n, cfg.K);
  } else {
    result.floor = 1.0;
  }
  if (result.floor > 1.0) {
    result.floor_exceeds_one = true;
    return result;
  }
  result.min_count = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(result.floor * n - 1e-9)));

  const std::size_t max_len = detail::effective_max_len(rel, cfg);
  const std::span<const Literal> lits = result.admitted;
  const unsigned workers = std::max(1U, std::min<unsigned>(cfg.threads, static_cast<unsigned>(lits.size())));
  std::vector<std::vector<FrequentSet>> partial(lits.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < lits.size(); i = next++) {
      const BitVector& cover = rel.column(lits[i]);
      const auto support = static_cast<std::int64_t>(cover.count());
      if (support < result.min_count) continue;
      Event e{lits[i]};
      if (max_len > 1) detail::extend(rel, lits, i, e, cover, max_len, result.min_count, partial[i]);
      partial[i].push_back({std::move(e), support});
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }

  for (auto& p : partial) {
    std::move(p.begin(), p.end(), std::back_inserter(result.sets));
  }
  std::sort(result.sets.begin(), result.sets.end(),
            [](const FrequentSet& a, const FrequentSet& b) { return a.items < b.items; });
  return result;
}

struct RuleSet {
  std::vector<Rule> rules;
  std::size_t undefined = 0;  // candidates dropped because t is undefined
};

/// Every single-literal-consequent partition of every frequent set of size >= 2.
inline RuleSet generate_rules(const FrequentSets& sets, const Relation& rel, const MineConfig& cfg) {
  RuleSet out;
  const auto n = static_cast<std::int64_t>(rel.rows());
  for (const FrequentSet& s : sets.sets) {
    if (s.items.size() < 2) continue;
    for (const Literal& y : s.items) {
      if (cfg.consequent && *cfg.consequent != y) continue;
      Event antecedent = s.items.without(y.attr);
      Event consequent{y};
      const auto m_x = sets.find(antecedent);
      const auto m_y = sets.find(consequent);
      if (!m_x || !m_y) throw error("frequent set collection is not downward closed");
      const auto table = ContingencyTable::from_supports(n, *m_x, *m_y, s.support);
      try {
        out.rules.push_back(make_rule(std::move(antecedent), std::move(consequent), table));
      } catch (const undefined_measure&) {
        ++out.undefined;
      }
    }
  }
  return out;
}

/// Level a rule's t must reach: K, or sqrt(m) K under Bonferroni with m
/// defaulting to the number of rules tested.
inline double effective_level(const MineConfig& cfg, std::size_t tested) {
  if (!cfg.bonferroni && !cfg.bonferroni_tests) return cfg.K;
  const std::int64_t m = cfg.bonferroni_tests.value_or(static_cast<std::int64_t>(std::max<std::size_t>(tested, 1)));
  return bonferroni_level(cfg.K, m);
}

/// Ranking order: t descending, then smaller antecedent, then literal order.
inline bool ranks_before(const Rule& a, const Rule& b) {
  if (a.t != b.t) return a.t > b.t;
  if (a.antecedent.size() != b.antecedent.size()) return a.antecedent.size() < b.antecedent.size();
  if (a.antecedent != b.antecedent) return a.antecedent < b.antecedent;
  return a.consequent < b.consequent;
}

inline void sort_ranked(std::vector<Rule>& rules) { std::sort(rules.begin(), rules.end(), ranks_before); }

inline std::vector<Rule> rank_significant(std::span<const Rule> rules, double level) {
  std::vector<Rule> out;
  for (const Rule& r : rules) {
    if (r.t >= level) out.push_back(r);
  }
  sort_ranked(out);
  return out;
}

inline std::vector<Rule> rank_significant(const RuleSet& rules, const MineConfig& cfg) {
  return rank_significant(rules.rules, effective_level(cfg, rules.rules.size()));
}

struct MineReport {
  FrequentSets frequent;
  RuleSet candidates;
  std::vector<Rule> significant;
  double level = 0;
  std::int64_t tests = 0;
};

inline MineReport mine(const Relation& rel, const MineConfig& cfg) {
  MineReport report;
  report.frequent = mine_frequent_sets(rel, cfg);
  report.candidates = generate_rules(report.frequent, rel, cfg);
  report.tests = cfg.bonferroni_tests.value_or(static_cast<std::int64_t>(report.candidates.rules.size()));
  report.level = effective_level(cfg, report.candidates.rules.size());
  report.significant = rank_significant(report.candidates.rules, report.level);
  return report;
}

}  // namespace sigrule
