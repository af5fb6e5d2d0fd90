#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sigrule/errors.hpp"
#include "sigrule/table.hpp"

// Interestingness measures of a rule X -> Y over its 2x2 table, and set-level
// measures over a JointDistribution. Probabilities are maximum-likelihood
// frequencies; nothing is smoothed. A measure that has no value on its input
// throws undefined_measure; measure_report() turns those into empty optionals.
// Information measures are in bits.

namespace sigrule {

namespace detail {

inline void require_nondegenerate(const CellProbabilities& c, const char* what) {
  if (!(c.x > 0 && c.nx > 0 && c.y > 0 && c.ny > 0)) {
    throw undefined_measure(std::string(what) + " needs both marginals strictly inside (0,1)");
  }
}

/// joint * log2(joint / (p_cond * p_other)) with 0 log 0 = 0.
inline double information_term(double joint, double p_a, double p_b) {
  if (joint <= 0) return 0.0;
  return joint * std::log2(joint / (p_a * p_b));
}

}  // namespace detail

/// fr = P(X,Y).
template <TwoByTwoTable T>
double frequency(const T& table) {
  return table.cells().xy;
}

/// cf = P(Y|X).
template <TwoByTwoTable T>
double confidence(const T& table) {
  const CellProbabilities c = table.cells();
  if (!(c.x > 0)) throw undefined_measure("confidence needs P(X) > 0");
  return c.xy / c.x;
}

/// d = P(X,Y) - P(X)P(Y).
template <TwoByTwoTable T>
double dependence_value(const T& table) {
  return table.cells().dependence();
}

/// r = d / (P(X)P(Y)).
template <TwoByTwoTable T>
double relative_difference(const T& table) {
  const CellProbabilities c = table.cells();
  if (!(c.x * c.y > 0)) throw undefined_measure("relative difference needs P(X)P(Y) > 0");
  return c.dependence() / (c.x * c.y);
}

/// Degree of dependence P(X,Y) / (P(X)P(Y)) = 1 + r.
template <TwoByTwoTable T>
double gamma(const T& table) {
  const CellProbabilities c = table.cells();
  if (!(c.x * c.y > 0)) throw undefined_measure("gamma needs P(X)P(Y) > 0");
  return c.xy / (c.x * c.y);
}

/// Two-way chi-square, n d^2 / (P(X)P(~X)P(Y)P(~Y)).
template <TwoByTwoTable T>
double chi2_rule(const T& table) {
  const CellProbabilities c = table.cells();
  detail::require_nondegenerate(c, "chi2");
  const double d = c.dependence();
  return table.size() * d * d / (c.x * c.nx * c.y * c.ny);
}

/// Correlation coefficient of the two indicator variables.
template <TwoByTwoTable T>
double phi(const T& table) {
  const CellProbabilities c = table.cells();
  detail::require_nondegenerate(c, "phi");
  return c.dependence() / std::sqrt(c.x * c.nx * c.y * c.ny);
}

/// J(C|X) = P(X,C) log P(C|X)/P(C) + P(X,~C) log P(~C|X)/P(~C), in bits.
template <TwoByTwoTable T>
double j_measure(const T& table) {
  const CellProbabilities c = table.cells();
  if (!(c.x > 0)) throw undefined_measure("J-measure needs P(X) > 0");
  if (!(c.y > 0 && c.ny > 0)) throw undefined_measure("J-measure needs 0 < P(C) < 1");
  return detail::information_term(c.xy, c.x, c.y) + detail::information_term(c.x_ny, c.x, c.ny);
}

/// MI(X,C) = J(C|X) + J(C|~X), in bits.
template <TwoByTwoTable T>
double mutual_information_rule(const T& table) {
  const CellProbabilities c = table.cells();
  detail::require_nondegenerate(c, "mutual information");
  return j_measure(table) + j_measure(table.negate_antecedent());
}

/// Set-level chi-square of independence of all attributes of `dist`, scaled by n.
inline double chi2_set(const JointDistribution& dist, double n) {
  const std::size_t l = dist.attributes();
  std::vector<double> p1(l);
  for (std::size_t i = 0; i < l; ++i) {
    p1[i] = dist.marginal(i, true);
    if (!(p1[i] > 0 && dist.marginal(i, false) > 0)) {
      throw undefined_measure("chi2 of a set needs every marginal strictly inside (0,1)");
    }
  }
  double sum = 0;
  for (std::size_t cell = 0; cell < dist.cells().size(); ++cell) {
    double expected = 1.0;
    for (std::size_t i = 0; i < l; ++i) expected *= ((cell >> i) & 1U) ? p1[i] : 1.0 - p1[i];
    const double diff = dist.cells()[cell] - expected;
    sum += diff * diff / expected;
  }
  return n * sum;
}

/// Interest of an assignment: P(A1=a1..Al=al) / prod P(Ai=ai).
inline double interest_rho(const JointDistribution& dist, const Event& assignment) {
  double expected = 1.0;
  for (const Literal& l : assignment) {
    const double p = dist.marginal(l.attr.index, l.value);
    if (!(p > 0)) throw undefined_measure("interest needs positive single-attribute marginals");
    expected *= p;
  }
  return dist.probability(assignment) / expected;
}

/// Largest s such that at least a fraction p of the cells have probability >= s,
/// i.e. the ceil(p * 2^l)-th largest cell.
inline double brin_cell_frequency(const JointDistribution& dist, double p) {
  if (!(p > 0 && p <= 1)) throw usage_error("cell fraction p must lie in (0,1]");
  std::vector<double> cells(dist.cells().begin(), dist.cells().end());
  std::sort(cells.begin(), cells.end(), std::greater<>());
  const double wanted = p * static_cast<double>(cells.size());
  auto rank = static_cast<std::size_t>(std::ceil(wanted - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, cells.size());
  return cells[rank - 1];
}

/// Largest set size l for which brin_cell_frequency can still reach min_fr:
/// floor(-log2(p * min_fr)).
inline int brin_max_set_size(double p, double min_fr) {
  if (!(p > 0 && p <= 1) || !(min_fr > 0 && min_fr <= 1)) {
    throw usage_error("p and min_fr must lie in (0,1]");
  }
  return static_cast<int>(std::floor(-std::log2(p * min_fr)));
}

/// Every rule-level measure; an empty optional marks a measure that is
/// undefined on the table.
struct MeasureReport {
  std::optional<double> fr, cf, d, r, gamma, t, chi2, phi, j, mi, rho;
};

namespace detail {

template <typename F>
std::optional<double> guarded(F&& f) {
  try {
    return f();
  } catch (const undefined_measure&) {
    return std::nullopt;
  }
}

}  // namespace detail

}  // namespace sigrule
