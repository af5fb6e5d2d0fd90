#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>

#include "sigrule/errors.hpp"
#include "sigrule/measures.hpp"
#include "sigrule/relation.hpp"
#include "sigrule/table.hpp"

namespace sigrule {

/// Exact binomial tails are evaluated up to this data size; above it only the
/// normal approximation is reported.
inline constexpr std::int64_t exact_binomial_limit = 100000;

struct SignificanceConfig {
  double K = 2.0;
  std::optional<std::int64_t> bonferroni_tests;
  double approx_rule_min_expected = 5.0;

  /// sqrt(m) * K when a Bonferroni test count m is set.
  double effective_level() const {
    if (!bonferroni_tests) return K;
    return std::sqrt(static_cast<double>(*bonferroni_tests)) * K;
  }
};

struct SignificanceResult {
  double t_value = 0;
  std::optional<double> p_exact;
  std::optional<double> p_normal;
  bool approx_valid = false;
  double expected_count = 0;
};

/// Standardized count of X,Y under independence:
/// (m(X,Y) - n P(X)P(Y)) / sqrt(n P(X)P(Y) (1 - P(X)P(Y))).
template <TwoByTwoTable T>
double t_statistic(const T& table) {
  const CellProbabilities c = table.cells();
  const double p0 = c.x * c.y;
  if (!(p0 > 0 && p0 < 1)) throw undefined_measure("t needs 0 < P(X)P(Y) < 1");
  return std::sqrt(table.size()) * c.dependence() / std::sqrt(p0 * (1.0 - p0));
}

namespace detail {

inline double standardized(double observed_p, double expected_p, double n) {
  if (!(expected_p > 0 && expected_p < 1)) {
    throw undefined_measure("t needs the independence expectation strictly inside (0,1)");
  }
  return std::sqrt(n) * (observed_p - expected_p) / std::sqrt(expected_p * (1.0 - expected_p));
}

}  // namespace detail

/// t of a full assignment A1=a1..Al=al against mutual independence of all Ai.
inline double t_statistic_set(const Relation& rel, const Event& assignment) {
  double expected = 1.0;
  for (const Literal& l : assignment) expected *= rel.probability(Event{l});
  return detail::standardized(rel.probability(assignment), expected,
                              static_cast<double>(rel.rows()));
}

inline double t_statistic_set(const JointDistribution& dist, const Event& assignment, double n) {
  double expected = 1.0;
  for (const Literal& l : assignment) expected *= dist.marginal(l.attr.index, l.value);
  return detail::standardized(dist.probability(assignment), expected, n);
}

/// P(M >= m) for M ~ Binomial(n, p0). Terms are accumulated relative to the
/// largest term of the tail using the pmf ratio recurrence, so the result
/// neither underflows nor loses the small tail to cancellation.
inline double binomial_tail_p(std::int64_t m, std::int64_t n, double p0) {
  if (n < 0) throw usage_error("binomial size must be non-negative");
  if (m > n) throw usage_error("binomial tail start exceeds n");
  if (!(p0 >= 0 && p0 <= 1)) throw usage_error("binomial probability must lie in [0,1]");
  if (m <= 0) return 1.0;
  if (p0 == 0) return 0.0;
  if (p0 == 1) return 1.0;

  const double q0 = 1.0 - p0;
  const double odds = p0 / q0;
  const auto mode = static_cast<std::int64_t>(std::floor(static_cast<double>(n + 1) * p0));
  const std::int64_t peak = std::clamp(mode, m, n);
  const double nn = static_cast<double>(n);
  auto log_pmf = [&](std::int64_t i) {
    const double ii = static_cast<double>(i);
    return std::lgamma(nn + 1) - std::lgamma(ii + 1) - std::lgamma(nn - ii + 1) +
           ii * std::log(p0) + (nn - ii) * std::log1p(-p0);
  };

  constexpr double negligible = 1e-18;
  double sum = 1.0;
  double term = 1.0;
  for (std::int64_t i = peak; i < n; ++i) {
    term *= static_cast<double>(n - i) / static_cast<double>(i + 1) * odds;
    sum += term;
    if (term < negligible * sum) break;
  }
  term = 1.0;
  for (std::int64_t i = peak; i > m; --i) {
    term *= static_cast<double>(i) / static_cast<double>(n - i + 1) / odds;
    sum += term;
    if (term < negligible * sum) break;
  }
  return std::clamp(std::exp(log_pmf(peak)) * sum, 0.0, 1.0);
}

/// Upper tail 1 - Phi(t) of the standard normal.
inline double normal_tail_p(double t) { return 0.5 * std::erfc(t / std::sqrt(2.0)); }

/// Chebyshev's bound on P(t >= K): 1 / (2K^2).
inline double chebyshev_bound(double K) {
  if (!(K > 0)) throw usage_error("Chebyshev bound needs K > 0");
  return 1.0 / (2.0 * K * K);
}

/// Level K tightened for m simultaneous tests.
inline double bonferroni_level(double K, std::int64_t tests) {
  if (tests < 1) throw usage_error("Bonferroni adjustment needs at least one test");
  return std::sqrt(static_cast<double>(tests)) * K;
}

namespace detail {

inline void require_open_unit(double p, const char* what) {
  if (!(p > 0 && p < 1)) throw usage_error(std::string(what) + " must lie strictly inside (0,1)");
}

inline void require_size_level(double n, double K) {
  if (!(n >= 1)) throw usage_error("data size n must be at least 1");
  if (!(K >= 0)) throw usage_error("significance level K must be non-negative");
}

}  // namespace detail

/// Smallest P(X,Y) giving t >= K for fixed marginals:
/// P(X)P(Y) + K sqrt(P(X)P(Y)(1 - P(X)P(Y))) / sqrt(n).
inline double min_frequency_for_significance(double p_x, double p_y, double n, double K) {
  detail::require_open_unit(p_x, "P(X)");
  detail::require_open_unit(p_y, "P(Y)");
  detail::require_size_level(n, K);
  const double p0 = p_x * p_y;
  return p0 + K * std::sqrt(p0 * (1.0 - p0)) / std::sqrt(n);
}

/// Smallest P(Y|X) giving t >= K: the minimum frequency divided by P(X).
inline double min_confidence_for_significance(double p_x, double p_y, double n, double K) {
  return min_frequency_for_significance(p_x, p_y, n, K) / p_x;
}

/// P(X,Y) at which a rule with degree of dependence gamma has t = K:
/// K^2 gamma / (n (gamma - 1)^2 + K^2).
inline double frequency_at_level(double gamma, double n, double K) {
  if (!(gamma > 1)) throw usage_error("frequency at level K needs gamma > 1");
  detail::require_size_level(n, K);
  return K * K * gamma / (n * (gamma - 1) * (gamma - 1) + K * K);
}

/// Global minimum frequency below which no rule X\A -> A reaches t >= K, given
/// every literal has probability at least p_min:
/// K^2 p_min / (n (1 - p_min)^2 + K^2 p_min^2).
inline double safe_min_frequency(double p_min, double n, double K) {
  detail::require_open_unit(p_min, "p_min");
  detail::require_size_level(n, K);
  return K * K * p_min / (n * (1 - p_min) * (1 - p_min) + K * K * p_min * p_min);
}

/// t / sqrt(n) as a function of frequency and confidence for fixed P(Y).
/// Defined when P(Y|X) > P(X,Y) P(Y).
inline double t_hat_frequency_confidence(double fr, double cf, double p_y) {
  const double slack = cf - fr * p_y;
  if (!(p_y > 0) || !(slack > 0) || fr < 0) {
    throw undefined_measure("t-hat(fr, cf) needs P(Y|X) > P(X,Y)P(Y)");
  }
  return std::sqrt(fr) * (cf - p_y) / std::sqrt(p_y * slack);
}

/// t / sqrt(n) as a function of frequency and degree of dependence.
/// Defined when P(X,Y) gamma <= 1.
inline double t_hat_frequency_gamma(double fr, double gamma) {
  if (fr < 0 || !(gamma > 0) || fr * gamma > 1 + 1e-12 || !(gamma - fr > 0)) {
    throw undefined_measure("t-hat(fr, gamma) needs P(X,Y) gamma <= 1");
  }
  return std::sqrt(fr) * (gamma - 1) / std::sqrt(gamma - fr);
}

/// Upper bound on chi2(X -> C) over every specialization X of Z, from the
/// table of Z against the fixed consequent C.
template <TwoByTwoTable T>
double morishita_chi2_bound(const T& z_vs_c) {
  const CellProbabilities c = z_vs_c.cells();
  if (!(c.y > 0 && c.ny > 0)) throw usage_error("bound needs 0 < P(C) < 1");
  if (!(c.xy < 1 && c.x_ny < 1)) throw usage_error("bound needs P(Z,C) < 1 and P(Z,~C) < 1");
  const double n = z_vs_c.size();
  const double positive = n * c.xy * c.ny / ((1 - c.xy) * c.y);
  const double negative = n * c.x_ny * c.y / ((1 - c.x_ny) * c.ny);
  return std::max(positive, negative);
}

/// t with normal and, for integer tables up to exact_binomial_limit rows, exact
/// binomial tail probabilities.
template <TwoByTwoTable T>
SignificanceResult assess(const T& table, const SignificanceConfig& cfg = {}) {
  const CellProbabilities c = table.cells();
  const double n = table.size();
  const double p0 = c.x * c.y;
  SignificanceResult out;
  out.t_value = t_statistic(table);
  out.p_normal = normal_tail_p(out.t_value);
  out.expected_count = n * p0;
  out.approx_valid = n * p0 > cfg.approx_rule_min_expected &&
                     n * (1 - p0) > cfg.approx_rule_min_expected;
  if constexpr (std::is_same_v<T, ContingencyTable>) {
    if (table.n() <= exact_binomial_limit) {
      out.p_exact = binomial_tail_p(table.c11, table.n(), p0);
    }
  }
  return out;
}

template <TwoByTwoTable T>
MeasureReport measure_report(const T& table) {
  MeasureReport r;
  r.fr = frequency(table);
  r.cf = detail::guarded([&] { return confidence(table); });
  r.d = dependence_value(table);
  r.r = detail::guarded([&] { return relative_difference(table); });
  r.gamma = detail::guarded([&] { return gamma(table); });
  r.t = detail::guarded([&] { return t_statistic(table); });
  r.chi2 = detail::guarded([&] { return chi2_rule(table); });
  r.phi = detail::guarded([&] { return phi(table); });
  r.j = detail::guarded([&] { return j_measure(table); });
  r.mi = detail::guarded([&] { return mutual_information_rule(table); });
  r.rho = r.gamma;
  return r;
}

}  // namespace sigrule
