#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "sigrule/errors.hpp"
#include "sigrule/relation.hpp"
#include "sigrule/table.hpp"

namespace sigrule {

/// probesim: C depends on {A,B} but the event (A,B,C) is independent.
/// probesim2: C depends on {A,B} and every event is dependent.
/// two_by_two: events X, Y with P(X,Y) = P(X)P(Y) + d.
/// epsilon_phi, epsilon_chi2: P(X) = P(Y) = 1 - eps with maximal d = eps(1 - eps).
enum class FamilyKind { probesim, probesim2, two_by_two, epsilon_phi, epsilon_chi2 };

inline const char* to_string(FamilyKind k) {
  switch (k) {
    case FamilyKind::probesim: return "probesim";
    case FamilyKind::probesim2: return "probesim2";
    case FamilyKind::two_by_two: return "two_by_two";
    case FamilyKind::epsilon_phi: return "epsilon_phi";
    case FamilyKind::epsilon_chi2: return "epsilon_chi2";
  }
  return "?";
}

inline FamilyKind family_from_string(std::string_view s) {
  for (FamilyKind k : {FamilyKind::probesim, FamilyKind::probesim2, FamilyKind::two_by_two,
                       FamilyKind::epsilon_phi, FamilyKind::epsilon_chi2}) {
    if (s == to_string(k)) return k;
  }
  throw usage_error("unknown family '" + std::string(s) + "'");
}

struct TableFamily {
  FamilyKind kind = FamilyKind::two_by_two;
  double pa = 0.5, pb = 0.5, pc = 0.5;
  std::optional<double> pab;  // P(A,B); defaults to pa * pb
  double px = 0.5, py = 0.5;
  double d = 0;
  double epsilon = 0;
};

namespace detail {

inline constexpr double legality_slack = 1e-12;

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(9);
  os << v;
  return os.str();
}

inline void require_probability(double p, const char* name) {
  if (!(p >= 0 && p <= 1)) throw construction_error(std::string(name) + " must lie in [0,1]");
}

inline std::vector<double> checked_cells(std::vector<double> cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (cells[i] < 0 && cells[i] >= -legality_slack) cells[i] = 0;
    if (!(cells[i] >= 0)) {
      throw construction_error("cell " + std::to_string(i) + " is negative (" + fmt(cells[i]) +
                               "); d exceeds the nonnegativity bound of that cell");
    }
  }
  return cells;
}

inline JointDistribution three_attribute(const TableFamily& f, bool all_dependent) {
  require_probability(f.pa, "P(A)");
  require_probability(f.pb, "P(B)");
  require_probability(f.pc, "P(C)");
  const double pab = f.pab.value_or(f.pa * f.pb);
  const double p_a_nb = f.pa - pab;
  const double p_na_b = f.pb - pab;
  const double p_na_nb = 1 - f.pa - f.pb + pab;
  if (!(pab >= 0 && p_a_nb >= -legality_slack && p_na_b >= -legality_slack &&
        p_na_nb >= -legality_slack)) {
    throw construction_error("P(A,B) is inconsistent with P(A) and P(B)");
  }
  if (f.d < 0) throw construction_error("d must be non-negative for this family");
  const double bound = std::min(p_a_nb * (1 - f.pc), (1 - p_a_nb) * f.pc);
  if (f.d > bound + legality_slack) {
    throw construction_error("d=" + fmt(f.d) + " exceeds min{P(A,~B)P(~C), (1-P(A,~B))P(C)} = " +
                             fmt(bound));
  }
  const double pc = f.pc, nc = 1 - f.pc, d = f.d;
  const double s = all_dependent ? 1.0 : 0.0;
  std::vector<double> cells(8);
  // index = a | b << 1 | c << 2
  cells[7] = pab * pc - s * d;
  cells[3] = pab * nc + s * d;
  cells[5] = p_a_nb * pc + d;
  cells[1] = p_a_nb * nc - d;
  cells[6] = p_na_b * pc - d;
  cells[2] = p_na_b * nc + d;
  cells[4] = p_na_nb * pc + s * d;
  cells[0] = p_na_nb * nc - s * d;
  return JointDistribution({"A", "B", "C"}, checked_cells(std::move(cells)));
}

inline JointDistribution two_by_two(double px, double py, double d) {
  require_probability(px, "P(X)");
  require_probability(py, "P(Y)");
  if (d > 0) {
    const double bound = std::min((1 - px) * py, px * (1 - py));
    if (d > bound + legality_slack) {
      throw construction_error("d=" + fmt(d) + " exceeds min{P(~X)P(Y), P(X)P(~Y)} = " + fmt(bound));
    }
  } else if (d < 0) {
    const double bound = std::min(px * py, (1 - px) * (1 - py));
    if (-d > bound + legality_slack) {
      throw construction_error("|d|=" + fmt(-d) + " exceeds min{P(X)P(Y), P(~X)P(~Y)} = " +
                               fmt(bound));
    }
  }
  // index = x | y << 1
  std::vector<double> cells{(1 - px) * (1 - py) + d, px * (1 - py) - d, (1 - px) * py - d,
                            px * py + d};
  return JointDistribution({"X", "Y"}, checked_cells(std::move(cells)));
}

}  // namespace detail

inline JointDistribution build_distribution(const TableFamily& f) {
  switch (f.kind) {
    case FamilyKind::probesim: return detail::three_attribute(f, false);
    case FamilyKind::probesim2: return detail::three_attribute(f, true);
    case FamilyKind::two_by_two: return detail::two_by_two(f.px, f.py, f.d);
    case FamilyKind::epsilon_phi:
    case FamilyKind::epsilon_chi2:
      if (!(f.epsilon > 0 && f.epsilon < 1)) throw construction_error("epsilon must lie in (0,1)");
      // Cells {~X~Y, X~Y, ~XY, XY} = {eps, 0, 0, 1 - eps}.
      return JointDistribution({"X", "Y"}, {f.epsilon, 0.0, 0.0, 1 - f.epsilon});
  }
  throw construction_error("unknown family");
}

/// n rows drawn i.i.d. from `dist`; the same seed gives the same relation.
inline Relation sample_relation(const JointDistribution& dist, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw usage_error("sample size must be at least 1");
  const auto cells = dist.cells();
  std::vector<double> cumulative(cells.size());
  double acc = 0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    acc += cells[i];
    cumulative[i] = acc;
    if (cells[i] > 0) last_positive = i;
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, acc);
  const std::size_t l = dist.attributes();
  std::vector<BitVector> cols(l, BitVector(n));
  for (std::size_t t = 0; t < n; ++t) {
    const double u = uniform(rng);
    auto cell = static_cast<std::size_t>(
        std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
    cell = std::min(cell, last_positive);
    while (cells[cell] == 0 && cell < last_positive) ++cell;
    for (std::size_t a = 0; a < l; ++a) {
      if ((cell >> a) & 1U) cols[a].set(t);
    }
  }
  std::vector<std::string> names(dist.names().begin(), dist.names().end());
  return Relation(std::move(names), std::move(cols));
}

}  // namespace sigrule
