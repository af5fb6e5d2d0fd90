#pragma once

#include <cmath>
#include <concepts>
#include <cstdint>
#include <numeric>
#include <utility>
#include <span>
#include <string>
#include <vector>

#include "sigrule/errors.hpp"
#include "sigrule/relation.hpp"

namespace sigrule {

/// Cell and marginal probabilities of a 2x2 table of events X (rows) and Y
/// (columns). Marginals are carried separately so count-based tables can
/// compute them exactly from integer sums.
struct CellProbabilities {
  double xy = 0, x_ny = 0, nx_y = 0, nx_ny = 0;
  double x = 0, y = 0, nx = 0, ny = 0;

  /// d = P(X,Y) - P(X)P(Y), evaluated as P(X,Y)P(~X,~Y) - P(X,~Y)P(~X,Y).
  double dependence() const noexcept { return xy * nx_ny - x_ny * nx_y; }
};

template <typename T>
concept TwoByTwoTable = requires(const T& t) {
  { t.cells() } -> std::same_as<CellProbabilities>;
  { t.size() } -> std::convertible_to<double>;
};

/// Observed joint counts of (X, Y). n = c11 + c10 + c01 + c00.
struct ContingencyTable {
  std::int64_t c11 = 0, c10 = 0, c01 = 0, c00 = 0;

  static ContingencyTable from_counts(std::int64_t c11, std::int64_t c10, std::int64_t c01,
                                      std::int64_t c00) {
    if (c11 < 0 || c10 < 0 || c01 < 0 || c00 < 0) throw usage_error("negative contingency count");
    if (c11 + c10 + c01 + c00 == 0) throw usage_error("empty contingency table");
    return {c11, c10, c01, c00};
  }

  /// Table from n, m(X), m(Y) and m(X,Y).
  static ContingencyTable from_supports(std::int64_t n, std::int64_t m_x, std::int64_t m_y,
                                        std::int64_t m_xy) {
    return from_counts(m_xy, m_x - m_xy, m_y - m_xy, n - m_x - m_y + m_xy);
  }

  static ContingencyTable from_relation(const Relation& rel, const Event& x, const Event& y) {
    return from_supports(static_cast<std::int64_t>(rel.rows()), rel.support(x), rel.support(y),
                         rel.support(x.united(y)));
  }

  std::int64_t n() const noexcept { return c11 + c10 + c01 + c00; }
  std::int64_t m_x() const noexcept { return c11 + c10; }
  std::int64_t m_y() const noexcept { return c11 + c01; }
  double size() const noexcept { return static_cast<double>(n()); }

  CellProbabilities cells() const noexcept {
    const double nn = size();
    return {static_cast<double>(c11) / nn, static_cast<double>(c10) / nn,
            static_cast<double>(c01) / nn, static_cast<double>(c00) / nn,
            static_cast<double>(c11 + c10) / nn, static_cast<double>(c11 + c01) / nn,
            static_cast<double>(c01 + c00) / nn, static_cast<double>(c10 + c00) / nn};
  }

  ContingencyTable negate_antecedent() const noexcept { return {c01, c00, c11, c10}; }
  ContingencyTable negate_consequent() const noexcept { return {c10, c11, c00, c01}; }
  ContingencyTable transposed() const noexcept { return {c11, c01, c10, c00}; }

  friend bool operator==(const ContingencyTable&, const ContingencyTable&) = default;
};

/// Real-valued 2x2 table with a nominal data size n; used for exact
/// distributions where counts n*P need not be integers.
struct ProbabilityTable {
  double xy = 0, x_ny = 0, nx_y = 0, nx_ny = 0;
  double n = 1;

  static ProbabilityTable from_cells(double xy, double x_ny, double nx_y, double nx_ny, double n) {
    if (xy < 0 || x_ny < 0 || nx_y < 0 || nx_ny < 0) throw usage_error("negative cell probability");
    if (std::abs(xy + x_ny + nx_y + nx_ny - 1.0) > 1e-12) {
      throw usage_error("cell probabilities do not sum to 1");
    }
    if (!(n > 0)) throw usage_error("data size must be positive");
    return {xy, x_ny, nx_y, nx_ny, n};
  }

  /// Table with the given marginals and P(X,Y) = P(X)P(Y) + d.
  static ProbabilityTable from_marginals(double px, double py, double d, double n) {
    const double xy = px * py + d;
    const double x_ny = px * (1.0 - py) - d;
    const double nx_y = (1.0 - px) * py - d;
    const double nx_ny = (1.0 - px) * (1.0 - py) + d;
    constexpr double slack = 1e-15;
    auto clamp = [](double v) { return v < 0 && v > -slack ? 0.0 : v; };
    return from_cells(clamp(xy), clamp(x_ny), clamp(nx_y), clamp(nx_ny), n);
  }

  static ProbabilityTable from_counts(const ContingencyTable& ct) {
    const CellProbabilities c = ct.cells();
    return {c.xy, c.x_ny, c.nx_y, c.nx_ny, ct.size()};
  }

  double size() const noexcept { return n; }

  CellProbabilities cells() const noexcept {
    return {xy, x_ny, nx_y, nx_ny, xy + x_ny, xy + nx_y, nx_y + nx_ny, x_ny + nx_ny};
  }

  ProbabilityTable negate_antecedent() const noexcept { return {nx_y, nx_ny, xy, x_ny, n}; }
  ProbabilityTable negate_consequent() const noexcept { return {x_ny, xy, nx_ny, nx_y, n}; }
  ProbabilityTable transposed() const noexcept { return {xy, nx_y, x_ny, nx_ny, n}; }
};

/// Explicit probability table over up to 16 binary attributes. Cell index bit i
/// holds the value of attribute i.
class JointDistribution {
 public:
  static constexpr std::size_t max_attributes = 16;

  JointDistribution(std::vector<std::string> names, std::vector<double> probs)
      : names_(std::move(names)), probs_(std::move(probs)) {
    if (names_.empty() || names_.size() > max_attributes) {
      throw usage_error("joint distribution needs 1.." + std::to_string(max_attributes) +
                        " attributes");
    }
    if (probs_.size() != (std::size_t{1} << names_.size())) {
      throw usage_error("joint distribution needs 2^l cells");
    }
    double total = 0;
    for (double p : probs_) {
      if (!(p >= 0)) throw usage_error("negative or NaN cell probability");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) throw usage_error("cell probabilities do not sum to 1");
  }

  /// Independent attributes with the given P(A_i = 1).
  static JointDistribution product(std::vector<std::string> names, std::span<const double> p1) {
    const std::size_t l = names.size();
    std::vector<double> probs(std::size_t{1} << l, 1.0);
    for (std::size_t cell = 0; cell < probs.size(); ++cell) {
      for (std::size_t i = 0; i < l; ++i) probs[cell] *= ((cell >> i) & 1U) ? p1[i] : 1.0 - p1[i];
    }
    return JointDistribution(std::move(names), renormalized(std::move(probs)));
  }

  /// Empirical distribution of `attrs` in `rel`.
  static JointDistribution from_relation(const Relation& rel, std::span<const AttributeId> attrs) {
    std::vector<std::string> names;
    for (AttributeId a : attrs) names.push_back(rel.name(a));
    std::vector<double> counts(std::size_t{1} << attrs.size(), 0.0);
    for (std::size_t t = 0; t < rel.rows(); ++t) {
      std::size_t cell = 0;
      for (std::size_t i = 0; i < attrs.size(); ++i) {
        if (rel.value(t, attrs[i])) cell |= std::size_t{1} << i;
      }
      counts[cell] += 1.0;
    }
    for (double& c : counts) c /= static_cast<double>(rel.rows());
    return JointDistribution(std::move(names), std::move(counts));
  }

  std::size_t attributes() const noexcept { return names_.size(); }
  std::span<const std::string> names() const noexcept { return names_; }
  std::span<const double> cells() const noexcept { return probs_; }
  double cell(std::size_t index) const { return probs_.at(index); }

  double marginal(std::size_t attr, bool value) const {
    check(attr);
    double p = 0;
    for (std::size_t cell = 0; cell < probs_.size(); ++cell) {
      if ((((cell >> attr) & 1U) != 0) == value) p += probs_[cell];
    }
    return p;
  }

  /// Probability of an event whose literals index this distribution's attributes.
  double probability(const Event& e) const {
    std::size_t care = 0, want = 0;
    for (const Literal& l : e) {
      check(l.attr.index);
      care |= std::size_t{1} << l.attr.index;
      if (l.value) want |= std::size_t{1} << l.attr.index;
    }
    double p = 0;
    for (std::size_t cell = 0; cell < probs_.size(); ++cell) {
      if ((cell & care) == want) p += probs_[cell];
    }
    return p;
  }

  /// Distribution of the attributes listed in `keep`, in that order.
  JointDistribution marginalize(std::span<const std::size_t> keep) const {
    std::vector<std::string> names;
    for (std::size_t a : keep) {
      check(a);
      names.push_back(names_[a]);
    }
    std::vector<double> out(std::size_t{1} << keep.size(), 0.0);
    for (std::size_t cell = 0; cell < probs_.size(); ++cell) {
      std::size_t target = 0;
      for (std::size_t i = 0; i < keep.size(); ++i) {
        if ((cell >> keep[i]) & 1U) target |= std::size_t{1} << i;
      }
      out[target] += probs_[cell];
    }
    return JointDistribution(std::move(names), std::move(out));
  }

  /// 2x2 table of events X and Y (over this distribution's attributes) at data size n.
  ProbabilityTable table(const Event& x, const Event& y, double n) const {
    if (x.shares_attribute_with(y)) throw usage_error("antecedent and consequent overlap");
    auto mask = [this](const Event& e) {
      std::size_t care = 0, want = 0;
      for (const Literal& l : e) {
        check(l.attr.index);
        care |= std::size_t{1} << l.attr.index;
        if (l.value) want |= std::size_t{1} << l.attr.index;
      }
      return std::pair{care, want};
    };
    const auto [x_care, x_want] = mask(x);
    const auto [y_care, y_want] = mask(y);
    double quad[2][2] = {{0, 0}, {0, 0}};
    for (std::size_t cell = 0; cell < probs_.size(); ++cell) {
      const bool in_x = (cell & x_care) == x_want;
      const bool in_y = (cell & y_care) == y_want;
      quad[in_x ? 0 : 1][in_y ? 0 : 1] += probs_[cell];
    }
    return {quad[0][0], quad[0][1], quad[1][0], quad[1][1], n};
  }

 private:
  static std::vector<double> renormalized(std::vector<double> probs) {
    const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
    for (double& p : probs) p /= total;
    return probs;
  }

  void check(std::size_t attr) const {
    if (attr >= names_.size()) throw usage_error("attribute index out of range");
  }

  std::vector<std::string> names_;
  std::vector<double> probs_;
};

}  // namespace sigrule
