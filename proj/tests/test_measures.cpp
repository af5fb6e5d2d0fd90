#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "sigrule/measures.hpp"
#include "sigrule/significance.hpp"
#include "test_support.hpp"

using namespace sigrule;

namespace {

// J(C|X) from P(X), P(C|X) and P(C), natural logs converted to bits.
double oracle_j(double px, double cf, double pc) {
  auto term = [](double a, double b) { return a > 0 ? a * std::log(a / b) : 0.0; };
  return px * (term(cf, pc) + term(1 - cf, 1 - pc)) / std::log(2.0);
}

ContingencyTable random_table(std::mt19937_64& rng, int max_cell = 200) {
  std::uniform_int_distribution<int> cell(1, max_cell);
  return {cell(rng), cell(rng), cell(rng), cell(rng)};
}

}  // namespace

TEST(RuleMeasures, BalancedPositiveTable) {
  const ContingencyTable t{30, 20, 20, 30};
  EXPECT_DOUBLE_EQ(frequency(t), 0.3);
  EXPECT_DOUBLE_EQ(confidence(t), 0.6);
  EXPECT_NEAR(dependence_value(t), 0.05, 1e-15);
  EXPECT_NEAR(relative_difference(t), 0.2, 1e-14);
  EXPECT_NEAR(gamma(t), 1.2, 1e-14);
  EXPECT_NEAR(chi2_rule(t), testing_support::oracle_chi2(30, 20, 20, 30), 1e-12);
  EXPECT_NEAR(chi2_rule(t), 4.0, 1e-12);
  EXPECT_NEAR(phi(t), 0.2, 1e-14);
}

TEST(RuleMeasures, IndependenceGivesNeutralValues) {
  const ContingencyTable t{25, 25, 25, 25};
  EXPECT_DOUBLE_EQ(dependence_value(t), 0.0);
  EXPECT_DOUBLE_EQ(gamma(t), 1.0);
  EXPECT_DOUBLE_EQ(chi2_rule(t), 0.0);
  EXPECT_DOUBLE_EQ(phi(t), 0.0);
  EXPECT_DOUBLE_EQ(j_measure(t), 0.0);
  EXPECT_DOUBLE_EQ(mutual_information_rule(t), 0.0);
}

TEST(RuleMeasures, ConfidenceEdgeCases) {
  EXPECT_THROW(confidence(ContingencyTable{0, 0, 5, 5}), undefined_measure);
  EXPECT_DOUBLE_EQ(confidence(ContingencyTable{7, 0, 3, 5}), 1.0);
}

TEST(RuleMeasures, DegenerateMarginalsAreUndefined) {
  const ContingencyTable all_y{10, 0, 5, 0};
  EXPECT_THROW(chi2_rule(all_y), undefined_measure);
  EXPECT_THROW(phi(all_y), undefined_measure);
  EXPECT_THROW(j_measure(all_y), undefined_measure);
  EXPECT_THROW(mutual_information_rule(all_y), undefined_measure);
  const MeasureReport r = measure_report(all_y);
  EXPECT_FALSE(r.chi2.has_value());
  EXPECT_FALSE(r.phi.has_value());
  EXPECT_TRUE(r.fr.has_value());
  EXPECT_TRUE(r.cf.has_value());
}

TEST(RuleMeasures, EpsilonFamilyChi2EqualsN) {
  for (double n : {1e3, 1e4, 1e6}) {
    for (double e : {1e-4, 4e-4, 0.01, 0.3}) {
      const auto t = ProbabilityTable::from_cells(e, 0, 0, 1 - e, n);
      EXPECT_NEAR(chi2_rule(t), n, n * 1e-12) << n << " " << e;
      EXPECT_NEAR(phi(t), 1.0, 1e-12);
    }
  }
}

TEST(RuleMeasures, JAgainstDirectFormula) {
  // P(X) = 0.5, P(C|X) = 0, P(C) = 0.5.
  const auto a = ProbabilityTable::from_marginals(0.5, 0.5, -0.25, 1);
  EXPECT_NEAR(j_measure(a), oracle_j(0.5, 0.0, 0.5), 1e-15);
  EXPECT_NEAR(j_measure(a), 0.5, 1e-15);
  // P(X) = 0.25, P(C|X) = 0.75, P(C) = 0.5.
  const auto b = ProbabilityTable::from_marginals(0.25, 0.5, 0.0625, 1);
  EXPECT_NEAR(j_measure(b), oracle_j(0.25, 0.75, 0.5), 1e-15);
  std::mt19937_64 rng(4);
  for (int i = 0; i < 500; ++i) {
    const ContingencyTable t = random_table(rng);
    const CellProbabilities c = t.cells();
    ASSERT_NEAR(j_measure(t), oracle_j(c.x, c.xy / c.x, c.y), 1e-12);
  }
}

TEST(RuleMeasures, JIsSymmetricInConsequentPolarity) {
  std::mt19937_64 rng(6);
  for (int i = 0; i < 500; ++i) {
    const ContingencyTable t = random_table(rng);
    ASSERT_EQ(j_measure(t), j_measure(t.negate_consequent()));
  }
}

TEST(RuleMeasures, MutualInformationOfPerfectBalancedTableIsOneBit) {
  EXPECT_NEAR(mutual_information_rule(ContingencyTable{50, 0, 0, 50}), 1.0, 1e-15);
}

TEST(RuleMeasures, MutualInformationMatchesCellSum) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 500; ++i) {
    const ContingencyTable t = random_table(rng);
    const CellProbabilities c = t.cells();
    const double cells[4] = {c.xy, c.x_ny, c.nx_y, c.nx_ny};
    const double rows[4] = {c.x, c.x, c.nx, c.nx};
    const double cols[4] = {c.y, c.ny, c.y, c.ny};
    double mi = 0;
    for (int k = 0; k < 4; ++k) mi += cells[k] * std::log2(cells[k] / (rows[k] * cols[k]));
    ASSERT_NEAR(mutual_information_rule(t), mi, 1e-12);
  }
}

TEST(RuleMeasures, RandomInvariants) {
  std::mt19937_64 rng(10);
  for (int i = 0; i < 2000; ++i) {
    const ContingencyTable t = random_table(rng, 500);
    const CellProbabilities c = t.cells();
    const double n = t.size();
    ASSERT_NEAR(gamma(t), 1 + relative_difference(t), 1e-12);
    ASSERT_NEAR(gamma(t) * c.x * c.y, frequency(t), 1e-15);
    ASSERT_NEAR(gamma(t), confidence(t) / c.y, 1e-12);
    ASSERT_LE(gamma(t), 1 / std::max(c.x, c.y) + 1e-12);
    ASSERT_NEAR(phi(t) * phi(t) * n, chi2_rule(t), 1e-9 * std::max(1.0, chi2_rule(t)));
    ASSERT_NEAR(chi2_rule(t), testing_support::oracle_chi2(t.c11, t.c10, t.c01, t.c00),
                1e-9 * std::max(1.0, chi2_rule(t)));
    ASSERT_NEAR(chi2_rule(t), chi2_rule(t.transposed()), 1e-9 * std::max(1.0, chi2_rule(t)));
    ASSERT_NEAR(chi2_rule(t), chi2_rule(t.negate_antecedent().negate_consequent()),
                1e-9 * std::max(1.0, chi2_rule(t)));
    const double t_val = t_statistic(t);
    ASSERT_GE(chi2_rule(t) + 1e-9, t_val * t_val);
    ASSERT_NEAR(dependence_value(t), c.xy - c.x * c.y, 1e-15);
  }
}

TEST(RuleMeasures, ScoringIsPure) {
  const ContingencyTable t{13, 7, 11, 29};
  const MeasureReport a = measure_report(t);
  const MeasureReport b = measure_report(t);
  EXPECT_EQ(a.t, b.t);
  EXPECT_EQ(a.chi2, b.chi2);
  EXPECT_EQ(a.j, b.j);
  EXPECT_EQ(a.rho, a.gamma);
}

TEST(RuleMeasures, FrequencyFromRelationMatchesProbability) {
  std::mt19937_64 rng(12);
  const auto rows = testing_support::random_rows(rng, 123, 4);
  const Relation rel = testing_support::relation_of(rows);
  const Event x{positive(0), negative(3)};
  const Event y{positive(1)};
  const auto t = ContingencyTable::from_relation(rel, x, y);
  EXPECT_DOUBLE_EQ(frequency(t), rel.probability(x.united(y)));
  EXPECT_EQ(t, testing_support::naive_table(rows, x, y));
}

TEST(SetMeasures, Chi2SetOfProductDistributionIsZero) {
  const std::vector<double> p1{0.3, 0.6, 0.45};
  const auto dist = JointDistribution::product({"a", "b", "c"}, p1);
  EXPECT_NEAR(chi2_set(dist, 1000), 0.0, 1e-9);
}

TEST(SetMeasures, Chi2SetOfPairEqualsRuleChi2) {
  std::mt19937_64 rng(14);
  for (int i = 0; i < 100; ++i) {
    const auto dist = testing_support::random_distribution(rng, 2);
    const auto table = dist.table(Event{positive(0)}, Event{positive(1)}, 500);
    ASSERT_NEAR(chi2_set(dist, 500), chi2_rule(table), 1e-9 * std::max(1.0, chi2_rule(table)));
  }
}

TEST(SetMeasures, Chi2SetMatchesCellLoop) {
  std::mt19937_64 rng(15);
  for (std::size_t l = 2; l <= 6; ++l) {
    const auto dist = testing_support::random_distribution(rng, l);
    const double v = chi2_set(dist, 777);
    EXPECT_NEAR(v, testing_support::oracle_chi2_set(dist, 777), 1e-9 * v);
  }
}

TEST(SetMeasures, Chi2SetIsMonotoneUnderSupersets) {
  std::mt19937_64 rng(16);
  for (int trial = 0; trial < 50; ++trial) {
    const auto dist = testing_support::random_distribution(rng, 5);
    for (std::size_t mask = 1; mask < 32; ++mask) {
      std::vector<std::size_t> small;
      for (std::size_t i = 0; i < 5; ++i) {
        if (mask & (std::size_t{1} << i)) small.push_back(i);
      }
      if (small.size() < 2) continue;
      const double base = chi2_set(dist.marginalize(small), 100);
      for (std::size_t add = 0; add < 5; ++add) {
        if (mask & (std::size_t{1} << add)) continue;
        std::vector<std::size_t> big = small;
        big.push_back(add);
        ASSERT_GE(chi2_set(dist.marginalize(big), 100), base * (1 - 1e-12));
      }
    }
  }
}

TEST(SetMeasures, InterestOfProductDistributionIsOne) {
  const std::vector<double> p1{0.2, 0.7, 0.5};
  const auto dist = JointDistribution::product({"a", "b", "c"}, p1);
  EXPECT_NEAR(interest_rho(dist, Event{positive(0), negative(1), positive(2)}), 1.0, 1e-12);
}

TEST(SetMeasures, InterestOfPairEqualsGamma) {
  std::mt19937_64 rng(18);
  for (int i = 0; i < 50; ++i) {
    const auto dist = testing_support::random_distribution(rng, 2);
    const auto table = dist.table(Event{positive(0)}, Event{positive(1)}, 1);
    ASSERT_NEAR(interest_rho(dist, Event{positive(0), positive(1)}), gamma(table), 1e-12);
  }
}

TEST(SetMeasures, BrinCellFrequency) {
  const auto uniform = JointDistribution({"a", "b"}, {0.25, 0.25, 0.25, 0.25});
  EXPECT_DOUBLE_EQ(brin_cell_frequency(uniform, 0.25), 0.25);
  const auto skewed = JointDistribution({"a", "b"}, {0.7, 0.1, 0.1, 0.1});
  EXPECT_DOUBLE_EQ(brin_cell_frequency(skewed, 0.25), 0.7);
  EXPECT_DOUBLE_EQ(brin_cell_frequency(skewed, 0.5), 0.1);
  EXPECT_THROW(brin_cell_frequency(skewed, 0.0), usage_error);
  EXPECT_THROW(brin_cell_frequency(skewed, 1.5), usage_error);
}

TEST(SetMeasures, BrinMaxSetSize) {
  EXPECT_EQ(brin_max_set_size(0.25, 0.01), 8);
  // Beyond that size the cell frequency cannot reach the threshold, whatever
  // the distribution; at that size mass spread over a quarter of the cells
  // still does.
  std::mt19937_64 rng(19);
  for (std::size_t l : {9u, 10u}) {
    for (int i = 0; i < 20; ++i) {
      ASSERT_LT(brin_cell_frequency(testing_support::random_distribution(rng, l), 0.25), 0.01);
    }
  }
  std::vector<double> quarter(256, 0.0);
  for (std::size_t c = 0; c < 64; ++c) quarter[c] = 1.0 / 64;
  EXPECT_GE(brin_cell_frequency(JointDistribution(testing_support::names_for(8), quarter), 0.25), 0.01);
}
