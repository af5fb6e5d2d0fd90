#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "sigrule/cli.hpp"
#include "sigrule/sigrule.hpp"
#include "test_support.hpp"

using namespace sigrule;
using testing_support::TempFile;

namespace {

struct Outcome {
  int code = -1;
  std::string out, err;
};

Outcome run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "sigrule");
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Outcome o;
  o.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  o.out = out.str();
  o.err = err.str();
  return o;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

std::vector<RuleRecord> records_of_tsv(const std::string& text) {
  const auto lines = lines_of(text);
  std::vector<RuleRecord> out;
  for (std::size_t i = 2; i < lines.size(); ++i) out.push_back(record_from_tsv(lines[i]));
  return out;
}

std::string sample(const std::string& name) { return std::string(SIGRULE_SAMPLES_DIR) + "/" + name; }

std::string csv_from_counts(int c11, int c10, int c01, int c00) {
  std::string s = "X,Y\n";
  auto add = [&](int times, const char* row) {
    for (int i = 0; i < times; ++i) s += row;
  };
  add(c11, "1,1\n");
  add(c10, "1,0\n");
  add(c01, "0,1\n");
  add(c00, "0,0\n");
  return s;
}

std::string random_csv(std::uint64_t seed, std::size_t n, std::size_t k) {
  std::mt19937_64 rng(seed);
  const auto rows = testing_support::structured_rows(rng, n, k);
  return testing_support::csv_of(testing_support::names_for(k), rows);
}

}  // namespace

TEST(CliMine, DependenceSampleIsExcludedAtTwo) {
  const Outcome o = run_cli({"mine", sample("dependence.csv"), "--k", "2", "--all"});
  EXPECT_EQ(o.code, cli::empty);
  const auto recs = records_of_tsv(o.out);
  ASSERT_EQ(recs.size(), 2U);
  for (const RuleRecord& r : recs) EXPECT_NEAR(*r.t, 2 / std::sqrt(3.0), 1e-8);
  EXPECT_NE(o.out.find("significant=0"), std::string::npos);

  const Outcome strict = run_cli({"mine", sample("dependence.csv"), "--k", "2"});
  EXPECT_EQ(strict.code, cli::empty);
  EXPECT_EQ(lines_of(strict.out).size(), 2U);
}

TEST(CliMine, SignificantRulesExitZeroAndRankByT) {
  const Outcome o = run_cli({"mine", sample("basket.txt"), "-K", "2", "--max-len", "3"});
  ASSERT_EQ(o.code, cli::ok) << o.err;
  const auto recs = records_of_tsv(o.out);
  ASSERT_FALSE(recs.empty());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    EXPECT_GE(*recs[i].t, 2.0);
    if (i) {
      EXPECT_GE(*recs[i - 1].t, *recs[i].t);
    }
  }
}

TEST(CliMine, AllLiteralsIncludeNegatedRules) {
  const Outcome pos = run_cli({"mine", sample("basket.txt"), "--k", "2", "--max-len", "3"});
  const Outcome all =
      run_cli({"mine", sample("basket.txt"), "--k", "2", "--max-len", "3", "--literals", "all"});
  ASSERT_EQ(all.code, cli::ok) << all.err;
  auto negated = [](const std::vector<RuleRecord>& recs) {
    std::size_t count = 0;
    for (const RuleRecord& r : recs) {
      if (r.antecedent.find('!') != std::string::npos || r.consequent.find('!') != std::string::npos) ++count;
    }
    return count;
  };
  EXPECT_EQ(negated(records_of_tsv(pos.out)), 0U);
  EXPECT_GT(negated(records_of_tsv(all.out)), 0U);
}

TEST(CliMine, BonferroniHeaderReportsScaledLevel) {
  const Outcome o = run_cli({"mine", sample("basket.txt"), "--k", "2", "--max-len", "2", "--bonferroni"});
  ASSERT_TRUE(o.code == cli::ok || o.code == cli::empty) << o.err;
  const auto header = nlohmann::json::parse(
      run_cli({"mine", sample("basket.txt"), "--k", "2", "--max-len", "2", "--bonferroni", "--json"}).out)["header"];
  const double m = header["tests"].get<double>();
  ASSERT_GT(m, 1);
  EXPECT_NEAR(header["effective_K"].get<double>(), std::sqrt(m) * 2, 1e-8 * std::sqrt(m) * 2);
  EXPECT_TRUE(header["bonferroni"].get<bool>());
  EXPECT_NE(o.out.find("bonferroni=yes"), std::string::npos);
  EXPECT_NE(o.out.find("effective_K=" + format9(round9(std::sqrt(m) * 2))), std::string::npos);

  const auto fixed = nlohmann::json::parse(
      run_cli({"mine", sample("basket.txt"), "--k", "2", "--tests", "100", "--json"}).out)["header"];
  EXPECT_NEAR(fixed["effective_K"].get<double>(), 20.0, 1e-12);
}

TEST(CliMine, FixedConsequent) {
  const Outcome o = run_cli({"mine", sample("basket.txt"), "--k", "2", "--consequent", "beer", "--all"});
  ASSERT_EQ(o.code, cli::ok) << o.err;
  const auto recs = records_of_tsv(o.out);
  ASSERT_FALSE(recs.empty());
  for (const RuleRecord& r : recs) EXPECT_EQ(r.consequent, "beer");
}

TEST(CliMine, JsonAndTsvCarryIdenticalValues) {
  const std::string path = sample("basket.txt");
  const Outcome tsv = run_cli({"mine", path, "--k", "2", "--max-len", "3", "--literals", "all"});
  const Outcome json = run_cli({"mine", path, "--k", "2", "--max-len", "3", "--literals", "all", "--json"});
  ASSERT_EQ(tsv.code, cli::ok);
  ASSERT_EQ(json.code, cli::ok);
  const auto doc = nlohmann::json::parse(json.out);
  const auto from_json = doc["rules"].get<std::vector<RuleRecord>>();
  EXPECT_EQ(records_of_tsv(tsv.out), from_json);
  EXPECT_EQ(doc["header"]["significant"].get<std::size_t>(), from_json.size());
}

TEST(CliMine, RecordsRoundTripThroughTsv) {
  const Outcome o = run_cli({"mine", sample("basket.txt"), "--k", "1", "--max-len", "3", "--all"});
  const auto lines = lines_of(o.out);
  ASSERT_GT(lines.size(), 2U);
  EXPECT_EQ(lines[1], tsv_header());
  for (std::size_t i = 2; i < lines.size(); ++i) EXPECT_EQ(to_tsv(record_from_tsv(lines[i])), lines[i]);
}

TEST(CliMine, OutputIndependentOfThreadCount) {
  const TempFile data("threads.csv", random_csv(41, 400, 9));
  const Outcome one = run_cli({"mine", data.path(), "--k", "1.5", "--max-len", "4", "--literals", "all", "--threads", "1"});
  const Outcome four = run_cli({"mine", data.path(), "--k", "1.5", "--max-len", "4", "--literals", "all", "--threads", "4"});
  ASSERT_EQ(one.code, cli::ok);
  EXPECT_EQ(one.out, four.out);

  ::setenv("SIGRULE_THREADS", "3", 1);
  const Outcome env = run_cli({"mine", data.path(), "--k", "1.5", "--max-len", "4", "--literals", "all"});
  ::unsetenv("SIGRULE_THREADS");
  EXPECT_EQ(one.out, env.out);
}

TEST(CliMine, Errors) {
  EXPECT_EQ(run_cli({"mine"}).code, cli::usage);
  EXPECT_EQ(run_cli({"mine", sample("basket.txt"), "--literals", "some"}).code, cli::usage);
  EXPECT_EQ(run_cli({"mine", sample("basket.txt"), "--k", "-1"}).code, cli::usage);
  EXPECT_EQ(run_cli({"mine", sample("basket.txt"), "--consequent", "caviar"}).code, cli::usage);
  EXPECT_EQ(run_cli({"mine", "/nonexistent/data.csv"}).code, cli::usage);
  EXPECT_EQ(run_cli({"frobnicate"}).code, cli::usage);
  EXPECT_EQ(run_cli({}).code, cli::usage);

  const TempFile bad("bad.csv", "A,B\n1,0\n0,7\n");
  const Outcome o = run_cli({"mine", bad.path()});
  EXPECT_EQ(o.code, cli::usage);
  EXPECT_NE(o.err.find("row 3"), std::string::npos) << o.err;
  EXPECT_NE(o.err.find("column 2"), std::string::npos) << o.err;
  EXPECT_TRUE(o.out.empty());
}

TEST(CliMine, FormatOverride) {
  const TempFile tx("basket.csv", "a b\nb c\na b c\n");
  EXPECT_EQ(run_cli({"mine", tx.path(), "--k", "0"}).code, cli::usage);
  const Outcome o = run_cli({"mine", tx.path(), "--k", "0", "--format", "transactions", "--all"});
  EXPECT_EQ(o.code, cli::ok) << o.err;
  EXPECT_NE(o.out.find("k=3"), std::string::npos);
}

TEST(CliScore, MatchesMineBitIdentically) {
  const TempFile data("score.csv", random_csv(5, 300, 7));
  const Outcome mined = run_cli({"mine", data.path(), "--k", "1", "--max-len", "3", "--literals", "all", "--all"});
  const auto lines = lines_of(mined.out);
  ASSERT_GT(lines.size(), 10U);
  for (std::size_t i = 2; i < lines.size(); i += 7) {
    const RuleRecord r = record_from_tsv(lines[i]);
    const Outcome scored = run_cli({"score", data.path(), "--rule", r.antecedent + "=>" + r.consequent});
    ASSERT_EQ(scored.code, cli::ok) << scored.err;
    const auto score_lines = lines_of(scored.out);
    ASSERT_EQ(score_lines.size(), 3U);
    EXPECT_EQ(score_lines[2], lines[i]);
  }
}

TEST(CliScore, IndependentDataScoresNeutral) {
  const TempFile data("indep.csv", csv_from_counts(25, 25, 25, 25));
  const Outcome o = run_cli({"score", data.path(), "--rule", "X=>Y", "--json"});
  ASSERT_EQ(o.code, cli::ok);
  const auto rec = nlohmann::json::parse(o.out)["rules"][0].get<RuleRecord>();
  EXPECT_NEAR(*rec.t, 0, 1e-12);
  EXPECT_NEAR(*rec.gamma, 1, 1e-12);
}

TEST(CliScore, NegatedCompanionCarriesTheDependence) {
  const Outcome pos = run_cli({"score", sample("epsilon.csv"), "--rule", "X=>Y", "--json"});
  const Outcome neg = run_cli({"score", sample("epsilon.csv"), "--rule", "!X=>!Y", "--json"});
  ASSERT_EQ(neg.code, cli::ok) << neg.err;
  const auto p = nlohmann::json::parse(pos.out)["rules"][0].get<RuleRecord>();
  const auto q = nlohmann::json::parse(neg.out)["rules"][0].get<RuleRecord>();
  const double n = 1000, e = 0.04;
  EXPECT_NEAR(*p.chi2, n, 1e-6);
  EXPECT_NEAR(*p.t, std::sqrt(n * e) / std::sqrt(2 - e), 1e-7);
  EXPECT_NEAR(*q.t, std::sqrt(n * (1 - e)) / std::sqrt(1 + e), 1e-7);
  EXPECT_GT(*q.t, 4 * *p.t);
  EXPECT_EQ(q.antecedent, "!X");
}

TEST(CliScore, Errors) {
  EXPECT_EQ(run_cli({"score", sample("dependence.csv"), "--rule", "X=>Z"}).code, cli::usage);
  EXPECT_EQ(run_cli({"score", sample("dependence.csv"), "--rule", "X,Y"}).code, cli::usage);
  EXPECT_EQ(run_cli({"score", sample("dependence.csv")}).code, cli::usage);
}

TEST(CliBounds, MinimumFrequencyAndConfidence) {
  const Outcome o = run_cli({"bounds", "--px", "0.5", "--py", "0.5", "--n", "10000", "--K", "10"});
  ASSERT_EQ(o.code, cli::ok);
  const auto lines = lines_of(o.out);
  ASSERT_EQ(lines.size(), 3U);
  EXPECT_EQ(lines[1].substr(0, lines[1].find('\t')), "min_frequency");
  EXPECT_NE(lines[1].find("\t0.29330127\t"), std::string::npos);
  EXPECT_NE(lines[2].find("\t0.58660254\t"), std::string::npos);
  EXPECT_NEAR(std::stod(lines[2].substr(lines[2].find('\t') + 1)), 0.5 + 10 * std::sqrt(3.0) / 200, 1e-8);
}

TEST(CliBounds, SafeFloorAndLevelFrequency) {
  const Outcome safe = run_cli({"bounds", "--pmin", "0.5", "--n", "10000", "--K", "2"});
  ASSERT_EQ(safe.code, cli::ok);
  EXPECT_NE(safe.out.find("safe_min_frequency\t" + format9(safe_min_frequency(0.5, 1e4, 2)) + "\t"),
            std::string::npos);
  EXPECT_NEAR(safe_min_frequency(0.5, 1e4, 2), 7.997e-4, 1e-7);

  const Outcome level = run_cli({"bounds", "--gamma", "2", "--n", "10000", "--K", "2"});
  ASSERT_EQ(level.code, cli::ok);
  EXPECT_NE(level.out.find("frequency_at_K\t" + format9(frequency_at_level(2, 1e4, 2)) + "\t"),
            std::string::npos);

  const Outcome default_k = run_cli({"bounds", "--gamma", "2", "--n", "10000"});
  EXPECT_EQ(default_k.out, level.out);
}

TEST(CliBounds, MorishitaBound) {
  const Outcome o = run_cli({"bounds", "--pz", "0.3", "--pzc", "0.2", "--pc", "0.4", "--n", "1000"});
  ASSERT_EQ(o.code, cli::ok);
  const auto table = ProbabilityTable::from_cells(0.2, 0.1, 0.2, 0.5, 1000);
  EXPECT_NE(o.out.find("chi2_upper_bound\t" + format9(morishita_chi2_bound(table)) + "\t"), std::string::npos);
  EXPECT_EQ(run_cli({"bounds", "--pz", "0.3", "--pzc", "0.35", "--pc", "0.4", "--n", "1000"}).code, cli::usage);
}

TEST(CliBounds, RejectsAmbiguousParameterSets) {
  for (const auto& args : std::vector<std::vector<std::string>>{
           {"bounds"},
           {"bounds", "--px", "0.5", "--n", "100"},
           {"bounds", "--px", "0.5", "--py", "0.5", "--n", "100", "--gamma", "2"},
           {"bounds", "--pz", "0.3", "--pzc", "0.2", "--pc", "0.4", "--n", "1000", "--K", "2"}}) {
    const Outcome o = run_cli(args);
    EXPECT_EQ(o.code, cli::usage);
    EXPECT_NE(o.err.find("--gamma --n"), std::string::npos);
  }
  EXPECT_EQ(run_cli({"bounds", "--pmin", "1.5", "--n", "100"}).code, cli::usage);
}

namespace {

std::vector<ContourPoint> parse_grid(const std::string& text, std::string* header) {
  std::istringstream in(text);
  std::getline(in, *header);
  std::vector<ContourPoint> points;
  for (ContourPoint p; in >> p.x >> p.y >> p.t_hat;) points.push_back(p);
  return points;
}

}  // namespace

TEST(CliContour, FrcfRespectsDomain) {
  const Outcome o = run_cli({"contour", "--mode", "frcf", "--py", "0.2", "--resolution", "60"});
  ASSERT_EQ(o.code, cli::ok);
  std::string header;
  const auto points = parse_grid(o.out, &header);
  EXPECT_EQ(header, "# mode=frcf fixed=py:0.20000000000000001,resolution:60 columns=fr,cf,t_hat");
  ASSERT_FALSE(points.empty());
  for (const ContourPoint& p : points) {
    EXPECT_LE(p.x, 0.2);
    EXPECT_GT(p.t_hat, 0);
    EXPECT_NEAR(p.t_hat, t_hat_frequency_confidence(p.x, p.y, 0.2), 1e-12);
  }
}

TEST(CliContour, FrgammaGrowsInBothCoordinates) {
  const Outcome o = run_cli({"contour", "--mode", "frgamma", "--gamma-max", "4", "--resolution", "40"});
  ASSERT_EQ(o.code, cli::ok);
  std::string header;
  const auto points = parse_grid(o.out, &header);
  ASSERT_FALSE(points.empty());
  std::map<std::pair<double, double>, double> at;
  std::set<double> xs, ys;
  for (const ContourPoint& p : points) {
    EXPECT_LE(p.x * p.y, 1 + 1e-12);
    at[{p.x, p.y}] = p.t_hat;
    xs.insert(p.x);
    ys.insert(p.y);
  }
  std::size_t compared = 0;
  for (const auto& [key, t] : at) {
    auto x_next = xs.upper_bound(key.first);
    auto y_next = ys.upper_bound(key.second);
    if (x_next != xs.end() && at.count({*x_next, key.second})) {
      const double right = at[{*x_next, key.second}];
      EXPECT_LT(t, right);
      ++compared;
    }
    if (y_next != ys.end() && at.count({key.first, *y_next})) {
      const double up = at[{key.first, *y_next}];
      EXPECT_LT(t, up);
      ++compared;
    }
  }
  EXPECT_GT(compared, 500U);
}

TEST(CliContour, ScaledPointsMatchExactTables) {
  const Outcome o = run_cli({"contour", "--mode", "frgamma", "--gamma-max", "3", "--resolution", "30"});
  std::string header;
  const auto points = parse_grid(o.out, &header);
  ContourGrid g;
  g.mode = ContourMode::frgamma;
  g.fixed = 3;
  for (const ContourPoint& p : points) {
    EXPECT_NEAR(std::sqrt(1e4) * p.t_hat, t_statistic(contour_table(g, p, 1e4)), 1e-9);
  }
}

TEST(CliContour, WritesFileAndRejectsBadParameters) {
  const TempFile file("grid.txt", "");
  ASSERT_EQ(run_cli({"contour", "--mode", "frgamma", "--resolution", "10", "-o", file.path()}).code, cli::ok);
  std::ifstream in(file.path());
  std::stringstream text;
  text << in.rdbuf();
  EXPECT_EQ(text.str(), run_cli({"contour", "--mode", "frgamma", "--resolution", "10"}).out);

  EXPECT_EQ(run_cli({"contour", "--mode", "frcf"}).code, cli::usage);
  EXPECT_EQ(run_cli({"contour", "--mode", "frcf", "--py", "1.2"}).code, cli::usage);
  EXPECT_EQ(run_cli({"contour", "--mode", "frgamma", "--py", "0.2"}).code, cli::usage);
  EXPECT_EQ(run_cli({"contour", "--mode", "frgamma", "--gamma-max", "0.5"}).code, cli::usage);
  EXPECT_EQ(run_cli({"contour", "--mode", "lift"}).code, cli::usage);
}

TEST(CliAudit, DefaultGrid) {
  const Outcome o = run_cli({"audit"});
  ASSERT_EQ(o.code, cli::ok) << o.err;
  const auto lines = lines_of(o.out);
  ASSERT_GE(lines.size(), 7U);
  EXPECT_EQ(lines[1], "measure\ttype1\ttype2");
  EXPECT_EQ(lines[2], "fr&cf\t+\t+");
  EXPECT_EQ(lines[3], "fr&gamma\t-\t-");
  EXPECT_EQ(lines[4], "chi2\t+\t-");
  EXPECT_EQ(lines[5], "phi\t+\t+");
  EXPECT_EQ(lines[6], "J\t+\t+");
}

TEST(CliAudit, JsonRoundTripsAndMatchesLibrary) {
  const Outcome o = run_cli({"audit", "--output", "json"});
  ASSERT_EQ(o.code, cli::ok);
  const AuditReport parsed = nlohmann::json::parse(o.out).get<AuditReport>();
  EXPECT_EQ(parsed, audit_measures());
}

TEST(CliAudit, MeasureFilterAndTsvRows) {
  const Outcome o = run_cli({"audit", "--measures", "chi2"});
  ASSERT_EQ(o.code, cli::ok);
  const auto lines = lines_of(o.out);
  EXPECT_EQ(lines[2], "chi2\t+\t-");
  EXPECT_TRUE(lines[3].empty());

  const Outcome tsv = run_cli({"audit", "--measures", "chi2,phi", "--output", "tsv"});
  const auto rows = lines_of(tsv.out);
  ASSERT_GT(rows.size(), 1U);
  EXPECT_EQ(rows[0], "measure\terror_type\tflag\tscenario\trule\tn\tt\tscore\tversus\tparams");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_TRUE(rows[i].rfind("chi2\t", 0) == 0 || rows[i].rfind("phi\t", 0) == 0) << rows[i];
  }
  EXPECT_NE(tsv.out.find("chi2\ttype2\t-\tNA"), std::string::npos);
}

TEST(CliAudit, SampleConfigAndEmpiricalMode) {
  const Outcome o = run_cli({"audit", sample("audit.json")});
  ASSERT_EQ(o.code, cli::ok) << o.err;
  EXPECT_NE(o.out.find("fr&cf\t"), std::string::npos);
  EXPECT_EQ(o.out.find("fr&gamma\t"), std::string::npos);

  const Outcome a = run_cli({"audit", "--empirical", "--seed", "11", "--output", "json"});
  const Outcome b = run_cli({"audit", "--empirical", "--seed", "11", "--output", "json"});
  ASSERT_EQ(a.code, cli::ok) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(run_cli({"audit", "--empirical"}).out.find("mode=empirical"), std::string::npos);
}

TEST(CliAudit, BadConfigIsUsageError) {
  const TempFile broken("broken.json", "{\"K\": ");
  EXPECT_EQ(run_cli({"audit", broken.path()}).code, cli::usage);
  const TempFile unknown("unknown.json", R"({"Kay": 2})");
  const Outcome o = run_cli({"audit", unknown.path()});
  EXPECT_EQ(o.code, cli::usage);
  EXPECT_NE(o.err.find("Kay"), std::string::npos);
  EXPECT_EQ(run_cli({"audit", "/nonexistent.json"}).code, cli::usage);
  EXPECT_EQ(run_cli({"audit", "--measures", "lift"}).code, cli::usage);
}

TEST(Cli, VersionAndHelpExitZero) {
  EXPECT_EQ(run_cli({"--version"}).code, cli::ok);
  EXPECT_EQ(run_cli({"--help"}).code, cli::ok);
}
