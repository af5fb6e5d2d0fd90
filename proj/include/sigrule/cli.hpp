#pragma once

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sigrule/audit.hpp"
#include "sigrule/contour.hpp"
#include "sigrule/errors.hpp"
#include "sigrule/miner.hpp"
#include "sigrule/record.hpp"
#include "sigrule/redundancy.hpp"
#include "sigrule/relation.hpp"
#include "sigrule/significance.hpp"

namespace sigrule::cli {

enum ExitCode : int { ok = 0, internal = 1, usage = 2, empty = 3 };

namespace detail {

inline DatasetFormat parse_format(const std::string& s) {
  if (s == "auto") return DatasetFormat::automatic;
  if (s == "csv") return DatasetFormat::csv;
  return DatasetFormat::transactions;
}

inline unsigned default_threads() {
  if (const char* env = std::getenv("SIGRULE_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<unsigned>(v);
  }
  return std::max(1U, std::thread::hardware_concurrency());
}

inline std::string yes_no(bool b) { return b ? "yes" : "no"; }

inline void write_records(std::ostream& out, const std::string& header_comment,
                          const nlohmann::json& header, const std::vector<RuleRecord>& records,
                          bool json) {
  if (json) {
    nlohmann::json doc{{"header", header}, {"rules", records}};
    out << doc.dump(2) << '\n';
    return;
  }
  out << header_comment << '\n' << tsv_header() << '\n';
  for (const RuleRecord& r : records) out << to_tsv(r) << '\n';
}

struct MineOptions {
  std::string dataset;
  double K = 2.0;
  std::size_t max_len = 0;
  std::string literals = "positive";
  std::optional<double> min_fr;
  std::string consequent;
  bool bonferroni = false;
  std::optional<std::int64_t> tests;
  double min_imp = 0.0;
  std::string format = "auto";
  bool json = false;
  bool all = false;
  unsigned threads = 0;
};

inline Literal parse_literal(const Relation& rel, std::string s) {
  bool value = true;
  if (!s.empty() && s.front() == '!') {
    value = false;
    s.erase(0, 1);
  }
  return {rel.attribute(s), value};
}

inline int run_mine(const MineOptions& o, std::ostream& out) {
  const Relation rel = load_dataset(o.dataset, parse_format(o.format));
  MineConfig cfg;
  cfg.K = o.K;
  cfg.max_len = o.max_len;
  cfg.min_fr = o.min_fr;
  if (!o.consequent.empty()) cfg.consequent = parse_literal(rel, o.consequent);
  cfg.literals = o.literals == "all" ? LiteralPolicy::all : LiteralPolicy::positive_only;
  cfg.bonferroni = o.bonferroni;
  cfg.bonferroni_tests = o.tests;
  cfg.threads = o.threads ? o.threads : default_threads();
  if (cfg.K < 0) throw usage_error("K must be non-negative");

  const MineReport report = mine(rel, cfg);
  std::vector<Rule> emitted = o.all ? report.candidates.rules : report.significant;
  if (o.all) sort_ranked(emitted);

  std::vector<RuleRecord> records;
  records.reserve(emitted.size());
  for (const Rule& r : emitted) {
    const RedundancyVerdict v = analyze(rel, r, o.min_imp);
    records.push_back(make_record(rel, r, &v));
  }

  const bool adjusted = cfg.bonferroni || cfg.bonferroni_tests.has_value();
  const nlohmann::json header{
      {"n", rel.rows()},
      {"k", rel.attributes()},
      {"floor", round9(report.frequent.floor)},
      {"min_count", report.frequent.min_count},
      {"p_min", round9(report.frequent.p_min)},
      {"K", round9(cfg.K)},
      {"effective_K", round9(report.level)},
      {"tests", report.tests},
      {"bonferroni", adjusted},
      {"candidates", report.candidates.rules.size()},
      {"undefined", report.candidates.undefined},
      {"significant", report.significant.size()},
      {"floor_exceeds_one", report.frequent.floor_exceeds_one}};
  std::ostringstream comment;
  comment << "# n=" << rel.rows() << " k=" << rel.attributes()
          << " floor=" << format9(round9(report.frequent.floor))
          << " min_count=" << report.frequent.min_count
          << " p_min=" << format9(round9(report.frequent.p_min)) << " K=" << format9(cfg.K)
          << " effective_K=" << format9(round9(report.level)) << " tests=" << report.tests
          << " bonferroni=" << yes_no(adjusted) << " candidates=" << report.candidates.rules.size()
          << " undefined=" << report.candidates.undefined
          << " significant=" << report.significant.size();
  if (report.frequent.floor_exceeds_one) comment << " warning=floor-exceeds-one";
  write_records(out, comment.str(), header, records, o.json);
  return report.significant.empty() ? empty : ok;
}

inline int run_score(const std::string& dataset, const std::string& spec, const std::string& format,
                     double min_imp, bool json, std::ostream& out) {
  const Relation rel = load_dataset(dataset, parse_format(format));
  auto [x, y] = parse_rule_spec(rel, spec);
  const Rule r = describe_rule(rel, std::move(x), std::move(y));
  const RedundancyVerdict v = analyze(rel, r, min_imp);
  const RuleRecord rec = make_record(rel, r, &v);
  const nlohmann::json header{{"n", rel.rows()}, {"k", rel.attributes()}, {"rule", spec}};
  std::ostringstream comment;
  comment << "# n=" << rel.rows() << " k=" << rel.attributes() << " rule=" << spec;
  write_records(out, comment.str(), header, {rec}, json);
  return ok;
}

struct BoundsOptions {
  std::optional<double> px, py, n, K, gamma, pmin, pz, pzc, pc;
};

inline int run_bounds(const BoundsOptions& o, std::ostream& out) {
  std::set<std::string> given;
  auto note = [&](const std::optional<double>& v, const char* name) {
    if (v) given.insert(name);
  };
  note(o.px, "px");
  note(o.py, "py");
  note(o.n, "n");
  note(o.K, "K");
  note(o.gamma, "gamma");
  note(o.pmin, "pmin");
  note(o.pz, "pz");
  note(o.pzc, "pzc");
  note(o.pc, "pc");
  auto is = [&](std::set<std::string> want, bool k_optional) {
    std::set<std::string> g = given;
    if (k_optional) {
      g.erase("K");
      want.erase("K");
    }
    return g == want;
  };
  const double K = o.K.value_or(2.0);
  auto line = [&](const char* name, double value, const char* formula) {
    out << name << '\t' << format9(value) << '\t' << formula << '\n';
  };
  if (is({"px", "py", "n"}, true)) {
    out << "# minimum frequency and confidence for t >= K, K=" << format9(K) << '\n';
    line("min_frequency", min_frequency_for_significance(*o.px, *o.py, *o.n, K),
         "P(X)P(Y) + K*sqrt(P(X)P(Y)(1-P(X)P(Y)))/sqrt(n)");
    line("min_confidence", min_confidence_for_significance(*o.px, *o.py, *o.n, K),
         "min_frequency/P(X)");
    return ok;
  }
  if (is({"gamma", "n"}, true)) {
    out << "# frequency at which t = K for fixed gamma, K=" << format9(K) << '\n';
    line("frequency_at_K", frequency_at_level(*o.gamma, *o.n, K), "K^2*gamma/(n(gamma-1)^2 + K^2)");
    return ok;
  }
  if (is({"pmin", "n"}, true)) {
    out << "# safe minimum frequency for single-attribute consequents, K=" << format9(K) << '\n';
    line("safe_min_frequency", safe_min_frequency(*o.pmin, *o.n, K),
         "K^2*p_min/(n(1-p_min)^2 + K^2*p_min^2)");
    return ok;
  }
  if (is({"pz", "pzc", "pc", "n"}, false)) {
    const double pz = *o.pz, pzc = *o.pzc, pc = *o.pc;
    const double cells[] = {pzc, pz - pzc, pc - pzc, 1 - pz - pc + pzc};
    for (double c : cells) {
      if (c < -1e-12) throw usage_error("pz, pzc and pc do not form a probability table");
    }
    const auto table = ProbabilityTable::from_cells(std::max(0.0, cells[0]), std::max(0.0, cells[1]),
                                                    std::max(0.0, cells[2]), std::max(0.0, cells[3]),
                                                    *o.n);
    out << "# upper bound on chi2 of every specialization of Z -> C\n";
    line("chi2_upper_bound", morishita_chi2_bound(table),
         "max{n P(Z,C)P(~C)/((1-P(Z,C))P(C)), n P(Z,~C)P(C)/((1-P(Z,~C))P(~C))}");
    return ok;
  }
  throw usage_error(
      "bounds needs exactly one of: --px --py --n [--K] | --gamma --n [--K] | --pmin --n [--K] | "
      "--pz --pzc --pc --n");
}

inline int run_contour(const std::string& mode, std::optional<double> py, double gamma_max,
                       std::size_t resolution, const std::string& output, std::ostream& out) {
  ContourGrid grid;
  if (mode == "frcf") {
    if (!py) throw usage_error("contour --mode frcf needs --py");
    grid = contour_frcf(*py, resolution);
  } else {
    if (py) throw usage_error("--py applies to --mode frcf only");
    grid = contour_frgamma(gamma_max, resolution);
  }
  if (output.empty()) {
    write_contour(out, grid);
  } else {
    std::ofstream file(output);
    if (!file) throw usage_error("cannot write '" + output + "'");
    write_contour(file, grid);
  }
  return ok;
}

inline std::string param_text(const std::map<std::string, double>& params) {
  std::string out;
  for (const auto& [k, v] : params) out += (out.empty() ? "" : ",") + k + "=" + format9(v);
  return out;
}

inline void write_audit_text(std::ostream& out, const AuditReport& r, bool empirical) {
  out << "# audit K=" << format9(r.K) << " mode=" << (empirical ? "empirical" : "analytic") << '\n';
  out << "measure\ttype1\ttype2\n";
  for (const MeasureAudit& m : r.rows) {
    out << display_name(m.measure) << '\t' << (m.type1 ? '+' : '-') << '\t' << (m.type2 ? '+' : '-')
        << '\n';
  }
  out << "\n# witnesses (first per flag)\n";
  for (const MeasureAudit& m : r.rows) {
    auto show = [&](const std::vector<Witness>& ws, const char* type) {
      if (ws.empty()) return;
      const Witness& w = ws.front();
      out << display_name(m.measure) << '\t' << type << '\t' << w.scenario << '\t' << w.rule
          << "\tn=" << format9(w.n) << "\tt=" << format9(w.t) << "\tscore=" << format9(w.score);
      if (!w.partner.empty()) out << "\tversus=" << w.partner;
      out << '\t' << param_text(w.params) << '\n';
    };
    show(m.type1_witnesses, "type1");
    show(m.type2_witnesses, "type2");
  }
}

inline void write_audit_tsv(std::ostream& out, const AuditReport& r) {
  out << "measure\terror_type\tflag\tscenario\trule\tn\tt\tscore\tversus\tparams\n";
  for (const MeasureAudit& m : r.rows) {
    auto rows = [&](const std::vector<Witness>& ws, const char* type, bool flag) {
      if (ws.empty()) {
        out << to_string(m.measure) << '\t' << type << '\t' << (flag ? '+' : '-')
            << "\tNA\tNA\tNA\tNA\tNA\tNA\tNA\n";
      }
      for (const Witness& w : ws) {
        out << to_string(m.measure) << '\t' << type << '\t' << (flag ? '+' : '-') << '\t'
            << w.scenario << '\t' << w.rule << '\t' << format9(w.n) << '\t' << format9(w.t) << '\t'
            << format9(w.score) << '\t' << (w.partner.empty() ? "NA" : w.partner) << '\t'
            << param_text(w.params) << '\n';
      }
    };
    rows(m.type1_witnesses, "type1", m.type1);
    rows(m.type2_witnesses, "type2", m.type2);
  }
}

inline int run_audit(const std::string& config_path, const std::vector<std::string>& measures,
                     const std::string& output, bool empirical, std::uint64_t seed,
                     std::ostream& out) {
  AuditConfig cfg;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw usage_error("cannot open '" + config_path + "'");
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw usage_error("cannot parse '" + config_path + "': " + e.what());
    }
    cfg = audit_config_from_json(doc);
  }
  if (!measures.empty()) {
    cfg.measures.clear();
    for (const std::string& m : measures) cfg.measures.push_back(audit_measure_from_string(m));
  }
  const AuditReport report = empirical ? audit_measures_empirical(cfg, seed) : audit_measures(cfg);
  if (output == "json") {
    out << nlohmann::json(report).dump(2) << '\n';
  } else if (output == "tsv") {
    write_audit_tsv(out, report);
  } else {
    write_audit_text(out, report, empirical);
  }
  return ok;
}

}  // namespace detail

/// Runs the command line; all output goes to `out` and diagnostics to `err`.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mine association rules and assess them by statistical significance", "sigrule"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "sigrule 1.0.0");

  detail::MineOptions mo;
  auto* mine_cmd = app.add_subcommand("mine", "Mine and rank significant rules");
  mine_cmd->add_option("dataset", mo.dataset, "Dataset (.csv matrix or transaction text)")->required();
  mine_cmd->add_option("-K,--k,--K", mo.K, "Required t level")->capture_default_str();
  mine_cmd->add_option("--max-len", mo.max_len, "Largest set size (0: no limit)");
  mine_cmd->add_option("--literals", mo.literals, "positive or all")
      ->check(CLI::IsMember({"positive", "all"}))
      ->capture_default_str();
  mine_cmd->add_option("--min-fr", mo.min_fr, "Explicit frequency floor (default: safe floor)");
  mine_cmd->add_option("--consequent", mo.consequent, "Fixed consequent literal, [!]name");
  mine_cmd->add_flag("--bonferroni", mo.bonferroni, "Require sqrt(m) K with m tests");
  mine_cmd->add_option("--tests", mo.tests, "Bonferroni test count m (implies --bonferroni)")
      ->check(CLI::PositiveNumber);
  mine_cmd->add_option("--min-imp", mo.min_imp, "Improvement threshold")->capture_default_str();
  mine_cmd->add_option("--format", mo.format, "auto, csv or transactions")
      ->check(CLI::IsMember({"auto", "csv", "transactions"}));
  mine_cmd->add_flag("--json", mo.json, "JSON instead of TSV");
  mine_cmd->add_flag("--all", mo.all, "Emit every candidate rule, not only significant ones");
  mine_cmd->add_option("--threads", mo.threads, "Worker threads (default: SIGRULE_THREADS or all cores)");

  std::string score_dataset, score_rule, score_format = "auto";
  double score_min_imp = 0.0;
  bool score_json = false;
  auto* score_cmd = app.add_subcommand("score", "Score one rule");
  score_cmd->add_option("dataset", score_dataset, "Dataset")->required();
  score_cmd->add_option("--rule", score_rule, "Rule, e.g. \"A,!B=>C\"")->required();
  score_cmd->add_option("--format", score_format, "auto, csv or transactions")
      ->check(CLI::IsMember({"auto", "csv", "transactions"}));
  score_cmd->add_option("--min-imp", score_min_imp, "Improvement threshold");
  score_cmd->add_flag("--json", score_json, "JSON instead of TSV");

  detail::BoundsOptions bo;
  auto* bounds_cmd = app.add_subcommand("bounds", "Closed-form frequency, confidence and chi2 bounds");
  bounds_cmd->add_option("--px", bo.px, "P(X)");
  bounds_cmd->add_option("--py", bo.py, "P(Y)");
  bounds_cmd->add_option("--n", bo.n, "Data size");
  bounds_cmd->add_option("-K,--k,--K", bo.K, "Required t level (default 2)");
  bounds_cmd->add_option("--gamma", bo.gamma, "Degree of dependence");
  bounds_cmd->add_option("--pmin", bo.pmin, "Smallest literal probability");
  bounds_cmd->add_option("--pz", bo.pz, "P(Z)");
  bounds_cmd->add_option("--pzc", bo.pzc, "P(Z,C)");
  bounds_cmd->add_option("--pc", bo.pc, "P(C)");

  std::string contour_mode, contour_output;
  std::optional<double> contour_py;
  double contour_gamma_max = 2.0;
  std::size_t contour_resolution = 50;
  auto* contour_cmd = app.add_subcommand("contour", "Emit a t-hat grid");
  contour_cmd->add_option("--mode", contour_mode, "frcf or frgamma")
      ->required()
      ->check(CLI::IsMember({"frcf", "frgamma"}));
  contour_cmd->add_option("--py", contour_py, "Fixed P(Y) (frcf)");
  contour_cmd->add_option("--gamma-max", contour_gamma_max, "Largest gamma (frgamma)")->capture_default_str();
  contour_cmd->add_option("--resolution", contour_resolution, "Grid steps per axis")->capture_default_str();
  contour_cmd->add_option("-o,--output", contour_output, "Write the grid to a file");

  std::string audit_config, audit_output = "text";
  std::vector<std::string> audit_measures_list;
  bool audit_empirical = false;
  std::uint64_t audit_seed = 1;
  auto* audit_cmd = app.add_subcommand("audit", "Type 1 / type 2 error audit of selection measures");
  audit_cmd->add_option("config", audit_config, "Scenario config (JSON)");
  audit_cmd->add_option("--measures", audit_measures_list, "Subset: fr_cf,fr_gamma,chi2,phi,j")->delimiter(',');
  audit_cmd->add_option("--output", audit_output, "text, tsv or json")
      ->check(CLI::IsMember({"text", "tsv", "json"}))
      ->capture_default_str();
  audit_cmd->add_flag("--empirical", audit_empirical, "Sample relations instead of exact tables");
  audit_cmd->add_option("--seed", audit_seed, "Sampling seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ok : usage;
  }

  try {
    if (*mine_cmd) return detail::run_mine(mo, out);
    if (*score_cmd) {
      return detail::run_score(score_dataset, score_rule, score_format, score_min_imp, score_json, out);
    }
    if (*bounds_cmd) return detail::run_bounds(bo, out);
    if (*contour_cmd) {
      return detail::run_contour(contour_mode, contour_py, contour_gamma_max, contour_resolution,
                                 contour_output, out);
    }
    if (*audit_cmd) {
      return detail::run_audit(audit_config, audit_measures_list, audit_output, audit_empirical,
                               audit_seed, out);
    }
  } catch (const load_error& e) {
    err << "error: " << e.what() << '\n';
    return usage;
  } catch (const usage_error& e) {
    err << "error: " << e.what() << '\n';
    return usage;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return internal;
  }
  return usage;
}

}  // namespace sigrule::cli
