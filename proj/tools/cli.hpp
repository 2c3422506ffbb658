// Command-line front-end: torsion, check, scan, compose.
//
// Exit codes: 0 success, 2 input error, 3 evaluation or sampling failure,
// 4 the criteria disagree (an implementation bug on valid input).
#pragma once

#include <CLI11.hpp>

#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "webred/expr.hpp"
#include "webred/frobenius.hpp"
#include "webred/presets.hpp"
#include "webred/reducibility.hpp"
#include "webred/report_json.hpp"
#include "webred/web.hpp"

namespace webred::cli {

enum Exit : int { ok = 0, input_error = 2, evaluation_failure = 3, disagreement = 4 };

struct RunConfig {
  std::string command;
  std::string expression;
  std::string preset;
  int n = 0;
  std::string at;
  std::string p, a, s;
  int l = 0, k = 0;
  int count = 50;
  std::uint64_t seed = 42;
  int max_rejections = 10000;
  std::string box;
  double margin = WebSpec::default_margin;
  std::string output = "table";
  std::string criterion = "all";
  int l_max = 0;
  std::string outer, inner;
};

/// Bad flag values; maps to exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) out.push_back(item);
  if (!text.empty() && text.back() == sep) out.emplace_back();
  return out;
}

inline double to_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw InputError("not a number: '" + s + "'");
  }
  if (used != s.size() || !std::isfinite(v)) throw InputError("not a number: '" + s + "'");
  return v;
}

inline std::vector<int> parse_indices(const std::string& text) {
  std::vector<int> out;
  if (text.empty()) return out;
  for (const auto& item : split(text, ',')) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(item, &used);
    } catch (const std::exception&) {
      throw InputError("not an index: '" + item + "'");
    }
    if (used != item.size()) throw InputError("not an index: '" + item + "'");
    out.push_back(v);
  }
  return out;
}

inline Point parse_point(const std::string& text, int n) {
  Point pt;
  for (const auto& item : split(text, ',')) pt.push_back(to_double(item));
  if (static_cast<int>(pt.size()) != n)
    throw InputError("--at has " + std::to_string(pt.size()) + " coordinates, expected " + std::to_string(n));
  return pt;
}

/// "lo:hi" for every coordinate, or "lo:hi,lo:hi,..." one per coordinate.
inline std::vector<Interval> parse_box(const std::string& text, int n) {
  if (text.empty()) return {};
  std::vector<Interval> box;
  for (const auto& item : split(text, ',')) {
    const auto ends = split(item, ':');
    if (ends.size() != 2) throw InputError("box interval must be lo:hi, got '" + item + "'");
    box.push_back({to_double(ends[0]), to_double(ends[1])});
  }
  if (box.size() == 1) box.assign(n, box.front());
  if (static_cast<int>(box.size()) != n) throw InputError("--box needs 1 or n intervals");
  return box;
}

inline SamplePlan plan_of(const RunConfig& cfg) {
  if (cfg.count < 1) throw InputError("--count must be positive");
  if (cfg.max_rejections < 1) throw InputError("--max-rejections must be positive");
  return SamplePlan{cfg.count, cfg.seed, cfg.max_rejections};
}

inline std::optional<RolePartition> partition_of(const RunConfig& cfg, int n) {
  const bool explicit_form = !cfg.p.empty() || !cfg.a.empty() || !cfg.s.empty();
  const bool contiguous_form = cfg.l != 0 || cfg.k != 0;
  if (explicit_form && contiguous_form) throw InputError("give either --P/--A/--S or --l/--k, not both");
  if (contiguous_form) return RolePartition::contiguous(n, cfg.l, cfg.k);
  if (explicit_form) {
    std::optional<std::vector<int>> s;
    if (!cfg.s.empty()) s = parse_indices(cfg.s);
    return RolePartition(n, parse_indices(cfg.p), parse_indices(cfg.a), std::move(s));
  }
  return std::nullopt;
}

struct Target {
  WebSpec web;
  std::optional<RolePartition> partition;
  std::string expression;
};

inline Target target_of(const RunConfig& cfg) {
  if (!cfg.preset.empty()) {
    if (!cfg.expression.empty()) throw InputError("give either --preset or --expr, not both");
    auto preset = find_preset(cfg.preset);
    if (!preset) throw InputError("unknown preset '" + cfg.preset + "'");
    const int n = preset->web.dimension();
    if (cfg.n != 0 && cfg.n != n) throw InputError("--n does not match the preset");
    WebSpec web(n, preset->web.function(), parse_box(cfg.box, n), cfg.margin);
    auto part = partition_of(cfg, n);
    if (!part) part = preset->partition;
    std::string text = to_string(web.function());
    return {std::move(web), std::move(part), std::move(text)};
  }
  if (cfg.expression.empty()) throw InputError("--expr or --preset is required");
  if (cfg.n < 2) throw InputError("--n must be at least 2");
  WebSpec web(cfg.n, parse(cfg.expression), parse_box(cfg.box, cfg.n), cfg.margin);
  return {std::move(web), partition_of(cfg, cfg.n), cfg.expression};
}

// ---------------------------------------------------------------------------

namespace detail {

inline std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

inline std::string point_text(const Point& pt) {
  std::string out = "(";
  for (std::size_t i = 0; i < pt.size(); ++i) {
    if (i) out += ", ";
    out += fmt(pt[i]);
  }
  return out + ")";
}

inline void print_row(std::ostream& out, const std::string& criterion, const std::string& verdict,
                      double relative, const std::string& witness) {
  out << std::left << std::setw(16) << criterion << std::setw(16) << verdict << std::setw(14) << fmt(relative)
      << witness << '\n';
}

inline void print_report(std::ostream& out, const ReducibilityReport& r) {
  std::string witness;
  if (r.witness)
    witness = "(" + std::to_string(r.witness->p) + "," + std::to_string(r.witness->a) + "," +
              std::to_string(r.witness->b) + ") at " + point_text(r.witness->point);
  else
    witness = r.message;
  print_row(out, to_string(r.criterion), to_string(r.verdict), r.relative_residual, witness);
}

inline void print_report(std::ostream& out, const FrobeniusReport& r) {
  std::string witness;
  if (r.witness)
    witness = "[" + r.witness->first + ", " + r.witness->second + "] on " + r.witness->form + " at " +
              point_text(r.witness->point);
  else
    witness = r.message;
  print_row(out, r.large ? "frobenius_large" : "frobenius", to_string(r.verdict), r.relative_defect, witness);
}

inline bool sampling_failed(const ReducibilityReport& r) { return r.samples == 0; }
inline bool sampling_failed(const FrobeniusReport& r) { return r.samples == 0; }

}  // namespace detail

inline int cmd_torsion(const RunConfig& cfg, std::ostream& out) {
  const Target t = target_of(cfg);
  if (cfg.at.empty()) throw InputError("--at is required");
  const Point pt = parse_point(cfg.at, t.web.dimension());
  const TorsionTable table = torsion(t.web, pt);
  if (cfg.output == "json") {
    ordered_json j{{"expr", t.expression}, {"n", t.web.dimension()}};
    j.update(to_json(table));
    out << j.dump(2) << '\n';
    return ok;
  }
  out << "torsion of " << t.expression << " at " << detail::point_text(pt) << '\n';
  for (int a = 1; a <= table.dimension(); ++a) {
    for (int b = 1; b <= table.dimension(); ++b) {
      out << std::right << std::setw(14) << detail::fmt(table(a, b));
    }
    out << '\n';
  }
  return ok;
}

inline int cmd_check(const RunConfig& cfg, std::ostream& out) {
  const Target t = target_of(cfg);
  if (!t.partition) throw InputError("a partition is required: --P/--A[/--S] or --l/--k");
  const RolePartition& part = *t.partition;
  const SamplePlan plan = plan_of(cfg);
  const std::string& c = cfg.criterion;

  if (c == "all") {
    const auto subweb = check_subweb(t.web, part, plan);
    const auto pde = check_pde(t.web, part, plan);
    const auto frob = check_integrability(t.web, part, plan, false);
    const auto full = check_full(t.web, part, plan);
    const auto frob_large = check_integrability(t.web, part, plan, true);

    const bool agree = subweb.verdict == pde.verdict && pde.verdict == as_verdict(frob.verdict) &&
                       full.verdict == as_verdict(frob_large.verdict);
    const bool failed = detail::sampling_failed(pde);

    if (cfg.output == "json") {
      ordered_json j;
      j["expr"] = t.expression;
      j["partition"] = to_json(part);
      j["samples"] = plan.count;
      j["seed"] = plan.seed;
      j["verdict"] = to_string(pde.verdict);
      j["full_verdict"] = to_string(full.verdict);
      j["agree"] = agree;
      j["reports"] = ordered_json::array(
          {to_json(subweb), to_json(pde), to_json(frob), to_json(full), to_json(frob_large)});
      out << j.dump(2) << '\n';
    } else {
      out << t.expression << "  " << part.to_string() << '\n';
      detail::print_report(out, subweb);
      detail::print_report(out, pde);
      detail::print_report(out, frob);
      detail::print_report(out, full);
      detail::print_report(out, frob_large);
      out << "subweb: " << to_string(pde.verdict) << ", full web: " << to_string(full.verdict)
          << (agree ? ", all criteria agree" : ", CRITERIA DISAGREE") << '\n';
    }
    if (failed) return evaluation_failure;
    return agree ? ok : disagreement;
  }

  if (c == "frobenius" || c == "frobenius-large") {
    const auto r = check_integrability(t.web, part, plan, c == "frobenius-large");
    if (cfg.output == "json") out << to_json(r).dump(2) << '\n';
    else detail::print_report(out, r);
    return detail::sampling_failed(r) ? evaluation_failure : ok;
  }

  Criterion criterion;
  if (c == "eq14") criterion = Criterion::torsion;
  else if (c == "eq20") criterion = Criterion::pde;
  else if (c == "eq18") criterion = Criterion::full;
  else throw InputError("unknown criterion '" + c + "'");
  const auto r = check(criterion, t.web, part, plan);
  if (cfg.output == "json") out << to_json(r).dump(2) << '\n';
  else detail::print_report(out, r);
  return detail::sampling_failed(r) ? evaluation_failure : ok;
}

inline int cmd_scan(const RunConfig& cfg, std::ostream& out) {
  const Target t = target_of(cfg);
  const SamplePlan plan = plan_of(cfg);
  const int n = t.web.dimension();
  const int l_max = cfg.l_max > 0 ? cfg.l_max : n - 2;
  const std::string& c = cfg.criterion;

  Criterion criterion = Criterion::pde;
  if (c == "eq14") criterion = Criterion::torsion;
  else if (c == "eq18") criterion = Criterion::full;
  else if (c != "eq20" && c != "all") throw InputError("scan supports --criterion eq14, eq18 or eq20");

  const auto entries = scan(t.web, plan, l_max, criterion);
  int reducible = 0;
  bool failed = false;
  for (const auto& e : entries) {
    reducible += e.report.verdict == Verdict::reducible;
    failed = failed || detail::sampling_failed(e.report);
  }

  if (cfg.output == "json") {
    ordered_json j;
    j["expr"] = t.expression;
    j["n"] = n;
    j["samples"] = plan.count;
    j["seed"] = plan.seed;
    j["reducible_count"] = reducible;
    j["reports"] = ordered_json::array();
    for (const auto& e : entries) j["reports"].push_back(to_json(e.report));
    out << j.dump(2) << '\n';
  } else {
    for (const auto& e : entries) {
      out << std::left << std::setw(34) << e.partition.to_string();
      detail::print_report(out, e.report);
    }
    out << reducible << " of " << entries.size() << " partitions reducible\n";
  }
  return failed ? evaluation_failure : ok;
}

inline int cmd_compose(const RunConfig& cfg, std::ostream& out) {
  if (cfg.outer.empty() || cfg.inner.empty()) throw InputError("--f and --g are required");
  const int given = static_cast<int>(parse_indices(cfg.p).size() + parse_indices(cfg.a).size() +
                                     parse_indices(cfg.s).size());
  const int n = cfg.n != 0 ? cfg.n : given;
  auto part = partition_of(cfg, n);
  if (!part) throw InputError("a partition is required: --P/--A[/--S] or --l/--k");
  const WebSpec web = compose(parse(cfg.outer), parse(cfg.inner), *part, parse_box(cfg.box, n), cfg.margin);
  const auto self_check = check_pde(web, *part, plan_of(cfg));

  const std::string text = to_string(web.function());
  if (cfg.output == "json") {
    ordered_json j{{"expr", text}, {"n", n}, {"self_check", to_json(self_check)}};
    out << j.dump(2) << '\n';
  } else {
    out << text << '\n';
    out << "self-check: ";
    detail::print_report(out, self_check);
  }
  return detail::sampling_failed(self_check) ? evaluation_failure : ok;
}

// ---------------------------------------------------------------------------

inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Reducibility checks for codimension-one (n+1)-webs", "webred"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--expr", cfg.expression, "web function F(x1..xn)");
    sub->add_option("--n", cfg.n, "ambient dimension");
    sub->add_option("--preset", cfg.preset, "built-in web: goursat4, goursat5");
    sub->add_option("--box", cfg.box, "sampling box, lo:hi or lo:hi,...,lo:hi");
    sub->add_option("--margin", cfg.margin, "regularity margin on |dF/dx_i|");
    sub->add_option("--output", cfg.output, "table or json")->check(CLI::IsMember({"table", "json"}));
  };
  auto add_sampling = [&](CLI::App* sub) {
    sub->add_option("--count", cfg.count, "sample points");
    sub->add_option("--seed", cfg.seed, "sampler seed");
    sub->add_option("--max-rejections", cfg.max_rejections, "consecutive misses before giving up");
  };
  auto add_partition = [&](CLI::App* sub) {
    sub->add_option("--P", cfg.p, "P block, comma separated");
    sub->add_option("--A", cfg.a, "A block, comma separated");
    sub->add_option("--S", cfg.s, "S block, comma separated (default: the rest)");
    sub->add_option("--l", cfg.l, "contiguous P = 1..l");
    sub->add_option("--k", cfg.k, "contiguous A = l+1..k");
  };

  auto* torsion_cmd = app.add_subcommand("torsion", "torsion table at a point");
  add_common(torsion_cmd);
  torsion_cmd->add_option("--at", cfg.at, "point x1,...,xn");

  auto* check_cmd = app.add_subcommand("check", "decide reducibility for one partition");
  add_common(check_cmd);
  add_sampling(check_cmd);
  add_partition(check_cmd);
  check_cmd->add_option("--criterion", cfg.criterion, "eq14, eq20, eq18, frobenius, frobenius-large or all")
      ->check(CLI::IsMember({"eq14", "eq20", "eq18", "frobenius", "frobenius-large", "all"}));

  auto* scan_cmd = app.add_subcommand("scan", "check every admissible partition");
  add_common(scan_cmd);
  add_sampling(scan_cmd);
  scan_cmd->add_option("--l-max", cfg.l_max, "largest P block (default n-2)");
  scan_cmd->add_option("--criterion", cfg.criterion, "eq14, eq20 or eq18 (default eq20)");

  auto* compose_cmd = app.add_subcommand("compose", "build F = f(x_P, g(x_A, x_S), x_S)");
  compose_cmd->add_option("--f", cfg.outer, "outer function over u1..");
  compose_cmd->add_option("--g", cfg.inner, "inner function over x_A, x_S");
  compose_cmd->add_option("--n", cfg.n, "ambient dimension (default |P|+|A|+|S|)");
  compose_cmd->add_option("--box", cfg.box, "sampling box for the self-check");
  compose_cmd->add_option("--margin", cfg.margin, "regularity margin");
  compose_cmd->add_option("--output", cfg.output, "table or json")->check(CLI::IsMember({"table", "json"}));
  add_sampling(compose_cmd);
  add_partition(compose_cmd);

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ok : input_error;
  }

  try {
    if (torsion_cmd->parsed()) return cmd_torsion(cfg, out);
    if (check_cmd->parsed()) return cmd_check(cfg, out);
    if (scan_cmd->parsed()) return cmd_scan(cfg, out);
    return cmd_compose(cfg, out);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return input_error;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return input_error;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return input_error;
  } catch (const EvalError& e) {
    err << "error: " << e.what() << '\n';
    return evaluation_failure;
  } catch (const RegularityError& e) {
    err << "error: " << e.what() << '\n';
    return evaluation_failure;
  } catch (const SamplingError& e) {
    err << "error: " << e.what() << '\n';
    return evaluation_failure;
  }
}

}  // namespace webred::cli
