#pragma once

// Batch driver behind the `rclab` executable. Everything is reachable through
// run_cli so the commands can be exercised in-process by tests.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rclab/bethe.hpp"
#include "rclab/error.hpp"
#include "rclab/exact.hpp"
#include "rclab/graph.hpp"
#include "rclab/mapping.hpp"
#include "rclab/parallel.hpp"
#include "rclab/regular.hpp"
#include "rclab/verify.hpp"

namespace rclab::cli {

using Json = nlohmann::ordered_json;

enum ExitCode : int { kOk = 0, kCheckFailed = 1, kUsageError = 2 };

struct RunConfig {
  std::string command;
  std::string suite = "all";
  std::optional<double> q, w, B;
  std::optional<double> beta, k, h;
  int d = 3;
  std::string graph_file;
  std::string gen;
  std::uint64_t seed = 1;
  std::optional<int> trials;
  int depth = 30;
  int samples = 2000;
  int restarts = 8;
  std::string spec;
  std::string out;
  std::string format;  // empty: command default
  std::optional<double> tol;
  double w_min = 0.0, w_max = 4.0;
  int w_points = 81;
  double B_min = 0.0, B_max = 1.0;
  int B_points = 11;
  int curve_points = 20;
  double step = 1e-4;
};

// ---------------------------------------------------------------------------
// Formatting

/// Shortest general form with 17 significant digits, enough to round-trip.
inline std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

class CsvWriter {
 public:
  CsvWriter(std::ostream& out, const std::vector<std::string>& header) : out_(out) { row(header); }

  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) out_ << (i ? "," : "") << csv_field(fields[i]);
    out_ << '\n';
  }

 private:
  std::ostream& out_;
};

inline std::string fmt(double x) { return format_double(x); }
inline std::string fmt(bool b) { return b ? "true" : "false"; }
inline std::string fmt(int x) { return std::to_string(x); }

// ---------------------------------------------------------------------------
// Inputs

namespace detail {

inline OffspringLaw parse_law(const std::string& text) {
  if (text.rfind("p:", 0) == 0) {
    std::vector<double> probs;
    std::stringstream ss(text.substr(2));
    std::string item;
    while (std::getline(ss, item, '|')) {
      try {
        std::size_t used = 0;
        probs.push_back(std::stod(item, &used));
        if (used != item.size()) throw std::invalid_argument(item);
      } catch (const std::exception&) {
        fail(ErrorKind::ParseError, "bad probability '" + item + "' in offspring law");
      }
    }
    return OffspringLaw::tabulated(std::move(probs));
  }
  try {
    std::size_t used = 0;
    const int c = std::stoi(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return OffspringLaw::deterministic(c);
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    fail(ErrorKind::ParseError, "bad offspring law '" + text + "'");
  }
}

}  // namespace detail

/// "c" (same law for root and interior), "root/interior", where each law is an
/// integer count or "p:p0|p1|..." over {0, 1, ...}.
inline OffspringSpec parse_offspring_spec(const std::string& text) {
  const auto slash = text.find('/');
  if (slash == std::string::npos) return OffspringSpec::uniform(detail::parse_law(text));
  return {detail::parse_law(text.substr(0, slash)), detail::parse_law(text.substr(slash + 1))};
}

/// --graph FILE, or --gen "regular:n,d" | "gw:spec,depth" (with --seed).
inline Graph load_graph(const RunConfig& cfg) {
  if (!cfg.graph_file.empty() && !cfg.gen.empty())
    fail(ErrorKind::InvalidParameter, "give either --graph or --gen, not both");
  if (!cfg.graph_file.empty()) {
    std::ifstream in(cfg.graph_file);
    if (!in) fail(ErrorKind::ParseError, "cannot open graph file '" + cfg.graph_file + "'");
    return read_graph(in);
  }
  if (cfg.gen.empty()) fail(ErrorKind::InvalidParameter, "a graph source is required (--graph or --gen)");
  const auto colon = cfg.gen.find(':');
  const auto comma = cfg.gen.rfind(',');
  if (colon == std::string::npos || comma == std::string::npos || comma < colon)
    fail(ErrorKind::ParseError, "bad generator spec '" + cfg.gen + "'");
  const std::string kind = cfg.gen.substr(0, colon);
  const std::string first = cfg.gen.substr(colon + 1, comma - colon - 1);
  const std::string second = cfg.gen.substr(comma + 1);
  auto to_int = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(s, &used);
      if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    fail(ErrorKind::ParseError, "bad integer '" + s + "' in generator spec");
  };
  if (kind == "regular") return gen_random_regular(to_int(first), to_int(second), cfg.seed);
  if (kind == "gw") return gen_gw_tree(parse_offspring_spec(first), to_int(second), cfg.seed).graph;
  fail(ErrorKind::ParseError, "unknown generator '" + kind + "'");
}

inline RCParams rc_params(const RunConfig& cfg) {
  if (!cfg.q || !cfg.w) fail(ErrorKind::InvalidParameter, "--q and --w are required");
  return {*cfg.q, *cfg.w, cfg.B.value_or(0.0)};
}

// ---------------------------------------------------------------------------
// Commands

inline int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
  VerifyOptions opts;
  opts.seed = cfg.seed;
  opts.trials = cfg.trials;
  opts.q = cfg.q;
  opts.tol = cfg.tol;
  const VerifyReport report = verify_suite(cfg.suite, opts);
  if (cfg.format == "json") {
    Json j;
    j["suite"] = cfg.suite;
    j["seed"] = cfg.seed;
    j["total"] = report.cases.size();
    j["failures"] = report.failures();
    j["cases"] = Json::array();
    for (const auto& c : report.cases)
      j["cases"].push_back({{"suite", c.suite}, {"check", c.check}, {"detail", c.detail}, {"residual", c.residual},
                            {"tolerance", c.tolerance}, {"pass", c.pass}});
    out << j.dump(2) << '\n';
  } else {
    CsvWriter csv(out, {"suite", "check", "detail", "residual", "tolerance", "pass"});
    for (const auto& c : report.cases) csv.row({c.suite, c.check, c.detail, fmt(c.residual), fmt(c.tolerance), fmt(c.pass)});
  }
  log << "verify " << cfg.suite << ": " << report.cases.size() << " cases, " << report.failures() << " failures\n";
  return report.failures() == 0 ? kOk : kCheckFailed;
}

inline int cmd_exact(const RunConfig& cfg, std::ostream& out) {
  const Graph g = load_graph(cfg);
  const RCParams p = rc_params(cfg);
  validate(p);
  Json j;
  j["n"] = g.n();
  j["m"] = g.m();
  j["q"] = p.q;
  j["w"] = p.w;
  j["B"] = p.B;
  if (p.q >= 2.0 && p.B >= 0.0) {
    const SandwichReport s = sandwich_check(g, p);
    j["logZ"] = s.logZ;
    j["logZ2"] = s.logZ2;
    j["L"] = s.L;
    j["bounds"] = {{"lower", s.logZ2}, {"upper", s.logUpper}, {"lower_ok", s.lower_ok}, {"upper_ok", s.upper_ok}};
  } else {
    j["logZ"] = rc_partition(g, p).log;
    j["logZ2"] = p.q > 1.0 + 1e-12 ? Json(rank2_partition(g, p).log) : Json(nullptr);
    j["L"] = cyclic_components_max(g);
    j["bounds"] = nullptr;  // the sandwich needs q >= 2 and B >= 0
  }
  if (cfg.format == "csv") {
    CsvWriter csv(out, {"n", "m", "q", "w", "B", "logZ", "logZ2", "L"});
    csv.row({fmt(g.n()), fmt(g.m()), fmt(p.q), fmt(p.w), fmt(p.B), fmt(j["logZ"].get<double>()),
             j["logZ2"].is_null() ? "" : fmt(j["logZ2"].get<double>()), fmt(j["L"].get<int>())});
  } else {
    out << j.dump(2) << '\n';
  }
  return kOk;
}

struct ScanRow {
  double w = 0.0, B = 0.0, phi = 0.0, t_plus = 0.0, t_minus = 0.0, dphi_dw = 0.0;
};

/// Grid of phi_rc_regular, B-major. dphi_dw is a central difference with
/// step `step` (forward difference with one Richardson level when w < step).
inline std::vector<ScanRow> scan_grid(const RunConfig& cfg) {
  if (!cfg.q) fail(ErrorKind::InvalidParameter, "--q is required");
  const double q = *cfg.q;
  check_regular_rc(q, std::max(cfg.w_min, 0.0), std::max(cfg.B_min, 0.0), cfg.d);
  require(cfg.w_points >= 1 && cfg.B_points >= 1, ErrorKind::InvalidParameter, "grid sizes must be >= 1");
  require(cfg.w_min >= 0.0 && cfg.w_max >= cfg.w_min, ErrorKind::InvalidParameter, "need 0 <= w-min <= w-max");
  require(cfg.B_min >= 0.0 && cfg.B_max >= cfg.B_min, ErrorKind::InvalidParameter, "need 0 <= B-min <= B-max");
  auto at = [](double lo, double hi, int count, int i) { return count == 1 ? lo : lo + (hi - lo) * i / (count - 1); };
  std::vector<ScanRow> rows(static_cast<std::size_t>(cfg.w_points) * cfg.B_points);
  parallel_for(rows.size(), [&](std::size_t idx) {
    const int bi = static_cast<int>(idx / cfg.w_points), wi = static_cast<int>(idx % cfg.w_points);
    ScanRow r;
    r.B = at(cfg.B_min, cfg.B_max, cfg.B_points, bi);
    r.w = at(cfg.w_min, cfg.w_max, cfg.w_points, wi);
    const RegularPressure p = rc_regular_pressure(q, r.w, r.B, cfg.d);
    r.phi = p.phi;
    r.t_plus = p.ising.t_plus;
    r.t_minus = p.ising.t_minus;
    const double h = cfg.step;
    if (r.w >= h) {
      r.dphi_dw = (phi_rc_regular(q, r.w + h, r.B, cfg.d) - phi_rc_regular(q, r.w - h, r.B, cfg.d)) / (2.0 * h);
    } else {
      const double f1 = phi_rc_regular(q, r.w + h, r.B, cfg.d), f2 = phi_rc_regular(q, r.w + 0.5 * h, r.B, cfg.d);
      r.dphi_dw = 2.0 * (f2 - r.phi) / (0.5 * h) - (f1 - r.phi) / h;
    }
    rows[idx] = r;
  });
  return rows;
}

inline int cmd_scan(const RunConfig& cfg, std::ostream& out) {
  const auto rows = scan_grid(cfg);
  if (cfg.format == "json") {
    Json j = Json::array();
    for (const auto& r : rows)
      j.push_back({{"w", r.w}, {"B", r.B}, {"phi", r.phi}, {"t_plus", r.t_plus}, {"t_minus", r.t_minus},
                   {"dphi_dw", r.dphi_dw}});
    out << j.dump(2) << '\n';
  } else {
    CsvWriter csv(out, {"w", "B", "phi", "t_plus", "t_minus", "dphi_dw"});
    for (const auto& r : rows) csv.row({fmt(r.w), fmt(r.B), fmt(r.phi), fmt(r.t_plus), fmt(r.t_minus), fmt(r.dphi_dw)});
  }
  return kOk;
}

struct CurveRow {
  double B = 0.0, w_c = 0.0, beta_star = 0.0, g = 0.0;
  bool first_order = false;
  double gap = 0.0;
};

struct CurveTrace {
  std::vector<CurveRow> rows;  // B_j = j B_+ / N, j = 0..N-1, then B_+ itself
  double B_plus = 0.0;
  double residual = 0.0;  // g(w_c(B_+)) - (d/(d-2))^2
};

inline CurveTrace trace_curve(double q, int d, int points, double step = 1e-4) {
  require(points >= 1, ErrorKind::InvalidParameter, "need at least one curve point");
  CurveTrace t;
  t.B_plus = find_B_plus(q, d);
  t.residual = g_of_w(w_c(t.B_plus, q, d), q) - std::pow(double(d) / (d - 2), 2);
  t.rows.resize(points + 1);
  parallel_for(t.rows.size(), [&](std::size_t j) {
    CurveRow r;
    r.B = j == static_cast<std::size_t>(points) ? t.B_plus : t.B_plus * static_cast<double>(j) / points;
    r.w_c = w_c(r.B, q, d);
    r.beta_star = rc_to_eising(q, r.w_c, r.B).eising.beta_star;
    r.g = g_of_w(r.w_c, q);
    const PhasePoint p = transition_probe(q, d, r.B, step);
    r.first_order = p.first_order;
    r.gap = p.gap;
    t.rows[j] = r;
  });
  return t;
}

inline int cmd_curve(const RunConfig& cfg, std::ostream& out) {
  if (!cfg.q) fail(ErrorKind::InvalidParameter, "--q is required");
  const CurveTrace t = trace_curve(*cfg.q, cfg.d, cfg.curve_points, cfg.step);
  if (cfg.format == "json") {
    Json j;
    j["q"] = *cfg.q;
    j["d"] = cfg.d;
    j["B_plus"] = t.B_plus;
    j["residual"] = t.residual;
    j["rows"] = Json::array();
    for (const auto& r : t.rows)
      j["rows"].push_back({{"B", r.B}, {"w_c", r.w_c}, {"beta_star", r.beta_star}, {"g", r.g},
                           {"first_order", r.first_order}, {"gap", r.gap}});
    out << j.dump(2) << '\n';
  } else {
    CsvWriter csv(out, {"B", "w_c", "beta_star", "g", "first_order", "gap"});
    for (const auto& r : t.rows)
      csv.row({fmt(r.B), fmt(r.w_c), fmt(r.beta_star), fmt(r.g), fmt(r.first_order), fmt(r.gap)});
  }
  return kOk;
}

/// (beta*, k, h) from --beta/--k/--h, or mapped from --q/--w/--B.
inline EIsingParams eising_params(const RunConfig& cfg, Json* echo = nullptr) {
  if (cfg.beta || cfg.k || cfg.h) {
    if (cfg.q || cfg.w) fail(ErrorKind::InvalidParameter, "give either (q, w, B) or (beta, k, h), not both");
    EIsingParams p{cfg.beta.value_or(0.0), cfg.k.value_or(0.0), cfg.h.value_or(0.0)};
    validate(p);
    return p;
  }
  const RCParams rc = rc_params(cfg);
  const MappedModel m = rc_to_eising(rc.q, rc.w, rc.B);
  if (echo) {
    (*echo)["q"] = rc.q;
    (*echo)["w"] = rc.w;
    (*echo)["B"] = rc.B;
  }
  return m.eising;
}

inline int cmd_tree(const RunConfig& cfg, std::ostream& out) {
  Json j;
  Json params;
  const EIsingParams p = eising_params(cfg, &params);
  params["beta_star"] = p.beta_star;
  params["k"] = p.k;
  params["h"] = p.h;
  const std::string spec_text =
      cfg.spec.empty() ? std::to_string(cfg.d) + "/" + std::to_string(cfg.d - 1) : cfg.spec;
  const OffspringSpec spec = parse_offspring_spec(spec_text);
  const TreePressureEstimate est = tree_pressure_mc(spec, p, {cfg.depth, cfg.samples, cfg.seed});
  j["spec"] = spec_text;
  j["depth"] = est.depth;
  j["samples"] = est.samples;
  j["seed"] = cfg.seed;
  j["phi"] = est.phi;
  j["stderr"] = est.stderr_;
  j["phi_free"] = est.phi_free;
  j["phi_plus"] = est.phi_plus;
  j["stderr_free"] = est.stderr_free;
  j["stderr_plus"] = est.stderr_plus;
  j["max_width"] = est.max_width;
  j["mag_free"] = est.mag_free;
  j["mag_plus"] = est.mag_plus;
  j["order_violations"] = est.magnetisation_order_violations + est.pressure_order_violations;
  j["params"] = params;
  if (cfg.format == "csv") {
    CsvWriter csv(out, {"phi", "stderr", "phi_free", "phi_plus", "max_width", "samples", "depth"});
    csv.row({fmt(est.phi), fmt(est.stderr_), fmt(est.phi_free), fmt(est.phi_plus), fmt(est.max_width),
             fmt(est.samples), fmt(est.depth)});
  } else {
    out << j.dump(2) << '\n';
  }
  return kOk;
}

inline int cmd_bethe(const RunConfig& cfg, std::ostream& out) {
  const Graph g = load_graph(cfg);
  PairwiseModel model;
  Json j;
  j["n"] = g.n();
  j["m"] = g.m();
  std::optional<TwoSpinWeights> ws;
  if (cfg.beta || cfg.k || cfg.h) {
    model = make_pairwise(g, eising_params(cfg));
  } else {
    const RCParams rc = rc_params(cfg);
    ws = rc_to_two_spin(rc.q, rc.w, rc.B);
    model = make_pairwise(g, *ws);
  }
  const BetheMaxResult r = bethe_max(g, model, cfg.restarts, cfg.seed);
  j["logZB_best"] = r.logZB_best;
  j["distinct_values"] = r.distinct_values;
  j["converged_runs"] = r.converged_runs;
  j["runs"] = Json::array();
  for (const auto& run : r.runs)
    j["runs"].push_back({{"init", run.init},
                         {"converged", run.converged},
                         {"sweeps", run.sweeps},
                         {"logZB", run.converged ? Json(run.logZB) : Json(nullptr)}});
  j["log_supermodular"] = model.lpp + model.lmm >= 2.0 * model.lpm;
  if (g.n() <= 20) {
    if (ws)
      j["exact_log_partition"] = two_spin_partition(g, *ws).log;
    else
      j["exact_log_partition"] = eising_partition(g, eising_params(cfg)).log;
  }
  if (cfg.format == "csv") {
    CsvWriter csv(out, {"init", "converged", "sweeps", "logZB"});
    for (const auto& run : r.runs)
      csv.row({run.init, fmt(run.converged), fmt(run.sweeps), run.converged ? fmt(run.logZB) : ""});
  } else {
    out << j.dump(2) << '\n';
  }
  return kOk;
}

inline std::string default_format(const std::string& command) {
  return command == "scan" || command == "curve" || command == "verify" ? "csv" : "json";
}

inline int dispatch(RunConfig cfg, std::ostream& out, std::ostream& log) {
  if (cfg.format.empty()) cfg.format = default_format(cfg.command);
  std::ofstream file;
  std::ostream* sink = &out;
  if (!cfg.out.empty()) {
    file.open(cfg.out);
    if (!file) fail(ErrorKind::InvalidParameter, "cannot write '" + cfg.out + "'");
    sink = &file;
  }
  if (cfg.command == "verify") return cmd_verify(cfg, *sink, log);
  if (cfg.command == "exact") return cmd_exact(cfg, *sink);
  if (cfg.command == "scan") return cmd_scan(cfg, *sink);
  if (cfg.command == "curve") return cmd_curve(cfg, *sink);
  if (cfg.command == "tree") return cmd_tree(cfg, *sink);
  if (cfg.command == "bethe") return cmd_bethe(cfg, *sink);
  fail(ErrorKind::InvalidParameter, "unknown command '" + cfg.command + "'");
}

// ---------------------------------------------------------------------------
// Argument parsing

inline void add_options(CLI::App& app, RunConfig& cfg) {
  app.set_help_flag("--help", "print this help and exit");  // -h is free for --h
  app.add_option("command", cfg.command, "verify | exact | scan | curve | tree | bethe")
      ->required()
      ->check(CLI::IsMember({"verify", "exact", "scan", "curve", "tree", "bethe"}));
  app.add_option("suite", cfg.suite, "verify suite: sandwich | identities | bethe | regular | all")
      ->check(CLI::IsMember({"sandwich", "identities", "bethe", "regular", "all"}));
  app.add_option("--q", cfg.q, "number of colours q");
  app.add_option("--w", cfg.w, "edge weight w = e^beta - 1");
  app.add_option("--B", cfg.B, "external field B");
  app.add_option("--beta", cfg.beta, "extended Ising coupling beta*");
  app.add_option("--k", cfg.k, "extended Ising degree coefficient k");
  app.add_option("--h", cfg.h, "extended Ising constant field h");
  app.add_option("--d", cfg.d, "degree of the regular graph / tree");
  app.add_option("--graph", cfg.graph_file, "graph file ('n m' then m lines 'u v')");
  app.add_option("--gen", cfg.gen, "generator: regular:n,d | gw:spec,depth");
  app.add_option("--seed", cfg.seed, "random seed");
  app.add_option("--trials", cfg.trials, "number of randomised cases per verify suite");
  app.add_option("--depth", cfg.depth, "tree truncation depth");
  app.add_option("--samples", cfg.samples, "number of sampled trees");
  app.add_option("--restarts", cfg.restarts, "random BP initialisations");
  app.add_option("--spec", cfg.spec, "offspring spec: c | root/interior | p:p0|p1|...");
  app.add_option("--out", cfg.out, "output file (default stdout)");
  app.add_option("--format", cfg.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--tol", cfg.tol, "override the verify tolerances");
  app.add_option("--w-min", cfg.w_min, "scan: smallest w");
  app.add_option("--w-max", cfg.w_max, "scan: largest w");
  app.add_option("--w-points", cfg.w_points, "scan: w grid size");
  app.add_option("--B-min", cfg.B_min, "scan: smallest B");
  app.add_option("--B-max", cfg.B_max, "scan: largest B");
  app.add_option("--B-points", cfg.B_points, "scan: B grid size");
  app.add_option("--curve-points", cfg.curve_points, "curve: number of B values below B_+");
  app.add_option("--step", cfg.step, "finite-difference step in w");
  app.set_config("--config", "", "flat key = value file; command-line flags take precedence");
}

/// Parses argv and runs the command. Returns 0 on success, 1 when a
/// verification fails, 2 on usage, parameter or budget errors.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"rclab: random cluster models with external field"};
  RunConfig cfg;
  add_options(app, cfg);
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }
  try {
    return dispatch(cfg, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kCheckFailed;
  }
}

inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"rclab"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace rclab::cli
