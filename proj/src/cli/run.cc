#include "cnf/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "cnf/alpf.hpp"
#include "cnf/certificate.hpp"
#include "cnf/problems.hpp"

namespace cnf::cli {

namespace {

using nlohmann::json;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SourceOptions {
  std::string catalog;
  std::string problem;
  int n = 0;
  double lambda = 0.0;
  int I = 0;
  std::uint64_t seed = 1;
};

struct SolveOptions {
  std::string solver = "alpf";
  std::optional<double> eps, rho0, growth;
  std::optional<int> max_outer;
  std::string inner;
  std::string start;
  std::string start_pattern;
  int blocks = 0;
  std::string output;
};

struct Loaded {
  CnfProblem problem;
  std::optional<CatalogEntry> entry;
};

void add_params(CLI::App& cmd, SourceOptions& src) {
  cmd.add_option("--n", src.n, "Dimension for sized catalog entries");
  cmd.add_option("--lambda", src.lambda, "Regularization weight for 0-norm entries");
  cmd.add_option("--I", src.I, "Sample count for ex3");
  cmd.add_option("--seed", src.seed, "Seed for generated data and sampling");
}

void add_source(CLI::App& cmd, SourceOptions& src) {
  cmd.add_option("--catalog", src.catalog, "Catalog entry id (ex1a, ex1b, ex2, ex3, ex4, ex5, ex7, ex8, ex9)");
  cmd.add_option("--problem", src.problem, "Problem file in the text format");
  add_params(cmd, src);
}

Loaded load(const SourceOptions& src) {
  if (src.catalog.empty() == src.problem.empty()) {
    throw ConfigError("exactly one of --catalog or --problem is required");
  }
  if (!src.catalog.empty()) {
    CatalogParams params{src.n, src.lambda, src.I, src.seed};
    CatalogEntry entry = build(catalog_id_from_string(src.catalog), params);
    CnfProblem prob = entry.problem;
    return Loaded{prob, std::move(entry)};
  }
  try {
    return Loaded{read_problem_file(src.problem), std::nullopt};
  } catch (const ParseError&) {
    throw;
  } catch (const std::runtime_error& e) {
    throw ConfigError(e.what());
  }
}

std::vector<double> parse_list(const std::string& text, const char* flag) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (item.empty()) throw ConfigError(fmt::format("{}: empty entry in '{}'", flag, text));
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw ConfigError(fmt::format("{}: '{}' is not a number", flag, item));
    values.push_back(v);
  }
  return values;
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// "linear" (1, 2, ..., dim), "linear:a:step", or "constant:c".
Eigen::VectorXd start_from_pattern(const std::string& pattern, int dim) {
  std::vector<std::string> parts;
  std::stringstream ss(pattern);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  auto number = [&](std::size_t i, double fallback) {
    if (i >= parts.size()) return fallback;
    auto v = parse_list(parts[i], "--start-pattern");
    if (v.size() != 1) throw ConfigError(fmt::format("--start-pattern: bad number '{}'", parts[i]));
    return v[0];
  };
  if (!parts.empty() && parts[0] == "linear" && parts.size() <= 3) {
    double a = number(1, 1.0), step = number(2, 1.0);
    return Eigen::VectorXd::LinSpaced(dim, a, a + step * (dim - 1));
  }
  if (parts.size() == 2 && parts[0] == "constant") return Eigen::VectorXd::Constant(dim, number(1, 0.0));
  throw ConfigError(fmt::format("--start-pattern must be linear[:a[:step]] or constant:c, got '{}'", pattern));
}

std::string format_point(const Eigen::VectorXd& v) {
  std::string out = "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i > 0) out += ", ";
    out += fmt::format("{:.6f}", std::abs(v[i]) < 5e-7 ? 0.0 : v[i]);
  }
  return out + ")";
}

json vec(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

AlpfConfig solve_config(const Loaded& loaded, const SolveOptions& opt, std::uint64_t seed) {
  AlpfConfig cfg;
  if (loaded.entry) {
    cfg = opt.solver == "decomposed" && loaded.entry->decomposed_config ? *loaded.entry->decomposed_config
                                                                         : loaded.entry->run_config;
    cfg.surrogate = loaded.entry->surrogate;
  }
  if (opt.eps) cfg.eps = *opt.eps;
  if (opt.rho0) cfg.rho0 = *opt.rho0;
  if (opt.growth) cfg.growth = *opt.growth;
  if (opt.max_outer) cfg.max_outer = *opt.max_outer;
  if (opt.inner == "gd") {
    cfg.inner.method = InnerMethod::gradient_descent;
  } else if (opt.inner == "newton") {
    cfg.inner.method = InnerMethod::newton_fd;
  } else if (!opt.inner.empty()) {
    throw ConfigError(fmt::format("--inner must be gd or newton, got '{}'", opt.inner));
  }
  cfg.seed = seed;

  const CnfProblem& prob = loaded.problem;
  if (!opt.start.empty() && !opt.start_pattern.empty()) {
    throw ConfigError("--start and --start-pattern are mutually exclusive");
  }
  if (!opt.start.empty()) {
    auto values = parse_list(opt.start, "--start");
    if (static_cast<int>(values.size()) > prob.dim()) {
      throw ConfigError(fmt::format("--start has {} entries, the problem has {} variables", values.size(), prob.dim()));
    }
    values.resize(static_cast<std::size_t>(prob.dim()), 0.0);
    cfg.start = Point::split(to_vector(values), prob.n());
  } else if (!opt.start_pattern.empty()) {
    cfg.start = Point::split(start_from_pattern(opt.start_pattern, prob.dim()), prob.n());
  }
  cfg.validate();
  return cfg;
}

int do_solve(const SourceOptions& src, const SolveOptions& opt, std::ostream& out, bool tty) {
  Loaded loaded = load(src);
  const CnfProblem& prob = loaded.problem;
  AlpfConfig cfg = solve_config(loaded, opt, src.seed);
  std::string output = opt.output.empty() ? (tty ? "table" : "jsonl") : opt.output;

  AlpfTrace trace;
  if (opt.solver == "alpf") {
    if (opt.blocks != 0) throw ConfigError("--blocks applies to the decomposed solver only");
    trace = solve_alpf(prob, cfg);
  } else if (opt.solver == "penalty") {
    if (opt.blocks != 0) throw ConfigError("--blocks applies to the decomposed solver only");
    trace = solve_penalty(prob, cfg);
  } else {
    if (opt.blocks < 1) throw ConfigError("the decomposed solver requires --blocks p");
    trace = solve_decomposed(prob, BlockPartition::by_x_chunks(prob, opt.blocks), cfg);
  }

  const IterationRecord& last = trace.last();
  Point p = last.point();
  double f = last.f.value_or(last.g);
  std::string verdict;
  json cert_json;
  try {
    Multipliers hint{trace.u_bar, trace.v_next, SignMode::v_free};
    Certificate cert = certify(prob, p, CertifyOptions{}, hint);
    verdict = std::string(to_string(cert.verdict));
    cert_json = to_json(cert);
  } catch (const std::exception& e) {
    verdict = "inconclusive";
    cert_json = {{"error", e.what()}};
  }

  json extra = {{"x", vec(p.x)}, {"y", vec(p.y)}, {"f", f}, {"e", last.e}, {"verdict", verdict},
                {"certificate", cert_json}};
  if (output == "table") {
    out << to_table(trace);
    out << fmt::format("x = {}  f = {:.6f}  e = {:.3e}  verdict = {}\n", format_point(p.x), f, last.e, verdict);
  } else if (output == "json") {
    json j = to_json(trace);
    for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
    out << j.dump(2) << '\n';
  } else {
    out << to_jsonl(trace, &extra);
  }
  bool failed = trace.status == StopReason::inner_failure || trace.status == StopReason::max_outer;
  return failed ? exit_solver_failure : exit_ok;
}

int do_certify(const SourceOptions& src, const std::string& point_text, double feas_tol, std::ostream& out) {
  Loaded loaded = load(src);
  const CnfProblem& prob = loaded.problem;
  auto values = parse_list(point_text, "--point");
  Point p;
  if (static_cast<int>(values.size()) == prob.dim()) {
    p = Point::split(to_vector(values), prob.n());
  } else if (static_cast<int>(values.size()) == prob.n() && prob.has_lift()) {
    p = prob.lift(to_vector(values));
  } else {
    throw ConfigError(fmt::format("--point has {} entries; expected {} (x, y) or {} (x, lifted)", values.size(),
                                  prob.dim(), prob.n()));
  }
  CertifyOptions opts;
  opts.feas_tol = feas_tol;
  out << to_json(certify(prob, p, opts)).dump(2) << '\n';
  return exit_ok;
}

int do_validate(const SourceOptions& src, int samples, std::ostream& out) {
  Loaded loaded = load(src);
  const CnfProblem& prob = loaded.problem;
  json report = {{"name", prob.name()}, {"n", prob.n()}, {"m", prob.m()}, {"s", prob.s()}, {"r", prob.r()},
                 {"exact", prob.exact()}};
  report["box"] = {prob.box().lo, prob.box().hi};
  report["convexity_samples"] = samples;
  report["convexity_violations"] = sample_convexity(prob, samples, src.seed);
  if (prob.has_lift() && prob.reference()) {
    report["exactness_gap"] = validate_exactness(prob, samples, src.seed);
  } else {
    report["exactness_gap"] = nullptr;
  }
  if (loaded.entry) {
    FeasibilityReport feas = check_feasible(prob, loaded.entry->start, 1e-6);
    report["start_feasible"] = feas.in_xf;
    if (!loaded.entry->notes.empty()) report["notes"] = loaded.entry->notes;
  }
  out << report.dump(2) << '\n';
  return exit_ok;
}

int do_catalog(const SourceOptions& src, const std::string& export_dir, std::ostream& out) {
  CatalogParams params{src.n, src.lambda, src.I, src.seed};
  if (!export_dir.empty()) std::filesystem::create_directories(export_dir);
  out << fmt::format("{:<6}  {:>4}  {:>4}  {:>4}  {:>4}  {:<5}  {}\n", "id", "n", "m", "s", "r", "exact", "notes");
  for (CatalogId id : all_catalog_ids()) {
    CatalogEntry e = build(id, params);
    const CnfProblem& p = e.problem;
    out << fmt::format("{:<6}  {:>4}  {:>4}  {:>4}  {:>4}  {:<5}  {}\n", to_string(id), p.n(), p.m(), p.s(), p.r(),
                       p.exact() ? "yes" : "no", e.notes);
    if (!export_dir.empty()) {
      auto path = std::filesystem::path(export_dir) / fmt::format("{}.cnf", to_string(id));
      std::ofstream file(path);
      if (!file) throw ConfigError(fmt::format("cannot write '{}'", path.string()));
      file << write_problem(p);
    }
  }
  return exit_ok;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, bool tty) {
  CLI::App app{"Convertible nonconvex forms: solve, certify and validate", "cnfopt"};
  app.require_subcommand(1);

  SourceOptions src;
  SolveOptions solve_opt;
  std::string point_text, export_dir;
  double feas_tol = 1e-6;
  int samples = 200;

  CLI::App* solve = app.add_subcommand("solve", "Run ALPF, the penalty loop or the decomposed solver");
  add_source(*solve, src);
  solve->add_option("--solver", solve_opt.solver)->check(CLI::IsMember({"alpf", "penalty", "decomposed"}));
  solve->add_option("--eps", solve_opt.eps, "Stopping tolerance");
  solve->add_option("--rho0", solve_opt.rho0, "Initial penalty weight");
  solve->add_option("--growth", solve_opt.growth, "Penalty growth factor N");
  solve->add_option("--max-outer", solve_opt.max_outer, "Outer iteration limit");
  solve->add_option("--inner", solve_opt.inner, "Inner method: gd or newton");
  solve->add_option("--start", solve_opt.start, "Comma-separated start (x, y), zero-padded");
  solve->add_option("--start-pattern", solve_opt.start_pattern, "linear[:a[:step]] or constant:c");
  solve->add_option("--blocks", solve_opt.blocks, "Block count for the decomposed solver");
  solve->add_option("--output", solve_opt.output)->check(CLI::IsMember({"table", "json", "jsonl"}));

  CLI::App* cert = app.add_subcommand("certify", "Certify a candidate point");
  add_source(*cert, src);
  cert->add_option("--point", point_text, "Comma-separated x or (x, y)")->required();
  cert->add_option("--feas-tol", feas_tol, "Feasibility tolerance");

  CLI::App* validate = app.add_subcommand("validate", "Sample convexity and exactness of a form");
  add_source(*validate, src);
  validate->add_option("--samples", samples, "Sample count");

  CLI::App* catalog = app.add_subcommand("catalog", "List the built-in examples");
  add_params(*catalog, src);
  catalog->add_option("--export", export_dir, "Write each entry as <dir>/<id>.cnf");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return exit_config_error;
  }

  try {
    if (solve->parsed()) return do_solve(src, solve_opt, out, tty);
    if (cert->parsed()) return do_certify(src, point_text, feas_tol, out);
    if (validate->parsed()) return do_validate(src, samples, out);
    return do_catalog(src, export_dir, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return exit_config_error;
  } catch (const ExprError& e) {
    err << "error: " << e.what() << '\n';
    return exit_config_error;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return exit_config_error;
  } catch (const std::exception& e) {
    err << "solver error: " << e.what() << '\n';
    return exit_solver_failure;
  }
}

}  // namespace cnf::cli
