#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "cnf/alpf.hpp"

namespace cnf {

namespace {

using nlohmann::json;

bool same(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return a.size() == b.size() && (a.size() == 0 || a == b);
}

json vec(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vec_from(const json& j) {
  auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> optional_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

json diagnostics_json(const AlpfDiagnostics& d) {
  return {{"normalized_kkt_residual", d.normalized_kkt_residual},
          {"inactive_with_multiplier", d.inactive_with_multiplier},
          {"infeasibility_increases", d.infeasibility_increases},
          {"heuristic_convex", d.heuristic_convex}};
}

AlpfDiagnostics diagnostics_from(const json& j) {
  AlpfDiagnostics d;
  d.normalized_kkt_residual = j.at("normalized_kkt_residual").get<double>();
  d.inactive_with_multiplier = j.at("inactive_with_multiplier").get<std::vector<int>>();
  d.infeasibility_increases = j.at("infeasibility_increases").get<std::vector<int>>();
  d.heuristic_convex = j.at("heuristic_convex").get<bool>();
  return d;
}

json summary_json(const AlpfTrace& t) {
  return {{"solver", t.solver},
          {"status", to_string(t.status)},
          {"u_bar", vec(t.u_bar)},
          {"v_next", vec(t.v_next)},
          {"diagnostics", diagnostics_json(t.diagnostics)}};
}

void summary_from(const json& j, AlpfTrace& t) {
  t.solver = j.at("solver").get<std::string>();
  t.status = stop_reason_from_string(j.at("status").get<std::string>());
  t.u_bar = vec_from(j.at("u_bar"));
  t.v_next = vec_from(j.at("v_next"));
  t.diagnostics = diagnostics_from(j.at("diagnostics"));
}

std::string format_vector(const Eigen::VectorXd& v) {
  std::string out = "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i > 0) out += ',';
    // Avoid printing "-0.0000" for values that round to zero.
    double x = std::abs(v[i]) < 5e-5 ? 0.0 : v[i];
    out += fmt::format("{:.4f}", x);
  }
  return out + ")";
}

}  // namespace

bool operator==(const IterationRecord& a, const IterationRecord& b) {
  return a.k == b.k && a.rho == b.rho && same(a.x, b.x) && same(a.y, b.y) && same(a.u, b.u) && same(a.v, b.v) &&
         a.A == b.A && a.g == b.g && a.e == b.e && a.gap == b.gap && a.inner_status == b.inner_status &&
         a.inner_iterations == b.inner_iterations && a.f == b.f && a.norm0 == b.norm0 && a.surrogate == b.surrogate;
}

bool operator==(const AlpfDiagnostics& a, const AlpfDiagnostics& b) {
  return a.normalized_kkt_residual == b.normalized_kkt_residual &&
         a.inactive_with_multiplier == b.inactive_with_multiplier &&
         a.infeasibility_increases == b.infeasibility_increases && a.heuristic_convex == b.heuristic_convex;
}

bool operator==(const AlpfTrace& a, const AlpfTrace& b) {
  return a.solver == b.solver && a.records == b.records && a.status == b.status && same(a.u_bar, b.u_bar) &&
         same(a.v_next, b.v_next) && a.diagnostics == b.diagnostics;
}

json to_json(const IterationRecord& r) {
  return {{"k", r.k},
          {"rho", r.rho},
          {"x", vec(r.x)},
          {"y", vec(r.y)},
          {"u", vec(r.u)},
          {"v", vec(r.v)},
          {"A", r.A},
          {"g", r.g},
          {"e", r.e},
          {"gap", r.gap},
          {"inner_status", to_string(r.inner_status)},
          {"inner_iterations", r.inner_iterations},
          {"f", optional_number(r.f)},
          {"norm0", r.norm0},
          {"surrogate", optional_number(r.surrogate)}};
}

IterationRecord record_from_json(const json& j) {
  IterationRecord r;
  r.k = j.at("k").get<int>();
  r.rho = j.at("rho").get<double>();
  r.x = vec_from(j.at("x"));
  r.y = vec_from(j.at("y"));
  r.u = vec_from(j.at("u"));
  r.v = vec_from(j.at("v"));
  r.A = j.at("A").get<double>();
  r.g = j.at("g").get<double>();
  r.e = j.at("e").get<double>();
  r.gap = j.at("gap").get<double>();
  r.inner_status = inner_status_from_string(j.at("inner_status").get<std::string>());
  r.inner_iterations = j.value("inner_iterations", 0);
  r.f = j.contains("f") ? optional_from(j.at("f")) : std::nullopt;
  r.norm0 = j.value("norm0", 0);
  r.surrogate = j.contains("surrogate") ? optional_from(j.at("surrogate")) : std::nullopt;
  return r;
}

json to_json(const AlpfTrace& t) {
  json j = summary_json(t);
  json records = json::array();
  for (const IterationRecord& r : t.records) records.push_back(to_json(r));
  j["records"] = records;
  return j;
}

AlpfTrace trace_from_json(const json& j) {
  AlpfTrace t;
  summary_from(j, t);
  for (const json& r : j.at("records")) t.records.push_back(record_from_json(r));
  return t;
}

std::string to_jsonl(const AlpfTrace& t, const json* extra) {
  std::string out;
  for (const IterationRecord& r : t.records) out += to_json(r).dump() + '\n';
  json summary = summary_json(t);
  if (extra) {
    for (auto it = extra->begin(); it != extra->end(); ++it) summary[it.key()] = it.value();
  }
  out += json{{"summary", summary}}.dump() + '\n';
  return out;
}

AlpfTrace trace_from_jsonl(std::string_view text) {
  AlpfTrace t;
  std::istringstream in{std::string(text)};
  std::string line;
  bool saw_summary = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    if (j.contains("summary")) {
      summary_from(j.at("summary"), t);
      saw_summary = true;
    } else {
      t.records.push_back(record_from_json(j));
    }
  }
  if (!saw_summary) throw std::invalid_argument("trace has no summary line");
  return t;
}

std::string to_table(const AlpfTrace& t) {
  bool has_f = !t.records.empty() && t.records.front().f.has_value();
  bool has_surrogate = !t.records.empty() && t.records.front().surrogate.has_value();
  std::string out = fmt::format("{:>3}  {:>10}  {:>12}  {:>12}  {:>6}", "k", "rho_k", "f(x^k)", "g(x^k,y^k)", "|x|_0");
  if (has_surrogate) out += fmt::format("  {:>10}", "surrogate");
  out += fmt::format("  {:>10}  {}\n", "e^k", "x^k");
  for (const IterationRecord& r : t.records) {
    out += fmt::format("{:>3}  {:>10.4g}  {:>12.4f}  {:>12.4f}  {:>6}", r.k, r.rho, has_f ? r.f.value_or(r.g) : r.g,
                       r.g, r.norm0);
    if (has_surrogate) out += fmt::format("  {:>10.4f}", r.surrogate.value_or(0.0));
    out += fmt::format("  {:>10.4f}  {}\n", r.e, format_vector(r.x));
  }
  out += fmt::format("status: {}\n", to_string(t.status));
  return out;
}

}  // namespace cnf
