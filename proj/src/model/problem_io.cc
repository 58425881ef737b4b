#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "cnf/model.hpp"

namespace cnf {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Drops a trailing '#' comment that is not inside a quoted name.
std::string_view strip_comment(std::string_view line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

std::vector<std::string_view> words(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t start = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

template <class T>
T to_number(std::string_view text, int line, int column, const char* what) {
  T value{};
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size()) {
    throw ParseError(fmt::format("expected {}, got '{}'", what, text), line, column);
  }
  return value;
}

struct Pending {
  std::string text;
  int line;
  int offset;  // column of the first character of `text`, 0-based
};

class Reader {
 public:
  CnfProblem read(std::istream& in) {
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
      ++line_no;
      if (!raw.empty() && raw.back() == '\r') raw.pop_back();
      line(raw, line_no);
    }
    return finish(line_no);
  }

 private:
  void line(const std::string& raw, int line_no) {
    std::string_view body = strip_comment(raw);
    std::string_view content = trim(body);
    if (content.empty()) return;
    int indent = static_cast<int>(content.data() - raw.data());

    std::size_t colon = content.find(':');
    std::size_t key_end = content.find_first_of(" \t:");
    std::string_view key = content.substr(0, key_end);
    auto rest_of = [&](std::size_t from) {
      std::string_view rest = content.substr(from);
      std::string_view value = trim(rest);
      int offset = indent + static_cast<int>(from + (value.data() - rest.data()));
      return std::pair{std::string(value), offset};
    };

    if (key == "objective" || key == "ineq" || key == "eq" || key == "reference" || key == "exact" ||
        key == "box") {
      if (colon == std::string_view::npos || trim(content.substr(key.size(), colon - key.size())).size() != 0) {
        throw ParseError(fmt::format("expected ':' after '{}'", key), line_no,
                         indent + static_cast<int>(key.size()) + 1);
      }
      auto [value, offset] = rest_of(colon + 1);
      if (value.empty()) throw ParseError(fmt::format("missing value for '{}'", key), line_no, offset + 1);
      Pending p{value, line_no, offset};
      if (key == "objective") {
        if (objective_) throw ParseError("duplicate objective", line_no, indent + 1);
        objective_ = p;
      } else if (key == "ineq") {
        ineqs_.push_back(p);
      } else if (key == "eq") {
        eqs_.push_back(p);
      } else if (key == "reference") {
        if (reference_) throw ParseError("duplicate reference", line_no, indent + 1);
        reference_ = p;
      } else if (key == "exact") {
        if (value == "true") {
          spec_.exact = true;
        } else if (value == "false") {
          spec_.exact = false;
        } else {
          throw ParseError(fmt::format("exact must be true or false, got '{}'", value), line_no, offset + 1);
        }
      } else {
        auto parts = words(value);
        if (parts.size() != 2) throw ParseError("box takes two numbers: <lo> <hi>", line_no, offset + 1);
        Box box{to_number<double>(parts[0], line_no, offset + 1, "a number"),
                to_number<double>(parts[1], line_no, offset + 1, "a number")};
        if (!(box.lo < box.hi)) throw ParseError("box lower bound must be below upper bound", line_no, offset + 1);
        spec_.box = box;
      }
      return;
    }

    auto parts = words(content);
    if (key == "problem") {
      std::string_view rest = trim(content.substr(key.size()));
      if (rest.size() < 2 || rest.front() != '"' || rest.back() != '"') {
        throw ParseError("problem name must be double-quoted", line_no, indent + 1);
      }
      spec_.name = std::string(rest.substr(1, rest.size() - 2));
      saw_name_ = true;
    } else if (key == "var" || key == "aux") {
      const char* block = key == "var" ? "x" : "y";
      if (parts.size() != 3 || parts[1] != block) {
        throw ParseError(fmt::format("expected '{} {} <count>'", key, block), line_no, indent + 1);
      }
      int count = to_number<int>(parts[2], line_no, indent + 1, "a non-negative integer");
      if (count < 0) throw ParseError("block size must be non-negative", line_no, indent + 1);
      (key == "var" ? n_ : m_) = count;
    } else {
      throw ParseError(fmt::format("unknown keyword '{}'", key), line_no, indent + 1);
    }
  }

  Expr compile(const Pending& p) const {
    try {
      return parse(p.text, Dims{n_.value_or(0), m_.value_or(0)}, p.line);
    } catch (const ParseError& e) {
      // Shift the column from expression-relative to line-relative.
      throw ParseError(strip_location(e.what()), e.line(), e.column() + p.offset);
    }
  }

  static std::string strip_location(const std::string& message) {
    std::size_t first = message.find(':');
    std::size_t second = message.find(':', first + 1);
    if (first == std::string::npos || second == std::string::npos) return message;
    return std::string(trim(std::string_view(message).substr(second + 1)));
  }

  CnfProblem finish(int last_line) {
    if (!n_) throw ParseError("missing 'var x <n>' declaration", last_line + 1, 1);
    if (!objective_) throw ParseError("missing objective", last_line + 1, 1);
    spec_.n = *n_;
    spec_.m = m_.value_or(0);
    if (!saw_name_) spec_.name = "unnamed";
    spec_.objective = compile(*objective_);
    for (const Pending& p : ineqs_) spec_.ineqs.push_back(compile(p));
    for (const Pending& p : eqs_) spec_.eqs.push_back(compile(p));
    if (reference_) spec_.reference = compile(*reference_);
    return CnfProblem(std::move(spec_));
  }

  CnfSpec spec_;
  bool saw_name_ = false;
  std::optional<int> n_, m_;
  std::optional<Pending> objective_, reference_;
  std::vector<Pending> ineqs_, eqs_;
};

}  // namespace

CnfProblem read_problem(std::istream& in) { return Reader().read(in); }

CnfProblem read_problem_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open problem file '{}'", path));
  return read_problem(in);
}

std::string write_problem(const CnfProblem& prob) {
  std::string out = fmt::format("problem \"{}\"\nvar x {}\naux y {}\n", prob.name(), prob.n(), prob.m());
  out += fmt::format("objective: {}\n", prob.objective().to_string());
  for (const Expr& e : prob.ineqs()) out += fmt::format("ineq: {}\n", e.to_string());
  for (const Expr& e : prob.eqs()) out += fmt::format("eq: {}\n", e.to_string());
  if (prob.reference()) out += fmt::format("reference: {}\n", prob.reference()->to_string());
  out += fmt::format("exact: {}\n", prob.exact() ? "true" : "false");
  if (prob.has_declared_box()) out += fmt::format("box: {} {}\n", prob.box().lo, prob.box().hi);
  return out;
}

}  // namespace cnf
