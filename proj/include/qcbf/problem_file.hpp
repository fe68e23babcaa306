#pragma once

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qcbf/error.hpp"
#include "qcbf/model.hpp"
#include "qcbf/polynomial.hpp"

namespace qcbf {

namespace parse_detail {

inline std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

[[noreturn]] inline void fail(int line, const std::string& msg) {
  throw Error(ErrorCode::kParse, "line " + std::to_string(line) + ": " + msg);
}

inline double parse_number(const std::string& tok, int line) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (!tok.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) fail(line, "bad number '" + tok + "'");
  return v;
}

inline std::vector<double> parse_vector(const std::string& text, int line) {
  std::istringstream is(text);
  std::vector<double> out;
  std::string tok;
  while (is >> tok) out.push_back(parse_number(tok, line));
  return out;
}

inline Vector to_vector(const std::vector<double>& v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
  return out;
}

/// Rows separated by ';', entries by whitespace.
inline Matrix parse_matrix(const std::string& text, int line) {
  std::vector<std::vector<double>> rows;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find(';', start), text.size());
    const std::string row = trim(std::string_view(text).substr(start, end - start));
    if (!row.empty()) rows.push_back(parse_vector(row, line));
    start = end + 1;
  }
  if (rows.empty()) fail(line, "empty matrix");
  const std::size_t cols = rows[0].size();
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) fail(line, "matrix rows have different lengths");
    for (std::size_t j = 0; j < cols; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return m;
}

inline long parse_int(const std::string& tok, int line) {
  long v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) fail(line, "bad integer '" + tok + "'");
  return v;
}

/// Recursive-descent reader for polynomial expressions in x1..xn.
class PolyReader {
 public:
  PolyReader(std::string text, int num_vars, int line) : s_(std::move(text)), n_(num_vars), line_(line) {}

  Polynomial read() {
    Polynomial p = expr();
    skip();
    if (pos_ != s_.size()) error("unexpected '" + std::string(1, s_[pos_]) + "'");
    return p;
  }

 private:
  [[noreturn]] void error(const std::string& msg) const {
    fail(line_, msg + " at column " + std::to_string(pos_ + 1) + " of '" + s_ + "'");
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool peek(char c) {
    skip();
    return pos_ < s_.size() && s_[pos_] == c;
  }

  bool starts_factor() {
    skip();
    if (pos_ >= s_.size()) return false;
    const char c = s_[pos_];
    return std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == 'x' || c == '(';
  }

  Polynomial expr() {
    Polynomial p = term();
    while (true) {
      if (peek('+')) {
        ++pos_;
        p = p + term();
      } else if (peek('-')) {
        ++pos_;
        p = p - term();
      } else {
        return p;
      }
    }
  }

  Polynomial term() {
    double sign = 1.0;
    while (peek('+') || peek('-')) {
      if (s_[pos_] == '-') sign = -sign;
      ++pos_;
    }
    Polynomial p = factor();
    while (true) {
      if (peek('*')) {
        ++pos_;
        p = p * factor();
      } else if (starts_factor()) {
        p = p * factor();
      } else {
        break;
      }
    }
    return sign * p;
  }

  Polynomial factor() {
    Polynomial base = primary();
    if (peek('^')) {
      ++pos_;
      skip();
      const std::size_t b = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      if (b == pos_) error("exponent must be a nonnegative integer");
      const long k = parse_int(s_.substr(b, pos_ - b), line_);
      if (k > 64) error("exponent too large");
      base = base.pow(static_cast<int>(k));
    }
    return base;
  }

  Polynomial primary() {
    skip();
    if (pos_ >= s_.size()) error("expression ends early");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      Polynomial p = expr();
      if (!peek(')')) error("missing ')'");
      ++pos_;
      return p;
    }
    if (c == 'x') {
      ++pos_;
      const std::size_t b = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      if (b == pos_) error("variable needs an index, as in x1");
      const long k = parse_int(s_.substr(b, pos_ - b), line_);
      if (k < 1 || k > n_) error("variable x" + std::to_string(k) + " outside x1..x" + std::to_string(n_));
      return Polynomial::variable(n_, static_cast<int>(k - 1));
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const std::size_t b = pos_;
      while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) ++pos_;
      if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
        std::size_t q = pos_ + 1;
        if (q < s_.size() && (s_[q] == '+' || s_[q] == '-')) ++q;
        if (q < s_.size() && std::isdigit(static_cast<unsigned char>(s_[q]))) {
          pos_ = q;
          while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        }
      }
      return Polynomial::constant(n_, parse_number(s_.substr(b, pos_ - b), line_));
    }
    error("unexpected '" + std::string(1, c) + "'");
  }

  std::string s_;
  int n_;
  int line_;
  std::size_t pos_ = 0;
};

struct Entry {
  int line = 0;
  std::string key;  // empty for bare lines
  std::string value;
};

}  // namespace parse_detail

/// Parses polynomial text such as "x1^2 + 2 x1 x2 - 1" over n variables.
inline Polynomial parse_polynomial(const std::string& text, int num_vars, int line = 0) {
  return parse_detail::PolyReader(text, num_vars, line).read();
}

/// Reads the sectioned problem format. Errors carry the line number.
inline ProblemSpec parse_problem(std::istream& in) {
  using namespace parse_detail;
  static const std::map<std::string, std::set<std::string>> kKeys = {
      {"system", {"A", "B"}},
      {"partition", {"n_bar"}},
      {"mode", {"mode"}},
      {"safe_set", {"vertex"}},
      {"initial_set", {}},
      {"input_bound", {"type", "zeta", "epsilon", "mu", "H", "h"}},
      {"center", {"c"}},
      {"options",
       {"multiplier_degree", "epsilon", "delta", "rank_tol", "variable_bound", "containment", "seed", "sample_count",
        "sample_box", "feas_tol", "gap_tol", "max_iterations"}},
  };
  static const std::set<std::string> kBare = {"mode", "safe_set", "initial_set", "center"};

  std::map<std::string, std::vector<Entry>> sections;
  std::map<std::string, int> section_line;
  std::string current;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::size_t hash = raw.find('#');
    const std::string text = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (text.empty()) continue;
    if (text.front() == '[') {
      if (text.back() != ']') fail(line, "unterminated section header");
      current = trim(std::string_view(text).substr(1, text.size() - 2));
      if (!kKeys.count(current)) fail(line, "unknown section [" + current + "]");
      if (section_line.count(current)) fail(line, "duplicate section [" + current + "]");
      section_line[current] = line;
      sections[current];
      continue;
    }
    if (current.empty()) fail(line, "content before the first section");
    Entry e;
    e.line = line;
    const std::size_t eq = text.find('=');
    if (eq != std::string::npos) {
      e.key = trim(std::string_view(text).substr(0, eq));
      e.value = trim(std::string_view(text).substr(eq + 1));
      if (!kKeys.at(current).count(e.key)) fail(line, "unknown key '" + e.key + "' in [" + current + "]");
      if (e.key != "vertex") {
        for (const auto& prev : sections[current]) {
          if (prev.key == e.key) fail(line, "duplicate key '" + e.key + "'");
        }
      }
    } else {
      if (!kBare.count(current)) fail(line, "expected 'key = value' in [" + current + "]");
      e.value = text;
    }
    sections[current].push_back(std::move(e));
  }

  auto find = [&](const std::string& sec, const std::string& key) -> const Entry* {
    auto it = sections.find(sec);
    if (it == sections.end()) return nullptr;
    for (const auto& e : it->second) {
      if (e.key == key) return &e;
    }
    return nullptr;
  };

  ProblemSpec spec;
  const Entry* a = find("system", "A");
  const Entry* b = find("system", "B");
  if (a == nullptr || b == nullptr) fail(section_line.count("system") ? section_line["system"] : line, "[system] needs A and B");
  try {
    spec.system = LinearSystem(parse_matrix(a->value, a->line), parse_matrix(b->value, b->line));
  } catch (const Error& err) {
    if (err.code() == ErrorCode::kParse) throw;
    fail(a->line, err.what());
  }
  const int n = spec.system.n();

  std::string mode = "global";
  if (sections.count("mode")) {
    const auto& es = sections["mode"];
    if (es.size() != 1) fail(section_line["mode"], "[mode] takes one line: global or local");
    mode = es[0].value;
    if (mode != "global" && mode != "local") fail(es[0].line, "mode must be global or local");
  }
  spec.mode = mode == "global" ? DesignMode::kGlobal : DesignMode::kLocal;

  spec.partition.n_bar = n;
  if (const Entry* e = find("partition", "n_bar")) spec.partition.n_bar = static_cast<int>(parse_int(e->value, e->line));
  spec.partition.n_under = n - spec.partition.n_bar;
  if (spec.partition.n_bar < 0 || spec.partition.n_under < 0) fail(find("partition", "n_bar")->line, "n_bar out of range");

  if (spec.mode == DesignMode::kGlobal) {
    GlobalUnion g;
    for (const auto& e : sections["safe_set"]) {
      if (e.key == "vertex") {
        g.vertices.push_back(to_vector(parse_vector(e.value, e.line)));
      } else {
        if (e.value.find('|') != std::string::npos) fail(e.line, "halfspace rows need local mode");
        g.pieces.push_back(parse_polynomial(e.value, n, e.line));
      }
    }
    spec.safe_set = g;
  } else {
    LocalHalfspaces l;
    for (const auto& e : sections["safe_set"]) {
      if (!e.key.empty()) fail(e.line, "vertices are only used in global mode");
      const std::size_t bar = e.value.find('|');
      if (bar == std::string::npos) fail(e.line, "halfspace row needs the form 'a1 ... an | offset'");
      const auto av = parse_vector(e.value.substr(0, bar), e.line);
      const auto off = parse_vector(e.value.substr(bar + 1), e.line);
      if (static_cast<int>(av.size()) != n) fail(e.line, "halfspace row needs " + std::to_string(n) + " coefficients");
      if (off.size() != 1) fail(e.line, "halfspace row needs one offset after '|'");
      l.rows.push_back({to_vector(av), off[0]});
    }
    spec.safe_set = l;
  }

  if (sections.count("initial_set")) {
    InitialSetSpec init;
    for (const auto& e : sections["initial_set"]) init.pieces.push_back(parse_polynomial(e.value, n, e.line));
    spec.initial_set = init;
  }

  if (sections.count("input_bound")) {
    auto& ib = spec.input_bound;
    const Entry* type = find("input_bound", "type");
    const std::string t = type ? type->value : "none";
    const int tl = type ? type->line : section_line["input_bound"];
    auto need = [&](const char* key) -> const Entry& {
      const Entry* e = find("input_bound", key);
      if (e == nullptr) fail(tl, std::string("input bound '") + t + "' needs " + key);
      return *e;
    };
    if (t == "none") {
      ib.bound = NoInputBound{};
    } else if (t == "l2") {
      const Entry& z = need("zeta");
      ib.bound = L2Bound{parse_number(z.value, z.line)};
    } else if (t == "linf") {
      const Entry& z = need("zeta");
      ib.bound = LinfBound{parse_number(z.value, z.line)};
    } else if (t == "polytope") {
      const Entry& hm = need("H");
      const Entry& hv = need("h");
      ib.bound = PolytopeBound{parse_matrix(hm.value, hm.line), to_vector(parse_vector(hv.value, hv.line))};
    } else {
      fail(tl, "input bound type must be none, l2, linf or polytope");
    }
    if (const Entry* e = find("input_bound", "epsilon")) ib.epsilon = parse_number(e->value, e->line);
    if (const Entry* e = find("input_bound", "mu")) {
      if (e->value == "fixed") {
        ib.mu_mode = MuMode::kFixed;
      } else if (e->value == "lifted") {
        ib.mu_mode = MuMode::kLifted;
      } else {
        fail(e->line, "mu must be fixed or lifted");
      }
    }
  }

  if (sections.count("center")) {
    const auto& es = sections["center"];
    if (es.size() != 1) fail(section_line["center"], "[center] takes one vector");
    const auto v = parse_vector(es[0].value, es[0].line);
    if (static_cast<int>(v.size()) != n) fail(es[0].line, "center needs " + std::to_string(n) + " entries");
    spec.center = to_vector(v);
  }

  auto& opt = spec.options;
  for (const auto& e : sections["options"]) {
    if (e.key == "multiplier_degree") {
      opt.multiplier_degree = static_cast<int>(parse_int(e.value, e.line));
    } else if (e.key == "epsilon") {
      opt.sos_epsilon = parse_number(e.value, e.line);
    } else if (e.key == "delta") {
      opt.delta = parse_number(e.value, e.line);
    } else if (e.key == "rank_tol") {
      opt.rank_tol = parse_number(e.value, e.line);
    } else if (e.key == "variable_bound") {
      opt.variable_bound = parse_number(e.value, e.line);
    } else if (e.key == "containment") {
      if (e.value == "sos") {
        opt.containment = ContainmentMethod::kSos;
      } else if (e.value == "vertices") {
        opt.containment = ContainmentMethod::kVertices;
      } else {
        fail(e.line, "containment must be sos or vertices");
      }
    } else if (e.key == "seed") {
      const long s = parse_int(e.value, e.line);
      if (s < 0) fail(e.line, "seed must be nonnegative");
      opt.seed = static_cast<std::uint64_t>(s);
    } else if (e.key == "sample_count") {
      opt.sample_count = static_cast<int>(parse_int(e.value, e.line));
    } else if (e.key == "sample_box") {
      const Matrix m = parse_matrix(e.value, e.line);
      if (m.cols() != 2) fail(e.line, "sample_box rows are 'lo hi'");
      opt.sample_box.clear();
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        if (!(m(i, 0) < m(i, 1))) fail(e.line, "sample_box needs lo < hi");
        opt.sample_box.emplace_back(m(i, 0), m(i, 1));
      }
    } else if (e.key == "feas_tol") {
      opt.solver.feas_tol = parse_number(e.value, e.line);
    } else if (e.key == "gap_tol") {
      opt.solver.gap_tol = parse_number(e.value, e.line);
    } else if (e.key == "max_iterations") {
      opt.solver.max_iterations = static_cast<int>(parse_int(e.value, e.line));
    }
  }
  return spec;
}

inline ProblemSpec parse_problem_string(const std::string& text) {
  std::istringstream is(text);
  return parse_problem(is);
}

inline ProblemSpec load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  return parse_problem(in);
}

namespace parse_detail {

inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string vec_text(const Vector& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) out += (i ? " " : "") + num(v(i));
  return out;
}

inline std::string mat_text(const Matrix& m) {
  std::string out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (i) out += "; ";
    out += vec_text(m.row(i).transpose());
  }
  return out;
}

}  // namespace parse_detail

/// Canonical text for a spec; parse_problem reads it back exactly.
inline std::string write_problem(const ProblemSpec& spec) {
  using parse_detail::mat_text;
  using parse_detail::num;
  using parse_detail::vec_text;
  std::ostringstream os;
  os << "[system]\nA = " << mat_text(spec.system.A()) << "\nB = " << mat_text(spec.system.B()) << "\n\n";
  os << "[partition]\nn_bar = " << spec.partition.n_bar << "\n\n";
  os << "[mode]\n" << (spec.mode == DesignMode::kGlobal ? "global" : "local") << "\n\n";
  os << "[safe_set]\n";
  if (const auto* g = std::get_if<GlobalUnion>(&spec.safe_set)) {
    for (const auto& p : g->pieces) os << p.to_string(17) << "\n";
    for (const auto& v : g->vertices) os << "vertex = " << vec_text(v) << "\n";
  } else {
    for (const auto& h : std::get<LocalHalfspaces>(spec.safe_set).rows) {
      os << vec_text(h.a) << " | " << num(h.offset) << "\n";
    }
  }
  if (spec.initial_set) {
    os << "\n[initial_set]\n";
    for (const auto& p : spec.initial_set->pieces) os << p.to_string(17) << "\n";
  }
  const auto& ib = spec.input_bound;
  os << "\n[input_bound]\n";
  if (ib.is_none()) {
    os << "type = none\n";
  } else {
    if (const auto* b = std::get_if<L2Bound>(&ib.bound)) os << "type = l2\nzeta = " << num(b->zeta) << "\n";
    if (const auto* b = std::get_if<LinfBound>(&ib.bound)) os << "type = linf\nzeta = " << num(b->zeta) << "\n";
    if (const auto* b = std::get_if<PolytopeBound>(&ib.bound)) {
      os << "type = polytope\nH = " << mat_text(b->H) << "\nh = " << vec_text(b->h) << "\n";
    }
    os << "epsilon = " << num(ib.epsilon) << "\nmu = " << (ib.mu_mode == MuMode::kFixed ? "fixed" : "lifted") << "\n";
  }
  if (spec.center) os << "\n[center]\n" << vec_text(*spec.center) << "\n";
  const auto& o = spec.options;
  os << "\n[options]\nmultiplier_degree = " << o.multiplier_degree << "\nepsilon = " << num(o.sos_epsilon)
     << "\ndelta = " << num(o.delta) << "\nrank_tol = " << num(o.rank_tol)
     << "\nvariable_bound = " << num(o.variable_bound)
     << "\ncontainment = " << (o.containment == ContainmentMethod::kSos ? "sos" : "vertices") << "\nseed = " << o.seed
     << "\nsample_count = " << o.sample_count << "\n";
  if (!o.sample_box.empty()) {
    os << "sample_box = ";
    for (std::size_t i = 0; i < o.sample_box.size(); ++i) {
      os << (i ? "; " : "") << num(o.sample_box[i].first) << " " << num(o.sample_box[i].second);
    }
    os << "\n";
  }
  os << "feas_tol = " << num(o.solver.feas_tol) << "\ngap_tol = " << num(o.solver.gap_tol)
     << "\nmax_iterations = " << o.solver.max_iterations << "\n";
  return os.str();
}

}  // namespace qcbf
