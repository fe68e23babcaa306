#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "qcbf/error.hpp"
#include "qcbf/problem_file.hpp"
#include "qcbf/result.hpp"

namespace qcbf {

/// FNV-1a over the canonical problem text.
inline std::string spec_hash(const ProblemSpec& spec) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : write_problem(spec)) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace result_detail {

using parse_detail::num;

inline void write_matrix(std::ostream& os, const std::string& key, const Matrix& m) {
  os << key << " " << m.rows() << " " << m.cols();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) os << " " << num(m(i, j));
  }
  os << "\n";
}

inline Matrix read_matrix(std::istringstream& is, int line) {
  long rows = -1;
  long cols = -1;
  if (!(is >> rows >> cols) || rows < 0 || cols < 0) parse_detail::fail(line, "matrix needs 'rows cols' first");
  Matrix m(rows, cols);
  std::string tok;
  for (long i = 0; i < rows; ++i) {
    for (long j = 0; j < cols; ++j) {
      if (!(is >> tok)) parse_detail::fail(line, "matrix has too few entries");
      m(i, j) = parse_detail::parse_number(tok, line);
    }
  }
  if (is >> tok) parse_detail::fail(line, "matrix has too many entries");
  return m;
}

inline std::string rest(std::istringstream& is) {
  std::string r;
  std::getline(is, r);
  return parse_detail::trim(r);
}

/// Splits "a | b | c" into trimmed fields.
inline std::vector<std::string> fields(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t bar = s.find('|', start);
    out.push_back(parse_detail::trim(std::string_view(s).substr(start, bar - start)));
    if (bar == std::string::npos) break;
    start = bar + 1;
  }
  return out;
}

}  // namespace result_detail

inline void write_result(std::ostream& os, const SynthesisResult& r) {
  using namespace result_detail;
  os << "qcbf-result v1\n";
  os << "source " << r.source << "\n";
  os << "spec_hash " << spec_hash(r.spec) << "\n";
  os << "containment " << r.containment << "\n";
  os << "input_bound " << r.input_bound << "\n";
  os << "mu_mode " << r.mu_mode << "\n";
  os << "status " << to_string(r.status) << "\n";
  os << "backend " << (r.backend.empty() ? "none" : r.backend) << "\n";
  os << "objective " << num(r.objective) << "\n";
  os << "iterations " << r.iterations << "\n";
  if (!r.message.empty()) os << "message " << r.message << "\n";
  for (const auto& w : r.warnings) os << "warning " << w << "\n";
  write_matrix(os, "c", r.cbf.c());
  write_matrix(os, "d", r.controller.d);
  write_matrix(os, "Omega", r.cbf.omega());
  write_matrix(os, "P", r.cbf.p());
  if (r.r) write_matrix(os, "R", *r.r);
  if (r.y.size() > 0) write_matrix(os, "Y", r.y);
  write_matrix(os, "K", r.controller.k);
  if (!r.mu.empty()) write_matrix(os, "mu", Eigen::Map<const Vector>(r.mu.data(), static_cast<Eigen::Index>(r.mu.size())));
  for (const auto& g : r.grams) {
    os << "gram " << g.num_vars << " " << g.degree << " " << g.q.rows() << " " << g.q.cols();
    for (Eigen::Index i = 0; i < g.q.rows(); ++i) {
      for (Eigen::Index j = 0; j < g.q.cols(); ++j) os << " " << num(g.q(i, j));
    }
    os << " | " << g.name << "\n";
  }
  os << "report_seed " << r.report.seed << "\n";
  os << "report_psd_tol " << num(r.report.psd_tol) << "\n";
  for (const auto& c : r.report.checks) {
    os << "check " << c.name << " | " << to_string(c.status) << " | " << num(c.margin) << " | "
       << (c.mandatory ? "mandatory" : "advisory") << " | " << c.condition << " | " << c.detail << "\n";
  }
  os << "report_passed " << (r.report.passed() ? "yes" : "no") << "\n";
  os << "begin_problem\n" << write_problem(r.spec) << "end_problem\n";
}

inline std::string result_to_string(const SynthesisResult& r) {
  std::ostringstream os;
  write_result(os, r);
  return os.str();
}

/// Reads a result document. Published certificates may give P instead of
/// Omega and may omit d, which is then recovered from B d = -A c.
inline SynthesisResult read_result(std::istream& in) {
  using namespace result_detail;
  using parse_detail::fail;
  std::string raw;
  int line = 0;
  if (!std::getline(in, raw) || parse_detail::trim(raw) != "qcbf-result v1") {
    fail(1, "missing 'qcbf-result v1' header");
  }
  ++line;
  SynthesisResult r;
  std::optional<Matrix> c, d, omega, p, k;
  std::string hash;
  std::string problem_text;
  bool have_problem = false;
  while (std::getline(in, raw)) {
    ++line;
    const std::string text = parse_detail::trim(raw);
    if (text.empty() || text.front() == '#') continue;
    if (text == "begin_problem") {
      const int start = line;
      bool closed = false;
      while (std::getline(in, raw)) {
        ++line;
        if (parse_detail::trim(raw) == "end_problem") {
          closed = true;
          break;
        }
        problem_text += raw + "\n";
      }
      if (!closed) fail(start, "begin_problem without end_problem");
      try {
        r.spec = parse_problem_string(problem_text);
      } catch (const Error& e) {
        fail(start, std::string("embedded problem: ") + e.what());
      }
      have_problem = true;
      continue;
    }
    std::istringstream is(text);
    std::string key;
    is >> key;
    if (key == "source") {
      r.source = rest(is);
    } else if (key == "spec_hash") {
      hash = rest(is);
    } else if (key == "containment") {
      r.containment = rest(is);
    } else if (key == "input_bound") {
      r.input_bound = rest(is);
    } else if (key == "mu_mode") {
      r.mu_mode = rest(is);
    } else if (key == "status") {
      const std::string s = rest(is);
      bool found = false;
      for (auto st : {SolveStatus::kOptimal, SolveStatus::kInfeasible, SolveStatus::kUnbounded,
                      SolveStatus::kNumericalFailure}) {
        if (to_string(st) == s) {
          r.status = st;
          found = true;
        }
      }
      if (!found) fail(line, "unknown status '" + s + "'");
    } else if (key == "backend") {
      r.backend = rest(is);
    } else if (key == "objective") {
      r.objective = parse_detail::parse_number(rest(is), line);
    } else if (key == "iterations") {
      r.iterations = static_cast<int>(parse_detail::parse_int(rest(is), line));
    } else if (key == "message") {
      r.message = rest(is);
    } else if (key == "warning") {
      r.warnings.push_back(rest(is));
    } else if (key == "c") {
      c = read_matrix(is, line);
    } else if (key == "d") {
      d = read_matrix(is, line);
    } else if (key == "Omega") {
      omega = read_matrix(is, line);
    } else if (key == "P") {
      p = read_matrix(is, line);
    } else if (key == "R") {
      r.r = read_matrix(is, line);
    } else if (key == "Y") {
      r.y = read_matrix(is, line);
    } else if (key == "K") {
      k = read_matrix(is, line);
    } else if (key == "mu") {
      const Matrix m = read_matrix(is, line);
      r.mu.assign(m.data(), m.data() + m.size());
    } else if (key == "gram") {
      const auto f = fields(rest(is));
      if (f.size() != 2 || f[1].empty()) fail(line, "gram line needs '... | name'");
      std::istringstream gs(f[0]);
      long nv = 0;
      long deg = 0;
      if (!(gs >> nv >> deg)) fail(line, "gram line needs variable count and degree");
      r.grams.push_back({f[1], static_cast<int>(nv), static_cast<int>(deg), read_matrix(gs, line)});
    } else if (key == "report_seed" || key == "report_psd_tol" || key == "report_passed" || key == "check") {
      // The report is recomputed on load; stored values are informational.
    } else {
      fail(line, "unknown key '" + key + "'");
    }
  }
  if (!have_problem) fail(line, "missing begin_problem ... end_problem block");
  if (!hash.empty() && hash != spec_hash(r.spec)) fail(line, "spec_hash does not match the embedded problem");
  if (!c) fail(line, "missing c");
  if (!k) fail(line, "missing K");
  if (!omega && !p) fail(line, "need Omega or P");
  const int n = r.spec.system.n();
  if (c->size() != n) fail(line, "c has the wrong size");
  const Vector cv = Eigen::Map<const Vector>(c->data(), c->size());
  r.spec.center = cv;
  r.center.c = cv;
  if (d) {
    r.center.d = Eigen::Map<const Vector>(d->data(), d->size());
  } else {
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(r.spec.system.B());
    r.center.d = cod.solve(-r.spec.system.A() * cv);
  }
  const Orientation orient =
      r.spec.mode == DesignMode::kGlobal ? Orientation::kSuperLevelSafe : Orientation::kSubLevelSafe;
  try {
    if (omega) {
      r.cbf = CbfFunction(cv, *omega, orient);
    } else {
      r.cbf = CbfFunction::from_p(cv, *p, orient);
    }
  } catch (const Error& e) {
    fail(line, e.what());
  }
  if (k->rows() != r.spec.system.m() || k->cols() != n || r.center.d.size() != r.spec.system.m()) {
    fail(line, "K or d has the wrong shape");
  }
  r.controller = AffineController{*k, r.center.d, cv};
  return r;
}

inline SynthesisResult load_result(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  return read_result(in);
}

inline void save_result(const std::string& path, const SynthesisResult& r) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  write_result(out, r);
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path);
}

}  // namespace qcbf
