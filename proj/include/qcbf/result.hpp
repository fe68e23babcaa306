#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qcbf/cbf.hpp"
#include "qcbf/conic.hpp"
#include "qcbf/model.hpp"

namespace qcbf {

enum class CheckStatus { kPass, kFail, kSkipped };

inline std::string to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::kPass: return "pass";
    case CheckStatus::kFail: return "fail";
    case CheckStatus::kSkipped: return "skipped";
  }
  return "unknown";
}

struct CertificateCheck {
  std::string name;
  /// The condition being audited, in words.
  std::string condition;
  CheckStatus status = CheckStatus::kSkipped;
  /// Signed margin; negative means the condition is violated by that much.
  double margin = 0.0;
  std::string detail;
  bool mandatory = true;
};

struct CertificateReport {
  std::vector<CertificateCheck> checks;
  std::uint64_t seed = 0;
  double psd_tol = 0.0;

  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CertificateCheck& c) {
      return !c.mandatory || c.status != CheckStatus::kFail;
    });
  }

  const CertificateCheck* find(const std::string& name) const {
    for (const auto& c : checks) {
      if (c.name == name) return &c;
    }
    return nullptr;
  }

  void sort() {
    std::sort(checks.begin(), checks.end(),
              [](const CertificateCheck& a, const CertificateCheck& b) { return a.name < b.name; });
  }
};

/// A numeric Gram matrix from the solve, tagged with its monomial basis.
struct GramRecord {
  std::string name;
  int num_vars = 0;
  int degree = 0;
  Matrix q;
};

/// Everything a certificate consists of. Published certificates enter with
/// source "external" and no R or Gram matrices.
struct SynthesisResult {
  ProblemSpec spec;
  std::string source = "synthesized";
  CenterData center;
  CbfFunction cbf;
  AffineController controller;
  std::optional<Matrix> r;
  Matrix y;
  std::vector<double> mu;
  std::vector<GramRecord> grams;
  std::string containment = "none";
  std::string input_bound = "none";
  std::string mu_mode = "none";
  SolveStatus status = SolveStatus::kOptimal;
  double objective = 0.0;
  int iterations = 0;
  std::string backend;
  std::string message;
  std::vector<std::string> warnings;
  CertificateReport report;
};

}  // namespace qcbf
