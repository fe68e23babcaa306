#pragma once

#include <string>
#include <vector>

#include "qcbf/error.hpp"
#include "qcbf/linalg.hpp"

namespace qcbf {

enum class VarKind { kSymmetric, kDense, kScalar };

/// Handle to a named matrix of scalar decision entries.
struct VarRef {
  std::string name;
  VarKind kind = VarKind::kScalar;
  int rows = 0;
  int cols = 0;
  int offset = 0;

  /// Flat index of entry (i, j); symmetric blocks store the upper triangle.
  int index(int i, int j = 0) const {
    if (i < 0 || j < 0 || i >= rows || j >= cols) {
      throw Error(ErrorCode::kDimensionMismatch, "entry out of range in variable " + name);
    }
    if (kind == VarKind::kSymmetric) {
      if (i > j) std::swap(i, j);
      // Row-major upper triangle: row i starts after i*n - i*(i-1)/2 entries.
      return offset + i * rows - i * (i - 1) / 2 + (j - i);
    }
    return offset + i * cols + j;
  }

  int count() const { return kind == VarKind::kSymmetric ? rows * (rows + 1) / 2 : rows * cols; }
};

/// Flat, ordered registry of decision variables.
class DecisionLayout {
 public:
  VarRef add_symmetric(const std::string& name, int n) { return add(name, VarKind::kSymmetric, n, n); }
  VarRef add_dense(const std::string& name, int rows, int cols) {
    return add(name, VarKind::kDense, rows, cols);
  }
  VarRef add_scalar(const std::string& name) { return add(name, VarKind::kScalar, 1, 1); }

  int size() const { return size_; }
  const std::vector<VarRef>& variables() const { return vars_; }

  const VarRef& find(const std::string& name) const {
    for (const auto& v : vars_) {
      if (v.name == name) return v;
    }
    throw Error(ErrorCode::kSpecInvalid, "unknown decision variable " + name);
  }

  bool contains(const std::string& name) const {
    for (const auto& v : vars_) {
      if (v.name == name) return true;
    }
    return false;
  }

  /// Name of the variable owning a flat index, with the entry position.
  std::string describe(int flat) const {
    for (const auto& v : vars_) {
      if (flat >= v.offset && flat < v.offset + v.count()) {
        return v.name + "[" + std::to_string(flat - v.offset) + "]";
      }
    }
    return "?";
  }

  /// Reads a variable's numeric value out of a flat solution vector.
  Matrix value(const VarRef& v, const Vector& flat) const {
    Matrix out(v.rows, v.cols);
    for (int i = 0; i < v.rows; ++i) {
      for (int j = 0; j < v.cols; ++j) out(i, j) = flat(v.index(i, j));
    }
    return out;
  }

  /// Writes a numeric value into a flat vector; symmetric input is averaged.
  void assign(const VarRef& v, const Matrix& m, Vector& flat) const {
    require_dims(m.rows() == v.rows && m.cols() == v.cols, "assign shape mismatch for " + v.name);
    for (int i = 0; i < v.rows; ++i) {
      for (int j = 0; j < v.cols; ++j) {
        if (v.kind == VarKind::kSymmetric && i > j) continue;
        flat(v.index(i, j)) = v.kind == VarKind::kSymmetric ? 0.5 * (m(i, j) + m(j, i)) : m(i, j);
      }
    }
  }

 private:
  VarRef add(const std::string& name, VarKind kind, int rows, int cols) {
    if (contains(name)) throw Error(ErrorCode::kSpecInvalid, "duplicate decision variable " + name);
    require_dims(rows >= 0 && cols >= 0, "negative variable shape");
    VarRef v{name, kind, rows, cols, size_};
    size_ += v.count();
    vars_.push_back(v);
    return v;
  }

  std::vector<VarRef> vars_;
  int size_ = 0;
};

}  // namespace qcbf
