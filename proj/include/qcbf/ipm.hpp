#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>
#include <optional>
#include <vector>

#include "qcbf/conic.hpp"
#include "qcbf/linalg.hpp"
#include "qcbf/model.hpp"

namespace qcbf {

namespace ipm_detail {

/// One PSD block in LMI form F(w) = F0 + sum_j w_j F_j.
struct WBlock {
  Matrix f0;
  std::vector<std::pair<int, Matrix>> terms;
  std::vector<int> keep;  // surviving rows/cols after facial reduction
};

/// Affine parametrization w = w0 + T v of {w : E w = e}.
struct Affine {
  Vector w0;
  Matrix t;
  bool consistent = true;
};

inline Affine parametrize(const Matrix& e_mat, const Vector& e_vec, int n) {
  Affine out;
  if (e_mat.rows() == 0) {
    out.w0 = Vector::Zero(n);
    out.t = Matrix::Identity(n, n);
    return out;
  }
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(e_mat);
  cod.setThreshold(1e-11);
  out.w0 = cod.solve(e_vec);
  const double resid = (e_mat * out.w0 - e_vec).norm();
  out.consistent = resid <= 1e-8 * (1.0 + e_vec.norm());

  Eigen::ColPivHouseholderQR<Matrix> qr(e_mat.transpose());
  qr.setThreshold(1e-11);
  const int rank = static_cast<int>(qr.rank());
  const Matrix q = qr.householderQ();
  out.t = q.rightCols(n - rank);
  return out;
}

inline Matrix restrict(const Matrix& m, const std::vector<int>& idx) {
  const int k = static_cast<int>(idx.size());
  Matrix out(k, k);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) out(i, j) = m(idx[i], idx[j]);
  }
  return out;
}

inline double frob_inner(const Matrix& a, const Matrix& b) { return a.cwiseProduct(b).sum(); }

/// Largest step alpha with X + alpha dX still PSD, given chol(X) = L L'.
inline double max_step(const Eigen::LLT<Matrix>& chol, const Matrix& dx) {
  if (dx.size() == 0) return std::numeric_limits<double>::infinity();
  const Matrix& l = chol.matrixL();
  Matrix w = l.triangularView<Eigen::Lower>().solve(dx);
  w = l.triangularView<Eigen::Lower>().solve(w.transpose().eval());
  const double lam = min_eigenvalue(w);
  return lam >= 0.0 ? std::numeric_limits<double>::infinity() : -1.0 / lam;
}

inline double max_step_lp(const Vector& x, const Vector& dx) {
  double a = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (dx(i) < 0.0) a = std::min(a, -x(i) / dx(i));
  }
  return a;
}

}  // namespace ipm_detail

/// Dense primal-dual interior-point method (HKM direction, Mehrotra
/// predictor-corrector, infeasible start) for small conic programs.
///
/// Presolve removes equality rows by an affine reparametrization, applies
/// facial reduction to structurally zero diagonal entries, drops decision
/// directions that no cone sees, and rescales each block.
class InteriorPointBackend : public SolverBackend {
 public:
  std::string name() const override { return "qcbf-ipm"; }

  BackendResult solve(const StandardForm& sf, const SolverOptions& opt) const override {
    using namespace ipm_detail;
    BackendResult res;
    const int n = sf.num_vars;
    const Matrix a_full = sf.dense_a();

    // Split rows by cone.
    Matrix e_mat = a_full.topRows(sf.zero_rows);
    Vector e_vec = sf.b.head(sf.zero_rows);
    const Matrix g_lp = a_full.middleRows(sf.zero_rows, sf.nonneg_rows);
    const Vector h_lp = sf.b.segment(sf.zero_rows, sf.nonneg_rows);
    std::vector<WBlock> blocks;
    {
      int row = sf.zero_rows + sf.nonneg_rows;
      for (int size : sf.psd_sizes) {
        const int len = svec_length(size);
        WBlock blk;
        blk.f0 = smat(sf.b.segment(row, len), size);
        for (int j = 0; j < n; ++j) {
          const Vector col = a_full.block(row, j, len, 1);
          if (col.cwiseAbs().maxCoeff() > 0.0) blk.terms.emplace_back(j, -smat(col, size));
        }
        for (int i = 0; i < size; ++i) blk.keep.push_back(i);
        blocks.push_back(std::move(blk));
        row += len;
      }
    }
    normalize_rows(e_mat, e_vec);

    // Facial reduction: a diagonal entry fixed at zero forces its row to zero.
    Affine aff;
    const double fr_tol = 1e-9;
    for (int round = 0; round < 1000; ++round) {
      aff = parametrize(e_mat, e_vec, n);
      if (!aff.consistent) {
        res.status = SolveStatus::kInfeasible;
        res.message = "linear equalities are inconsistent";
        res.x = Vector::Zero(n);
        return res;
      }
      std::vector<Eigen::RowVectorXd> new_rows;
      std::vector<double> new_rhs;
      for (auto& blk : blocks) {
        const double scale = block_scale(blk);
        for (std::size_t pos = 0; pos < blk.keep.size(); ++pos) {
          const int i = blk.keep[pos];
          double c = blk.f0(i, i);
          Eigen::RowVectorXd g = Eigen::RowVectorXd::Zero(aff.t.cols());
          for (const auto& [j, m] : blk.terms) {
            c += aff.w0(j) * m(i, i);
            g += m(i, i) * aff.t.row(j);
          }
          if (g.norm() > fr_tol * scale) continue;
          if (c < -fr_tol * scale) {
            res.status = SolveStatus::kInfeasible;
            res.message = "a cone diagonal is fixed at a negative value";
            res.x = Vector::Zero(n);
            return res;
          }
          if (c > fr_tol * scale) continue;
          for (int q : blk.keep) {
            if (q == i) continue;
            Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(n);
            for (const auto& [j, m] : blk.terms) r(j) = m(i, q);
            if (r.norm() == 0.0 && blk.f0(i, q) == 0.0) continue;
            new_rows.push_back(r);
            new_rhs.push_back(-blk.f0(i, q));
          }
          blk.keep.erase(blk.keep.begin() + static_cast<long>(pos));
          --pos;
        }
      }
      if (new_rows.empty()) break;
      Matrix grown(e_mat.rows() + static_cast<Eigen::Index>(new_rows.size()), n);
      Vector grown_rhs(grown.rows());
      grown.topRows(e_mat.rows()) = e_mat;
      grown_rhs.head(e_mat.rows()) = e_vec;
      for (std::size_t k = 0; k < new_rows.size(); ++k) {
        grown.row(e_mat.rows() + static_cast<Eigen::Index>(k)) = new_rows[k];
        grown_rhs(e_mat.rows() + static_cast<Eigen::Index>(k)) = new_rhs[k];
      }
      e_mat = std::move(grown);
      e_vec = std::move(grown_rhs);
      normalize_rows(e_mat, e_vec);
    }

    // Data over the reduced variables v (w = w0 + T v), in the dual SDP form
    // S = C - sum_i v_i A_i with S PSD.
    const Matrix& t = aff.t;
    const int m0 = static_cast<int>(t.cols());
    std::vector<Matrix> c_blk;
    std::vector<std::vector<Matrix>> a_blk;
    for (const auto& blk : blocks) {
      if (blk.keep.empty()) continue;
      Matrix c = restrict(blk.f0, blk.keep);
      std::vector<Matrix> ai(m0, Matrix::Zero(c.rows(), c.cols()));
      for (const auto& [j, mj] : blk.terms) {
        const Matrix r = restrict(mj, blk.keep);
        c += aff.w0(j) * r;
        for (int i = 0; i < m0; ++i) {
          if (t(j, i) != 0.0) ai[i] -= t(j, i) * r;
        }
      }
      bool constant = true;
      for (const auto& x : ai) {
        if (x.cwiseAbs().maxCoeff() > fr_tol * std::max(1.0, c.cwiseAbs().maxCoeff())) constant = false;
      }
      if (constant) {
        if (min_eigenvalue(c) < -fr_tol * std::max(1.0, sym_norm(c))) {
          res.status = SolveStatus::kInfeasible;
          res.message = "a constant cone block is not PSD";
          res.x = Vector::Zero(n);
          return res;
        }
        continue;
      }
      c_blk.push_back(std::move(c));
      a_blk.push_back(std::move(ai));
    }
    Vector c_lp = h_lp - g_lp * aff.w0;
    Matrix a_lp = g_lp * t;
    {
      std::vector<int> rows;
      for (Eigen::Index r = 0; r < a_lp.rows(); ++r) {
        const double scale = std::max(1.0, std::abs(c_lp(r)));
        if (a_lp.row(r).norm() > fr_tol * scale) {
          rows.push_back(static_cast<int>(r));
        } else if (c_lp(r) < -fr_tol * scale) {
          res.status = SolveStatus::kInfeasible;
          res.message = "a constant inequality is violated";
          res.x = Vector::Zero(n);
          return res;
        }
      }
      Matrix a2(rows.size(), m0);
      Vector c2(rows.size());
      for (std::size_t k = 0; k < rows.size(); ++k) {
        a2.row(static_cast<Eigen::Index>(k)) = a_lp.row(rows[k]);
        c2(static_cast<Eigen::Index>(k)) = c_lp(rows[k]);
      }
      a_lp = std::move(a2);
      c_lp = std::move(c2);
    }
    Vector f_v = t.transpose() * sf.c;

    // Drop directions invisible to every cone.
    Matrix basis = Matrix::Identity(m0, m0);
    if (m0 > 0) {
      int total = static_cast<int>(a_lp.rows());
      for (const auto& c : c_blk) total += svec_length(static_cast<int>(c.rows()));
      Matrix d(total, m0);
      int row = 0;
      for (std::size_t k = 0; k < c_blk.size(); ++k) {
        const int len = svec_length(static_cast<int>(c_blk[k].rows()));
        for (int i = 0; i < m0; ++i) d.block(row, i, len, 1) = svec(a_blk[k][i]);
        row += len;
      }
      d.bottomRows(a_lp.rows()) = a_lp;
      Eigen::BDCSVD<Matrix> svd(d, Eigen::ComputeFullV);
      const auto& s = svd.singularValues();
      int rank = 0;
      const double smax = s.size() > 0 ? s(0) : 0.0;
      for (Eigen::Index k = 0; k < s.size(); ++k) {
        if (s(k) > 1e-10 * smax && smax > 0.0) ++rank;
      }
      if (rank < m0) {
        const Matrix null = svd.matrixV().rightCols(m0 - rank);
        if ((null.transpose() * f_v).norm() > 1e-9 * (1.0 + f_v.norm())) {
          res.status = SolveStatus::kUnbounded;
          res.message = "objective decreases along a direction no constraint sees";
          res.x = aff.w0;
          return res;
        }
        basis = svd.matrixV().leftCols(rank);
      }
    }
    const int m = static_cast<int>(basis.cols());
    const Matrix wmap = t * basis;
    for (auto& ai : a_blk) {
      std::vector<Matrix> reduced(m, Matrix::Zero(ai.empty() ? 0 : ai[0].rows(), ai.empty() ? 0 : ai[0].cols()));
      for (int a = 0; a < m; ++a) {
        for (int i = 0; i < m0; ++i) {
          if (basis(i, a) != 0.0) reduced[a] += basis(i, a) * ai[i];
        }
      }
      ai = std::move(reduced);
    }
    a_lp = a_lp * basis;
    Vector b_dual = -(basis.transpose() * f_v);

    if (m == 0) {
      res.status = SolveStatus::kOptimal;
      res.x = aff.w0;
      res.message = "fully determined by presolve";
      return res;
    }

    // Block and row scaling; variable scaling so each column has unit size.
    for (std::size_t k = 0; k < c_blk.size(); ++k) {
      double s = c_blk[k].norm();
      for (const auto& x : a_blk[k]) s = std::max(s, x.norm());
      s = s > 0.0 ? 1.0 / s : 1.0;
      c_blk[k] *= s;
      for (auto& x : a_blk[k]) x *= s;
    }
    for (Eigen::Index r = 0; r < a_lp.rows(); ++r) {
      const double s = std::max(std::abs(c_lp(r)), a_lp.row(r).norm());
      if (s > 0.0) {
        c_lp(r) /= s;
        a_lp.row(r) /= s;
      }
    }
    Vector col_scale(m);
    for (int i = 0; i < m; ++i) {
      double sq = a_lp.col(i).squaredNorm();
      for (const auto& ai : a_blk) sq += ai[i].squaredNorm();
      col_scale(i) = sq > 0.0 ? std::sqrt(sq) : 1.0;
      for (auto& ai : a_blk) ai[i] /= col_scale(i);
      a_lp.col(i) /= col_scale(i);
      b_dual(i) /= col_scale(i);
    }
    const double b_scale = std::max(1.0, b_dual.cwiseAbs().maxCoeff());
    b_dual /= b_scale;

    Problem prob{c_blk, a_blk, c_lp, a_lp, b_dual, m};
    Vector y;
    res = run(prob, opt, y);
    const Vector z = y.cwiseQuotient(col_scale);
    res.x = aff.w0 + wmap * z;
    return res;
  }

 private:
  struct Problem {
    std::vector<Matrix> c;
    std::vector<std::vector<Matrix>> a;
    Vector c_lp;
    Matrix a_lp;
    Vector b;
    int m;
  };

  static void normalize_rows(Matrix& e, Vector& rhs) {
    for (Eigen::Index r = 0; r < e.rows(); ++r) {
      const double s = e.row(r).norm();
      if (s > 0.0) {
        e.row(r) /= s;
        rhs(r) /= s;
      }
    }
  }

  static double block_scale(const ipm_detail::WBlock& blk) {
    double s = blk.f0.cwiseAbs().maxCoeff();
    for (const auto& [j, m] : blk.terms) s = std::max(s, m.cwiseAbs().maxCoeff());
    return std::max(1.0, s);
  }

  struct Direction {
    std::vector<Matrix> dx;
    std::vector<Matrix> ds;
    Vector dx_lp;
    Vector ds_lp;
    Vector dy;
  };

  static BackendResult run(const Problem& p, const SolverOptions& opt, Vector& y) {
    using ipm_detail::frob_inner;
    const int m = p.m;
    const std::size_t nb = p.c.size();
    const int nlp = static_cast<int>(p.c_lp.size());
    BackendResult res;

    // Which variables touch which block.
    std::vector<std::vector<int>> touch(nb);
    for (std::size_t k = 0; k < nb; ++k) {
      for (int i = 0; i < m; ++i) {
        if (p.a[k][i].cwiseAbs().maxCoeff() > 0.0) touch[k].push_back(i);
      }
    }

    auto adjoint = [&](const Vector& v, std::size_t k) {
      Matrix out = Matrix::Zero(p.c[k].rows(), p.c[k].cols());
      for (int i : touch[k]) out += v(i) * p.a[k][i];
      return out;
    };
    auto op_a = [&](const std::vector<Matrix>& x, const Vector& x_lp) {
      Vector out = p.a_lp.transpose() * x_lp;
      for (std::size_t k = 0; k < nb; ++k) {
        for (int i : touch[k]) out(i) += frob_inner(p.a[k][i], x[k]);
      }
      return out;
    };

    // Starting point in the style of common SDP codes.
    std::vector<Matrix> x(nb), s(nb);
    int nu = nlp;
    for (std::size_t k = 0; k < nb; ++k) {
      const int nk = static_cast<int>(p.c[k].rows());
      nu += nk;
      double amax = 0.0;
      double xi = std::max(10.0, std::sqrt(static_cast<double>(nk)));
      for (int i : touch[k]) {
        const double an = p.a[k][i].norm();
        amax = std::max(amax, an);
        xi = std::max(xi, nk * (1.0 + std::abs(p.b(i))) / (1.0 + an));
      }
      const double eta = std::max({10.0, std::sqrt(static_cast<double>(nk)), amax, p.c[k].norm()});
      x[k] = xi * Matrix::Identity(nk, nk);
      s[k] = eta * Matrix::Identity(nk, nk);
    }
    Vector x_lp = Vector::Constant(nlp, 10.0);
    Vector s_lp = Vector::Constant(nlp, 10.0);
    y = Vector::Zero(m);

    const double b_norm = p.b.norm();
    double c_norm = p.c_lp.norm();
    for (const auto& c : p.c) c_norm = std::max(c_norm, c.norm());

    int stalls = 0;
    double relp = 0.0, reld = 0.0, relg = 0.0;
    // Best strictly interior iterate by tolerance-normalized merit; returned at
    // reduced accuracy if the iteration stops short of the tolerances.
    const double loose = 1e4;
    std::optional<Vector> best_y;
    double best_merit = std::numeric_limits<double>::infinity();
    double best_p = 0.0, best_d = 0.0, best_g = 0.0;
    for (int iter = 0; iter <= opt.max_iterations; ++iter) {
      res.iterations = iter;
      // Residuals.
      const Vector rp = p.b - op_a(x, x_lp);
      std::vector<Matrix> rd(nb);
      double rd_sq = 0.0;
      double pobj = p.c_lp.dot(x_lp);
      double xs = x_lp.dot(s_lp);
      for (std::size_t k = 0; k < nb; ++k) {
        rd[k] = p.c[k] - s[k] - adjoint(y, k);
        rd_sq += rd[k].squaredNorm();
        pobj += frob_inner(p.c[k], x[k]);
        xs += frob_inner(x[k], s[k]);
      }
      const Vector rd_lp = p.c_lp - s_lp - p.a_lp * y;
      rd_sq += rd_lp.squaredNorm();
      const double dobj = p.b.dot(y);
      const double mu = xs / nu;
      relp = rp.norm() / (1.0 + b_norm);
      reld = std::sqrt(rd_sq) / (1.0 + c_norm);
      relg = std::max(std::abs(pobj - dobj), xs) / (1.0 + std::abs(pobj) + std::abs(dobj));
      res.primal_residual = relp;
      res.dual_residual = reld;
      res.gap = relg;
      if (opt.verbose) {
        std::fprintf(stderr, "ipm %3d pobj %+.6e dobj %+.6e relp %.2e reld %.2e gap %.2e\n", iter, pobj,
                     dobj, relp, reld, relg);
      }
      if (relp < opt.feas_tol && reld < opt.feas_tol && relg < opt.gap_tol) {
        res.status = SolveStatus::kOptimal;
        res.message = "converged";
        return res;
      }
      // Infeasibility certificates.
      if (pobj < 0.0) {
        const Vector ax = p.b - rp;
        if (ax.norm() / -pobj < 1e-8) {
          res.status = SolveStatus::kInfeasible;
          std::ostringstream os;
          os << "dual ray found: |A(X)| / -<C,X> = " << ax.norm() / -pobj;
          res.message = os.str();
          return res;
        }
      }
      if (dobj > 0.0) {
        double worst = p.a_lp.rows() > 0 ? std::max(0.0, (p.a_lp * y).maxCoeff()) : 0.0;
        for (std::size_t k = 0; k < nb; ++k) worst = std::max(worst, max_eigenvalue(adjoint(y, k)));
        if (worst / dobj < 1e-8 && y.norm() > 1e6) {
          res.status = SolveStatus::kUnbounded;
          res.message = "improving ray found";
          return res;
        }
      }
      if (iter == opt.max_iterations || stalls >= 3) break;

      // Factorizations and the Schur complement matrix.
      std::vector<Eigen::LLT<Matrix>> chol_x(nb);
      std::vector<Matrix> s_inv(nb);
      bool broken = false;
      for (std::size_t k = 0; k < nb; ++k) {
        chol_x[k].compute(x[k]);
        Eigen::LLT<Matrix> cs(s[k]);
        if (chol_x[k].info() != Eigen::Success || cs.info() != Eigen::Success) {
          broken = true;
          break;
        }
        s_inv[k] = cs.solve(Matrix::Identity(s[k].rows(), s[k].cols()));
        s_inv[k] = symmetrize(s_inv[k]);
      }
      if (broken) {
        res.message = "lost positive definiteness";
        break;
      }
      const double merit = std::max({relp / opt.feas_tol, reld / opt.feas_tol, relg / opt.gap_tol});
      if (merit < loose && merit < best_merit) {
        best_merit = merit;
        best_y = y;
        best_p = relp;
        best_d = reld;
        best_g = relg;
      }
      Matrix schur = p.a_lp.transpose() * (x_lp.cwiseQuotient(s_lp)).asDiagonal() * p.a_lp;
      for (std::size_t k = 0; k < nb; ++k) {
        std::vector<Matrix> prod(m);
        for (int j : touch[k]) prod[j] = x[k] * p.a[k][j] * s_inv[k];
        for (int i : touch[k]) {
          for (int j : touch[k]) {
            if (j < i) continue;
            const double v = frob_inner(p.a[k][i], prod[j]);
            schur(i, j) += v;
            if (i != j) schur(j, i) += v;
          }
        }
      }
      schur = symmetrize(schur);
      Eigen::LLT<Matrix> chol_m(schur);
      if (chol_m.info() != Eigen::Success) {
        const double reg = 1e-13 * std::max(1.0, schur.diagonal().maxCoeff());
        schur.diagonal().array() += reg;
        chol_m.compute(schur);
        if (chol_m.info() != Eigen::Success) {
          res.message = "Schur complement matrix is singular";
          break;
        }
      }

      auto direction = [&](const std::vector<Matrix>& g, const Vector& g_lp) {
        Direction d;
        Vector rhs = rp;
        for (std::size_t k = 0; k < nb; ++k) {
          const Matrix h = x[k] * rd[k] * s_inv[k] - g[k];
          for (int i : touch[k]) rhs(i) += frob_inner(p.a[k][i], h);
        }
        rhs += p.a_lp.transpose() * (x_lp.cwiseQuotient(s_lp).cwiseProduct(rd_lp) - g_lp);
        d.dy = chol_m.solve(rhs);
        d.dx.resize(nb);
        d.ds.resize(nb);
        for (std::size_t k = 0; k < nb; ++k) {
          d.ds[k] = rd[k] - adjoint(d.dy, k);
          d.dx[k] = symmetrize(g[k] - x[k] * d.ds[k] * s_inv[k]);
        }
        d.ds_lp = rd_lp - p.a_lp * d.dy;
        d.dx_lp = g_lp - x_lp.cwiseQuotient(s_lp).cwiseProduct(d.ds_lp);
        return d;
      };
      auto steps = [&](const Direction& d, double& ap, double& ad) {
        ap = ipm_detail::max_step_lp(x_lp, d.dx_lp);
        ad = ipm_detail::max_step_lp(s_lp, d.ds_lp);
        for (std::size_t k = 0; k < nb; ++k) {
          ap = std::min(ap, ipm_detail::max_step(chol_x[k], d.dx[k]));
          Eigen::LLT<Matrix> cs(s[k]);
          ad = std::min(ad, ipm_detail::max_step(cs, d.ds[k]));
        }
      };

      // Predictor.
      std::vector<Matrix> g(nb);
      for (std::size_t k = 0; k < nb; ++k) g[k] = -x[k];
      const Direction pred = direction(g, -x_lp);
      double ap = 0.0, ad = 0.0;
      steps(pred, ap, ad);
      ap = std::min(1.0, ap);
      ad = std::min(1.0, ad);
      double xs_aff = (x_lp + ap * pred.dx_lp).dot(s_lp + ad * pred.ds_lp);
      for (std::size_t k = 0; k < nb; ++k) {
        xs_aff += frob_inner(x[k] + ap * pred.dx[k], s[k] + ad * pred.ds[k]);
      }
      const double sigma = std::clamp(std::pow(std::max(xs_aff, 0.0) / xs, 3.0), 0.0, 1.0);

      // Corrector.
      for (std::size_t k = 0; k < nb; ++k) {
        g[k] = sigma * mu * s_inv[k] - x[k] - pred.dx[k] * pred.ds[k] * s_inv[k];
      }
      const Vector g_lp = (Vector::Constant(nlp, sigma * mu) - pred.dx_lp.cwiseProduct(pred.ds_lp))
                              .cwiseQuotient(s_lp) - x_lp;
      const Direction corr = direction(g, g_lp);
      steps(corr, ap, ad);
      ap = std::min(1.0, 0.95 * ap);
      ad = std::min(1.0, 0.95 * ad);
      if (ap < 1e-10 && ad < 1e-10) {
        ++stalls;
      } else {
        stalls = 0;
      }
      for (std::size_t k = 0; k < nb; ++k) {
        x[k] += ap * corr.dx[k];
        s[k] += ad * corr.ds[k];
      }
      x_lp += ap * corr.dx_lp;
      s_lp += ad * corr.ds_lp;
      y += ad * corr.dy;
    }

    // Accept a slightly less accurate point when progress stops close to optimal.
    if (best_y) {
      y = *best_y;
      res.primal_residual = best_p;
      res.dual_residual = best_d;
      res.gap = best_g;
      res.status = SolveStatus::kOptimal;
      res.message = "converged to reduced accuracy";
    } else {
      res.status = SolveStatus::kNumericalFailure;
      if (res.message.empty()) res.message = "iteration limit reached";
    }
    return res;
  }
};

}  // namespace qcbf
