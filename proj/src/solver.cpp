// SPDX-License-Identifier: Apache-2.0
//
// Homogeneous self-dual interior-point method. The iteration follows the
// conelp algorithm (Nesterov-Todd scaled Newton system, Mehrotra
// predictor-corrector); the KKT system is reduced to a dense saddle-point
// solve in the decision variables after eliminating the cone duals.

#include "fdci/solver.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include <chrono>
#include <cmath>
#include <iostream>
#include <limits>

namespace fdci::conic {

namespace {

constexpr double kStepFraction = 0.99;
constexpr double kStaticReg = 1e-10;

struct Segment {
  ConeType kind = ConeType::NonNeg;  // NonNeg, Soc or Psd after ingestion
  int offset = 0;                    // row offset into s/z
  int dim = 0;                       // rows (svec-packed for Psd)
  int psd_d = 0;
  std::vector<int> vars;
  MatrixXd G;  // dim x nv, so that G x + s = h
  VectorXd h;
};

// Nesterov-Todd scaling state for one segment.
struct Scaling {
  // nonneg
  VectorXd d;  // w entries, W = diag(d)
  // soc
  double eta = 1.0;
  VectorXd wbar;
  // psd
  MatrixXd r, rti;
  // scaled point lambda = W z = W^{-T} s
  VectorXd lambda;
};

VectorXd gather(const VectorXd& x, const std::vector<int>& vars) {
  VectorXd out(vars.size());
  for (size_t k = 0; k < vars.size(); ++k) out[k] = x[vars[k]];
  return out;
}

void scatter_add(VectorXd& x, const std::vector<int>& vars, const VectorXd& inc) {
  for (size_t k = 0; k < vars.size(); ++k) x[vars[k]] += inc[k];
}

VectorXd soc_reflect(const VectorXd& u) {  // J u with J = diag(1, -I)
  VectorXd r = -u;
  r[0] = u[0];
  return r;
}

// Wbar u with Wbar = [[w0, w1'], [w1, I + w1 w1'/(1+w0)]]
VectorXd soc_wbar(const VectorXd& wbar, const VectorXd& u) {
  const int d = static_cast<int>(u.size());
  VectorXd r(d);
  const double w0 = wbar[0];
  const auto w1 = wbar.tail(d - 1);
  const auto u1 = u.tail(d - 1);
  r[0] = wbar.dot(u);
  r.tail(d - 1) = u1 + (u[0] + w1.dot(u1) / (1.0 + w0)) * w1;
  return r;
}

// Wbar^{-1} u = J Wbar J u
VectorXd soc_wbar_inv(const VectorXd& wbar, const VectorXd& u) {
  return soc_reflect(soc_wbar(wbar, soc_reflect(u)));
}

class Cones {
 public:
  std::vector<Segment> segs;
  int total_rows = 0;
  double degree = 0.0;  // barrier degree

  VectorXd identity() const {
    VectorXd e = VectorXd::Zero(total_rows);
    for (const auto& s : segs) {
      if (s.kind == ConeType::NonNeg) {
        e.segment(s.offset, s.dim).setOnes();
      } else if (s.kind == ConeType::Soc) {
        e[s.offset] = 1.0;
      } else {
        e.segment(s.offset, s.dim) = svec(MatrixXd::Identity(s.psd_d, s.psd_d));
      }
    }
    return e;
  }

  // Largest residual over segments; value <= 0 means strictly feasible
  // with margin, > 0 means outside by that amount.
  double max_residual(const VectorXd& v) const {
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& s : segs) {
      double r;
      const VectorXd seg = v.segment(s.offset, s.dim);
      if (s.kind == ConeType::NonNeg) {
        r = -seg.minCoeff();
      } else if (s.kind == ConeType::Soc) {
        r = seg.tail(s.dim - 1).norm() - seg[0];
      } else {
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(smat(seg), Eigen::EigenvaluesOnly);
        r = -es.eigenvalues().minCoeff();
      }
      worst = std::max(worst, r);
    }
    return worst;
  }
};

MatrixXd chol_with_jitter(const MatrixXd& S, bool* ok) {
  MatrixXd A = S;
  const double scale = std::max(1e-300, S.diagonal().cwiseAbs().maxCoeff());
  double jitter = 0.0;
  for (int attempt = 0; attempt < 4; ++attempt) {
    Eigen::LLT<MatrixXd> llt(A);
    if (llt.info() == Eigen::Success) {
      *ok = true;
      return llt.matrixL();
    }
    jitter = (jitter == 0.0) ? 1e-14 * scale : jitter * 100.0;
    A = S + jitter * MatrixXd::Identity(S.rows(), S.cols());
  }
  *ok = false;
  return MatrixXd();
}

class State {
 public:
  State(const ConicProblem& prob, const SolverSettings& st) : settings_(st) {
    n_ = prob.num_vars();
    c_ = prob.objective();

    // Split blocks into equalities and cone segments; rotated cones are
    // mapped onto plain second-order cones, 1-dim SOCs onto nonneg rows.
    int p = 0, m = 0;
    for (const auto& b : prob.blocks())
      (b.cone == ConeType::Zero ? p : m) += b.rows;
    A_.resize(p, n_);
    A_.setZero();
    b_.resize(p);
    int prow = 0;
    for (const auto& b : prob.blocks()) {
      if (b.cone == ConeType::Zero) {
        for (size_t k = 0; k < b.vars.size(); ++k)
          A_.block(prow, b.vars[k], b.rows, 1) = b.coeffs.col(k);
        b_.segment(prow, b.rows) = -b.offset;
        prow += b.rows;
        continue;
      }
      Segment s;
      s.vars = b.vars;
      s.offset = cones_.total_rows;
      if (b.cone == ConeType::RotatedSoc) {
        // (u, v, x) with ||x||^2 <= u v  ->  (u+v, u-v, 2x) in SOC
        s.kind = ConeType::Soc;
        s.dim = b.rows;
        MatrixXd T = MatrixXd::Zero(b.rows, b.rows);
        T(0, 0) = 1.0;
        T(0, 1) = 1.0;
        T(1, 0) = 1.0;
        T(1, 1) = -1.0;
        for (int r = 2; r < b.rows; ++r) T(r, r) = 2.0;
        s.G = -(T * b.coeffs);
        s.h = T * b.offset;
      } else {
        s.kind = (b.cone == ConeType::Soc && b.rows == 1) ? ConeType::NonNeg : b.cone;
        s.dim = b.rows;
        s.psd_d = b.psd_dim;
        s.G = -b.coeffs;
        s.h = b.offset;
      }
      cones_.total_rows += s.dim;
      if (s.kind == ConeType::NonNeg)
        cones_.degree += s.dim;
      else if (s.kind == ConeType::Soc)
        cones_.degree += 1;
      else
        cones_.degree += s.psd_d;
      cones_.segs.push_back(std::move(s));
    }
    m_ = cones_.total_rows;
    p_ = p;

    col_scale_ = VectorXd::Ones(n_);
    eq_scale_ = VectorXd::Ones(p_);
    cost_scale_ = 1.0;
    if (settings_.equilibrate) equilibrate();
  }

  Solution run() {
    Solution sol;
    const auto t0 = std::chrono::steady_clock::now();
    sol.status = iterate(sol);
    sol.solve_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return sol;
  }

 private:
  // ---- data (scaled) ----
  SolverSettings settings_;
  int n_ = 0, p_ = 0, m_ = 0;
  VectorXd c_;
  MatrixXd A_;
  VectorXd b_;
  Cones cones_;
  VectorXd col_scale_, eq_scale_;
  double cost_scale_ = 1.0;

  // ---- iterates ----
  VectorXd x_, y_, z_, s_;
  double tau_ = 1.0, kappa_ = 1.0;

  std::vector<Scaling> scal_;
  Eigen::PartialPivLU<MatrixXd> kkt_;

  // ---------- equilibration (Ruiz), cone-block-uniform row scales ----------
  void equilibrate() {
    for (int sweep = 0; sweep < 4; ++sweep) {
      // row scales
      for (int r = 0; r < p_; ++r) {
        double nrm = A_.row(r).cwiseAbs().maxCoeff();
        if (nrm > 0) {
          const double f = 1.0 / std::sqrt(nrm);
          A_.row(r) *= f;
          b_[r] *= f;
          eq_scale_[r] *= f;
        }
      }
      for (auto& s : cones_.segs) {
        if (s.kind == ConeType::NonNeg) {
          for (int r = 0; r < s.dim; ++r) {
            double nrm = s.G.cols() ? s.G.row(r).cwiseAbs().maxCoeff() : 0.0;
            if (nrm > 0) {
              const double f = 1.0 / std::sqrt(nrm);
              s.G.row(r) *= f;
              s.h[r] *= f;
            }
          }
        } else {
          double nrm = s.G.cols() ? s.G.cwiseAbs().maxCoeff() : 0.0;
          if (nrm > 0) {
            const double f = 1.0 / std::sqrt(nrm);
            s.G *= f;
            s.h *= f;
          }
        }
      }
      // column scales
      for (int v = 0; v < n_; ++v) {
        double nrm = p_ ? A_.col(v).cwiseAbs().maxCoeff() : 0.0;
        for (const auto& s : cones_.segs) {
          for (size_t k = 0; k < s.vars.size(); ++k)
            if (s.vars[k] == v) nrm = std::max(nrm, s.G.col(k).cwiseAbs().maxCoeff());
        }
        if (nrm > 0) {
          const double f = 1.0 / std::sqrt(nrm);
          if (p_) A_.col(v) *= f;
          for (auto& s : cones_.segs)
            for (size_t k = 0; k < s.vars.size(); ++k)
              if (s.vars[k] == v) s.G.col(k) *= f;
          c_[v] *= f;
          col_scale_[v] *= f;
        }
      }
    }
    const double cn = c_.cwiseAbs().maxCoeff();
    if (cn > 0) {
      cost_scale_ = std::max(1.0, cn);
      c_ /= cost_scale_;
    }
  }

  // ---------- segment-level linear algebra ----------
  VectorXd cone_matvec(const VectorXd& x) const {  // G x
    VectorXd out = VectorXd::Zero(m_);
    for (const auto& s : cones_.segs)
      out.segment(s.offset, s.dim) = s.G * gather(x, s.vars);
    return out;
  }

  VectorXd cone_rmatvec(const VectorXd& z) const {  // G' z
    VectorXd out = VectorXd::Zero(n_);
    for (const auto& s : cones_.segs)
      scatter_add(out, s.vars, s.G.transpose() * z.segment(s.offset, s.dim));
    return out;
  }

  // ---------- NT scaling ----------
  bool compute_scaling() {
    scal_.assign(cones_.segs.size(), Scaling());
    for (size_t i = 0; i < cones_.segs.size(); ++i) {
      const auto& seg = cones_.segs[i];
      auto& W = scal_[i];
      const VectorXd sv = s_.segment(seg.offset, seg.dim);
      const VectorXd zv = z_.segment(seg.offset, seg.dim);
      if (seg.kind == ConeType::NonNeg) {
        if (sv.minCoeff() <= 0 || zv.minCoeff() <= 0) return false;
        W.d = (sv.array() / zv.array()).sqrt();
        W.lambda = (sv.array() * zv.array()).sqrt();
      } else if (seg.kind == ConeType::Soc) {
        const double sres = sv[0] * sv[0] - sv.tail(seg.dim - 1).squaredNorm();
        const double zres = zv[0] * zv[0] - zv.tail(seg.dim - 1).squaredNorm();
        if (sres <= 0 || zres <= 0 || sv[0] <= 0 || zv[0] <= 0) return false;
        const double a = std::sqrt(sres), bb = std::sqrt(zres);
        const VectorXd sb = sv / a, zb = zv / bb;
        const double gamma = std::sqrt((1.0 + sb.dot(zb)) / 2.0);
        W.wbar = (sb + soc_reflect(zb)) / (2.0 * gamma);
        W.eta = std::sqrt(a / bb);
        W.lambda = W.eta * soc_wbar(W.wbar, zv);
      } else {
        bool ok = false;
        const MatrixXd Ls = chol_with_jitter(smat(sv), &ok);
        if (!ok) return false;
        const MatrixXd Lz = chol_with_jitter(smat(zv), &ok);
        if (!ok) return false;
        Eigen::JacobiSVD<MatrixXd> svd(Lz.transpose() * Ls,
                                       Eigen::ComputeFullU | Eigen::ComputeFullV);
        const VectorXd sig = svd.singularValues();
        if (sig.minCoeff() <= 0) return false;
        const VectorXd isq = sig.cwiseSqrt().cwiseInverse();
        W.r = Ls * svd.matrixV() * isq.asDiagonal();
        W.rti = Lz * svd.matrixU() * isq.asDiagonal();
        MatrixXd lam = MatrixXd::Zero(seg.psd_d, seg.psd_d);
        lam.diagonal() = sig;
        W.lambda = svec(lam);
      }
    }
    return true;
  }

  VectorXd lambda_vec() const {
    VectorXd l(m_);
    for (size_t i = 0; i < cones_.segs.size(); ++i)
      l.segment(cones_.segs[i].offset, cones_.segs[i].dim) = scal_[i].lambda;
    return l;
  }

  // W z  (into scaled space)
  VectorXd apply_W(const VectorXd& z) const {
    VectorXd out(m_);
    for (size_t i = 0; i < cones_.segs.size(); ++i) {
      const auto& seg = cones_.segs[i];
      const auto& W = scal_[i];
      const VectorXd v = z.segment(seg.offset, seg.dim);
      if (seg.kind == ConeType::NonNeg) {
        out.segment(seg.offset, seg.dim) = W.d.cwiseProduct(v);
      } else if (seg.kind == ConeType::Soc) {
        out.segment(seg.offset, seg.dim) = W.eta * soc_wbar(W.wbar, v);
      } else {
        out.segment(seg.offset, seg.dim) = svec(W.r.transpose() * smat(v) * W.r);
      }
    }
    return out;
  }

  // W^{-T} s  (into scaled space)
  VectorXd apply_Wtinv(const VectorXd& s) const {
    VectorXd out(m_);
    for (size_t i = 0; i < cones_.segs.size(); ++i) {
      const auto& seg = cones_.segs[i];
      const auto& W = scal_[i];
      const VectorXd v = s.segment(seg.offset, seg.dim);
      if (seg.kind == ConeType::NonNeg) {
        out.segment(seg.offset, seg.dim) = v.cwiseQuotient(W.d);
      } else if (seg.kind == ConeType::Soc) {
        out.segment(seg.offset, seg.dim) = soc_wbar_inv(W.wbar, v) / W.eta;
      } else {
        out.segment(seg.offset, seg.dim) = svec(W.rti.transpose() * smat(v) * W.rti);
      }
    }
    return out;
  }

  // W' u  (from scaled space back to s-space)
  VectorXd apply_Wt(const VectorXd& u) const {
    VectorXd out(m_);
    for (size_t i = 0; i < cones_.segs.size(); ++i) {
      const auto& seg = cones_.segs[i];
      const auto& W = scal_[i];
      const VectorXd v = u.segment(seg.offset, seg.dim);
      if (seg.kind == ConeType::NonNeg) {
        out.segment(seg.offset, seg.dim) = W.d.cwiseProduct(v);
      } else if (seg.kind == ConeType::Soc) {
        out.segment(seg.offset, seg.dim) = W.eta * soc_wbar(W.wbar, v);
      } else {
        out.segment(seg.offset, seg.dim) = svec(W.r * smat(v) * W.r.transpose());
      }
    }
    return out;
  }

  // (W' W)^{-1} v
  VectorXd apply_WtWinv(const VectorXd& v) const {
    VectorXd out(m_);
    for (size_t i = 0; i < cones_.segs.size(); ++i) {
      const auto& seg = cones_.segs[i];
      const auto& W = scal_[i];
      const VectorXd u = v.segment(seg.offset, seg.dim);
      if (seg.kind == ConeType::NonNeg) {
        out.segment(seg.offset, seg.dim) = u.cwiseQuotient(W.d.cwiseAbs2());
      } else if (seg.kind == ConeType::Soc) {
        // Wbar^{-2} = 2 (J wbar)(J wbar)' - J
        const VectorXd jw = soc_reflect(W.wbar);
        out.segment(seg.offset, seg.dim) =
            (2.0 * jw * jw.dot(u) - soc_reflect(u)) / (W.eta * W.eta);
      } else {
        const MatrixXd C = W.rti.transpose() * smat(u) * W.rti;
        out.segment(seg.offset, seg.dim) = svec(W.rti * C * W.rti.transpose());
      }
    }
    return out;
  }

  // W' W z
  VectorXd apply_WtW(const VectorXd& z) const { return apply_Wt(apply_W(z)); }

  // ---------- Jordan algebra on scaled vectors ----------
  VectorXd jordan_prod(const VectorXd& u, const VectorXd& v) const {
    VectorXd out(m_);
    for (const auto& seg : cones_.segs) {
      const VectorXd a = u.segment(seg.offset, seg.dim);
      const VectorXd b = v.segment(seg.offset, seg.dim);
      if (seg.kind == ConeType::NonNeg) {
        out.segment(seg.offset, seg.dim) = a.cwiseProduct(b);
      } else if (seg.kind == ConeType::Soc) {
        VectorXd r(seg.dim);
        r[0] = a.dot(b);
        r.tail(seg.dim - 1) = a[0] * b.tail(seg.dim - 1) + b[0] * a.tail(seg.dim - 1);
        out.segment(seg.offset, seg.dim) = r;
      } else {
        const MatrixXd A = smat(a), B = smat(b);
        out.segment(seg.offset, seg.dim) = svec(0.5 * (A * B + B * A));
      }
    }
    return out;
  }

  // solve lambda o u = d
  VectorXd jordan_solve(const VectorXd& d) const {
    VectorXd out(m_);
    for (size_t i = 0; i < cones_.segs.size(); ++i) {
      const auto& seg = cones_.segs[i];
      const VectorXd lam = scal_[i].lambda;
      const VectorXd rhs = d.segment(seg.offset, seg.dim);
      if (seg.kind == ConeType::NonNeg) {
        out.segment(seg.offset, seg.dim) = rhs.cwiseQuotient(lam);
      } else if (seg.kind == ConeType::Soc) {
        const double l0 = lam[0];
        const VectorXd l1 = lam.tail(seg.dim - 1);
        const double det = l0 * l0 - l1.squaredNorm();
        VectorXd u(seg.dim);
        u[0] = (l0 * rhs[0] - l1.dot(rhs.tail(seg.dim - 1))) / det;
        u.tail(seg.dim - 1) = (rhs.tail(seg.dim - 1) - u[0] * l1) / l0;
        out.segment(seg.offset, seg.dim) = u;
      } else {
        const MatrixXd D = smat(rhs);
        MatrixXd lamd = smat(lam);
        MatrixXd U(seg.psd_d, seg.psd_d);
        for (int r = 0; r < seg.psd_d; ++r)
          for (int cidx = 0; cidx < seg.psd_d; ++cidx)
            U(r, cidx) = 2.0 * D(r, cidx) / (lamd(r, r) + lamd(cidx, cidx));
        out.segment(seg.offset, seg.dim) = svec(U);
      }
    }
    return out;
  }

  // sup { alpha : lambda + alpha rho  in cone }
  double max_step(const VectorXd& rho) const {
    double amax = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < cones_.segs.size(); ++i) {
      const auto& seg = cones_.segs[i];
      const VectorXd lam = scal_[i].lambda;
      const VectorXd r = rho.segment(seg.offset, seg.dim);
      if (seg.kind == ConeType::NonNeg) {
        for (int k = 0; k < seg.dim; ++k)
          if (r[k] < 0) amax = std::min(amax, -lam[k] / r[k]);
      } else if (seg.kind == ConeType::Soc) {
        // boundary of (lam0 + a r0)^2 - ||lam1 + a r1||^2 = 0
        const double aq = r[0] * r[0] - r.tail(seg.dim - 1).squaredNorm();
        const double bq = 2.0 * (lam[0] * r[0] - lam.tail(seg.dim - 1).dot(r.tail(seg.dim - 1)));
        const double cq = lam[0] * lam[0] - lam.tail(seg.dim - 1).squaredNorm();
        double bound = std::numeric_limits<double>::infinity();
        const double disc = bq * bq - 4.0 * aq * cq;
        if (std::abs(aq) < 1e-300) {
          if (bq < 0) bound = -cq / bq;
        } else if (disc >= 0) {
          const double sq = std::sqrt(disc);
          const double r1 = (-bq - sq) / (2.0 * aq), r2 = (-bq + sq) / (2.0 * aq);
          double lo = std::min(r1, r2), hi = std::max(r1, r2);
          if (lo > 0)
            bound = lo;
          else if (hi > 0)
            bound = hi;
        }
        if (r[0] < 0) bound = std::min(bound, -lam[0] / r[0]);
        amax = std::min(amax, bound);
      } else {
        const VectorXd ld = smat(lam).diagonal();
        MatrixXd T = smat(r);
        for (int a = 0; a < seg.psd_d; ++a)
          for (int b = 0; b < seg.psd_d; ++b) T(a, b) /= std::sqrt(ld[a] * ld[b]);
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(T, Eigen::EigenvaluesOnly);
        const double emin = es.eigenvalues().minCoeff();
        if (emin < 0) amax = std::min(amax, -1.0 / emin);
      }
    }
    return amax;
  }

  // ---------- KKT factorization and solves ----------
  void factor_kkt() {
    MatrixXd H = MatrixXd::Zero(n_, n_);
    for (size_t i = 0; i < cones_.segs.size(); ++i) {
      const auto& seg = cones_.segs[i];
      const auto& W = scal_[i];
      const int nv = static_cast<int>(seg.vars.size());
      if (nv == 0) continue;
      MatrixXd Hloc;
      if (seg.kind == ConeType::NonNeg) {
        Hloc = seg.G.transpose() * W.d.cwiseAbs2().cwiseInverse().asDiagonal() * seg.G;
      } else if (seg.kind == ConeType::Soc) {
        MatrixXd T(seg.dim, nv);
        for (int k = 0; k < nv; ++k) T.col(k) = soc_wbar_inv(W.wbar, seg.G.col(k));
        Hloc = (T.transpose() * T) / (W.eta * W.eta);
      } else {
        const int d = seg.psd_d;
        MatrixXd Cflat(d * d, nv);
        for (int k = 0; k < nv; ++k) {
          const MatrixXd C = W.rti.transpose() * smat(seg.G.col(k)) * W.rti;
          Cflat.col(k) = Eigen::Map<const VectorXd>(C.data(), d * d);
        }
        Hloc = Cflat.transpose() * Cflat;
      }
      for (int a = 0; a < nv; ++a)
        for (int b = 0; b < nv; ++b) H(seg.vars[a], seg.vars[b]) += Hloc(a, b);
    }
    const double hscale = std::max(1.0, H.diagonal().cwiseAbs().maxCoeff());
    MatrixXd K = MatrixXd::Zero(n_ + p_, n_ + p_);
    K.topLeftCorner(n_, n_) = H + kStaticReg * hscale * MatrixXd::Identity(n_, n_);
    if (p_) {
      K.topRightCorner(n_, p_) = A_.transpose();
      K.bottomLeftCorner(p_, n_) = A_;
      K.bottomRightCorner(p_, p_) = -kStaticReg * hscale * MatrixXd::Identity(p_, p_);
    }
    kkt_.compute(K);
  }

  // Solve [0 A' G'; A 0 0; G 0 -W'W] (ux,uy,uz) = (bx,by,bz)
  void solve3(const VectorXd& bx, const VectorXd& by, const VectorXd& bz, VectorXd* ux,
              VectorXd* uy, VectorXd* uz) const {
    auto once = [&](const VectorXd& rx, const VectorXd& ry, const VectorXd& rz, VectorXd* ox,
                    VectorXd* oy, VectorXd* oz) {
      VectorXd rhs(n_ + p_);
      rhs.head(n_) = rx + cone_rmatvec(apply_WtWinv(rz));
      rhs.tail(p_) = ry;
      const VectorXd sol = kkt_.solve(rhs);
      *ox = sol.head(n_);
      *oy = sol.tail(p_);
      *oz = apply_WtWinv(cone_matvec(*ox) - rz);
    };
    once(bx, by, bz, ux, uy, uz);
    for (int it = 0; it < settings_.refine_steps; ++it) {
      const VectorXd r1 = bx - ((p_ ? VectorXd(A_.transpose() * *uy) : VectorXd::Zero(n_)) +
                                cone_rmatvec(*uz));
      const VectorXd r2 = by - (p_ ? VectorXd(A_ * *ux) : VectorXd());
      const VectorXd r3 = bz - (cone_matvec(*ux) - apply_WtW(*uz));
      VectorXd dx, dy, dz;
      once(r1, r2, r3, &dx, &dy, &dz);
      *ux += dx;
      *uy += dy;
      *uz += dz;
    }
  }

  // ---------- the interior-point loop ----------
  SolveStatus iterate(Solution& sol) {
    x_ = VectorXd::Zero(n_);
    y_ = VectorXd::Zero(p_);
    s_ = VectorXd::Zero(m_);
    z_ = VectorXd::Zero(m_);
    tau_ = 1.0;
    kappa_ = 1.0;

    const VectorXd e = cones_.identity();
    VectorXd h(m_);
    for (const auto& seg : cones_.segs) h.segment(seg.offset, seg.dim) = seg.h;

    // Initial point from two least-squares KKT solves with identity scaling.
    scal_.assign(cones_.segs.size(), Scaling());
    for (size_t i = 0; i < cones_.segs.size(); ++i) {
      auto& W = scal_[i];
      const auto& seg = cones_.segs[i];
      if (seg.kind == ConeType::NonNeg) {
        W.d = VectorXd::Ones(seg.dim);
        W.lambda = VectorXd::Ones(seg.dim);
      } else if (seg.kind == ConeType::Soc) {
        W.eta = 1.0;
        W.wbar = VectorXd::Zero(seg.dim);
        W.wbar[0] = 1.0;
        W.lambda = W.wbar;
      } else {
        W.r = MatrixXd::Identity(seg.psd_d, seg.psd_d);
        W.rti = W.r;
        W.lambda = svec(W.r);
      }
    }
    factor_kkt();
    {
      VectorXd ux, uy, uz;
      solve3(VectorXd::Zero(n_), b_, h, &ux, &uy, &uz);
      x_ = ux;
      s_ = -uz;
      const double rp = cones_.max_residual(s_);
      if (rp >= 0) s_ += (1.0 + rp) * e;
      solve3(-c_, VectorXd::Zero(p_), VectorXd::Zero(m_), &ux, &uy, &uz);
      y_ = uy;
      z_ = uz;
      const double rd = cones_.max_residual(z_);
      if (rd >= 0) z_ += (1.0 + rd) * e;
    }

    const double normb = 1.0 + b_.norm();
    const double normh = 1.0 + h.norm();
    const double normc = 1.0 + c_.norm();
    const double nu = cones_.degree + 1.0;

    SolveStatus verdict = SolveStatus::NumericalFailure;
    for (int iter = 0; iter <= settings_.max_iters; ++iter) {
      const VectorXd res_x = (p_ ? VectorXd(A_.transpose() * y_) : VectorXd::Zero(n_)) +
                             cone_rmatvec(z_) + c_ * tau_;
      const VectorXd res_y = (p_ ? VectorXd(A_ * x_) : VectorXd()) - b_ * tau_;
      const VectorXd res_z = cone_matvec(x_) + s_ - h * tau_;
      const double res_tau = c_.dot(x_) + b_.dot(y_) + h.dot(z_) + kappa_;
      const double gap = s_.dot(z_);
      const double mu = (gap + tau_ * kappa_) / nu;

      const double pres = std::max(res_y.size() ? res_y.norm() / (tau_ * normb) : 0.0,
                                   res_z.norm() / (tau_ * normh));
      const double dres = res_x.norm() / (tau_ * normc);
      const double pcost = c_.dot(x_) / tau_;
      const double dcost = -(b_.dot(y_) + h.dot(z_)) / tau_;
      const double absgap = gap / (tau_ * tau_);
      double relgap = std::numeric_limits<double>::infinity();
      if (pcost < 0)
        relgap = absgap / (-pcost);
      else if (dcost > 0)
        relgap = absgap / dcost;

      if (settings_.verbose)
        std::cerr << "it " << iter << " pcost " << pcost * cost_scale_ << " gap " << absgap
                  << " pres " << pres << " dres " << dres << " mu " << mu << " tau " << tau_
                  << " kappa " << kappa_ << "\n";

      sol.iterations = iter;
      sol.gap = relgap;
      sol.pres = pres;
      sol.dres = dres;

      if (pres <= settings_.feastol && dres <= settings_.feastol &&
          (absgap <= settings_.abstol || relgap <= settings_.reltol)) {
        sol.x = finalize_x();
        sol.objective = cost_scale_ * pcost;
        return SolveStatus::Optimal;
      }
      const double zeta_p = -(b_.dot(y_) + h.dot(z_));
      if (zeta_p > 0) {
        const double pinfres =
            ((p_ ? VectorXd(A_.transpose() * y_) : VectorXd::Zero(n_)) + cone_rmatvec(z_)).norm() /
            (zeta_p * normc);
        if (pinfres <= settings_.feastol) return SolveStatus::Infeasible;
      }
      const double zeta_d = -c_.dot(x_);
      if (zeta_d > 0) {
        const double dinfres =
            std::max(res_y.size() ? (A_ * x_).norm() / normb : 0.0,
                     (cone_matvec(x_) + s_).norm() / normh) /
            zeta_d;
        if (dinfres <= settings_.feastol && cones_.max_residual(s_) <= 0)
          return SolveStatus::Unbounded;
      }
      if (iter == settings_.max_iters) break;

      if (!compute_scaling()) break;
      factor_kkt();

      const VectorXd lam = lambda_vec();
      const VectorXd lamlam = jordan_prod(lam, lam);

      VectorXd u2x, u2y, u2z;
      solve3(c_, -b_, -h, &u2x, &u2y, &u2z);

      auto direction = [&](double sigma, const VectorXd& ds_rhs, double dkt_rhs, VectorXd* dx,
                           VectorXd* dy, VectorXd* dz, VectorXd* ds, double* dtau,
                           double* dkappa) {
        const VectorXd uc = jordan_solve(ds_rhs);
        const VectorXd bx = -(1.0 - sigma) * res_x;
        const VectorXd by = -(1.0 - sigma) * res_y;
        const VectorXd bzt = -(1.0 - sigma) * res_z - apply_Wt(uc);
        VectorXd u1x, u1y, u1z;
        solve3(bx, by, bzt, &u1x, &u1y, &u1z);
        const double q1 = c_.dot(u1x) + b_.dot(u1y) + h.dot(u1z);
        const double q2 = c_.dot(u2x) + b_.dot(u2y) + h.dot(u2z);
        *dtau = (q1 + (1.0 - sigma) * res_tau + dkt_rhs / tau_) / (q2 + kappa_ / tau_);
        *dx = u1x - *dtau * u2x;
        *dy = u1y - *dtau * u2y;
        *dz = u1z - *dtau * u2z;
        *ds = apply_Wt(uc - apply_W(*dz));
        *dkappa = (dkt_rhs - kappa_ * *dtau) / tau_;
        if (settings_.verbose) {
          const double e1 = ((p_ ? VectorXd(A_.transpose() * *dy) : VectorXd::Zero(n_)) +
                             cone_rmatvec(*dz) + c_ * *dtau + (1.0 - sigma) * res_x)
                                .norm();
          const double e2 =
              p_ ? ((A_ * *dx) - b_ * *dtau + (1.0 - sigma) * res_y).norm() : 0.0;
          const double e3 =
              (cone_matvec(*dx) + *ds - h * *dtau + (1.0 - sigma) * res_z).norm();
          const double e4 = std::abs(c_.dot(*dx) + b_.dot(*dy) + h.dot(*dz) + *dkappa +
                                     (1.0 - sigma) * res_tau);
          const double e5 =
              (jordan_prod(lam, apply_W(*dz) + apply_Wtinv(*ds)) - ds_rhs).norm();
          const double e6 = std::abs(tau_ * *dkappa + kappa_ * *dtau - dkt_rhs);
          std::cerr << "   newton residuals " << e1 << " " << e2 << " " << e3 << " " << e4
                    << " " << e5 << " " << e6 << "\n";
        }
      };

      auto step_bound = [&](const VectorXd& dz, const VectorXd& ds, double dtau, double dkappa) {
        double a = std::min(max_step(apply_W(dz)), max_step(apply_Wtinv(ds)));
        if (dtau < 0) a = std::min(a, -tau_ / dtau);
        if (dkappa < 0) a = std::min(a, -kappa_ / dkappa);
        return a;
      };

      // predictor
      VectorXd dx, dy, dz, ds;
      double dtau, dkappa;
      direction(0.0, -lamlam, -tau_ * kappa_, &dx, &dy, &dz, &ds, &dtau, &dkappa);
      const double a_aff = std::min(1.0, step_bound(dz, ds, dtau, dkappa));
      const double sigma = std::pow(1.0 - a_aff, 3);

      // corrector (Mehrotra second-order term in scaled space)
      const VectorXd corr = jordan_prod(apply_Wtinv(ds), apply_W(dz));
      const VectorXd ds_rhs = -lamlam - corr + sigma * mu * e;
      const double dkt_rhs = -tau_ * kappa_ - dtau * dkappa + sigma * mu;
      direction(sigma, ds_rhs, dkt_rhs, &dx, &dy, &dz, &ds, &dtau, &dkappa);

      double alpha = kStepFraction * step_bound(dz, ds, dtau, dkappa);
      alpha = std::min(alpha, 1.0);
      if (settings_.verbose)
        std::cerr << "   a_aff " << a_aff << " sigma " << sigma << " alpha " << alpha
                  << " dtau " << dtau << " dkappa " << dkappa << "\n";
      if (!(alpha > 1e-10)) break;

      x_ += alpha * dx;
      y_ += alpha * dy;
      z_ += alpha * dz;
      s_ += alpha * ds;
      tau_ += alpha * dtau;
      kappa_ += alpha * dkappa;
      if (!(tau_ > 0) || !(kappa_ > 0) || !std::isfinite(mu)) break;
    }
    return verdict;
  }

  VectorXd finalize_x() const {
    VectorXd x = x_ / tau_;
    return col_scale_.cwiseProduct(x);
  }
};

}  // namespace

const char* status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal:
      return "optimal";
    case SolveStatus::Infeasible:
      return "infeasible";
    case SolveStatus::Unbounded:
      return "unbounded";
    case SolveStatus::NumericalFailure:
      return "numerical-failure";
  }
  return "?";
}

Solution solve(const ConicProblem& problem, const SolverSettings& settings) {
  for (const auto& b : problem.blocks()) {
    if (b.rows == 0) throw std::invalid_argument("malformed problem: empty block");
  }
  State state(problem, settings);
  return state.run();
}

}  // namespace fdci::conic
