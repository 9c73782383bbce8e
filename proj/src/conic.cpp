// SPDX-License-Identifier: Apache-2.0

#include "fdci/conic.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <ostream>

namespace fdci::conic {

namespace {
constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kInvSqrt2 = 0.7071067811865476;
}  // namespace

const char* cone_name(ConeType t) {
  switch (t) {
    case ConeType::Zero:
      return "zero";
    case ConeType::NonNeg:
      return "nonneg";
    case ConeType::Soc:
      return "soc";
    case ConeType::RotatedSoc:
      return "rsoc";
    case ConeType::Psd:
      return "psd";
  }
  return "?";
}

VectorXd svec(const MatrixXd& S) {
  const int d = static_cast<int>(S.rows());
  VectorXd v(svec_dim(d));
  int k = 0;
  for (int j = 0; j < d; ++j) {
    v[k++] = S(j, j);
    for (int i = j + 1; i < d; ++i) v[k++] = kSqrt2 * 0.5 * (S(i, j) + S(j, i));
  }
  return v;
}

MatrixXd smat(const VectorXd& v) {
  const int m = static_cast<int>(v.size());
  const int d = static_cast<int>(std::lround((std::sqrt(8.0 * m + 1.0) - 1.0) / 2.0));
  if (svec_dim(d) != m) throw std::invalid_argument("smat: not a packed length");
  MatrixXd S(d, d);
  int k = 0;
  for (int j = 0; j < d; ++j) {
    S(j, j) = v[k++];
    for (int i = j + 1; i < d; ++i) {
      const double x = kInvSqrt2 * v[k++];
      S(i, j) = x;
      S(j, i) = x;
    }
  }
  return S;
}

MatrixXd lift_hermitian(const MatrixXcd& H) {
  const int n = static_cast<int>(H.rows());
  MatrixXd L(2 * n, 2 * n);
  L.topLeftCorner(n, n) = H.real();
  L.topRightCorner(n, n) = -H.imag();
  L.bottomLeftCorner(n, n) = H.imag();
  L.bottomRightCorner(n, n) = H.real();
  return L;
}

VectorXd lift_vector(const VectorXcd& z) {
  const int n = static_cast<int>(z.size());
  VectorXd v(2 * n);
  v.head(n) = z.real();
  v.tail(n) = z.imag();
  return v;
}

VectorXcd unlift_vector(const VectorXd& v) {
  const int n = static_cast<int>(v.size()) / 2;
  VectorXcd z(n);
  z.real() = v.head(n);
  z.imag() = v.tail(n);
  return z;
}

VectorXd re_form(const VectorXcd& a) {
  const int n = static_cast<int>(a.size());
  VectorXd r(2 * n);
  r.head(n) = a.real();
  r.tail(n) = a.imag();
  return r;
}

VectorXd im_form(const VectorXcd& a) {
  const int n = static_cast<int>(a.size());
  VectorXd r(2 * n);
  r.head(n) = -a.imag();
  r.tail(n) = a.real();
  return r;
}

MatrixXcd herm_basis(int n, int dof) {
  MatrixXcd B = MatrixXcd::Zero(n, n);
  int v = 0;
  for (int j = 0; j < n; ++j) {
    if (v == dof) {
      B(j, j) = 1.0;
      return B;
    }
    ++v;
    for (int i = j + 1; i < n; ++i) {
      if (v == dof) {
        B(i, j) = 1.0;
        B(j, i) = 1.0;
        return B;
      }
      ++v;
      if (v == dof) {
        B(i, j) = std::complex<double>(0.0, 1.0);
        B(j, i) = std::complex<double>(0.0, -1.0);
        return B;
      }
      ++v;
    }
  }
  throw std::invalid_argument("herm_basis: dof out of range");
}

MatrixXcd herm_from_dofs(int n, const VectorXd& dofs) {
  MatrixXcd H = MatrixXcd::Zero(n, n);
  int v = 0;
  for (int j = 0; j < n; ++j) {
    H(j, j) = dofs[v++];
    for (int i = j + 1; i < n; ++i) {
      const double re = dofs[v++];
      const double im = dofs[v++];
      H(i, j) = std::complex<double>(re, im);
      H(j, i) = std::complex<double>(re, -im);
    }
  }
  return H;
}

VectorXd herm_to_dofs(const MatrixXcd& H) {
  const int n = static_cast<int>(H.rows());
  VectorXd dofs(herm_dof_count(n));
  int v = 0;
  for (int j = 0; j < n; ++j) {
    dofs[v++] = H(j, j).real();
    for (int i = j + 1; i < n; ++i) {
      dofs[v++] = H(i, j).real();
      dofs[v++] = H(i, j).imag();
    }
  }
  return dofs;
}

VectorXd herm_quad_coeffs(int n, const VectorXcd& a) {
  VectorXd q(herm_dof_count(n));
  int v = 0;
  for (int j = 0; j < n; ++j) {
    q[v++] = std::norm(a[j]);
    for (int i = j + 1; i < n; ++i) {
      const std::complex<double> p = std::conj(a[i]) * a[j];
      q[v++] = 2.0 * p.real();
      q[v++] = -2.0 * p.imag();
    }
  }
  return q;
}

VectorXd herm_trace_coeffs(int n) {
  VectorXd q = VectorXd::Zero(herm_dof_count(n));
  int v = 0;
  for (int j = 0; j < n; ++j) {
    q[v] = 1.0;
    v += 1 + 2 * (n - 1 - j);
  }
  return q;
}

VectorXd ConicBlock::value(const VectorXd& x) const {
  VectorXd v = offset;
  for (size_t k = 0; k < vars.size(); ++k) v += coeffs.col(k) * x[vars[k]];
  return v;
}

double cone_residual(ConeType cone, const VectorXd& value) {
  switch (cone) {
    case ConeType::Zero:
      return value.size() ? value.cwiseAbs().maxCoeff() : 0.0;
    case ConeType::NonNeg:
      return value.size() ? -value.minCoeff() : 0.0;
    case ConeType::Soc:
      return value.tail(value.size() - 1).norm() - value[0];
    case ConeType::RotatedSoc: {
      VectorXd s(value.size());
      s[0] = value[0] + value[1];
      s[1] = value[0] - value[1];
      s.tail(value.size() - 2) = 2.0 * value.tail(value.size() - 2);
      return cone_residual(ConeType::Soc, s);
    }
    case ConeType::Psd: {
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(smat(value), Eigen::EigenvaluesOnly);
      return -es.eigenvalues().minCoeff();
    }
  }
  return 0.0;
}

VarSpan ConicProblem::add_variables(const std::string& name, int count) {
  if (count <= 0) throw std::invalid_argument("add_variables: count must be positive");
  if (registry_.count(name)) throw std::invalid_argument("add_variables: duplicate name " + name);
  VarSpan s{num_vars_, count};
  num_vars_ += count;
  objective_.conservativeResize(num_vars_);
  objective_.tail(count).setZero();
  registry_[name] = s;
  return s;
}

VarSpan ConicProblem::span(const std::string& name) const {
  auto it = registry_.find(name);
  if (it == registry_.end()) throw std::invalid_argument("unknown variable " + name);
  return it->second;
}

bool ConicProblem::has_variable(const std::string& name) const { return registry_.count(name) > 0; }

void ConicProblem::add_cost(int var, double weight) { objective_[var] += weight; }

void ConicProblem::add_cost(const VarSpan& vars, const VectorXd& weights) {
  objective_.segment(vars.start, vars.size) += weights;
}

void ConicProblem::add_block(ConicBlock block) {
  if (block.rows != block.offset.size() || block.rows != block.coeffs.rows())
    throw std::invalid_argument("block rows mismatch");
  if (static_cast<int>(block.vars.size()) != block.coeffs.cols())
    throw std::invalid_argument("block vars/coeffs mismatch");
  for (size_t k = 0; k < block.vars.size(); ++k) {
    if (block.vars[k] < 0 || block.vars[k] >= num_vars_)
      throw std::invalid_argument("block variable out of range");
    if (k > 0 && block.vars[k] <= block.vars[k - 1])
      throw std::invalid_argument("block variables must be strictly increasing");
  }
  switch (block.cone) {
    case ConeType::Soc:
      if (block.rows < 1) throw std::invalid_argument("soc block needs >= 1 row");
      break;
    case ConeType::RotatedSoc:
      if (block.rows < 3) throw std::invalid_argument("rsoc block needs >= 3 rows");
      break;
    case ConeType::Psd:
      if (block.psd_dim < 1 || block.rows != svec_dim(block.psd_dim))
        throw std::invalid_argument("psd block rows must equal svec_dim(psd_dim)");
      break;
    default:
      if (block.rows < 1) throw std::invalid_argument("empty block");
  }
  blocks_.push_back(std::move(block));
}

std::vector<BlockResidual> ConicProblem::residuals(const VectorXd& x) const {
  if (x.size() != num_vars_) throw std::invalid_argument("residuals: x dimension mismatch");
  std::vector<BlockResidual> out;
  out.reserve(blocks_.size());
  for (size_t i = 0; i < blocks_.size(); ++i) {
    const auto& b = blocks_[i];
    out.push_back({static_cast<int>(i), b.cone, b.label, cone_residual(b.cone, b.value(x))});
  }
  return out;
}

double ConicProblem::worst_residual(const VectorXd& x) const {
  double worst = 0.0;
  for (const auto& r : residuals(x)) worst = std::max(worst, r.distance);
  return worst;
}

void ConicProblem::dump(std::ostream& os) const {
  os << "conic-problem vars=" << num_vars_ << " blocks=" << blocks_.size() << "\n";
  os << "variables:\n";
  for (const auto& [name, s] : registry_)
    os << "  " << name << " [" << s.start << "," << s.start + s.size << ")\n";
  os << "objective:";
  for (int i = 0; i < num_vars_; ++i)
    if (objective_[i] != 0.0) os << " " << i << ":" << objective_[i];
  os << "\n";
  for (size_t i = 0; i < blocks_.size(); ++i) {
    const auto& b = blocks_[i];
    os << "block " << i << " cone=" << cone_name(b.cone) << " rows=" << b.rows;
    if (b.cone == ConeType::Psd) os << " dim=" << b.psd_dim;
    if (!b.label.empty()) os << " label=" << b.label;
    os << "\n";
    for (int r = 0; r < b.rows; ++r) {
      os << "  ";
      for (size_t k = 0; k < b.vars.size(); ++k)
        if (b.coeffs(r, k) != 0.0) os << b.vars[k] << ":" << b.coeffs(r, k) << " ";
      os << "| " << b.offset[r] << "\n";
    }
  }
}

HermitianLmi::HermitianLmi(int dim) : dim_(dim), constant_(MatrixXcd::Zero(dim, dim)) {}

void HermitianLmi::add_constant(const MatrixXcd& m) { constant_ += m; }

void HermitianLmi::add_coeff(int var, const MatrixXcd& m) {
  auto it = coeffs_.find(var);
  if (it == coeffs_.end())
    coeffs_[var] = m;
  else
    it->second += m;
}

ConicBlock HermitianLmi::to_block(const std::string& label) const {
  ConicBlock b;
  b.cone = ConeType::Psd;
  b.psd_dim = 2 * dim_;
  b.rows = svec_dim(b.psd_dim);
  b.label = label;
  b.vars.reserve(coeffs_.size());
  b.coeffs.resize(b.rows, static_cast<int>(coeffs_.size()));
  int k = 0;
  for (const auto& [var, m] : coeffs_) {
    b.vars.push_back(var);
    b.coeffs.col(k++) = svec(lift_hermitian(m));
  }
  b.offset = svec(lift_hermitian(constant_));
  return b;
}

BlockBuilder::BlockBuilder(ConeType cone, int n_vars, const std::string& label)
    : cone_(cone), n_vars_(n_vars), label_(label) {}

void BlockBuilder::add_row(const VectorXd& dense_coeffs, double offset) {
  if (dense_coeffs.size() != n_vars_) throw std::invalid_argument("row dimension mismatch");
  rows_.push_back(dense_coeffs);
  offsets_.push_back(offset);
}

ConicBlock BlockBuilder::build() const {
  const int m = static_cast<int>(rows_.size());
  std::vector<int> vars;
  for (int v = 0; v < n_vars_; ++v) {
    for (const auto& r : rows_) {
      if (r[v] != 0.0) {
        vars.push_back(v);
        break;
      }
    }
  }
  ConicBlock b;
  b.cone = cone_;
  b.rows = m;
  b.psd_dim = psd_dim_;
  b.label = label_;
  b.vars = vars;
  b.coeffs.resize(m, static_cast<int>(vars.size()));
  b.offset.resize(m);
  for (int r = 0; r < m; ++r) {
    for (size_t k = 0; k < vars.size(); ++k) b.coeffs(r, k) = rows_[r][vars[k]];
    b.offset[r] = offsets_[r];
  }
  return b;
}

}  // namespace fdci::conic
