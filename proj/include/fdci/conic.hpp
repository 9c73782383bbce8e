// SPDX-License-Identifier: Apache-2.0
//
// Solver-agnostic standard-form cone program representation.
//
// A problem is   minimize c.x   subject to, for every block,
//                A_block x + b_block  in  cone_block
// with cones drawn from {zero, nonnegative orthant, second-order,
// rotated second-order, PSD}.
//
// Packing conventions (fixed, builders and residual checks must agree):
//  * A symmetric d x d matrix S is packed column-major over the lower
//    triangle with off-diagonal entries scaled by sqrt(2), so that
//    svec(A).svec(B) == trace(A B).
//  * A complex vector z of length n is stored as [Re(z); Im(z)].
//  * A complex Hermitian matrix H is lifted to the real symmetric
//    2n x 2n form [[Re(H), -Im(H)], [Im(H), Re(H)]]; H is PSD iff the
//    lifted matrix is PSD.
//  * A Hermitian matrix has n^2 real degrees of freedom, ordered
//    column-major over the lower triangle: for each column j the
//    diagonal entry, then (Re, Im) pairs of the entries below it.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace fdci::conic {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

enum class ConeType { Zero, NonNeg, Soc, RotatedSoc, Psd };

const char* cone_name(ConeType t);

// -------- packed symmetric storage --------

inline int svec_dim(int d) { return d * (d + 1) / 2; }

VectorXd svec(const MatrixXd& S);
MatrixXd smat(const VectorXd& v);

// -------- complex <-> real lifting --------

MatrixXd lift_hermitian(const MatrixXcd& H);
VectorXd lift_vector(const VectorXcd& z);
VectorXcd unlift_vector(const VectorXd& v);

// Coefficient rows over the lifted vector [Re(w); Im(w)] of the real linear
// forms Re(a^H w) and Im(a^H w).
VectorXd re_form(const VectorXcd& a);
VectorXd im_form(const VectorXcd& a);

// -------- Hermitian degree-of-freedom basis --------

inline int herm_dof_count(int n) { return n * n; }

// Basis matrix B_v of the v-th degree of freedom.
MatrixXcd herm_basis(int n, int dof);

MatrixXcd herm_from_dofs(int n, const VectorXd& dofs);
VectorXd herm_to_dofs(const MatrixXcd& H);

// Coefficients of the real linear form  dofs -> a^H H(dofs) a.
VectorXd herm_quad_coeffs(int n, const VectorXcd& a);

// Coefficients of  dofs -> trace(H(dofs))  (1 on diagonal dofs).
VectorXd herm_trace_coeffs(int n);

// -------- constraint blocks --------

struct ConicBlock {
  ConeType cone = ConeType::NonNeg;
  int rows = 0;
  int psd_dim = 0;  // matrix side, Psd blocks only (rows == svec_dim(psd_dim))
  std::string label;
  std::vector<int> vars;  // strictly increasing global variable indices
  MatrixXd coeffs;        // rows x vars.size()
  VectorXd offset;        // rows

  // Value of the affine expression A x + b.
  VectorXd value(const VectorXd& x) const;
};

// Signed distance-to-cone of a block value:
//   zero:    max_i |v_i|
//   nonneg:  -min_i v_i
//   soc:     ||tail|| - head
//   rsoc:    soc residual of the equivalent (u+v, u-v, 2x) block
//   psd:     -lambda_min(smat(v))
// Feasible values give residual <= 0 (== 0 boundary; zero cone uses
// max-abs so feasibility there means residual below tolerance).
double cone_residual(ConeType cone, const VectorXd& value);

struct BlockResidual {
  int index = 0;
  ConeType cone = ConeType::NonNeg;
  std::string label;
  double distance = 0.0;
};

struct VarSpan {
  int start = 0;
  int size = 0;
};

class ConicProblem {
 public:
  VarSpan add_variables(const std::string& name, int count);
  VarSpan span(const std::string& name) const;
  bool has_variable(const std::string& name) const;

  int num_vars() const { return num_vars_; }
  const VectorXd& objective() const { return objective_; }

  void add_cost(int var, double weight);
  void add_cost(const VarSpan& vars, const VectorXd& weights);

  void add_block(ConicBlock block);
  const std::vector<ConicBlock>& blocks() const { return blocks_; }

  double cost(const VectorXd& x) const { return objective_.dot(x); }

  std::vector<BlockResidual> residuals(const VectorXd& x) const;
  double worst_residual(const VectorXd& x) const;

  // Self-describing text dump (variables, blocks, cone tags) for
  // cross-implementation diffing.
  void dump(std::ostream& os) const;

  const std::map<std::string, VarSpan>& registry() const { return registry_; }

 private:
  int num_vars_ = 0;
  VectorXd objective_;
  std::vector<ConicBlock> blocks_;
  std::map<std::string, VarSpan> registry_;
};

// Affine Hermitian matrix expression  B_0 + sum_v x_v B_v, emitted as a
// real-lifted PSD block.
class HermitianLmi {
 public:
  explicit HermitianLmi(int dim);

  int dim() const { return dim_; }
  void add_constant(const MatrixXcd& m);
  void add_coeff(int var, const MatrixXcd& m);

  ConicBlock to_block(const std::string& label) const;

 private:
  int dim_;
  MatrixXcd constant_;
  std::map<int, MatrixXcd> coeffs_;
};

// Dense row helper for scalar constraints over named variable spans.
class RowBuilder {
 public:
  explicit RowBuilder(int n) : coeffs_(VectorXd::Zero(n)) {}
  RowBuilder& set(int var, double v) {
    coeffs_[var] = v;
    return *this;
  }
  RowBuilder& add(int var, double v) {
    coeffs_[var] += v;
    return *this;
  }
  RowBuilder& add(const VarSpan& s, const VectorXd& v) {
    coeffs_.segment(s.start, s.size) += v;
    return *this;
  }
  const VectorXd& coeffs() const { return coeffs_; }

 private:
  VectorXd coeffs_;
};

// Assembles a block from dense rows (compressing zero columns away).
class BlockBuilder {
 public:
  BlockBuilder(ConeType cone, int n_vars, const std::string& label = {});
  void add_row(const VectorXd& dense_coeffs, double offset);
  void set_psd_dim(int d) { psd_dim_ = d; }
  ConicBlock build() const;

 private:
  ConeType cone_;
  int n_vars_;
  int psd_dim_ = 0;
  std::string label_;
  std::vector<VectorXd> rows_;
  std::vector<double> offsets_;
};

}  // namespace fdci::conic
