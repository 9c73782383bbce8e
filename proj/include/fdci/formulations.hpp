// SPDX-License-Identifier: Apache-2.0
//
// The nine perfect-CSI power-minimization problems.
//
//  p1/p2/p3  conventional SINR-constrained beamforming, solved as a
//            semidefinite relaxation over W_i = w_i w_i^H (rank dropped)
//  p4/p5/p6  symbol-level constructive-interference beamforming for PSK,
//            over the aggregate frame precoder w
//  p7/p8/p9  constructive-interference beamforming for 16-QAM with the
//            per-group equality/inequality constraint patterns
//
// The third member of each family is the weighted-Tchebycheff scalarization
// of the downlink (R1) and uplink (R2) transmit-power objectives: minimize t
// subject to lambda_a (R_a - R_a*) <= t.

#pragma once

#include "fdci/conic.hpp"
#include "fdci/solver.hpp"
#include "fdci/system_model.hpp"

#include <optional>
#include <string>

namespace fdci {

enum class Scheme { P1, P2, P3, P4, P5, P6, P7, P8, P9 };

const char* scheme_name(Scheme s);            // "p1".."p9"
Scheme scheme_from_name(const std::string&);  // throws on unknown tag
bool scheme_is_conventional(Scheme s);
bool scheme_is_moop(Scheme s);  // p3, p6, p9

struct TchebycheffParams {
  Eigen::Vector2d lambda;  // weights on (downlink, uplink), simplex point
  Eigen::Vector2d r_star;  // anchor optima (watts)

  void validate() const;
};

// Channels plus everything derived from them that builders need.
struct LinkContext {
  SystemConfig config;
  ChannelSet channels;
  MatrixXcd U;  // ZF receivers, N x J
  CiGeometry geometry;

  static LinkContext make(const SystemConfig& config, const ChannelSet& channels);
};

struct BuildOptions {
  // Uplink rows assume u_j^H f_n = delta_{jn} (exact under ZF). When false
  // the general cross-term coefficients are generated from F and U.
  bool assume_zf_cross_terms = true;
};

struct FormulationResult {
  Scheme scheme = Scheme::P1;
  conic::SolveStatus status = conic::SolveStatus::NumericalFailure;

  // CI schemes: aggregate transmit vector for the frame
  VectorXcd w_aggregate;
  // conventional schemes: SDR matrices plus extracted beamformers
  std::vector<MatrixXcd> W;
  std::vector<VectorXcd> w_users;
  bool rank_one = false;

  VectorXd P;              // uplink powers (minimal feasible, watts)
  double dl_power = 0.0;   // ||w||^2 (CI) or sum tr(W_i) (conventional)
  double ul_power = 0.0;   // sum of P
  double extracted_dl_power = 0.0;  // conventional only
  double objective = 0.0;  // scheme objective value
  VectorXd margins;        // per-user DL CI margins / SINR slacks
  VectorXd ul_sinr_slack;  // per-user UL SINR minus target
  double solve_time = 0.0;
};

// ---------------- builders ----------------

conic::ConicProblem build_p1(const LinkContext& ctx, const BuildOptions& opt = {});
conic::ConicProblem build_p2(const LinkContext& ctx, const BuildOptions& opt = {});
conic::ConicProblem build_p3(const LinkContext& ctx, const TchebycheffParams& tcheby,
                             const BuildOptions& opt = {});

conic::ConicProblem build_p4(const LinkContext& ctx, const SymbolFrame& frame,
                             const BuildOptions& opt = {});
conic::ConicProblem build_p5(const LinkContext& ctx, const SymbolFrame& frame,
                             const BuildOptions& opt = {});
conic::ConicProblem build_p6(const LinkContext& ctx, const SymbolFrame& frame,
                             const TchebycheffParams& tcheby, const BuildOptions& opt = {});

conic::ConicProblem build_p7(const LinkContext& ctx, const SymbolFrame& frame,
                             const BuildOptions& opt = {});
conic::ConicProblem build_p8(const LinkContext& ctx, const SymbolFrame& frame,
                             const BuildOptions& opt = {});
conic::ConicProblem build_p9(const LinkContext& ctx, const SymbolFrame& frame,
                             const TchebycheffParams& tcheby, const BuildOptions& opt = {});

// Minimal feasible uplink power given the aggregate precoder:
// P_j = Gamma_j (|u_j^H G w|^2 + sigma_N^2 ||u_j||^2).
VectorXd closed_form_ul_power(const VectorXcd& w, const MatrixXcd& G, const MatrixXcd& U,
                              const SystemConfig& config);
// Conventional variant with the per-user SI sum.
VectorXd closed_form_ul_power_conventional(const std::vector<VectorXcd>& w_users,
                                           const MatrixXcd& G, const MatrixXcd& U,
                                           const SystemConfig& config);

// ---------------- driver ----------------

// Builds, solves, extracts (conventional) and re-evaluates all reported
// margins through the system-model evaluators. MOOP schemes require tcheby.
FormulationResult solve_scheme(Scheme scheme, const LinkContext& ctx,
                               const SymbolFrame* frame = nullptr,
                               const TchebycheffParams* tcheby = nullptr,
                               const conic::SolverSettings& settings = {},
                               const BuildOptions& opt = {});

// Single-objective anchors for the MOOP of the given family, solved on the
// same realization. Empty when either anchor fails to solve.
std::optional<TchebycheffParams> compute_anchors(Scheme moop, const LinkContext& ctx,
                                                 const SymbolFrame* frame,
                                                 const Eigen::Vector2d& lambda,
                                                 const conic::SolverSettings& settings = {},
                                                 const BuildOptions& opt = {});

}  // namespace fdci
