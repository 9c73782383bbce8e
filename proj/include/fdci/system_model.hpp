// SPDX-License-Identifier: Apache-2.0
//
// Ground-truth physics of the full-duplex multiuser link: channel and
// constellation generation, zero-forcing receivers, SINR and constructive
// interference margin evaluators, and bounded CSI perturbations. Every
// formulation and every oracle in the project evaluates against this module.
//
// Conventions:
//  * Downlink channels are the columns h_i of H (N x K), uplink channels the
//    columns f_j of F (N x J), G (N x N) is the residual self-interference
//    channel at the base station.
//  * CI schemes work with the aggregate transmit vector w for the current
//    symbol frame: the noiseless point seen by user i is y_i = h_i^H w, and
//    the frame rotation is folded in by comparing y_i against its own symbol
//    (multiplying by conj(d_i) for PSK).

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <vector>

namespace fdci {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;
using cplx = std::complex<double>;

enum class ModulationKind { Psk, Qam16 };

struct Modulation {
  ModulationKind kind = ModulationKind::Psk;
  int order = 4;  // M for PSK, 16 for QAM

  static Modulation psk(int m) { return {ModulationKind::Psk, m}; }
  static Modulation qam16() { return {ModulationKind::Qam16, 16}; }
};

struct SystemConfig {
  int n_tx = 0;  // antennas N at the BS
  int n_dl = 0;  // downlink users K
  int n_ul = 0;  // uplink users J (J <= N for the ZF pseudo-inverse)
  VectorXd sigma_dl;  // per-downlink-user noise variance, linear watts
  double sigma_ul = 1.0;  // BS noise variance sigma_N^2
  VectorXd gamma_dl;  // per-downlink SINR targets, linear
  VectorXd gamma_ul;  // per-uplink SINR targets, linear
  double si_variance = 1.0;  // variance of residual SI channel entries
  Modulation modulation = Modulation::psk(4);

  static SystemConfig uniform(int n, int k, int j, double gamma_dl_lin, double gamma_ul_lin,
                              double sigma_dl_w = 1.0, double sigma_ul_w = 1.0,
                              double si_var = 1.0, Modulation mod = Modulation::psk(4));
  void validate() const;  // throws std::invalid_argument on violations
};

struct ChannelSet {
  MatrixXcd H;  // N x K downlink
  MatrixXcd F;  // N x J uplink
  MatrixXcd G;  // N x N residual self-interference
};

struct CiGeometry {
  ModulationKind kind = ModulationKind::Psk;
  double theta = 0.0;   // PSK half-angle pi/M
  VectorXd threshold;   // per-user amplitude gamma_i = sqrt(Gamma_i sigma_i^2)

  static CiGeometry for_config(const SystemConfig& config);
};

struct SymbolFrame {
  std::vector<int> indices;  // constellation point index per downlink user
  VectorXcd symbols;         // d_i
};

struct ErrorBounds {
  VectorXd eps_h;  // per-downlink Euclidean bound
  VectorXd eps_f;  // per-uplink Euclidean bound
  double eps_g = 0.0;  // Frobenius bound on Delta G

  static ErrorBounds uniform(int k, int j, double eps);
  void validate() const;
};

// ---------------- constellations ----------------

cplx psk_point(int order, int index);
cplx qam16_point(int index);  // {+-1,+-3} grid scaled to unit average power

// detection without channel equalization
int detect_psk(cplx y, int order);
// QAM decision boundaries scaled by `scale` = sqrt(Gamma_i) * sigma_i
int detect_qam16(cplx y, double scale);

// 16-QAM detection-region group: 1 interior, 2 real-bounded edge,
// 3 imag-bounded edge, 4 corner. Throws if d is off-grid (tol 1e-9).
int classify_qam_point(cplx d);

SymbolFrame draw_frame(const SystemConfig& config, std::uint64_t seed);

// ---------------- channels ----------------

// iid complex Gaussian entries, unit variance for H and F, si_variance for
// G; deterministic given seed; redraws internally on a rank-deficient F.
ChannelSet draw_channels(const SystemConfig& config, std::uint64_t seed);

// Zero-forcing receive beamformers, u_j = ((F^H F)^{-1} F^H)_j-th-row ^H,
// so that u_j^H f_n = delta_{jn}. Throws when cond(F^H F) exceeds 1e8.
MatrixXcd zf_receivers(const MatrixXcd& F);

// ---------------- evaluators ----------------

// Conventional per-user beamformers.
VectorXd dl_sinr(const MatrixXcd& H, const std::vector<VectorXcd>& W, const VectorXd& sigma_dl);

// Uplink SINR with the aggregate downlink precoder w (CI schemes).
VectorXd ul_sinr(const MatrixXcd& F, const MatrixXcd& U, const MatrixXcd& G, const VectorXcd& w,
                 const VectorXd& P, double sigma_ul);

// Uplink SINR with per-user downlink beamformers (conventional schemes);
// the SI term is sum_k |u_j^H G w_k|^2.
VectorXd ul_sinr_conventional(const MatrixXcd& F, const MatrixXcd& U, const MatrixXcd& G,
                              const std::vector<VectorXcd>& W, const VectorXd& P, double sigma_ul);

// PSK constructive-interference margin for one user: with
// y~ = (h^H w) conj(d), returns (Re(y~) - gamma) tan(theta) - |Im(y~)|.
// Nonnegative iff the CI constraint holds. Throws for QAM geometry.
double ci_margin_psk(const VectorXcd& h, const VectorXcd& w, cplx d, double gamma, double theta);
VectorXd ci_margins_psk(const ChannelSet& channels, const VectorXcd& w, const SymbolFrame& frame,
                        const CiGeometry& geometry);

// QAM constraint evaluation for one user: equality residual (group-pinned
// components) and signed inequality margin (relaxed components; +inf when
// none). Constraint satisfied iff |eq_residual| small and ineq_margin >= 0.
struct QamMargins {
  double eq_residual = 0.0;
  double ineq_margin = 0.0;
};
QamMargins qam_margins(const VectorXcd& h, const VectorXcd& w, cplx d, double scale);

// ---------------- bounded perturbations ----------------

// nominal + Delta with ||Delta h_i|| <= eps_h[i], ||Delta f_j|| <= eps_f[j],
// ||Delta G||_F <= eps_g. Uniform in the closed ball, or on the shell
// (||Delta|| == eps) when shell is set. Deterministic given seed.
ChannelSet perturb_channels(const ChannelSet& nominal, const ErrorBounds& bounds,
                            std::uint64_t seed, bool shell = false);

}  // namespace fdci
