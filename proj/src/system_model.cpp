// SPDX-License-Identifier: Apache-2.0

#include "fdci/system_model.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace fdci {

namespace {

constexpr double kZfConditionCap = 1e8;
constexpr double kQamGridTol = 1e-9;
const double kQamScale = 1.0 / std::sqrt(10.0);

cplx draw_cn(std::mt19937_64& rng, std::normal_distribution<double>& g, double variance) {
  const double s = std::sqrt(variance / 2.0);
  return {s * g(rng), s * g(rng)};
}

// uniform direction on the unit sphere of C^n (2n real dims)
VectorXcd draw_direction(int n, std::mt19937_64& rng, std::normal_distribution<double>& g) {
  VectorXcd v(n);
  for (int i = 0; i < n; ++i) v[i] = cplx(g(rng), g(rng));
  return v / v.norm();
}

VectorXcd draw_in_ball(int n, double eps, std::mt19937_64& rng,
                       std::normal_distribution<double>& g,
                       std::uniform_real_distribution<double>& u, bool shell) {
  if (eps == 0.0) return VectorXcd::Zero(n);
  const VectorXcd dir = draw_direction(n, rng, g);
  const double radius = shell ? eps : eps * std::pow(u(rng), 1.0 / (2.0 * n));
  return radius * dir;
}

}  // namespace

SystemConfig SystemConfig::uniform(int n, int k, int j, double gamma_dl_lin, double gamma_ul_lin,
                                   double sigma_dl_w, double sigma_ul_w, double si_var,
                                   Modulation mod) {
  SystemConfig c;
  c.n_tx = n;
  c.n_dl = k;
  c.n_ul = j;
  c.sigma_dl = VectorXd::Constant(k, sigma_dl_w);
  c.sigma_ul = sigma_ul_w;
  c.gamma_dl = VectorXd::Constant(k, gamma_dl_lin);
  c.gamma_ul = VectorXd::Constant(j, gamma_ul_lin);
  c.si_variance = si_var;
  c.modulation = mod;
  c.validate();
  return c;
}

void SystemConfig::validate() const {
  if (n_tx < 1 || n_dl < 1 || n_ul < 0) throw std::invalid_argument("counts must be >= 1");
  if (n_ul > n_tx) throw std::invalid_argument("ZF requires J <= N");
  if (sigma_dl.size() != n_dl || gamma_dl.size() != n_dl)
    throw std::invalid_argument("per-downlink vectors must have K entries");
  if (gamma_ul.size() != n_ul) throw std::invalid_argument("gamma_ul must have J entries");
  if (sigma_dl.minCoeff() <= 0 || sigma_ul <= 0)
    throw std::invalid_argument("variances must be > 0");
  if (gamma_dl.minCoeff() <= 0 || (n_ul > 0 && gamma_ul.minCoeff() <= 0))
    throw std::invalid_argument("SINR targets must be > 0");
  if (si_variance < 0) throw std::invalid_argument("si_variance must be >= 0");
  if (modulation.kind == ModulationKind::Psk && modulation.order < 2)
    throw std::invalid_argument("PSK order must be >= 2");
}

CiGeometry CiGeometry::for_config(const SystemConfig& config) {
  CiGeometry g;
  g.kind = config.modulation.kind;
  g.theta = config.modulation.kind == ModulationKind::Psk
                ? std::numbers::pi / config.modulation.order
                : 0.0;
  g.threshold = (config.gamma_dl.array() * config.sigma_dl.array()).sqrt();
  return g;
}

ErrorBounds ErrorBounds::uniform(int k, int j, double eps) {
  ErrorBounds b;
  b.eps_h = VectorXd::Constant(k, eps);
  b.eps_f = VectorXd::Constant(j, eps);
  b.eps_g = eps;
  return b;
}

void ErrorBounds::validate() const {
  if ((eps_h.size() && eps_h.minCoeff() < 0) || (eps_f.size() && eps_f.minCoeff() < 0) ||
      eps_g < 0)
    throw std::invalid_argument("error bounds must be >= 0");
}

cplx psk_point(int order, int index) {
  const double phi = 2.0 * std::numbers::pi * index / order;
  return {std::cos(phi), std::sin(phi)};
}

cplx qam16_point(int index) {
  static const double levels[4] = {-3.0, -1.0, 1.0, 3.0};
  if (index < 0 || index > 15) throw std::invalid_argument("qam16 index out of range");
  return kQamScale * cplx(levels[index / 4], levels[index % 4]);
}

int detect_psk(cplx y, int order) {
  const double sector = 2.0 * std::numbers::pi / order;
  int m = static_cast<int>(std::lround(std::arg(y) / sector));
  return ((m % order) + order) % order;
}

int detect_qam16(cplx y, double scale) {
  auto level_index = [&](double v) {
    const double t = 2.0 * kQamScale * scale;
    if (v < -t) return 0;
    if (v < 0.0) return 1;
    if (v < t) return 2;
    return 3;
  };
  return 4 * level_index(y.real()) + level_index(y.imag());
}

int classify_qam_point(cplx d) {
  auto inner = [](double v) {
    const double a = std::abs(v);
    if (std::abs(a - kQamScale) < kQamGridTol) return true;
    if (std::abs(a - 3.0 * kQamScale) < kQamGridTol) return false;
    throw std::invalid_argument("symbol not on the 16-QAM grid");
  };
  const bool re_inner = inner(d.real());
  const bool im_inner = inner(d.imag());
  if (re_inner && im_inner) return 1;
  if (re_inner) return 2;  // |Im| outer: imaginary part free to grow
  if (im_inner) return 3;  // |Re| outer: real part free to grow
  return 4;
}

SymbolFrame draw_frame(const SystemConfig& config, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  SymbolFrame f;
  f.indices.resize(config.n_dl);
  f.symbols.resize(config.n_dl);
  const int size = config.modulation.kind == ModulationKind::Psk ? config.modulation.order : 16;
  for (int i = 0; i < config.n_dl; ++i) {
    f.indices[i] = static_cast<int>(rng() % size);
    f.symbols[i] = config.modulation.kind == ModulationKind::Psk
                       ? psk_point(config.modulation.order, f.indices[i])
                       : qam16_point(f.indices[i]);
  }
  return f;
}

ChannelSet draw_channels(const SystemConfig& config, std::uint64_t seed) {
  config.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  for (int attempt = 0; attempt < 16; ++attempt) {
    ChannelSet cs;
    cs.H.resize(config.n_tx, config.n_dl);
    for (int i = 0; i < config.n_dl; ++i)
      for (int a = 0; a < config.n_tx; ++a) cs.H(a, i) = draw_cn(rng, g, 1.0);
    cs.F.resize(config.n_tx, config.n_ul);
    for (int j = 0; j < config.n_ul; ++j)
      for (int a = 0; a < config.n_tx; ++a) cs.F(a, j) = draw_cn(rng, g, 1.0);
    cs.G.resize(config.n_tx, config.n_tx);
    for (int b = 0; b < config.n_tx; ++b)
      for (int a = 0; a < config.n_tx; ++a) cs.G(a, b) = draw_cn(rng, g, config.si_variance);
    if (config.n_ul == 0) return cs;
    const MatrixXcd gram = cs.F.adjoint() * cs.F;
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(gram, Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues().minCoeff();
    const double lmax = es.eigenvalues().maxCoeff();
    if (lmin > 0 && lmax / lmin < kZfConditionCap) return cs;
  }
  throw std::runtime_error("draw_channels: persistent rank-deficient uplink matrix");
}

MatrixXcd zf_receivers(const MatrixXcd& F) {
  const MatrixXcd gram = F.adjoint() * F;
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(gram, Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues().minCoeff();
  const double lmax = es.eigenvalues().maxCoeff();
  if (!(lmin > 0) || lmax / lmin >= kZfConditionCap)
    throw std::runtime_error("zf_receivers: F^H F singular beyond tolerance");
  // pinv = (F^H F)^{-1} F^H; u_j is the conjugated j-th row of pinv
  const MatrixXcd pinv = gram.ldlt().solve(F.adjoint());
  return pinv.adjoint();
}

VectorXd dl_sinr(const MatrixXcd& H, const std::vector<VectorXcd>& W, const VectorXd& sigma_dl) {
  const int k = static_cast<int>(H.cols());
  if (static_cast<int>(W.size()) != k || sigma_dl.size() != k)
    throw std::invalid_argument("dl_sinr: dimension mismatch");
  VectorXd out(k);
  for (int i = 0; i < k; ++i) {
    double interference = sigma_dl[i];
    for (int kk = 0; kk < k; ++kk)
      if (kk != i) interference += std::norm(H.col(i).dot(W[kk]));
    out[i] = std::norm(H.col(i).dot(W[i])) / interference;
  }
  return out;
}

namespace {
VectorXd ul_sinr_impl(const MatrixXcd& F, const MatrixXcd& U, const VectorXd& si_power,
                      const VectorXd& P, double sigma_ul) {
  const int j_count = static_cast<int>(F.cols());
  VectorXd out(j_count);
  for (int j = 0; j < j_count; ++j) {
    const VectorXcd uj = U.col(j);
    double denom = si_power[j] + sigma_ul * uj.squaredNorm();
    for (int n = 0; n < j_count; ++n)
      if (n != j) denom += P[n] * std::norm(F.col(n).dot(uj));
    out[j] = P[j] * std::norm(F.col(j).dot(uj)) / denom;
  }
  return out;
}
}  // namespace

VectorXd ul_sinr(const MatrixXcd& F, const MatrixXcd& U, const MatrixXcd& G, const VectorXcd& w,
                 const VectorXd& P, double sigma_ul) {
  if (F.cols() != U.cols() || P.size() != F.cols())
    throw std::invalid_argument("ul_sinr: dimension mismatch");
  VectorXd si(F.cols());
  for (int j = 0; j < F.cols(); ++j) si[j] = std::norm(U.col(j).dot(G * w));
  return ul_sinr_impl(F, U, si, P, sigma_ul);
}

VectorXd ul_sinr_conventional(const MatrixXcd& F, const MatrixXcd& U, const MatrixXcd& G,
                              const std::vector<VectorXcd>& W, const VectorXd& P,
                              double sigma_ul) {
  VectorXd si = VectorXd::Zero(F.cols());
  for (int j = 0; j < F.cols(); ++j)
    for (const auto& wk : W) si[j] += std::norm(U.col(j).dot(G * wk));
  return ul_sinr_impl(F, U, si, P, sigma_ul);
}

double ci_margin_psk(const VectorXcd& h, const VectorXcd& w, cplx d, double gamma, double theta) {
  if (std::abs(std::abs(d) - 1.0) > 1e-9)
    throw std::invalid_argument("ci_margin_psk: PSK symbol must have unit modulus");
  const cplx y = h.dot(w) * std::conj(d);
  return (y.real() - gamma) * std::tan(theta) - std::abs(y.imag());
}

VectorXd ci_margins_psk(const ChannelSet& channels, const VectorXcd& w, const SymbolFrame& frame,
                        const CiGeometry& geometry) {
  if (geometry.kind != ModulationKind::Psk)
    throw std::invalid_argument("ci_margins_psk: QAM geometry (use the QAM margin path)");
  const int k = static_cast<int>(channels.H.cols());
  VectorXd m(k);
  for (int i = 0; i < k; ++i)
    m[i] = ci_margin_psk(channels.H.col(i), w, frame.symbols[i], geometry.threshold[i],
                         geometry.theta);
  return m;
}

QamMargins qam_margins(const VectorXcd& h, const VectorXcd& w, cplx d, double scale) {
  const cplx y = h.dot(w);
  const cplx target = scale * d;
  const int group = classify_qam_point(d);
  auto signed_margin = [](double y_part, double t_part) {
    // push away from the decision boundary: >= t when the component is
    // positive, <= t when negative
    return t_part >= 0 ? y_part - t_part : t_part - y_part;
  };
  QamMargins m;
  m.ineq_margin = std::numeric_limits<double>::infinity();
  switch (group) {
    case 1:
      m.eq_residual =
          std::max(std::abs(y.real() - target.real()), std::abs(y.imag() - target.imag()));
      break;
    case 2:
      m.eq_residual = std::abs(y.real() - target.real());
      m.ineq_margin = signed_margin(y.imag(), target.imag());
      break;
    case 3:
      m.eq_residual = std::abs(y.imag() - target.imag());
      m.ineq_margin = signed_margin(y.real(), target.real());
      break;
    default:
      m.eq_residual = 0.0;
      m.ineq_margin = std::min(signed_margin(y.real(), target.real()),
                               signed_margin(y.imag(), target.imag()));
  }
  return m;
}

ChannelSet perturb_channels(const ChannelSet& nominal, const ErrorBounds& bounds,
                            std::uint64_t seed, bool shell) {
  bounds.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int n = static_cast<int>(nominal.H.rows());
  ChannelSet out = nominal;
  for (int i = 0; i < nominal.H.cols(); ++i)
    out.H.col(i) += draw_in_ball(n, bounds.eps_h[i], rng, g, u, shell);
  for (int j = 0; j < nominal.F.cols(); ++j)
    out.F.col(j) += draw_in_ball(n, bounds.eps_f[j], rng, g, u, shell);
  const VectorXcd dg = draw_in_ball(n * n, bounds.eps_g, rng, g, u, shell);
  out.G += Eigen::Map<const MatrixXcd>(dg.data(), n, n);
  return out;
}

}  // namespace fdci
