// SPDX-License-Identifier: Apache-2.0

#include "fdci/system_model.hpp"

#include <doctest.h>

#include <random>

using namespace fdci;

namespace {
SystemConfig small_config() { return SystemConfig::uniform(4, 2, 2, 10.0, 1.0); }
}  // namespace

TEST_CASE("draw_channels is deterministic and respects si_variance") {
  const auto cfg = small_config();
  const auto a = draw_channels(cfg, 7);
  const auto b = draw_channels(cfg, 7);
  CHECK(a.H == b.H);
  CHECK(a.F == b.F);
  CHECK(a.G == b.G);
  CHECK(draw_channels(cfg, 8).H != a.H);

  auto zero_si = cfg;
  zero_si.si_variance = 0.0;
  CHECK(draw_channels(zero_si, 7).G.norm() == 0.0);
}

TEST_CASE("channel entries have the iid complex Gaussian moments") {
  const auto cfg = small_config();
  double sum = 0.0, sumsq = 0.0;
  int count = 0;
  for (int t = 0; t < 10000; ++t) {
    const auto cs = draw_channels(cfg, 1000 + t);
    for (int i = 0; i < cs.H.cols(); ++i)
      for (int a = 0; a < cs.H.rows(); ++a) {
        const double re = cs.H(a, i).real();
        sum += re;
        sumsq += re * re;
        ++count;
      }
  }
  const double mean = sum / count;
  const double var = sumsq / count - mean * mean;
  CHECK(std::abs(mean) < 0.02);
  CHECK(var == doctest::Approx(0.5).epsilon(0.04));
}

TEST_CASE("zero-forcing receivers") {
  SUBCASE("identity channel") {
    const MatrixXcd F = MatrixXcd::Identity(2, 2);
    CHECK(zf_receivers(F).isApprox(MatrixXcd::Identity(2, 2), 1e-12));
  }
  SUBCASE("scaled identity") {
    const MatrixXcd F = 2.0 * MatrixXcd::Identity(2, 2);
    const MatrixXcd U = zf_receivers(F);
    CHECK(U.isApprox(0.5 * MatrixXcd::Identity(2, 2), 1e-12));
    CHECK(std::abs(U.col(0).dot(F.col(0)) - cplx(1, 0)) < 1e-12);
  }
  SUBCASE("random channels satisfy the ZF identity") {
    for (int t = 0; t < 20; ++t) {
      const auto cs = draw_channels(small_config(), 50 + t);
      const MatrixXcd U = zf_receivers(cs.F);
      for (int j = 0; j < 2; ++j)
        for (int n = 0; n < 2; ++n) {
          const cplx v = U.col(j).dot(cs.F.col(n));
          const cplx want = (j == n) ? cplx(1, 0) : cplx(0, 0);
          CHECK(std::abs(v - want) <= 1e-10);
        }
    }
  }
  SUBCASE("rank-deficient F rejected") {
    MatrixXcd F(2, 2);
    F << 1, 1, 1, 1;
    CHECK_THROWS(zf_receivers(F));
  }
}

TEST_CASE("downlink SINR evaluator") {
  SUBCASE("no interference") {
    MatrixXcd H(1, 1);
    H << 1.0;
    std::vector<VectorXcd> W{VectorXcd::Constant(1, cplx(2, 0))};
    VectorXd sigma = VectorXd::Constant(1, 1.0);
    CHECK(dl_sinr(H, W, sigma)[0] == doctest::Approx(4.0));
  }
  SUBCASE("direct arithmetic with interference") {
    MatrixXcd H(2, 2);
    H << 1, 0, 0, 1;
    VectorXcd w1(2), w2(2);
    w1 << 2, 0;
    w2 << 1, 1;
    std::vector<VectorXcd> W{w1, w2};
    VectorXd sigma = VectorXd::Constant(2, 1.0);
    CHECK(dl_sinr(H, W, sigma)[0] == doctest::Approx(2.0));  // 4 / (1 + 1)
  }
  SUBCASE("scale law: channels x c, noise x c^2 unchanged") {
    std::mt19937_64 rng(3);
    const auto cs = draw_channels(small_config(), 9);
    std::vector<VectorXcd> W;
    std::normal_distribution<double> g;
    for (int i = 0; i < 2; ++i) {
      VectorXcd w(4);
      for (int a = 0; a < 4; ++a) w[a] = cplx(g(rng), g(rng));
      W.push_back(w);
    }
    VectorXd sigma = VectorXd::Constant(2, 0.7);
    const double c = 10.0;
    const VectorXd base = dl_sinr(cs.H, W, sigma);
    const VectorXd scaled = dl_sinr(c * cs.H, W, c * c * sigma);
    CHECK(base.isApprox(scaled, 1e-12));
  }
}

TEST_CASE("uplink SINR evaluator") {
  SUBCASE("ZF kills the cross term exactly") {
    const auto cs = draw_channels(small_config(), 21);
    const MatrixXcd U = zf_receivers(cs.F);
    VectorXd P(2);
    P << 2.0, 3.0;
    // isolate the cross term with w = 0 and huge P_n
    for (int j = 0; j < 2; ++j) {
      const VectorXcd uj = U.col(j);
      for (int n = 0; n < 2; ++n)
        if (n != j) CHECK(std::norm(cs.F.col(n).dot(uj)) <= 1e-20);
    }
  }
  SUBCASE("direct arithmetic") {
    MatrixXcd F(2, 1), U(2, 1), G = MatrixXcd::Identity(2, 2);
    F << 1, 0;
    U << 1, 0;
    VectorXcd w(2);
    w << cplx(1 / std::sqrt(2.0), 0), cplx(1 / std::sqrt(2.0), 0);
    VectorXd P = VectorXd::Constant(1, 3.0);
    const VectorXd s = ul_sinr(F, U, G, w, P, 1.0);
    CHECK(s[0] == doctest::Approx(2.0));  // 3 / (0.5 + 1)
  }
  SUBCASE("no self-interference: P = Gamma sigma ||u||^2 gives exactly Gamma") {
    const auto cs = draw_channels(small_config(), 22);
    const MatrixXcd U = zf_receivers(cs.F);
    const double gamma = 2.5, sigma_ul = 1.3;
    VectorXd P(2);
    for (int j = 0; j < 2; ++j) P[j] = gamma * sigma_ul * U.col(j).squaredNorm() /
                                       std::norm(cs.F.col(j).dot(U.col(j)));
    const VectorXd s = ul_sinr(cs.F, U, cs.G, VectorXcd::Zero(4), P, sigma_ul);
    CHECK(s[0] == doctest::Approx(gamma).epsilon(1e-12));
    CHECK(s[1] == doctest::Approx(gamma).epsilon(1e-12));
  }
}

TEST_CASE("PSK constructive interference margin") {
  VectorXcd h(1), w(1);
  h << 1.0;
  const double theta = std::atan(1.0);  // pi/4, QPSK
  const double gamma = 2.0;             // sqrt(4 * 1)
  SUBCASE("frozen examples") {
    w << 3.0;
    CHECK(ci_margin_psk(h, w, {1, 0}, gamma, theta) == doctest::Approx(1.0));
    w << cplx(2.0, 0.5);
    CHECK(ci_margin_psk(h, w, {1, 0}, gamma, theta) == doctest::Approx(-0.5));
    w << 2.0;
    CHECK(ci_margin_psk(h, w, {1, 0}, gamma, theta) == doctest::Approx(0.0));
  }
  SUBCASE("rotation folds the symbol onto the real axis") {
    const cplx d = psk_point(4, 1);  // j
    w << cplx(0.0, 3.0);             // y = 3j, rotated onto +3
    CHECK(ci_margin_psk(h, w, d, gamma, theta) == doctest::Approx(1.0));
  }
  SUBCASE("margin >= 0 iff the two linear inequalities hold") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g;
    for (int t = 0; t < 500; ++t) {
      VectorXcd hh(3), ww(3);
      for (int i = 0; i < 3; ++i) {
        hh[i] = cplx(g(rng), g(rng));
        ww[i] = cplx(g(rng), g(rng));
      }
      const cplx d = psk_point(8, static_cast<int>(rng() % 8));
      const double th = std::numbers::pi / 8;
      const cplx y = hh.dot(ww) * std::conj(d);
      const bool two_rows = (y.imag() <= (y.real() - gamma) * std::tan(th)) &&
                            (-y.imag() <= (y.real() - gamma) * std::tan(th));
      CHECK((ci_margin_psk(hh, ww, d, gamma, th) >= 0) == two_rows);
    }
  }
  SUBCASE("QAM symbol rejected") {
    w << 3.0;
    CHECK_THROWS(ci_margin_psk(h, w, qam16_point(0), gamma, theta));
  }
}

TEST_CASE("16-QAM classification") {
  const double s = 1.0 / std::sqrt(10.0);
  CHECK(classify_qam_point(cplx(1, 1) * s) == 1);
  CHECK(classify_qam_point(cplx(3, 3) * s) == 4);
  CHECK(classify_qam_point(cplx(1, -3) * s) == 2);
  CHECK(classify_qam_point(cplx(-3, 1) * s) == 3);
  CHECK_THROWS(classify_qam_point(cplx(2, 1) * s));

  SUBCASE("partition: exactly four points per group") {
    int counts[5] = {0, 0, 0, 0, 0};
    for (int i = 0; i < 16; ++i) ++counts[classify_qam_point(qam16_point(i))];
    for (int gidx = 1; gidx <= 4; ++gidx) CHECK(counts[gidx] == 4);
  }
  SUBCASE("90-degree rotation permutes groups (1->1, 4->4, 2<->3)") {
    for (int i = 0; i < 16; ++i) {
      const cplx d = qam16_point(i);
      const int before = classify_qam_point(d);
      const int after = classify_qam_point(d * cplx(0, 1));
      const int expected = (before == 2) ? 3 : (before == 3) ? 2 : before;
      CHECK(after == expected);
    }
  }
}

TEST_CASE("QAM margins match the group constraint patterns") {
  VectorXcd h(1), w(1);
  h << 1.0;
  const double scale = 2.0;
  // group 1 point received exactly: zero residual
  w << scale * qam16_point(5);  // (-1,+1)/sqrt10 -> group 1
  CHECK(classify_qam_point(qam16_point(5)) == 1);
  auto m = qam_margins(h, w, qam16_point(5), scale);
  CHECK(m.eq_residual == doctest::Approx(0.0));
  // group 4 corner pushed outward stays feasible
  const cplx corner = qam16_point(15);  // (3,3)
  w << scale * (corner + cplx(0.3, 0.4));
  m = qam_margins(h, w, corner, scale);
  CHECK(m.eq_residual == 0.0);
  CHECK(m.ineq_margin > 0.0);
  // pushed inward violates
  w << scale * (corner - cplx(0.3, 0.0));
  m = qam_margins(h, w, corner, scale);
  CHECK(m.ineq_margin < 0.0);
  // group 2: imaginary may extend away from the axis only
  const cplx edge = qam16_point(4 + 0);  // (-1,-3) -> re inner, im outer: group 2
  CHECK(classify_qam_point(edge) == 2);
  w << scale * (edge + cplx(0.0, -0.5));  // deeper below the axis
  m = qam_margins(h, w, edge, scale);
  CHECK(m.eq_residual == doctest::Approx(0.0));
  CHECK(m.ineq_margin > 0.0);
  w << scale * (edge + cplx(0.0, 0.5));  // toward the boundary
  CHECK(qam_margins(h, w, edge, scale).ineq_margin < 0.0);
}

TEST_CASE("bounded perturbations") {
  const auto cfg = small_config();
  const auto nominal = draw_channels(cfg, 31);
  SUBCASE("zero ball returns the nominal") {
    const auto p = perturb_channels(nominal, ErrorBounds::uniform(2, 2, 0.0), 5);
    CHECK(p.H == nominal.H);
    CHECK(p.F == nominal.F);
    CHECK(p.G == nominal.G);
  }
  SUBCASE("containment and coverage at eps = 0.1") {
    const auto bounds = ErrorBounds::uniform(2, 2, 0.1);
    double max_dh = 0.0;
    for (int t = 0; t < 1000; ++t) {
      const auto p = perturb_channels(nominal, bounds, 100 + t);
      for (int i = 0; i < 2; ++i) {
        const double dh = (p.H.col(i) - nominal.H.col(i)).norm();
        CHECK(dh <= 0.1 + 1e-12);
        max_dh = std::max(max_dh, dh);
      }
      for (int j = 0; j < 2; ++j) CHECK((p.F.col(j) - nominal.F.col(j)).norm() <= 0.1 + 1e-12);
      CHECK((p.G - nominal.G).norm() <= 0.1 + 1e-12);
    }
    CHECK(max_dh > 0.09);
  }
  SUBCASE("shell sampling lands on the boundary exactly") {
    const auto p = perturb_channels(nominal, ErrorBounds::uniform(2, 2, 0.05), 77, true);
    for (int i = 0; i < 2; ++i)
      CHECK((p.H.col(i) - nominal.H.col(i)).norm() == doctest::Approx(0.05).epsilon(1e-12));
    CHECK((p.G - nominal.G).norm() == doctest::Approx(0.05).epsilon(1e-12));
  }
  SUBCASE("deterministic given seed") {
    const auto bounds = ErrorBounds::uniform(2, 2, 0.1);
    const auto a = perturb_channels(nominal, bounds, 9);
    const auto b = perturb_channels(nominal, bounds, 9);
    CHECK(a.H == b.H);
    CHECK(a.G == b.G);
  }
}

TEST_CASE("detection without equalization") {
  for (int m = 0; m < 8; ++m) {
    const cplx d = psk_point(8, m);
    CHECK(detect_psk(3.0 * d, 8) == m);
  }
  const double scale = 1.7;
  for (int i = 0; i < 16; ++i) {
    const cplx y = scale * qam16_point(i);
    CHECK(detect_qam16(y, scale) == i);
  }
  // corner point pushed outward still detects correctly
  CHECK(detect_qam16(scale * (qam16_point(15) + cplx(1.0, 2.0)), scale) == 15);
}

TEST_CASE("config invariants enforced") {
  CHECK_THROWS(SystemConfig::uniform(2, 1, 3, 1.0, 1.0));   // J > N
  CHECK_THROWS(SystemConfig::uniform(2, 1, 1, -1.0, 1.0));  // bad target
  CHECK_THROWS(SystemConfig::uniform(2, 1, 1, 1.0, 1.0, 0.0));  // bad variance
}
