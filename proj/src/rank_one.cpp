// SPDX-License-Identifier: Apache-2.0

#include "fdci/rank_one.hpp"

#include <Eigen/Eigenvalues>

#include <random>
#include <stdexcept>

namespace fdci::conic {

RankOneResult extract_rank_one(const MatrixXcd& W, double tol, int n_randomizations,
                               const FeasibilityCallback& feasible, std::uint64_t seed) {
  const int n = static_cast<int>(W.rows());
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(W);
  const auto& evals = es.eigenvalues();  // ascending
  const double lmax = evals[n - 1];
  const double scale = std::max(1.0, std::abs(lmax));
  if (evals[0] < -tol * scale)
    throw std::invalid_argument("extract_rank_one: matrix is not PSD within tolerance");

  if (lmax <= tol) return {VectorXcd::Zero(n), true};

  const double second = n > 1 ? std::max(0.0, evals[n - 2]) : 0.0;
  if (second / lmax <= tol) {
    VectorXcd w = std::sqrt(lmax) * es.eigenvectors().col(n - 1);
    return {w, true};
  }

  // Gaussian randomization: xi = V sqrt(Lambda) g with g ~ CN(0, I)
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  const MatrixXcd factor =
      es.eigenvectors() * evals.cwiseMax(0.0).cwiseSqrt().asDiagonal();
  std::optional<VectorXcd> best;
  double best_power = 0.0;
  for (int t = 0; t < n_randomizations; ++t) {
    VectorXcd xi(n);
    for (int i = 0; i < n; ++i)
      xi[i] = std::complex<double>(g(rng), g(rng)) / std::sqrt(2.0);
    const VectorXcd cand = factor * xi;
    if (cand.norm() == 0.0) continue;
    const auto repaired = feasible ? feasible(cand) : std::make_optional(cand);
    if (!repaired) continue;
    const double power = repaired->squaredNorm();
    if (!best || power < best_power) {
      best = repaired;
      best_power = power;
    }
  }
  if (!best) throw std::runtime_error("extract_rank_one: no randomized candidate is feasible");
  return {*best, false};
}

}  // namespace fdci::conic
