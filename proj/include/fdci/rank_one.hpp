// SPDX-License-Identifier: Apache-2.0
//
// SDR post-processing: principal-eigenvector extraction when the solution
// matrix is (numerically) rank one, Gaussian randomization otherwise.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>

namespace fdci::conic {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;

struct RankOneResult {
  VectorXcd w;
  bool rank_one = false;
};

// Receives a candidate direction; returns a feasible (typically rescaled)
// vector, or nullopt when the candidate cannot be repaired.
using FeasibilityCallback = std::function<std::optional<VectorXcd>(const VectorXcd&)>;

// Requires W >= -tol * I. When lambda_2/lambda_1 <= tol the principal
// eigenvector scaled by sqrt(lambda_1) is returned with rank_one = true.
// Otherwise draws n_randomizations candidates xi ~ CN(0, W), repairs each
// through the callback, and returns the minimum-power feasible one.
// Throws std::runtime_error when no candidate is feasible.
RankOneResult extract_rank_one(const MatrixXcd& W, double tol, int n_randomizations,
                               const FeasibilityCallback& feasible, std::uint64_t seed = 0);

}  // namespace fdci::conic
