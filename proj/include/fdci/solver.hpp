// SPDX-License-Identifier: Apache-2.0
//
// Primal-dual interior-point solver for the standard-form cone programs
// assembled by ConicProblem. Nesterov-Todd scaling over the nonnegative,
// second-order and PSD cones, Mehrotra predictor-corrector steps, and the
// homogeneous self-dual embedding so infeasibility is certificate-backed.

#pragma once

#include "fdci/conic.hpp"

namespace fdci::conic {

enum class SolveStatus { Optimal, Infeasible, Unbounded, NumericalFailure };

const char* status_name(SolveStatus s);

struct SolverSettings {
  double feastol = 1e-7;
  double reltol = 1e-7;
  double abstol = 1e-9;
  int max_iters = 100;
  int refine_steps = 1;
  bool equilibrate = true;
  bool verbose = false;
};

struct Solution {
  SolveStatus status = SolveStatus::NumericalFailure;
  VectorXd x;          // primal point, present iff status == Optimal
  double objective = 0.0;  // finite iff optimal
  double solve_time = 0.0;
  int iterations = 0;
  double gap = 0.0;   // relative duality gap at exit
  double pres = 0.0;  // worst scaled primal residual
  double dres = 0.0;  // worst scaled dual residual
};

Solution solve(const ConicProblem& problem, const SolverSettings& settings = {});

}  // namespace fdci::conic
