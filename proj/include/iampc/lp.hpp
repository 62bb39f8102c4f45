#pragma once

#include <Eigen/Dense>
#include <string>

namespace iampc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class LPStatus { optimal, infeasible, unbounded };

enum class LPSense { minimize, maximize };

/// Result of a linear program over {x : A x <= b}.
/// `optimizer` and `objective` are meaningful only when status == optimal.
/// `duals` holds one multiplier per constraint row, y >= 0. For minimize:
/// c + A'y = 0 and the optimal objective equals -b'y; for maximize: A'y = c
/// and the optimal objective equals b'y.
struct LPSolution {
  LPStatus status = LPStatus::infeasible;
  Vector optimizer;
  double objective = 0.0;
  Vector duals;
  int iterations = 0;
};

/// Dense two-phase tableau simplex for  min/max c'x  s.t.  A x <= b,  x free.
/// Free variables are split as x = xp - xm. Dantzig pricing with a switch to
/// Bland's rule after a stall, which guarantees termination.
/// Throws std::runtime_error with iterate diagnostics on iteration overrun.
LPSolution solve_lp_dense(const Vector& c, const Matrix& A, const Vector& b,
                          LPSense sense = LPSense::minimize,
                          int max_iter = 0 /* 0 = auto */);

}  // namespace iampc
