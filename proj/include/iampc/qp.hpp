#pragma once

#include <optional>
#include <vector>

#include "iampc/polytope.hpp"

namespace iampc {

enum class QPStatus { optimal, infeasible, max_iter };

struct QPResult {
  QPStatus status = QPStatus::max_iter;
  Vector x;                      // minimizer (best iterate on max_iter)
  double objective = 0.0;        // 1/2 x'Hx + g'x at x
  std::vector<int> active_rows;  // sorted working set at termination
  int iterations = 0;
};

/// Strictly convex QP  min 1/2 x'Hx + g'x  s.t.  Ax <= b,  solved by the
/// dual active-set method of Goldfarb and Idnani. H must be symmetric
/// positive definite. Starts from the unconstrained minimum and adds the
/// most violated row (ties broken by lowest row index) until dual feasible;
/// primal infeasibility is certified when a violated row admits no primal
/// or dual step. `warm_start` is accepted for interface symmetry but the
/// dual method derives its own starting point; it never changes the optimum.
QPResult solve_qp_dense(const Matrix& H, const Vector& g, const Matrix& A,
                        const Vector& b,
                        const std::optional<Vector>& warm_start = std::nullopt,
                        double tol = 1e-8, int max_iter = 0);

}  // namespace iampc
