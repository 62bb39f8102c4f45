#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "iampc/design.hpp"
#include "iampc/invariant_sets.hpp"
#include "iampc/model.hpp"
#include "iampc/qp.hpp"

namespace iampc {

/// Parameter predictions xi_{0|t} .. xi_{N|t}, one per prediction step.
struct PredictionSequence {
  std::vector<SimplexVec> entries;

  int horizon() const { return static_cast<int>(entries.size()) - 1; }
  void validate(int l) const;  // every entry in the l-simplex
};

/// Where a condensed constraint row came from.
enum class RowTag { state, input, cxu, terminal };

/// min over U of 1/2 U'HU + g'U + constant  s.t.  ineq_normals U <= offsets,
/// with U = [u_0' ... u_{N-1}']'. `constant` carries the x0-dependent cost
/// terms so the optimum equals the trajectory cost exactly.
struct CondensedQP {
  Matrix hessian;
  Vector gradient;
  double constant = 0.0;
  Matrix ineq_normals;
  Vector ineq_offsets;
  std::vector<RowTag> row_tags;
  int N = 0, n = 0, m = 0;
};

struct QPSolution {
  QPStatus status = QPStatus::max_iter;
  std::vector<Vector> u_sequence;  // u_0 .. u_{N-1}
  double objective = 0.0;
  std::vector<int> active_rows;
  int iterations = 0;
};

/// State transition stacks: x_{k|t} = Phi_k x(t) + Gamma_k U with Phi_0 = I,
/// Gamma_0 = 0, Phi_{k+1} = A(xi_{k|t}) Phi_k.
void predict_matrices(const VertexModel& model, const PredictionSequence& xi_seq,
                      std::vector<Matrix>& Phi, std::vector<Matrix>& Gamma);

/// Builds the dense QP for the finite-horizon problem: stage cost x'Qx + u'Ru,
/// terminal cost x_N' P(xi_{N|t}) x_N, rows for X on x_{1..N-1}, U on inputs,
/// C_xu on every stage pair, X_N on x_N. Rows depending only on x0 are
/// constants and are pre-checked instead of emitted; failure of that check
/// throws ("initial state outside C/X").
CondensedQP condense(const VertexModel& model, const DesignResult& design,
                     const SetSuite& suite, const PredictionSequence& xi_seq,
                     const Vector& x0);

QPSolution solve_qp(const CondensedQP& qp,
                    const std::optional<Vector>& warm_start = std::nullopt,
                    double tol = 1e-8, int max_iter = 0);

/// Optimal cost of the condensed problem; throws when infeasible.
double value_function(const VertexModel& model, const DesignResult& design,
                      const SetSuite& suite, const PredictionSequence& xi_seq,
                      const Vector& x0);

/// Debug dump of the condensed problem (matrices plus row origin tags).
void dump_qp(std::ostream& os, const CondensedQP& qp);

}  // namespace iampc
