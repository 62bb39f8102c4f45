#pragma once

#include <optional>

#include "iampc/estimator.hpp"
#include "iampc/mpc.hpp"

namespace iampc {

/// Per-step diagnostics logged by the simulator.
struct StepDiag {
  double value = 0.0;           // optimal cost of the solved problem
  std::vector<int> active_rows;
  int iterations = 0;
  bool x_outside_X = false;     // measured state violated X beyond tol
  double x_violation = 0.0;     // worst X-row residual at the measured state
};

/// Online controller state: delayed parameter-prediction buffer plus the
/// immutable design artifacts it was built from.
struct ControllerState {
  VertexModel model;
  DesignResult design;
  SetSuite suite;
  PredictionSequence buffer;  // xi_{0|t} .. xi_{N|t}
  std::optional<QPSolution> last_solution;
  long step_count = 0;
};

/// Raised when the online QP fails even though the theory certifies
/// feasibility; indicates broken artifacts or tolerance issues, never a
/// condition to be softened.
struct InfeasibleOnline : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Buffer starts as N+1 copies of the uniform simplex point, standing in for
/// the estimates at negative times. Throws on artifact/model hash mismatch or
/// suite.N < 1.
ControllerState new_controller(const DesignResult& design, const SetSuite& suite,
                               const VertexModel& model);

/// One closed-loop step: shift the buffer (xi_{k|t+1} = xi_{k+1|t}, append
/// xi_new at the tail), condense and solve the QP at x, return the first
/// input. The warm start is the feasibility candidate: previous solution
/// shifted one stage with the terminal extension u_{N-1} = kappa(xi_{N-1})
/// x_{N-1}. Throws InfeasibleOnline when the QP has no solution.
Vector control_step(ControllerState& state, const Vector& x,
                    const SimplexVec& xi_new, StepDiag* diag = nullptr);

/// Optimal cost at x under the current buffer; throws when infeasible.
double value_of(const ControllerState& state, const Vector& x);

void save_controller(std::ostream& os, const ControllerState& s);
ControllerState load_controller(std::istream& is);

}  // namespace iampc
