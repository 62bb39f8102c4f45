#pragma once

#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "iampc/model.hpp"
#include "iampc/sdp.hpp"

namespace iampc {

/// Raised when the design feasibility assumption fails: no parameter-dependent
/// quadratic certificate exists for the given vertices and weights.
struct AssumptionViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Vertex terminal-cost matrices, gains and their certificates.
/// P_i = S_i^-1, K_i = E_i G_i^-1.
struct DesignResult {
  std::vector<Matrix> P, K, S, G, E;
  Matrix Q, R;
  std::uint64_t model_hash = 0;

  int n_vertices() const { return static_cast<int>(P.size()); }
};

/// The coupled block-LMI feasibility problem over {G_i, S_i, E_i} with slack
/// t appended as the last variable: every ordered vertex pair (i, j)
/// contributes one block required >= (eps - t) * I. Feasible iff t <= 0 at
/// the optimum.
struct ConicProblem {
  SdpProblem sdp;
  int n = 0, m = 0, l = 0;
  double eps = 0.0;
  int t_index = 0;  // slack variable position

  /// Unpack SDP variables into per-vertex matrices.
  void unpack(const Vector& z, std::vector<Matrix>& G, std::vector<Matrix>& S,
              std::vector<Matrix>& E) const;
  /// Strictly feasible start (G = S = I, E = 0, t large enough).
  Vector feasible_start() const;
};

double default_eps_margin(const VertexModel& model);

ConicProblem build_design_lmi(const VertexModel& model, const Matrix& Q,
                              const Matrix& R, double eps_margin);

/// Solves the design LMI and recovers P_i, K_i. Throws AssumptionViolation
/// when the LMI is infeasible, std::runtime_error on numerical failure.
DesignResult solve_design(const VertexModel& model, const Matrix& Q,
                          const Matrix& R, double eps_margin = -1.0);

/// Control gain at xi: sum_i [xi]_i K_i.
Matrix kappa(const DesignResult& design, const SimplexVec& xi);

/// Terminal cost matrix at xi: sum_i [xi]_i P_i (symmetric positive definite).
Matrix terminal_P(const DesignResult& design, const SimplexVec& xi);

struct DecreaseReport {
  bool pass = true;
  double worst_residual = 0.0;  // max over samples of LHS - RHS of the decrease bound
  int n_samples = 0;
};

/// Samples (x, xi_t, xi_t1) and checks the certified decrease
///   V(x+, xi_t1) - V(x, xi_t) <= -x'(Q + kappa'R kappa)x
/// along the closed loop x+ = (A(xi_t) + B kappa(xi_t)) x.
DecreaseReport verify_decrease(const DesignResult& design, const VertexModel& model,
                               int n_samples, unsigned rng_seed);

/// Re-evaluates every LMI block at the recovered certificates and returns the
/// smallest eigenvalue across blocks.
double reevaluate_lmi_margin(const DesignResult& design, const VertexModel& model);

void save_design(std::ostream& os, const DesignResult& d);
DesignResult load_design(std::istream& is);
void save_design_file(const std::string& path, const DesignResult& d);
DesignResult load_design_file(const std::string& path);

}  // namespace iampc
