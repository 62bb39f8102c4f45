#pragma once

#include <utility>
#include <vector>

#include "iampc/lp.hpp"

namespace iampc {

/// Linear SDP over block-diagonal constraints:
///   minimize c'z  s.t.  M_k(z) = C_k + sum_p z_p * T_kp  >= 0  (PSD), all k.
/// Coefficient matrices are stored per block as (variable index, matrix)
/// pairs so each block only touches its own variables.
struct SdpProblem {
  int nvars = 0;
  Vector cost;
  struct Block {
    Matrix C;
    std::vector<std::pair<int, Matrix>> terms;
  };
  std::vector<Block> blocks;

  Matrix eval_block(int k, const Vector& z) const;
  /// Smallest eigenvalue over all blocks at z.
  double min_eigenvalue(const Vector& z) const;
};

enum class SdpStatus { optimal, early_stop, max_iter };

struct SdpResult {
  SdpStatus status = SdpStatus::max_iter;
  Vector z;
  double objective = 0.0;
  double gap = 0.0;  // duality-gap bound: objective - gap <= true optimum
  int newton_iters = 0;
};

struct SdpOptions {
  double gap_tol = 1e-7;
  double tau0 = 1.0;
  double tau_growth = 20.0;
  int max_newton = 400;
  /// Optional early exit: stop as soon as c'z <= this value.
  double target_objective = -1e300;
};

/// Log-det barrier path following with damped Newton steps. `z0` must be
/// strictly feasible (all blocks positive definite). Problem sizes here are
/// tiny (tens of variables, blocks of dimension < 10), so dense Hessians are
/// formed explicitly.
SdpResult solve_sdp_barrier(const SdpProblem& prob, const Vector& z0,
                            const SdpOptions& opts = {});

}  // namespace iampc
