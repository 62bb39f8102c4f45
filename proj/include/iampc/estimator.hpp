#pragma once

#include <deque>
#include <utility>

#include "iampc/model.hpp"

namespace iampc {

/// Euclidean projection onto the probability simplex {w >= 0, sum w = 1},
/// computed by the sort-and-threshold closed form.
SimplexVec project_simplex(const Vector& v);

struct EstimatorConfig {
  int N_m = 3;             // data window length
  double filter_gain = 0.5;  // in (0, 1]; 0 freezes the estimate
  double lambda_reg = 1e-8;  // ridge weight toward the previous solution
};

struct DataTriple {
  Vector x_prev, u_prev, x_next;
};

struct LsResult {
  Vector rho;
  bool min_norm_fallback = false;  // Gram matrix singular with lambda_reg = 0
};

/// Weighted-combination least squares over the window:
///   min_rho sum_tau |x_next - sum_i rho_i A_i x_prev - B u_prev|^2
///           + lambda_reg |rho - rho_prev|^2
/// solved jointly via the normal equations. With a singular Gram matrix and
/// lambda_reg = 0 the minimum-norm solution is returned and flagged.
LsResult ls_estimate(const std::deque<DataTriple>& window,
                     const VertexModel& model, const Vector& rho_prev,
                     double lambda_reg);

struct EstimatorState {
  EstimatorConfig config;
  std::deque<DataTriple> window;  // most recent at the back, size <= N_m
  SimplexVec xi_current;          // always a valid simplex point
  Vector rho_prev;                // last unprojected solution
  Vector rho_last;                // for logging: raw solution of the last step
  Vector rho_proj_last;           // for logging: its projection
  bool ls_flagged = false;        // last step used the min-norm fallback
};

/// Fresh state at the uniform simplex point.
EstimatorState new_estimator(const EstimatorConfig& config, int l);

/// Pushes (x_prev, u_prev, x_next), solves the window least squares, projects
/// onto the simplex and applies the first-order filter
///   xi <- (1 - gain) xi + gain proj(rho).
/// The returned estimate is a simplex point by construction.
SimplexVec estimator_step(EstimatorState& state, const Vector& x_prev,
                          const Vector& u_prev, const Vector& x_next,
                          const VertexModel& model);

/// Matrix-space estimation error min over nothing (direct distance):
/// |A(xi) - A(xi_true)|_F. Identifiability-degenerate weights with the same
/// blended matrix score zero.
double matrix_space_error(const VertexModel& model, const SimplexVec& xi,
                          const SimplexVec& xi_true);

}  // namespace iampc
