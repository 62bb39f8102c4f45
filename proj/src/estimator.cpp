#include "iampc/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace iampc {

SimplexVec project_simplex(const Vector& v) {
  const int l = static_cast<int>(v.size());
  if (l == 0) throw std::invalid_argument("project_simplex: empty vector");
  if (!v.allFinite())
    throw std::invalid_argument("project_simplex: non-finite entries");
  // Sort-and-threshold: find the largest k with u_k + (1 - sum u_1..k)/k > 0,
  // shift by that threshold and clip at zero.
  std::vector<double> u(v.data(), v.data() + l);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cssv = 0.0, theta = 0.0;
  int k = 0;
  double run = 0.0;
  for (int j = 0; j < l; ++j) {
    run += u[j];
    double cand = (run - 1.0) / (j + 1);
    if (u[j] - cand > 0) {
      k = j + 1;
      cssv = run;
    }
  }
  theta = (cssv - 1.0) / k;
  Vector w(l);
  for (int i = 0; i < l; ++i) w(i) = std::max(v(i) - theta, 0.0);
  return SimplexVec(w, 1e-7);  // constructor renormalizes exactly
}

LsResult ls_estimate(const std::deque<DataTriple>& window,
                     const VertexModel& model, const Vector& rho_prev,
                     double lambda_reg) {
  if (window.empty()) throw std::invalid_argument("ls_estimate: empty window");
  const int l = model.n_vertices();
  if (rho_prev.size() != l)
    throw std::invalid_argument("ls_estimate: rho_prev dimension mismatch");
  // Residual per triple: x_next - B u_prev - sum_i rho_i (A_i x_prev).
  // Stacking columns c_i = A_i x_prev gives a linear least squares in rho.
  Matrix gram = lambda_reg * Matrix::Identity(l, l);
  Vector rhs = lambda_reg * rho_prev;
  for (const DataTriple& d : window) {
    Matrix C(model.n_states(), l);
    for (int i = 0; i < l; ++i) C.col(i) = model.vertex_A[i] * d.x_prev;
    const Vector y = d.x_next - model.B * d.u_prev;
    gram += C.transpose() * C;
    rhs += C.transpose() * y;
  }
  LsResult out;
  Eigen::FullPivLU<Matrix> lu(gram);
  if (lu.isInvertible()) {
    out.rho = lu.solve(rhs);
  } else {
    // Singular normal equations (only reachable with lambda_reg = 0):
    // minimum-norm least squares via the pseudoinverse.
    out.rho = gram.completeOrthogonalDecomposition().solve(rhs);
    out.min_norm_fallback = true;
  }
  return out;
}

EstimatorState new_estimator(const EstimatorConfig& config, int l) {
  if (config.N_m < 1)
    throw std::invalid_argument("new_estimator: window length must be >= 1");
  if (config.filter_gain < 0.0 || config.filter_gain > 1.0)
    throw std::invalid_argument("new_estimator: filter gain outside [0, 1]");
  if (config.lambda_reg < 0.0)
    throw std::invalid_argument("new_estimator: negative regularization");
  EstimatorState s;
  s.config = config;
  s.xi_current = SimplexVec::uniform(l);
  s.rho_prev = s.xi_current.weights();
  s.rho_last = s.rho_prev;
  s.rho_proj_last = s.rho_prev;
  return s;
}

SimplexVec estimator_step(EstimatorState& state, const Vector& x_prev,
                          const Vector& u_prev, const Vector& x_next,
                          const VertexModel& model) {
  state.window.push_back({x_prev, u_prev, x_next});
  while (static_cast<int>(state.window.size()) > state.config.N_m)
    state.window.pop_front();

  const LsResult ls = ls_estimate(state.window, model, state.rho_prev,
                                  state.config.lambda_reg);
  state.ls_flagged = ls.min_norm_fallback;
  state.rho_last = ls.rho;
  state.rho_prev = ls.rho;
  const SimplexVec proj = project_simplex(ls.rho);
  state.rho_proj_last = proj.weights();

  const double g = state.config.filter_gain;
  const Vector mixed =
      (1.0 - g) * state.xi_current.weights() + g * proj.weights();
  state.xi_current = SimplexVec(mixed, 1e-7);
  return state.xi_current;
}

double matrix_space_error(const VertexModel& model, const SimplexVec& xi,
                          const SimplexVec& xi_true) {
  return (model.blend_A(xi) - model.blend_A(xi_true)).norm();
}

}  // namespace iampc
