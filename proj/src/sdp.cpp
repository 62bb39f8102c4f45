#include "iampc/sdp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace iampc {

Matrix SdpProblem::eval_block(int k, const Vector& z) const {
  const Block& b = blocks[k];
  Matrix M = b.C;
  for (const auto& [p, T] : b.terms) M += z(p) * T;
  return M;
}

double SdpProblem::min_eigenvalue(const Vector& z) const {
  double mn = std::numeric_limits<double>::infinity();
  for (size_t k = 0; k < blocks.size(); ++k) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(eval_block(static_cast<int>(k), z));
    mn = std::min(mn, es.eigenvalues().minCoeff());
  }
  return mn;
}

namespace {

// Barrier value sum_k -log det M_k(z); +inf when any block is not PD.
// Fills per-block inverses when `inv` is non-null.
double barrier(const SdpProblem& prob, const Vector& z, std::vector<Matrix>* inv) {
  double val = 0.0;
  for (size_t k = 0; k < prob.blocks.size(); ++k) {
    Matrix M = prob.eval_block(static_cast<int>(k), z);
    Eigen::LLT<Matrix> llt(M);
    if (llt.info() != Eigen::Success)
      return std::numeric_limits<double>::infinity();
    double logdet = 0.0;
    for (int i = 0; i < M.rows(); ++i) {
      double d = llt.matrixL()(i, i);
      if (d <= 0) return std::numeric_limits<double>::infinity();
      logdet += std::log(d);
    }
    val -= 2.0 * logdet;
    if (inv) (*inv)[k] = llt.solve(Matrix::Identity(M.rows(), M.cols()));
  }
  return val;
}

}  // namespace

SdpResult solve_sdp_barrier(const SdpProblem& prob, const Vector& z0,
                            const SdpOptions& opts) {
  const int p = prob.nvars;
  if (z0.size() != p)
    throw std::invalid_argument("solve_sdp_barrier: z0 dimension mismatch");

  double total_dim = 0;
  for (const auto& b : prob.blocks) total_dim += static_cast<double>(b.C.rows());

  Vector z = z0;
  std::vector<Matrix> inv(prob.blocks.size());
  if (!std::isfinite(barrier(prob, z, &inv)))
    throw std::invalid_argument("solve_sdp_barrier: z0 not strictly feasible");

  SdpResult res;
  res.z = z;
  double tau = opts.tau0;
  int newton_total = 0;

  while (newton_total < opts.max_newton) {
    // Centering for the current tau.
    for (int it = 0; it < 60 && newton_total < opts.max_newton; ++it, ++newton_total) {
      double f0 = tau * prob.cost.dot(z) + barrier(prob, z, &inv);
      // Gradient and Hessian.
      Vector g = tau * prob.cost;
      Matrix H = Matrix::Zero(p, p);
      for (size_t k = 0; k < prob.blocks.size(); ++k) {
        const auto& terms = prob.blocks[k].terms;
        std::vector<Matrix> W(terms.size());
        for (size_t a = 0; a < terms.size(); ++a) {
          W[a] = inv[k] * terms[a].second;
          g(terms[a].first) -= W[a].trace();
        }
        for (size_t a = 0; a < terms.size(); ++a)
          for (size_t b = a; b < terms.size(); ++b) {
            double h = (W[a].array() * W[b].transpose().array()).sum();
            int ia = terms[a].first, ib = terms[b].first;
            H(ia, ib) += h;
            if (ia != ib) H(ib, ia) += h;
          }
      }
      // Levenberg regularization keeps the step well-defined near-singular H.
      H.diagonal().array() += 1e-12 * (1.0 + H.diagonal().maxCoeff());
      Vector dz = H.ldlt().solve(-g);
      double decrement2 = -g.dot(dz);
      if (!(decrement2 > 0)) break;
      if (decrement2 < 1e-14) break;

      double step = 1.0;
      Vector zn = z + step * dz;
      double fn = tau * prob.cost.dot(zn) + barrier(prob, zn, nullptr);
      int backtracks = 0;
      while ((!std::isfinite(fn) || fn > f0 - 1e-4 * step * decrement2) &&
             backtracks < 60) {
        step *= 0.5;
        zn = z + step * dz;
        fn = tau * prob.cost.dot(zn) + barrier(prob, zn, nullptr);
        ++backtracks;
      }
      if (backtracks >= 60) break;
      z = zn;
      barrier(prob, z, &inv);
      if (decrement2 < 1e-10) break;
    }

    res.z = z;
    res.objective = prob.cost.dot(z);
    res.gap = total_dim / tau;
    res.newton_iters = newton_total;
    if (res.objective <= opts.target_objective) {
      res.status = SdpStatus::early_stop;
      return res;
    }
    if (res.gap <= opts.gap_tol * (1.0 + std::abs(res.objective))) {
      res.status = SdpStatus::optimal;
      return res;
    }
    tau *= opts.tau_growth;
  }
  res.status = SdpStatus::max_iter;
  return res;
}

}  // namespace iampc
