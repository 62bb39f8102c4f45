#include "iampc/qp.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace iampc {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

QPResult solve_qp_dense(const Matrix& H, const Vector& g, const Matrix& A,
                        const Vector& b, const std::optional<Vector>& warm_start,
                        double tol, int max_iter) {
  const int n = static_cast<int>(H.rows());
  const int m = static_cast<int>(A.rows());
  if (H.cols() != n || g.size() != n)
    throw std::invalid_argument("solve_qp_dense: H/g dimension mismatch");
  if (m > 0 && (A.cols() != n || b.size() != m))
    throw std::invalid_argument("solve_qp_dense: A/b dimension mismatch");
  if ((H - H.transpose()).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + H.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("solve_qp_dense: H must be symmetric");
  Eigen::LLT<Matrix> hllt(H);
  if (hllt.info() != Eigen::Success)
    throw std::invalid_argument("solve_qp_dense: H must be positive definite");
  if (warm_start && warm_start->size() != n)
    throw std::invalid_argument("solve_qp_dense: warm start dimension mismatch");
  if (max_iter <= 0) max_iter = 50 * (m + n) + 100;

  QPResult res;
  res.x = hllt.solve(-g);  // unconstrained minimum; the dual method ignores
                           // any primal warm start by construction
  std::vector<int> ws;     // working set (rows, insertion order)
  Vector lam = Vector::Zero(0);

  auto hinv = [&](const Matrix& M) { return hllt.solve(M); };

  for (res.iterations = 0; res.iterations < max_iter; ++res.iterations) {
    // Most violated row; lowest index wins ties (within tol).
    int p = -1;
    double worst = tol;
    for (int r = 0; r < m; ++r) {
      double v = A.row(r).dot(res.x) - b(r);
      if (v > worst) {  // strict: exact ties resolve to the lowest row index
        worst = v;
        p = r;
      }
    }
    if (p < 0) {
      std::sort(ws.begin(), ws.end());
      res.active_rows = ws;
      res.objective = 0.5 * res.x.dot(H * res.x) + g.dot(res.x);
      res.status = QPStatus::optimal;
      return res;
    }

    Vector np = A.row(p).transpose();
    double up = 0.0;  // multiplier accumulated on the incoming row p
    while (true) {
      const int q = static_cast<int>(ws.size());
      // Step directions: z in primal space, r in dual space.
      Vector z, rstep;
      if (q == 0) {
        z = hinv(np);
        rstep = Vector::Zero(0);
      } else {
        Matrix N(n, q);
        for (int j = 0; j < q; ++j) N.col(j) = A.row(ws[j]).transpose();
        Matrix HiN = hinv(N);
        Matrix NtHiN = N.transpose() * HiN;
        Eigen::LLT<Matrix> sll(NtHiN);
        if (sll.info() != Eigen::Success)
          throw std::runtime_error("solve_qp_dense: degenerate working set");
        rstep = sll.solve(HiN.transpose() * np);
        z = hinv(np) - HiN * rstep;
      }

      double znp = z.dot(np);
      // Full step length to make row p feasible.
      double t2 = (znp > tol * tol) ? (A.row(p).dot(res.x) - b(p)) / znp : kInf;
      // Max step before an active multiplier hits zero.
      double t1 = kInf;
      int drop = -1;
      for (int j = 0; j < q; ++j)
        if (rstep(j) > tol * tol) {
          double cand = lam(j) / rstep(j);
          if (cand < t1 - tol * tol || (cand < t1 + tol * tol && drop >= 0 &&
                                        ws[j] < ws[drop])) {
            t1 = cand;
            drop = j;
          }
        }
      double t = std::min(t1, t2);
      if (t == kInf) {
        res.status = QPStatus::infeasible;  // no step restores feasibility
        std::sort(ws.begin(), ws.end());
        res.active_rows = ws;
        res.objective = 0.5 * res.x.dot(H * res.x) + g.dot(res.x);
        return res;
      }

      if (t2 == kInf) {
        // Dual-only step: shed the blocking constraint and retry.
        lam -= t * rstep;
        up += t;
        Vector nl(q - 1);
        for (int j = 0, k = 0; j < q; ++j)
          if (j != drop) nl(k++) = lam(j);
        lam = nl;
        ws.erase(ws.begin() + drop);
        continue;
      }

      res.x -= t * z;
      if (q > 0) lam -= t * rstep;
      up += t;
      if (t == t2 && t <= t1) {
        Vector nl(q + 1);
        nl.head(q) = lam;
        nl(q) = up;
        lam = nl;
        ws.push_back(p);
        break;  // row p satisfied and active; look for the next violation
      }
      // Partial step: drop the blocking row, stay on row p.
      Vector nl(q - 1);
      for (int j = 0, k = 0; j < q; ++j)
        if (j != drop) nl(k++) = lam(j);
      lam = nl;
      ws.erase(ws.begin() + drop);
    }
  }
  std::sort(ws.begin(), ws.end());
  res.active_rows = ws;
  res.objective = 0.5 * res.x.dot(H * res.x) + g.dot(res.x);
  res.status = QPStatus::max_iter;
  return res;
}

}  // namespace iampc
