#include "iampc/lp.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace iampc {

namespace {

constexpr double kPivotTol = 1e-10;
constexpr double kZeroTol = 1e-11;

// Full-tableau simplex over rows [A | rhs] with objective row last.
// `basis[r]` is the column basic in row r. Returns false when the problem is
// unbounded in the entering column (phase 2 only). Bland's rule kicks in
// after `bland_after` iterations without objective progress.
struct Tableau {
  Matrix T;                 // (m+1) x (ncols+1), last row = objective, last col = rhs
  std::vector<int> basis;   // size m
  int m, ncols;
  int iterations = 0;

  double rhs(int r) const { return T(r, ncols); }
  double obj() const { return -T(m, ncols); }

  void pivot(int r, int col) {
    T.row(r) /= T(r, col);
    for (int i = 0; i <= m; ++i) {
      if (i == r) continue;
      double f = T(i, col);
      if (std::abs(f) > kZeroTol) T.row(i) -= f * T.row(r);
    }
    basis[r] = col;
    ++iterations;
  }

  // Minimizes the objective row. `allowed(j)` gates entering columns.
  // Returns: 0 optimal, 1 unbounded, 2 iteration limit.
  template <typename Allowed>
  int run(int max_iter, Allowed allowed) {
    int stall = 0;
    double last_obj = obj();
    while (iterations < max_iter) {
      bool bland = stall > 2 * (m + ncols);
      int enter = -1;
      double best = -kPivotTol;
      for (int j = 0; j < ncols; ++j) {
        if (!allowed(j)) continue;
        double rc = T(m, j);
        if (bland) {
          if (rc < -kPivotTol) { enter = j; break; }
        } else if (rc < best) {
          best = rc;
          enter = j;
        }
      }
      if (enter < 0) return 0;

      int leave = -1;
      double best_ratio = 0;
      for (int r = 0; r < m; ++r) {
        double a = T(r, enter);
        if (a > kPivotTol) {
          double ratio = rhs(r) / a;
          if (leave < 0 || ratio < best_ratio - kZeroTol ||
              (std::abs(ratio - best_ratio) <= kZeroTol && basis[r] < basis[leave])) {
            leave = r;
            best_ratio = ratio;
          }
        }
      }
      if (leave < 0) return 1;
      pivot(leave, enter);
      double o = obj();
      if (o < last_obj - 1e-13 * (1 + std::abs(last_obj))) {
        stall = 0;
        last_obj = o;
      } else {
        ++stall;
      }
    }
    return 2;
  }
};

}  // namespace

LPSolution solve_lp_dense(const Vector& c, const Matrix& A, const Vector& b,
                          LPSense sense, int max_iter) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  if (c.size() != n || b.size() != m)
    throw std::invalid_argument("solve_lp_dense: dimension mismatch");

  // Work on the minimization form; flip at the end for maximize.
  Vector cmin = (sense == LPSense::maximize) ? Vector(-c) : c;

  // Columns: xp(n), xm(n), slacks(m), artificials(appended as needed).
  const int nx = 2 * n;
  int nart = 0;
  for (int r = 0; r < m; ++r)
    if (b(r) < 0) ++nart;
  const int ncols = nx + m + nart;
  if (max_iter <= 0) max_iter = 200 * (m + ncols) + 2000;

  Tableau tab;
  tab.m = m;
  tab.ncols = ncols;
  tab.T = Matrix::Zero(m + 1, ncols + 1);
  tab.basis.assign(m, -1);

  int art = nx + m;
  for (int r = 0; r < m; ++r) {
    double s = (b(r) < 0) ? -1.0 : 1.0;
    for (int j = 0; j < n; ++j) {
      tab.T(r, j) = s * A(r, j);
      tab.T(r, n + j) = -s * A(r, j);
    }
    tab.T(r, nx + r) = s;  // slack
    tab.T(r, ncols) = s * b(r);
    if (b(r) < 0) {
      tab.T(r, art) = 1.0;
      tab.basis[r] = art++;
    } else {
      tab.basis[r] = nx + r;
    }
  }

  LPSolution sol;

  // Phase 1: minimize the sum of artificials.
  if (nart > 0) {
    for (int j = nx + m; j < ncols; ++j) tab.T(m, j) = 1.0;
    // Price out the basic artificials.
    for (int r = 0; r < m; ++r)
      if (tab.basis[r] >= nx + m) tab.T.row(m) -= tab.T.row(r);
    int rc = tab.run(max_iter, [](int) { return true; });
    if (rc == 2) {
      std::ostringstream os;
      os << "solve_lp_dense: phase-1 iteration limit (" << max_iter
         << ") hit, residual infeasibility " << tab.obj();
      throw std::runtime_error(os.str());
    }
    if (tab.obj() > 1e-8) {
      sol.status = LPStatus::infeasible;
      sol.iterations = tab.iterations;
      return sol;
    }
    // Drive any artificial still basic (at zero) out of the basis.
    for (int r = 0; r < m; ++r) {
      if (tab.basis[r] >= nx + m) {
        int enter = -1;
        for (int j = 0; j < nx + m; ++j)
          if (std::abs(tab.T(r, j)) > kPivotTol) { enter = j; break; }
        if (enter >= 0) tab.pivot(r, enter);
        // else: the row is redundant; the zero artificial stays basic harmlessly.
      }
    }
    tab.T.row(m).setZero();
  }

  // Phase 2 objective.
  for (int j = 0; j < n; ++j) {
    tab.T(m, j) = cmin(j);
    tab.T(m, n + j) = -cmin(j);
  }
  tab.T(m, ncols) = 0.0;
  for (int r = 0; r < m; ++r) {
    int bcol = tab.basis[r];
    double cb = 0.0;
    if (bcol < n) cb = cmin(bcol);
    else if (bcol < nx) cb = -cmin(bcol - n);
    if (cb != 0.0) tab.T.row(m) -= cb * tab.T.row(r);
  }

  const int art_lo = nx + m;
  int rc = tab.run(max_iter, [&](int j) { return j < art_lo; });
  sol.iterations = tab.iterations;
  if (rc == 2) {
    std::ostringstream os;
    os << "solve_lp_dense: phase-2 iteration limit (" << max_iter
       << ") hit at objective " << tab.obj();
    throw std::runtime_error(os.str());
  }
  if (rc == 1) {
    sol.status = LPStatus::unbounded;
    return sol;
  }

  Vector x = Vector::Zero(n);
  for (int r = 0; r < m; ++r) {
    int bcol = tab.basis[r];
    if (bcol < n) x(bcol) += tab.rhs(r);
    else if (bcol < nx) x(bcol - n) -= tab.rhs(r);
  }
  sol.status = LPStatus::optimal;
  sol.optimizer = x;
  double objmin = cmin.dot(x);
  sol.objective = (sense == LPSense::maximize) ? -objmin : objmin;

  // Duals are the reduced costs of the slack columns. With y >= 0 they
  // satisfy, for minimize: c + A'y = 0 and objective = -b'y; for maximize:
  // A'y = c and objective = b'y.
  sol.duals = Vector::Zero(m);
  for (int r2 = 0; r2 < m; ++r2) sol.duals(r2) = tab.T(m, nx + r2);
  return sol;
}

}  // namespace iampc
