#include "iampc/polytope.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace iampc {

namespace {
constexpr double kRowZeroTol = 1e-13;
}

Polytope::Polytope(Matrix normals, Vector offsets) {
  if (normals.rows() != offsets.size())
    throw std::invalid_argument("Polytope: row count of normals != length of offsets");
  if (!normals.allFinite() || !offsets.allFinite())
    throw std::invalid_argument("Polytope: non-finite entries");

  std::vector<int> keep;
  keep.reserve(normals.rows());
  for (int r = 0; r < normals.rows(); ++r) {
    double nrm = normals.row(r).norm();
    if (nrm < kRowZeroTol) {
      if (offsets(r) < 0) flagged_empty_ = true;
      continue;  // trivially satisfied (or set flagged empty): drop the row
    }
    keep.push_back(r);
  }
  normals_.resize(static_cast<int>(keep.size()), normals.cols());
  offsets_.resize(static_cast<int>(keep.size()));
  for (size_t i = 0; i < keep.size(); ++i) {
    double nrm = normals.row(keep[i]).norm();
    normals_.row(static_cast<int>(i)) = normals.row(keep[i]) / nrm;
    offsets_(static_cast<int>(i)) = offsets(keep[i]) / nrm;
  }
}

Polytope Polytope::box(const Vector& lo, const Vector& hi) {
  int n = static_cast<int>(lo.size());
  Matrix A(2 * n, n);
  Vector b(2 * n);
  A.setZero();
  for (int i = 0; i < n; ++i) {
    A(2 * i, i) = 1.0;
    b(2 * i) = hi(i);
    A(2 * i + 1, i) = -1.0;
    b(2 * i + 1) = -lo(i);
  }
  return Polytope(A, b);
}

Polytope Polytope::box(const Vector& radii) { return box(-radii, radii); }

bool contains(const Polytope& P, const Vector& x, double tol) {
  if (x.size() != P.dim())
    throw std::invalid_argument("contains: dimension mismatch");
  if (P.flagged_empty()) return false;
  if (P.rows() == 0) return true;
  return ((P.normals() * x - P.offsets()).array() <= tol).all();
}

LPSolution solve_lp(const Vector& c, const Polytope& P, LPSense sense) {
  if (c.size() != P.dim())
    throw std::invalid_argument("solve_lp: dimension mismatch");
  if (P.flagged_empty()) return LPSolution{};  // infeasible
  return solve_lp_dense(c, P.normals(), P.offsets(), sense);
}

bool is_subset(const Polytope& P, const Polytope& Q, double tol) {
  if (P.dim() != Q.dim())
    throw std::invalid_argument("is_subset: dimension mismatch");
  if (P.flagged_empty()) return true;
  for (int r = 0; r < Q.rows(); ++r) {
    LPSolution s = solve_lp(Q.normals().row(r).transpose(), P, LPSense::maximize);
    if (s.status == LPStatus::infeasible) return true;  // P empty
    if (s.status == LPStatus::unbounded) return false;
    if (s.objective > Q.offsets()(r) + tol) return false;
  }
  return true;
}

bool set_equal(const Polytope& P, const Polytope& Q, double tol) {
  return is_subset(P, Q, tol) && is_subset(Q, P, tol);
}

Polytope intersect(const Polytope& P, const Polytope& Q) {
  if (P.dim() != Q.dim())
    throw std::invalid_argument("intersect: dimension mismatch");
  Matrix A(P.rows() + Q.rows(), P.dim());
  Vector b(P.rows() + Q.rows());
  A << P.normals(), Q.normals();
  b << P.offsets(), Q.offsets();
  Polytope raw(A, b);
  if (P.flagged_empty() || Q.flagged_empty() || is_empty(raw)) {
    if (!raw.flagged_empty()) {
      // Flag emptiness explicitly with a 0'x <= -1 marker row.
      Matrix Az = Matrix::Zero(1, P.dim());
      Vector bz = Vector::Constant(1, -1.0);
      Matrix A2(raw.rows() + 1, P.dim());
      Vector b2(raw.rows() + 1);
      A2 << raw.normals(), Az;
      b2 << raw.offsets(), bz;
      return Polytope(A2, b2);
    }
    return raw;
  }
  return remove_redundant(raw);
}

Polytope preimage_linear(const Polytope& P, const Matrix& M) {
  if (M.rows() != P.dim())
    throw std::invalid_argument("preimage_linear: M row count != dim(P)");
  Polytope raw(P.normals() * M, P.offsets());
  if (raw.flagged_empty() || raw.rows() == 0 || is_empty(raw)) return raw;
  return remove_redundant(raw);
}

Polytope remove_redundant(const Polytope& P, double tol) {
  if (P.flagged_empty())
    throw std::invalid_argument("remove_redundant: P is empty");
  const int n = P.dim();
  Matrix A = P.normals();
  Vector b = P.offsets();
  int m = static_cast<int>(A.rows());
  if (m <= 1) return P;

  // Drop duplicate rows first (rows are unit-normalized, so direct compare).
  std::vector<int> keep;
  for (int r = 0; r < m; ++r) {
    bool dup = false;
    for (int k : keep) {
      if ((A.row(r) - A.row(k)).norm() < 1e-12) {
        // Same normal: keep the tighter offset.
        if (b(r) < b(k)) b(k) = b(r);
        dup = true;
        break;
      }
    }
    if (!dup) keep.push_back(r);
  }

  std::vector<bool> active(keep.size(), true);
  for (size_t i = 0; i < keep.size(); ++i) {
    // Maximize row i subject to the other active rows; relax row i itself so
    // the test LP stays bounded in its direction.
    std::vector<int> rows;
    for (size_t k = 0; k < keep.size(); ++k)
      if (active[k]) rows.push_back(static_cast<int>(k));
    Matrix At(rows.size(), n);
    Vector bt(rows.size());
    for (size_t k = 0; k < rows.size(); ++k) {
      At.row(static_cast<int>(k)) = A.row(keep[rows[k]]);
      bt(static_cast<int>(k)) = b(keep[rows[k]]);
      if (rows[k] == static_cast<int>(i)) bt(static_cast<int>(k)) += 1.0;
    }
    LPSolution s = solve_lp_dense(A.row(keep[i]).transpose(), At, bt, LPSense::maximize);
    if (s.status == LPStatus::optimal && s.objective <= b(keep[i]) + tol)
      active[i] = false;
  }

  std::vector<int> final_rows;
  for (size_t i = 0; i < keep.size(); ++i)
    if (active[i]) final_rows.push_back(keep[i]);
  if (final_rows.empty()) {
    // Everything redundant can only happen for the whole space; keep one row.
    final_rows.push_back(keep[0]);
  }
  Matrix Am(final_rows.size(), n);
  Vector bm(final_rows.size());
  for (size_t i = 0; i < final_rows.size(); ++i) {
    Am.row(static_cast<int>(i)) = A.row(final_rows[i]);
    bm(static_cast<int>(i)) = b(final_rows[i]);
  }
  return Polytope(Am, bm);
}

Polytope eliminate(const Polytope& P, const std::vector<int>& drop_dims,
                   int row_cap) {
  if (drop_dims.empty()) return P;
  for (int d : drop_dims)
    if (d < 0 || d >= P.dim())
      throw std::invalid_argument("eliminate: drop index out of range");

  // Eliminate highest index first so remaining indices stay valid.
  std::vector<int> dims = drop_dims;
  std::sort(dims.begin(), dims.end(), std::greater<int>());

  Matrix A = P.normals();
  Vector b = P.offsets();
  for (int d : dims) {
    const int n = static_cast<int>(A.cols());
    std::vector<int> pos, neg, zero;
    for (int r = 0; r < A.rows(); ++r) {
      double a = A(r, d);
      if (a > kRowZeroTol) pos.push_back(r);
      else if (a < -kRowZeroTol) neg.push_back(r);
      else zero.push_back(r);
    }
    long out_rows = static_cast<long>(pos.size()) * neg.size() + zero.size();
    if (out_rows > row_cap) {
      std::ostringstream os;
      os << "eliminate: Fourier-Motzkin row blow-up (" << out_rows << " > cap "
         << row_cap << ") at variable " << d
         << "; consider a different elimination order or a larger cap";
      throw std::runtime_error(os.str());
    }
    Matrix A2(out_rows, n - 1);
    Vector b2(out_rows);
    auto strip = [&](int r) {
      Eigen::RowVectorXd row(n - 1);
      int c = 0;
      for (int j = 0; j < n; ++j)
        if (j != d) row(c++) = A(r, j);
      return row;
    };
    int w = 0;
    for (int r : zero) {
      A2.row(w) = strip(r);
      b2(w++) = b(r);
    }
    for (int rp : pos)
      for (int rn : neg) {
        double ap = A(rp, d), an = -A(rn, d);
        A2.row(w) = an * strip(rp) + ap * strip(rn);
        b2(w++) = an * b(rp) + ap * b(rn);
      }
    Polytope step(A2, b2);
    if (step.flagged_empty() || step.rows() == 0) {
      A = step.normals();
      b = step.offsets();
      if (step.flagged_empty()) {
        Matrix Az = Matrix::Zero(1, n - 1);
        return Polytope(Az, Vector::Constant(1, -1.0));
      }
      continue;
    }
    if (!is_empty(step)) step = remove_redundant(step);
    A = step.normals();
    b = step.offsets();
  }
  return Polytope(A, b);
}

std::pair<Vector, double> chebyshev_center(const Polytope& P) {
  if (P.rows() == 0 && !P.flagged_empty())
    throw std::invalid_argument("chebyshev_center: polytope has no rows");
  if (P.flagged_empty()) return {Vector::Zero(P.dim()), -1.0};
  const int n = P.dim();
  // Variables (x, r): maximize r s.t. a_i'x + r <= b_i (rows are unit norm).
  Matrix A(P.rows(), n + 1);
  A.leftCols(n) = P.normals();
  A.col(n).setOnes();
  Vector c = Vector::Zero(n + 1);
  c(n) = 1.0;
  LPSolution s = solve_lp_dense(c, A, P.offsets(), LPSense::maximize);
  if (s.status == LPStatus::unbounded)
    throw std::runtime_error("chebyshev_center: polytope is unbounded");
  if (s.status != LPStatus::optimal)
    throw std::runtime_error("chebyshev_center: LP failed");
  return {s.optimizer.head(n), s.optimizer(n)};
}

bool is_empty(const Polytope& P, double tol) {
  if (P.flagged_empty()) return true;
  if (P.rows() == 0) return false;
  // Feasibility via phase 1 rather than chebyshev: works for unbounded sets.
  LPSolution s = solve_lp_dense(Vector::Zero(P.dim()), P.normals(), P.offsets(),
                                LPSense::minimize);
  return s.status == LPStatus::infeasible;
}

std::vector<SupportPoint> support_points(const Polytope& P,
                                         const std::vector<Vector>& directions) {
  std::vector<SupportPoint> out;
  out.reserve(directions.size());
  for (const Vector& d : directions) {
    if (d.size() != P.dim())
      throw std::invalid_argument("support_points: direction dimension mismatch");
    SupportPoint sp;
    sp.degenerate = d.norm() < kRowZeroTol;
    LPSolution s = solve_lp(d, P, LPSense::maximize);
    if (s.status == LPStatus::unbounded)
      throw std::runtime_error("support_points: unbounded direction");
    if (s.status != LPStatus::optimal)
      throw std::runtime_error("support_points: infeasible polytope");
    sp.point = s.optimizer;
    out.push_back(std::move(sp));
  }
  return out;
}

std::vector<Vector> boundary_samples_2d(const Polytope& P, int count) {
  if (P.dim() != 2)
    throw std::invalid_argument("boundary_samples_2d: 2-D only");
  std::vector<Vector> dirs;
  dirs.reserve(count);
  for (int k = 0; k < count; ++k) {
    double th = 2.0 * std::numbers::pi * k / count;
    Vector d(2);
    d << std::cos(th), std::sin(th);
    dirs.push_back(d);
  }
  std::vector<Vector> pts;
  for (const auto& sp : support_points(P, dirs)) pts.push_back(sp.point);
  return pts;
}

void save_polytope(std::ostream& os, const Polytope& P) {
  os << "polytope\n";
  os << "dim " << P.dim() << "\n";
  os << "rows " << P.rows() << "\n";
  os << std::setprecision(17);
  for (int r = 0; r < P.rows(); ++r) {
    for (int j = 0; j < P.dim(); ++j) os << P.normals()(r, j) << " ";
    os << P.offsets()(r) << "\n";
  }
  os << "flagged_empty " << (P.flagged_empty() ? 1 : 0) << "\n";
}

Polytope load_polytope(std::istream& is) {
  std::string tag;
  is >> tag;
  if (tag != "polytope") throw std::runtime_error("load_polytope: bad header");
  std::string key;
  int dim = 0, rows = 0;
  is >> key >> dim >> key >> rows;
  Matrix A(rows, dim);
  Vector b(rows);
  for (int r = 0; r < rows; ++r) {
    for (int j = 0; j < dim; ++j) is >> A(r, j);
    is >> b(r);
  }
  int fe = 0;
  is >> key >> fe;
  if (!is) throw std::runtime_error("load_polytope: truncated record");
  if (fe) {
    Matrix A2(rows + 1, dim);
    Vector b2(rows + 1);
    A2 << A, Matrix::Zero(1, dim);
    b2 << b, Vector::Constant(1, -1.0);
    return Polytope(A2, b2);
  }
  return Polytope(A, b);
}

void save_polytope_file(const std::string& path, const Polytope& P) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("save_polytope_file: cannot open " + path);
  save_polytope(f, P);
}

Polytope load_polytope_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("load_polytope_file: cannot open " + path);
  return load_polytope(f);
}

}  // namespace iampc
