#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "iampc/lp.hpp"

namespace iampc {

/// Halfspace polytope {x : normals * x <= offsets}. Rows are normalized to
/// unit Euclidean norm on construction so that tolerances are scale-free.
/// Zero rows with nonnegative offset are dropped; a zero row with negative
/// offset flags the set as trivially empty. Immutable after construction.
class Polytope {
 public:
  Polytope() = default;
  Polytope(Matrix normals, Vector offsets);

  /// Axis-aligned box {lo <= x <= hi}.
  static Polytope box(const Vector& lo, const Vector& hi);
  /// Symmetric box |x_i| <= r_i.
  static Polytope box(const Vector& radii);

  int dim() const { return static_cast<int>(normals_.cols()); }
  int rows() const { return static_cast<int>(normals_.rows()); }
  const Matrix& normals() const { return normals_; }
  const Vector& offsets() const { return offsets_; }
  /// True when construction saw "0'x <= b" with b < 0.
  bool flagged_empty() const { return flagged_empty_; }

 private:
  Matrix normals_;
  Vector offsets_;
  bool flagged_empty_ = false;
};

inline constexpr double kSetTol = 1e-7;   // fixpoint / set-equality tolerance
inline constexpr int kFmRowCap = 5000;    // Fourier-Motzkin blow-up guard

bool contains(const Polytope& P, const Vector& x, double tol = 1e-9);

/// LP over the polytope; thin wrapper around solve_lp_dense.
LPSolution solve_lp(const Vector& c, const Polytope& P,
                    LPSense sense = LPSense::minimize);

/// max_{x in P} q'x <= d + tol for every row (q, d) of Q.
/// An empty P is a subset of everything (documented convention).
bool is_subset(const Polytope& P, const Polytope& Q, double tol = kSetTol);

bool set_equal(const Polytope& P, const Polytope& Q, double tol = kSetTol);

Polytope intersect(const Polytope& P, const Polytope& Q);

/// {x : M x in P}.
Polytope preimage_linear(const Polytope& P, const Matrix& M);

/// Fourier-Motzkin projection dropping the given coordinates (one at a time,
/// redundancy-removed after each). Throws when the intermediate row count
/// exceeds `row_cap`.
Polytope eliminate(const Polytope& P, const std::vector<int>& drop_dims,
                   int row_cap = kFmRowCap);

/// Minimal representation: every retained row is tight for some point of P.
Polytope remove_redundant(const Polytope& P, double tol = kSetTol);

/// Largest inscribed ball. radius < 0 signals empty interior / empty set.
/// Throws on unbounded P.
std::pair<Vector, double> chebyshev_center(const Polytope& P);

bool is_empty(const Polytope& P, double tol = kSetTol);

struct SupportPoint {
  Vector point;
  bool degenerate = false;  // zero direction
};

/// argmax d'x over P for each direction; throws if some direction is unbounded.
std::vector<SupportPoint> support_points(const Polytope& P,
                                         const std::vector<Vector>& directions);

/// Boundary samples in `count` evenly spread directions (2-D only).
std::vector<Vector> boundary_samples_2d(const Polytope& P, int count);

/// Text record round-tripping at 17 significant digits.
void save_polytope(std::ostream& os, const Polytope& P);
Polytope load_polytope(std::istream& is);
void save_polytope_file(const std::string& path, const Polytope& P);
Polytope load_polytope_file(const std::string& path);

}  // namespace iampc
