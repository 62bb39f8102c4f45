#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "iampc/polytope.hpp"

namespace iampc {

/// Point of the probability simplex: weights >= 0 summing to one.
class SimplexVec {
 public:
  SimplexVec() = default;
  /// Validates membership within `tol` and renormalizes exactly.
  explicit SimplexVec(Vector weights, double tol = 1e-9);

  static SimplexVec uniform(int l);
  static SimplexVec vertex(int l, int i);

  int size() const { return static_cast<int>(weights_.size()); }
  const Vector& weights() const { return weights_; }
  double operator[](int i) const { return weights_(i); }

 private:
  Vector weights_;
};

/// Polytopic uncertain plant: x+ = sum_i [xi]_i A_i x + B u, x in X, u in U.
struct VertexModel {
  std::vector<Matrix> vertex_A;
  Matrix B;
  Polytope X;  // state constraints, dim n
  Polytope U;  // input constraints, dim m

  int n_vertices() const { return static_cast<int>(vertex_A.size()); }
  int n_states() const { return static_cast<int>(B.rows()); }
  int n_inputs() const { return static_cast<int>(B.cols()); }

  /// A(xi) = sum_i [xi]_i A_i.
  Matrix blend_A(const SimplexVec& xi) const;

  /// Throws std::invalid_argument when dimensions are inconsistent or the
  /// constraint sets lack 0 in their interior.
  void validate() const;

  /// FNV-1a over the canonical serialization; used to tie artifacts together.
  std::uint64_t hash() const;
};

/// The benchmark plant: 5 vertices in R^2, one input, |x_i| <= 15, |u| <= 10.
VertexModel example_model();

void save_model(std::ostream& os, const VertexModel& m);
VertexModel load_model(std::istream& is);

/// Matrix/vector text I/O at 17 significant digits (shared by artifacts).
void write_matrix(std::ostream& os, const std::string& name, const Matrix& M);
Matrix read_matrix(std::istream& is, const std::string& expected_name);

}  // namespace iampc
