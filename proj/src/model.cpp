#include "iampc/model.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace iampc {

SimplexVec::SimplexVec(Vector weights, double tol) : weights_(std::move(weights)) {
  if (weights_.size() == 0)
    throw std::invalid_argument("SimplexVec: empty weight vector");
  if (weights_.minCoeff() < -tol || weights_.maxCoeff() > 1 + tol ||
      std::abs(weights_.sum() - 1.0) > tol) {
    std::ostringstream os;
    os << "SimplexVec: not in the simplex within tol " << tol << " (sum "
       << weights_.sum() << ", min " << weights_.minCoeff() << ")";
    throw std::invalid_argument(os.str());
  }
  weights_ = weights_.cwiseMax(0.0);
  weights_ /= weights_.sum();
}

SimplexVec SimplexVec::uniform(int l) {
  return SimplexVec(Vector::Constant(l, 1.0 / l));
}

SimplexVec SimplexVec::vertex(int l, int i) {
  Vector w = Vector::Zero(l);
  w(i) = 1.0;
  return SimplexVec(w);
}

Matrix VertexModel::blend_A(const SimplexVec& xi) const {
  if (xi.size() != n_vertices())
    throw std::invalid_argument("blend_A: simplex dimension != vertex count");
  Matrix A = Matrix::Zero(n_states(), n_states());
  for (int i = 0; i < n_vertices(); ++i) A += xi[i] * vertex_A[i];
  return A;
}

void VertexModel::validate() const {
  if (vertex_A.empty()) throw std::invalid_argument("VertexModel: no vertices");
  const int n = n_states();
  const int m = n_inputs();
  for (const Matrix& A : vertex_A)
    if (A.rows() != n || A.cols() != n)
      throw std::invalid_argument("VertexModel: vertex A dimension mismatch");
  if (X.dim() != n) throw std::invalid_argument("VertexModel: X dimension != n");
  if (U.dim() != m) throw std::invalid_argument("VertexModel: U dimension != m");
  if (!contains(X, Vector::Zero(n), 0.0) || !contains(U, Vector::Zero(m), 0.0))
    throw std::invalid_argument("VertexModel: 0 must lie in X and U");
  // Compactness: every coordinate direction bounded (throws when not).
  for (const Polytope* P : {&X, &U}) {
    for (int j = 0; j < P->dim(); ++j) {
      for (double s : {1.0, -1.0}) {
        Vector d = Vector::Zero(P->dim());
        d(j) = s;
        if (solve_lp(d, *P, LPSense::maximize).status != LPStatus::optimal)
          throw std::invalid_argument("VertexModel: X and U must be compact");
      }
    }
  }
}

std::uint64_t VertexModel::hash() const {
  std::ostringstream os;
  save_model(os, *this);
  std::string s = os.str();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

VertexModel example_model() {
  VertexModel m;
  Matrix A1(2, 2);
  A1 << 1, 0.2, 0, 1;
  Matrix A4(2, 2);
  A4 << 0.9, 0.3, 0.4, 0.6;
  Matrix A5(2, 2);
  A5 << 0.95, 0, 0.8, 1.02;
  m.vertex_A = {A1, 1.1 * A1, 0.6 * A1, A4, A5};
  m.B = Matrix(2, 1);
  m.B << -0.035, -0.905;
  m.X = Polytope::box(Vector::Constant(2, 15.0));
  m.U = Polytope::box(Vector::Constant(1, 10.0));
  return m;
}

void write_matrix(std::ostream& os, const std::string& name, const Matrix& M) {
  os << name << " " << M.rows() << " " << M.cols() << "\n";
  os << std::setprecision(17);
  for (int r = 0; r < M.rows(); ++r) {
    for (int c = 0; c < M.cols(); ++c) os << M(r, c) << (c + 1 < M.cols() ? " " : "");
    os << "\n";
  }
}

Matrix read_matrix(std::istream& is, const std::string& expected_name) {
  std::string name;
  int rows = 0, cols = 0;
  is >> name >> rows >> cols;
  if (!is || name != expected_name)
    throw std::runtime_error("read_matrix: expected field '" + expected_name +
                             "', got '" + name + "'");
  Matrix M(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) is >> M(r, c);
  if (!is) throw std::runtime_error("read_matrix: truncated field " + name);
  return M;
}

void save_model(std::ostream& os, const VertexModel& m) {
  os << "vertex_model\n";
  os << "l " << m.n_vertices() << "\n";
  for (int i = 0; i < m.n_vertices(); ++i)
    write_matrix(os, "A" + std::to_string(i + 1), m.vertex_A[i]);
  write_matrix(os, "B", m.B);
  save_polytope(os, m.X);
  save_polytope(os, m.U);
}

VertexModel load_model(std::istream& is) {
  std::string tag;
  is >> tag;
  if (tag != "vertex_model") throw std::runtime_error("load_model: bad header");
  std::string key;
  int l = 0;
  is >> key >> l;
  VertexModel m;
  for (int i = 0; i < l; ++i)
    m.vertex_A.push_back(read_matrix(is, "A" + std::to_string(i + 1)));
  m.B = read_matrix(is, "B");
  m.X = load_polytope(is);
  m.U = load_polytope(is);
  return m;
}

}  // namespace iampc
