#include "iampc/mpc.hpp"

#include <ostream>
#include <sstream>
#include <stdexcept>

namespace iampc {

void PredictionSequence::validate(int l) const {
  if (entries.size() < 2)
    throw std::invalid_argument("PredictionSequence: need at least 2 entries");
  for (const SimplexVec& xi : entries)
    if (xi.size() != l)
      throw std::invalid_argument("PredictionSequence: simplex dimension mismatch");
}

void predict_matrices(const VertexModel& model, const PredictionSequence& xi_seq,
                      std::vector<Matrix>& Phi, std::vector<Matrix>& Gamma) {
  const int n = model.n_states(), m = model.n_inputs();
  const int N = xi_seq.horizon();
  xi_seq.validate(model.n_vertices());
  Phi.assign(N + 1, Matrix());
  Gamma.assign(N + 1, Matrix());
  Phi[0] = Matrix::Identity(n, n);
  Gamma[0] = Matrix::Zero(n, N * m);
  for (int k = 0; k < N; ++k) {
    const Matrix Ak = model.blend_A(xi_seq.entries[k]);
    Phi[k + 1] = Ak * Phi[k];
    Gamma[k + 1] = Ak * Gamma[k];
    Gamma[k + 1].block(0, k * m, n, m) += model.B;
  }
}

namespace {

// Appends rows "normals * (Phi x0 + Gamma U) <= offsets" in the U variables.
void append_rows(std::vector<Vector>& rows, std::vector<double>& rhs,
                 std::vector<RowTag>& tags, const Polytope& P,
                 const Matrix& Phi, const Matrix& Gamma, const Vector& x0,
                 RowTag tag) {
  const Matrix lhs = P.normals() * Gamma;
  const Vector shift = P.normals() * (Phi * x0);
  for (int r = 0; r < P.rows(); ++r) {
    rows.push_back(lhs.row(r).transpose());
    rhs.push_back(P.offsets()(r) - shift(r));
    tags.push_back(tag);
  }
}

}  // namespace

CondensedQP condense(const VertexModel& model, const DesignResult& design,
                     const SetSuite& suite, const PredictionSequence& xi_seq,
                     const Vector& x0) {
  const int n = model.n_states(), m = model.n_inputs();
  const int N = xi_seq.horizon();
  if (x0.size() != n) throw std::invalid_argument("condense: x0 dimension mismatch");
  if (design.model_hash != model.hash() || suite.model_hash != model.hash())
    throw std::invalid_argument("condense: artifact/model hash mismatch");

  std::vector<Matrix> Phi, Gamma;
  predict_matrices(model, xi_seq, Phi, Gamma);

  // Stage costs x_k'Q x_k (k = 0..N-1) + u_k'R u_k + terminal x_N'P x_N.
  // With x_k = Phi_k x0 + Gamma_k U this condenses to 1/2 U'H U + g'U + c.
  const Matrix P_term = terminal_P(design, xi_seq.entries[N]);
  CondensedQP qp;
  qp.N = N;
  qp.n = n;
  qp.m = m;
  qp.hessian = Matrix::Zero(N * m, N * m);
  qp.gradient = Vector::Zero(N * m);
  qp.constant = 0.0;
  for (int k = 0; k < N; ++k) {
    const Vector px = Phi[k] * x0;
    qp.hessian += 2.0 * Gamma[k].transpose() * design.Q * Gamma[k];
    qp.gradient += 2.0 * Gamma[k].transpose() * (design.Q * px);
    qp.constant += px.dot(design.Q * px);
    qp.hessian.block(k * m, k * m, m, m) += 2.0 * design.R;
  }
  {
    const Vector px = Phi[N] * x0;
    qp.hessian += 2.0 * Gamma[N].transpose() * P_term * Gamma[N];
    qp.gradient += 2.0 * Gamma[N].transpose() * (P_term * px);
    qp.constant += px.dot(P_term * px);
  }
  qp.hessian = (0.5 * (qp.hessian + qp.hessian.transpose())).eval();

  // x_0 rows carry no decision variables: check them up front instead.
  if (!contains(suite.C, x0, kSetTol))
    throw std::invalid_argument("condense: initial state outside C");
  if (!contains(model.X, x0, kSetTol))
    throw std::invalid_argument("condense: initial state outside X");

  std::vector<Vector> rows;
  std::vector<double> rhs;
  std::vector<RowTag> tags;
  for (int k = 1; k < N; ++k)
    append_rows(rows, rhs, tags, model.X, Phi[k], Gamma[k], x0, RowTag::state);
  // Input rows and the joint (x_k, u_k) rows for every stage.
  const Matrix& Hu = suite.C_xu.normals();  // columns split as [x-part, u-part]
  for (int k = 0; k < N; ++k) {
    for (int r = 0; r < model.U.rows(); ++r) {
      Vector row = Vector::Zero(N * m);
      row.segment(k * m, m) = model.U.normals().row(r).transpose();
      rows.push_back(row);
      rhs.push_back(model.U.offsets()(r));
      tags.push_back(RowTag::input);
    }
    const Matrix Fx = Hu.leftCols(n);
    const Matrix Fu = Hu.rightCols(m);
    const Matrix lhs = Fx * Gamma[k];
    const Vector shift = Fx * (Phi[k] * x0);
    for (int r = 0; r < suite.C_xu.rows(); ++r) {
      Vector row = lhs.row(r).transpose();
      row.segment(k * m, m) += Fu.row(r).transpose();
      rows.push_back(row);
      rhs.push_back(suite.C_xu.offsets()(r) - shift(r));
      tags.push_back(RowTag::cxu);
    }
  }
  append_rows(rows, rhs, tags, suite.X_N, Phi[N], Gamma[N], x0, RowTag::terminal);

  qp.ineq_normals = Matrix::Zero(static_cast<int>(rows.size()), N * m);
  qp.ineq_offsets = Vector::Zero(static_cast<int>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    qp.ineq_normals.row(static_cast<int>(r)) = rows[r].transpose();
    qp.ineq_offsets(static_cast<int>(r)) = rhs[r];
  }
  qp.row_tags = std::move(tags);
  return qp;
}

QPSolution solve_qp(const CondensedQP& qp, const std::optional<Vector>& warm_start,
                    double tol, int max_iter) {
  const QPResult res = solve_qp_dense(qp.hessian, qp.gradient, qp.ineq_normals,
                                      qp.ineq_offsets, warm_start, tol, max_iter);
  QPSolution sol;
  sol.status = res.status;
  sol.active_rows = res.active_rows;
  sol.iterations = res.iterations;
  if (res.status == QPStatus::optimal) {
    sol.objective = res.objective + qp.constant;
    sol.u_sequence.reserve(qp.N);
    for (int k = 0; k < qp.N; ++k)
      sol.u_sequence.push_back(res.x.segment(k * qp.m, qp.m));
  }
  return sol;
}

double value_function(const VertexModel& model, const DesignResult& design,
                      const SetSuite& suite, const PredictionSequence& xi_seq,
                      const Vector& x0) {
  const CondensedQP qp = condense(model, design, suite, xi_seq, x0);
  const QPSolution sol = solve_qp(qp);
  if (sol.status != QPStatus::optimal)
    throw std::runtime_error("value_function: QP did not reach an optimum");
  return sol.objective;
}

namespace {
const char* tag_name(RowTag t) {
  switch (t) {
    case RowTag::state: return "state";
    case RowTag::input: return "input";
    case RowTag::cxu: return "cxu";
    case RowTag::terminal: return "terminal";
  }
  return "?";
}
}  // namespace

void dump_qp(std::ostream& os, const CondensedQP& qp) {
  os << "condensed qp: N=" << qp.N << " n=" << qp.n << " m=" << qp.m
     << " rows=" << qp.ineq_normals.rows() << " constant=" << qp.constant << "\n";
  write_matrix(os, "hessian", qp.hessian);
  write_matrix(os, "gradient", qp.gradient);
  write_matrix(os, "ineq_normals", qp.ineq_normals);
  write_matrix(os, "ineq_offsets", qp.ineq_offsets);
  for (std::size_t r = 0; r < qp.row_tags.size(); ++r)
    os << "row " << r << " " << tag_name(qp.row_tags[r]) << "\n";
}

}  // namespace iampc
