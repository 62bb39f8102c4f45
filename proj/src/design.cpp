#include "iampc/design.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace iampc {

namespace {

// The (i,j) design block
//   [ G_i+G_i'-S_i  (A_iG_i+BE_i)'  E_i'    G_i' ]
//   [ A_iG_i+BE_i   S_j             0       0    ]
//   [ E_i           0               R^-1    0    ]
//   [ G_i           0               0       Q^-1 ]
Matrix design_block(const Matrix& A_i, const Matrix& B, const Matrix& Qinv,
                    const Matrix& Rinv, const Matrix& G_i, const Matrix& S_i,
                    const Matrix& E_i, const Matrix& S_j) {
  const int n = static_cast<int>(A_i.rows());
  const int m = static_cast<int>(B.cols());
  const int d = 3 * n + m;
  Matrix M = Matrix::Zero(d, d);
  M.block(0, 0, n, n) = G_i + G_i.transpose() - S_i;
  Matrix AGBE = A_i * G_i + B * E_i;
  M.block(n, 0, n, n) = AGBE;
  M.block(0, n, n, n) = AGBE.transpose();
  M.block(2 * n, 0, m, n) = E_i;
  M.block(0, 2 * n, n, m) = E_i.transpose();
  M.block(2 * n + m, 0, n, n) = G_i;
  M.block(0, 2 * n + m, n, n) = G_i.transpose();
  M.block(n, n, n, n) = S_j;
  M.block(2 * n, 2 * n, m, m) = Rinv;
  M.block(2 * n + m, 2 * n + m, n, n) = Qinv;
  return M;
}

int vars_per_vertex(int n, int m) { return n * n + n * (n + 1) / 2 + m * n; }

void unpack_vertex(const Vector& z, int i, int n, int m, Matrix& G, Matrix& S,
                   Matrix& E) {
  int base = i * vars_per_vertex(n, m);
  G.resize(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) G(r, c) = z(base++);
  S.resize(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = r; c < n; ++c) {
      S(r, c) = z(base);
      S(c, r) = z(base);
      ++base;
    }
  E.resize(m, n);
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < n; ++c) E(r, c) = z(base++);
}

void check_spd(const Matrix& M, const std::string& what) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(M);
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-10 ||
      es.eigenvalues().minCoeff() <= 0)
    throw std::invalid_argument(what + " must be symmetric positive definite");
}

}  // namespace

void ConicProblem::unpack(const Vector& z, std::vector<Matrix>& G,
                          std::vector<Matrix>& S, std::vector<Matrix>& E) const {
  G.resize(l);
  S.resize(l);
  E.resize(l);
  for (int i = 0; i < l; ++i) unpack_vertex(z, i, n, m, G[i], S[i], E[i]);
}

Vector ConicProblem::feasible_start() const {
  Vector z = Vector::Zero(sdp.nvars);
  const int per = vars_per_vertex(n, m);
  for (int i = 0; i < l; ++i) {
    int base = i * per;
    for (int r = 0; r < n; ++r) z(base + r * n + r) = 1.0;  // G = I
    int sb = base + n * n;
    for (int r = 0; r < n; ++r)
      for (int c = r; c < n; ++c) {
        if (r == c) z(sb) = 1.0;  // S = I
        ++sb;
      }
  }
  // Lift t until every block is strictly positive definite.
  z(t_index) = 0.0;
  double mn = sdp.min_eigenvalue(z);
  z(t_index) = std::max(0.0, -mn) + 1.0;
  return z;
}

double default_eps_margin(const VertexModel& model) {
  double amax = 0.0;
  for (const Matrix& A : model.vertex_A)
    amax = std::max(amax, A.cwiseAbs().maxCoeff());
  return 1e-6 * (1.0 + amax);
}

ConicProblem build_design_lmi(const VertexModel& model, const Matrix& Q,
                              const Matrix& R, double eps_margin) {
  model.validate();
  const int n = model.n_states();
  const int m = model.n_inputs();
  const int l = model.n_vertices();
  if (Q.rows() != n || Q.cols() != n || R.rows() != m || R.cols() != m)
    throw std::invalid_argument("build_design_lmi: Q/R dimension mismatch");
  check_spd(Q, "Q");
  check_spd(R, "R");
  if (eps_margin <= 0)
    throw std::invalid_argument("build_design_lmi: eps_margin must be > 0");

  ConicProblem cp;
  cp.n = n;
  cp.m = m;
  cp.l = l;
  cp.eps = eps_margin;
  const int per = vars_per_vertex(n, m);
  cp.sdp.nvars = l * per + 1;
  cp.t_index = l * per;
  cp.sdp.cost = Vector::Zero(cp.sdp.nvars);
  cp.sdp.cost(cp.t_index) = 1.0;  // minimize the slack

  Matrix Qinv = Q.inverse();
  Matrix Rinv = R.inverse();
  const int d = 3 * n + m;

  // The block map is affine in z; coefficients are recovered exactly by
  // probing unit vectors of the block's support variables.
  for (int i = 0; i < l; ++i) {
    for (int j = 0; j < l; ++j) {
      SdpProblem::Block blk;
      auto eval = [&](const Vector& z) -> Matrix {
        Matrix G, S, E, Gj, Sj, Ej;
        unpack_vertex(z, i, n, m, G, S, E);
        unpack_vertex(z, j, n, m, Gj, Sj, Ej);
        return design_block(model.vertex_A[i], model.B, Qinv, Rinv, G, S, E, Sj) +
               (z(cp.t_index) - eps_margin) * Matrix::Identity(d, d);
      };
      Vector z0v = Vector::Zero(cp.sdp.nvars);
      blk.C = eval(z0v);
      std::vector<int> support;
      for (int v = i * per; v < (i + 1) * per; ++v) support.push_back(v);
      if (j != i)
        for (int v = j * per + n * n; v < j * per + n * n + n * (n + 1) / 2; ++v)
          support.push_back(v);
      support.push_back(cp.t_index);
      for (int v : support) {
        Vector zv = Vector::Zero(cp.sdp.nvars);
        zv(v) = 1.0;
        Matrix T = eval(zv) - blk.C;
        if (T.cwiseAbs().maxCoeff() > 0) blk.terms.emplace_back(v, T);
      }
      cp.sdp.blocks.push_back(std::move(blk));
    }
  }
  return cp;
}

DesignResult solve_design(const VertexModel& model, const Matrix& Q,
                          const Matrix& R, double eps_margin) {
  if (eps_margin < 0) eps_margin = default_eps_margin(model);
  ConicProblem cp = build_design_lmi(model, Q, R, eps_margin);

  SdpOptions opts;
  opts.target_objective = -0.5 * eps_margin;
  opts.max_newton = 600;
  SdpResult res = solve_sdp_barrier(cp.sdp, cp.feasible_start(), opts);

  double t = res.objective;
  if (t > 0 && res.gap > 0 && t - res.gap > 0)
    throw AssumptionViolation(
        "solve_design: the design LMI is infeasible for this model/weights "
        "(no parameter-dependent certificate exists; Assumption 2 fails)");

  DesignResult d;
  d.Q = Q;
  d.R = R;
  d.model_hash = model.hash();
  cp.unpack(res.z, d.G, d.S, d.E);

  const int l = model.n_vertices();
  d.P.resize(l);
  d.K.resize(l);
  for (int i = 0; i < l; ++i) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(d.S[i]);
    double smin = es.eigenvalues().minCoeff();
    double smax = es.eigenvalues().maxCoeff();
    if (smin <= 0 || smax / smin >= 1e12) {
      std::ostringstream os;
      os << "solve_design: S_" << i + 1 << " ill-conditioned (cond "
         << (smin > 0 ? smax / smin : std::numeric_limits<double>::infinity())
         << ")";
      throw std::runtime_error(os.str());
    }
    Eigen::LLT<Matrix> llt(d.S[i]);
    d.P[i] = llt.solve(Matrix::Identity(cp.n, cp.n));
    d.P[i] = 0.5 * (d.P[i] + d.P[i].transpose().eval());

    Eigen::JacobiSVD<Matrix> svd(d.G[i]);
    double gmin = svd.singularValues().minCoeff();
    double gmax = svd.singularValues().maxCoeff();
    if (gmin <= 0 || gmax / gmin >= 1e12) {
      std::ostringstream os;
      os << "solve_design: G_" << i + 1 << " ill-conditioned";
      throw std::runtime_error(os.str());
    }
    Eigen::PartialPivLU<Matrix> lu(d.G[i].transpose());
    // K_i' = (G_i')^-1 E_i'
    d.K[i] = lu.solve(d.E[i].transpose()).transpose();
  }

  double margin = reevaluate_lmi_margin(d, model);
  if (margin < eps_margin / 2) {
    if (t > -eps_margin / 2)
      throw AssumptionViolation(
          "solve_design: could not certify the design LMI with the required "
          "margin; the problem is infeasible or marginally feasible "
          "(Assumption 2 fails at the requested margin)");
    std::ostringstream os;
    os << "solve_design: solver returned t=" << t
       << " but re-evaluated margin " << margin << " < eps/2";
    throw std::runtime_error(os.str());
  }
  return d;
}

Matrix kappa(const DesignResult& design, const SimplexVec& xi) {
  if (xi.size() != design.n_vertices())
    throw std::invalid_argument("kappa: simplex dimension mismatch");
  Matrix K = Matrix::Zero(design.K[0].rows(), design.K[0].cols());
  for (int i = 0; i < design.n_vertices(); ++i) K += xi[i] * design.K[i];
  return K;
}

Matrix terminal_P(const DesignResult& design, const SimplexVec& xi) {
  if (xi.size() != design.n_vertices())
    throw std::invalid_argument("terminal_P: simplex dimension mismatch");
  Matrix P = Matrix::Zero(design.P[0].rows(), design.P[0].cols());
  for (int i = 0; i < design.n_vertices(); ++i) P += xi[i] * design.P[i];
  return P;
}

double reevaluate_lmi_margin(const DesignResult& design, const VertexModel& model) {
  Matrix Qinv = design.Q.inverse();
  Matrix Rinv = design.R.inverse();
  double mn = std::numeric_limits<double>::infinity();
  for (int i = 0; i < model.n_vertices(); ++i)
    for (int j = 0; j < model.n_vertices(); ++j) {
      Matrix M = design_block(model.vertex_A[i], model.B, Qinv, Rinv,
                              design.G[i], design.S[i], design.E[i], design.S[j]);
      Eigen::SelfAdjointEigenSolver<Matrix> es(M);
      mn = std::min(mn, es.eigenvalues().minCoeff());
    }
  return mn;
}

DecreaseReport verify_decrease(const DesignResult& design, const VertexModel& model,
                               int n_samples, unsigned rng_seed) {
  DecreaseReport rep;
  rep.n_samples = n_samples;
  std::mt19937_64 rng(rng_seed);
  std::normal_distribution<double> gauss(0, 1);
  std::exponential_distribution<double> expd(1.0);
  const int n = model.n_states();
  const int l = model.n_vertices();
  auto rand_simplex = [&] {
    Vector w(l);
    for (int i = 0; i < l; ++i) w(i) = expd(rng);
    return SimplexVec(w / w.sum());
  };
  rep.worst_residual = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < n_samples; ++s) {
    Vector x(n);
    do {
      for (int i = 0; i < n; ++i) x(i) = gauss(rng);
    } while (x.norm() < 1e-9);
    x /= x.norm();
    SimplexVec xi = rand_simplex();
    SimplexVec xi1 = rand_simplex();
    Matrix Kx = kappa(design, xi);
    Vector u = Kx * x;
    Vector xp = model.blend_A(xi) * x + model.B * u;
    double lhs = xp.dot(terminal_P(design, xi1) * xp) -
                 x.dot(terminal_P(design, xi) * x);
    double rhs = -x.dot((design.Q + Kx.transpose() * design.R * Kx) * x);
    double residual = lhs - rhs;
    rep.worst_residual = std::max(rep.worst_residual, residual);
    if (residual > 1e-8 * (1.0 + x.squaredNorm())) rep.pass = false;
  }
  return rep;
}

void save_design(std::ostream& os, const DesignResult& d) {
  const int l = d.n_vertices();
  os << "design.ia\n";
  os << "l " << l << " n " << d.P[0].rows() << " m " << d.K[0].rows() << "\n";
  os << "model_hash " << d.model_hash << "\n";
  write_matrix(os, "Q", d.Q);
  write_matrix(os, "R", d.R);
  for (int i = 0; i < l; ++i) {
    std::string sfx = std::to_string(i + 1);
    write_matrix(os, "P" + sfx, d.P[i]);
    write_matrix(os, "K" + sfx, d.K[i]);
    write_matrix(os, "S" + sfx, d.S[i]);
    write_matrix(os, "G" + sfx, d.G[i]);
    write_matrix(os, "E" + sfx, d.E[i]);
  }
}

DesignResult load_design(std::istream& is) {
  std::string tag;
  is >> tag;
  if (tag != "design.ia") throw std::runtime_error("load_design: bad header");
  std::string key;
  int l = 0, n = 0, m = 0;
  is >> key >> l >> key >> n >> key >> m;
  DesignResult d;
  is >> key >> d.model_hash;
  d.Q = read_matrix(is, "Q");
  d.R = read_matrix(is, "R");
  for (int i = 0; i < l; ++i) {
    std::string sfx = std::to_string(i + 1);
    d.P.push_back(read_matrix(is, "P" + sfx));
    d.K.push_back(read_matrix(is, "K" + sfx));
    d.S.push_back(read_matrix(is, "S" + sfx));
    d.G.push_back(read_matrix(is, "G" + sfx));
    d.E.push_back(read_matrix(is, "E" + sfx));
  }
  return d;
}

void save_design_file(const std::string& path, const DesignResult& d) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("save_design_file: cannot open " + path);
  save_design(f, d);
}

DesignResult load_design_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("load_design_file: cannot open " + path);
  return load_design(f);
}

}  // namespace iampc
