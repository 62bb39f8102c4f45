// Acceptance suite: seven end-to-end checks against pinned reference values
// and tolerances. Each criterion prints exactly one PASS/FAIL line; the exit
// code is the number of failures.
#include <cmath>
#include <cstdio>
#include <iostream>
#include <random>
#include <vector>

#include "iampc/simulator.hpp"

using namespace iampc;

namespace {

int g_failures = 0;

void report(int id, const char* name, bool pass, const std::string& detail) {
  std::printf("criterion %d (%s): %s%s%s\n", id, name, pass ? "PASS" : "FAIL",
              detail.empty() ? "" : " -- ", detail.c_str());
  if (!pass) ++g_failures;
}

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

// --- criterion 6 helpers ----------------------------------------------------

struct EnumResult {
  bool feasible = false;
  Vector x;
  double obj = std::numeric_limits<double>::infinity();
};

void try_subset(const Matrix& H, const Vector& g, const Matrix& A,
                const Vector& b, const std::vector<int>& w, EnumResult& best) {
  const int n = static_cast<int>(H.rows());
  const int q = static_cast<int>(w.size());
  Matrix kkt = Matrix::Zero(n + q, n + q);
  Vector rhs(n + q);
  kkt.topLeftCorner(n, n) = H;
  rhs.head(n) = -g;
  for (int j = 0; j < q; ++j) {
    kkt.block(0, n + j, n, 1) = A.row(w[j]).transpose();
    kkt.block(n + j, 0, 1, n) = A.row(w[j]);
    rhs(n + j) = b(w[j]);
  }
  Eigen::FullPivLU<Matrix> lu(kkt);
  if (!lu.isInvertible()) return;
  Vector sol = lu.solve(rhs);
  Vector x = sol.head(n);
  if (q > 0 && sol.tail(q).minCoeff() < -1e-7) return;
  if (A.rows() > 0 && (A * x - b).maxCoeff() > 1e-7) return;
  double obj = 0.5 * x.dot(H * x) + g.dot(x);
  if (obj < best.obj) best = {true, x, obj};
}

void enum_subsets(const Matrix& H, const Vector& g, const Matrix& A,
                  const Vector& b, std::vector<int>& w, int start, EnumResult& best) {
  try_subset(H, g, A, b, w, best);
  if (static_cast<int>(w.size()) == H.rows()) return;
  for (int r = start; r < A.rows(); ++r) {
    w.push_back(r);
    enum_subsets(H, g, A, b, w, r + 1, best);
    w.pop_back();
  }
}

Vector random_in(std::mt19937_64& rng, int n, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = d(rng);
  return v;
}

}  // namespace

int main() {
  const VertexModel model = example_model();
  const Matrix Q = Matrix::Identity(2, 2);
  const Matrix R = Matrix::Identity(1, 1);

  // ---- criterion 2: design feasibility -------------------------------------
  DesignResult design;
  try {
    design = solve_design(model, Q, R);
    const double eps = default_eps_margin(model);
    const double margin = reevaluate_lmi_margin(design, model);
    report(2, "design feasibility", margin >= eps / 2,
           "re-evaluated block min-eigenvalue " + std::to_string(margin) +
               ", required >= " + std::to_string(eps / 2));
  } catch (const std::exception& e) {
    report(2, "design feasibility", false, e.what());
    return ++g_failures;  // nothing downstream can run
  }

  // ---- criterion 1: horizon reproduction -----------------------------------
  SetSuite suite;
  try {
    suite = build_set_suite(model, design);
    report(1, "horizon reproduction", suite.N == 8,
           "computed minimal horizon N = " + std::to_string(suite.N) +
               ", pinned reference value 8 under Q = I, R = 1; the horizon is "
               "determined by the gains the feasibility solve selects, which "
               "are not unique (see notes/decisions ledger)");
  } catch (const std::exception& e) {
    report(1, "horizon reproduction", false, e.what());
    return ++g_failures;
  }

  // ---- criterion 3: robust feasibility & constraint satisfaction -----------
  std::vector<Trace> main_traces;
  {
    ScenarioConfig cfg;
    cfg.model = model;
    cfg.Q = Q;
    cfg.R = R;
    cfg.estimator.config = {3, 0.5, 1e-8};
    cfg.xi_policy.kind = XiPolicy::Kind::random_seeded;
    cfg.xi_policy.n_draws = 4;
    cfg.init_policy.kind = InitPolicy::Kind::support_points;
    cfg.init_policy.n_directions = 200;
    cfg.T = 100;
    cfg.rng_seed = 7;
    bool ok = true;
    std::string detail;
    try {
      main_traces = run_scenario(cfg, design, suite);
      double worst = -1e300;
      for (const Trace& tr : main_traces) {
        VerificationReport rep = verify_trace(tr, model, design, suite);
        worst = std::max({worst, rep.worst_x_margin, rep.worst_u_margin,
                          rep.worst_c_margin});
        if (!rep.constraints_ok || !rep.inside_C_ok) ok = false;
      }
      detail = std::to_string(main_traces.size()) +
               " runs of 100 steps, zero infeasibilities, worst constraint "
               "margin " + std::to_string(worst) + " (limit 1e-8)";
    } catch (const std::exception& e) {
      ok = false;
      detail = e.what();
    }
    report(3, "robust feasibility and constraint satisfaction", ok, detail);
  }

  // ---- criterion 4: nominal asymptotic stability ----------------------------
  {
    ScenarioConfig cfg;
    cfg.model = model;
    cfg.Q = Q;
    cfg.R = R;
    cfg.estimator.oracle = true;
    cfg.xi_policy.kind = XiPolicy::Kind::random_seeded;
    cfg.xi_policy.n_draws = 4;
    cfg.init_policy.kind = InitPolicy::Kind::support_points;
    cfg.init_policy.n_directions = 100;
    cfg.T = 100;
    cfg.rng_seed = 11;
    bool ok = true;
    std::string detail;
    try {
      auto traces = run_scenario(cfg, design, suite);
      double worst_ratio = 0.0;
      for (const Trace& tr : traces) {
        VerificationReport rep = verify_trace(tr, model, design, suite);
        if (!rep.decrease_applicable || !rep.decrease_ok) ok = false;
        const double ratio = tr.x_final.norm() / tr.x0.norm();
        worst_ratio = std::max(worst_ratio, ratio);
        if (ratio > 1e-3) ok = false;
      }
      detail = std::to_string(traces.size()) +
               " oracle runs, value strictly decreasing, worst final/initial "
               "norm ratio " + std::to_string(worst_ratio) + " (limit 1e-3)";
    } catch (const std::exception& e) {
      ok = false;
      detail = e.what();
    }
    report(4, "nominal asymptotic stability", ok, detail);
  }

  // ---- criterion 5: ISS residual and filter-gain contrast -------------------
  {
    bool ok = true;
    std::string detail;
    double gamma_hat = 0.0;
    for (const Trace& tr : main_traces) {
      VerificationReport rep = verify_trace(tr, model, design, suite);
      if (!rep.iss_zero_residual_ok || !std::isfinite(rep.gamma_hat)) ok = false;
      gamma_hat = std::max(gamma_hat, rep.gamma_hat);
    }
    try {
      ScenarioConfig cfg;
      cfg.model = model;
      cfg.Q = Q;
      cfg.R = R;
      cfg.estimator.config = {3, 0.5, 1e-8};
      cfg.xi_policy.kind = XiPolicy::Kind::fixed;
      cfg.xi_policy.fixed_value = Vector::Zero(5);
      cfg.xi_policy.fixed_value(3) = 0.6;
      cfg.xi_policy.fixed_value(4) = 0.4;
      cfg.init_policy.kind = InitPolicy::Kind::explicit_list;
      cfg.init_policy.states = {boundary_samples_2d(suite.C, 8)[1]};
      cfg.T = 120;
      cfg.rng_seed = 3;
      auto rows = sweep_filter_gain(cfg, design, suite, {0.5, 0.05});
      const bool contrast = rows[1].settling_step >= rows[0].settling_step &&
                            rows[0].settling_step >= 0;
      if (!contrast) ok = false;
      detail = "empirical ISS gain estimate " + std::to_string(gamma_hat) +
               "; settling steps: fast filter " +
               std::to_string(rows[0].settling_step) + ", slow filter " +
               std::to_string(rows[1].settling_step);
    } catch (const std::exception& e) {
      ok = false;
      detail = e.what();
    }
    report(5, "ISS residual and filter-gain contrast", ok, detail);
  }

  // ---- criterion 6: oracle equivalences -------------------------------------
  {
    bool ok = true;
    std::string detail;
    std::mt19937_64 rng(0xacce97);

    // (a) dense QP solver vs exhaustive active-set enumeration.
    int qp_pass = 0;
    for (int trial = 0; trial < 500; ++trial) {
      const int n = 2 + static_cast<int>(rng() % 3);
      Matrix M(n, n);
      for (int i = 0; i < n; ++i) M.row(i) = random_in(rng, n, -1, 1).transpose();
      Matrix H = M.transpose() * M + 0.3 * Matrix::Identity(n, n);
      Vector g = random_in(rng, n, -2, 2);
      const int rows = 4 + static_cast<int>(rng() % 5);
      Matrix A(rows, n);
      Vector b(rows);
      Vector xf = random_in(rng, n, -1, 1);
      for (int r = 0; r < rows; ++r) {
        Vector a = random_in(rng, n, -1, 1);
        a.normalize();
        A.row(r) = a.transpose();
        b(r) = a.dot(xf) + 0.05 + std::abs(random_in(rng, 1, -0.5, 0.5)(0));
      }
      QPResult got = solve_qp_dense(H, g, A, b);
      EnumResult want;
      std::vector<int> w;
      enum_subsets(H, g, A, b, w, 0, want);
      if (want.feasible && got.status == QPStatus::optimal &&
          std::abs(got.objective - want.obj) <= 1e-6 * (1.0 + std::abs(want.obj)))
        ++qp_pass;
    }
    if (qp_pass != 500) ok = false;

    // (b) closed-form simplex projection vs the projection QP.
    int proj_pass = 0;
    for (int trial = 0; trial < 1000; ++trial) {
      const int l = 2 + static_cast<int>(rng() % 5);
      Vector v = random_in(rng, l, -3, 3);
      SimplexVec p = project_simplex(v);
      Matrix A(l + 2, l);
      Vector b(l + 2);
      A.topRows(l) = -Matrix::Identity(l, l);
      b.head(l).setZero();
      A.row(l) = Vector::Ones(l).transpose();
      b(l) = 1.0;
      A.row(l + 1) = -Vector::Ones(l).transpose();
      b(l + 1) = -1.0;
      QPResult qr = solve_qp_dense(Matrix::Identity(l, l), -v, A, b);
      if (qr.status == QPStatus::optimal && (p.weights() - qr.x).norm() <= 1e-7)
        ++proj_pass;
    }
    if (proj_pass != 1000) ok = false;

    // (c) single-vertex constraint-admissible set vs grid unrolling of the
    // closed loop.
    int grid_agree = 0, grid_total = 0;
    {
      VertexModel single;
      single.vertex_A = {model.vertex_A[0]};
      single.B = model.B;
      single.X = Polytope::box(vec2(4, 4).cwiseAbs());
      single.U = Polytope::box(Vector::Ones(1) * 2.0);
      DesignResult d1 = solve_design(single, Q, R);
      Polytope cxu1 = build_cxu(single, max_rci(single));
      Polytope inv = mcas(single, d1, cxu1);
      const Matrix Acl = single.vertex_A[0] + single.B * d1.K[0];
      Matrix lift(3, 2);
      lift.topRows(2) = Matrix::Identity(2, 2);
      lift.bottomRows(1) = d1.K[0];
      Polytope x0set = preimage_linear(cxu1, lift);
      for (int i = 0; i < 100; ++i)
        for (int j = 0; j < 100; ++j) {
          Vector z = vec2(-4.0 + 8.0 * i / 99.0, -4.0 + 8.0 * j / 99.0);
          bool in_set = contains(inv, z, 1e-9);
          bool in_grid = true;
          Vector x = z;
          for (int t = 0; t < 50 && in_grid; ++t) {
            if (!contains(x0set, x, 1e-9)) in_grid = false;
            x = Acl * x;
          }
          ++grid_total;
          if (in_set == in_grid) ++grid_agree;
        }
    }
    if (grid_agree < static_cast<int>(0.999 * grid_total)) ok = false;

    // (d) variable elimination vs per-point lifted LP feasibility.
    int elim_pass = 0;
    {
      Matrix A3(8, 3);
      Vector b3(8);
      std::mt19937_64 rng3(77);
      for (int r = 0; r < 8; ++r) {
        Vector a = random_in(rng3, 3, -1, 1);
        a.normalize();
        A3.row(r) = a.transpose();
        b3(r) = 0.5 + std::abs(random_in(rng3, 1, -1, 1)(0));
      }
      Polytope P(A3, b3);
      Polytope Pz = eliminate(P, {2});
      for (int trial = 0; trial < 1000; ++trial) {
        Vector z = random_in(rng3, 2, -2, 2);
        // Lifted feasibility: does some w give (z, w) in P?
        Matrix Aw = A3.col(2);
        Vector bw = b3 - A3.leftCols(2) * z;
        Polytope slice(Aw, bw);
        const bool lifted = !is_empty(slice, 1e-9);
        const bool projected = contains(Pz, z, 1e-7);
        if (lifted == projected) ++elim_pass;
      }
    }
    if (elim_pass != 1000) ok = false;

    detail = "QP-vs-enumeration " + std::to_string(qp_pass) +
             "/500 (tol 1e-6); projection " + std::to_string(proj_pass) +
             "/1000 (tol 1e-7); invariant-set grid agreement " +
             std::to_string(grid_agree) + "/" + std::to_string(grid_total) +
             " (>= 99.9%); elimination " + std::to_string(elim_pass) +
             "/1000 (100%)";
    report(6, "oracle equivalences", ok, detail);
  }

  // ---- criterion 7: invariance certificates ---------------------------------
  {
    bool ok = true;
    std::mt19937_64 rng(0xcafe);
    int rci_ok = 0;
    const std::vector<Vector> pts = boundary_samples_2d(suite.C, 200);
    for (const Vector& x : pts) {
      // One robust input must keep every vertex successor inside C.
      const int cr = suite.C.rows(), ur = model.U.rows();
      Matrix A(ur + 5 * cr, 1);
      Vector b(ur + 5 * cr);
      A.topRows(ur) = model.U.normals();
      b.head(ur) = model.U.offsets();
      for (int i = 0; i < 5; ++i) {
        A.middleRows(ur + i * cr, cr) = suite.C.normals() * model.B;
        b.segment(ur + i * cr, cr) =
            suite.C.offsets() - suite.C.normals() * (model.vertex_A[i] * x);
      }
      if (!is_empty(Polytope(A, b), 1e-9)) ++rci_ok;
    }
    if (rci_ok != 200) ok = false;

    // Terminal-set images under every closed-loop vertex map stay inside.
    int img_ok = 0;
    for (int i = 0; i < 5; ++i) {
      const Matrix Acl = model.vertex_A[i] + model.B * design.K[i];
      if (is_subset(suite.X_N, preimage_linear(suite.X_N, Acl), 1e-8)) ++img_ok;
      for (const Vector& x : boundary_samples_2d(suite.X_N, 200))
        if (!contains(suite.X_N, Acl * x, 1e-8)) ok = false;
    }
    if (img_ok != 5) ok = false;

    // Terminal-law admissibility over the terminal set.
    int adm = 0, adm_total = 0;
    const std::vector<Vector> term_pts = boundary_samples_2d(suite.X_N, 200);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (const Vector& bp : term_pts) {
      for (int s = 0; s < 50; ++s) {
        const Vector x = uni(rng) * bp;  // random point on the chord to 0
        Vector w(5);
        for (int i = 0; i < 5; ++i) w(i) = -std::log(uni(rng) + 1e-300);
        SimplexVec xi(w / w.sum());
        Vector z(3);
        z.head(2) = x;
        z.tail(1) = kappa(design, xi) * x;
        ++adm_total;
        if (contains(suite.C_xu, z, 1e-8)) ++adm;
      }
    }
    if (adm != adm_total) ok = false;

    report(7, "invariance certificates", ok,
           "robust one-step feasibility " + std::to_string(rci_ok) +
               "/200 boundary points; terminal-set invariance " +
               std::to_string(img_ok) + "/5 vertex maps; terminal-law "
               "admissibility " + std::to_string(adm) + "/" +
               std::to_string(adm_total) + " samples");
  }

  std::printf("acceptance: %d of 7 criteria failed\n", g_failures);
  return g_failures;
}
