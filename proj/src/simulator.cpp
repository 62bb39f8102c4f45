#include "iampc/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace iampc {

namespace {

double margin_of(const Polytope& P, const Vector& z) {
  if (P.rows() == 0) return -1e300;
  return (P.normals() * z - P.offsets()).maxCoeff();
}

Vector xi_true_at(const XiPolicy& policy, const Vector& drawn, int t) {
  if (policy.kind != XiPolicy::Kind::piecewise) return drawn;
  Vector out = policy.schedule.front().second;
  for (const auto& [step, value] : policy.schedule)
    if (step <= t) out = value;
  return out;
}

}  // namespace

void ScenarioConfig::validate() const {
  model.validate();
  const int n = model.n_states(), l = model.n_vertices();
  if (Q.rows() != n || Q.cols() != n)
    throw std::invalid_argument("ScenarioConfig: Q dimension mismatch");
  if (R.rows() != model.n_inputs() || R.cols() != model.n_inputs())
    throw std::invalid_argument("ScenarioConfig: R dimension mismatch");
  if (T < 1) throw std::invalid_argument("ScenarioConfig: T must be >= 1");
  if (!estimator.oracle) {
    if (estimator.config.filter_gain <= 0.0 || estimator.config.filter_gain > 1.0)
      throw std::invalid_argument("ScenarioConfig: filter gain outside (0, 1]");
    if (estimator.config.N_m < 1)
      throw std::invalid_argument("ScenarioConfig: window length must be >= 1");
  }
  if (xi_policy.kind == XiPolicy::Kind::fixed) {
    SimplexVec check(xi_policy.fixed_value);  // throws when outside the simplex
    if (check.size() != l)
      throw std::invalid_argument("ScenarioConfig: fixed parameter length");
  }
  if (xi_policy.kind == XiPolicy::Kind::random_seeded && xi_policy.n_draws < 1)
    throw std::invalid_argument("ScenarioConfig: need at least one draw");
  if (xi_policy.kind == XiPolicy::Kind::piecewise) {
    if (xi_policy.schedule.empty() || xi_policy.schedule.front().first != 0)
      throw std::invalid_argument(
          "ScenarioConfig: piecewise schedule must start at step 0");
    for (const auto& [step, value] : xi_policy.schedule) {
      SimplexVec check(value);
      if (check.size() != l)
        throw std::invalid_argument("ScenarioConfig: schedule value length");
    }
  }
  if (init_policy.kind == InitPolicy::Kind::explicit_list &&
      init_policy.states.empty())
    throw std::invalid_argument("ScenarioConfig: empty initial-state list");
  if (init_policy.kind == InitPolicy::Kind::support_points &&
      model.n_states() != 2)
    throw std::invalid_argument(
        "ScenarioConfig: support-point starts implemented for 2-D states");
}

std::vector<Trace> run_scenario(const ScenarioConfig& cfg,
                                const DesignResult& design,
                                const SetSuite& suite) {
  cfg.validate();
  const int l = cfg.model.n_vertices();

  SetSuite active = suite;
  if (cfg.horizon_override > 0) active.N = cfg.horizon_override;

  std::vector<Vector> starts;
  switch (cfg.init_policy.kind) {
    case InitPolicy::Kind::explicit_list:
      starts = cfg.init_policy.states;
      break;
    case InitPolicy::Kind::support_points:
      starts = boundary_samples_2d(active.C, cfg.init_policy.n_directions);
      break;
    case InitPolicy::Kind::chebyshev_center:
      starts = {chebyshev_center(active.C).first};
      break;
  }

  // Draw every true-parameter value up front so run order cannot change them.
  std::mt19937_64 rng(cfg.rng_seed);
  std::vector<Vector> draws;
  switch (cfg.xi_policy.kind) {
    case XiPolicy::Kind::fixed:
      draws = {cfg.xi_policy.fixed_value};
      break;
    case XiPolicy::Kind::random_seeded:
      for (int d = 0; d < cfg.xi_policy.n_draws; ++d) {
        // Uniform over the simplex via sorted-uniform gaps.
        std::vector<double> cuts{0.0, 1.0};
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        for (int i = 0; i + 1 < l; ++i) cuts.push_back(uni(rng));
        std::sort(cuts.begin(), cuts.end());
        Vector w(l);
        for (int i = 0; i < l; ++i) w(i) = cuts[i + 1] - cuts[i];
        draws.push_back(w);
      }
      break;
    case XiPolicy::Kind::piecewise:
      draws = {cfg.xi_policy.schedule.front().second};
      break;
  }

  std::vector<Trace> traces;
  int run_index = 0;
  for (const Vector& x0 : starts) {
    for (const Vector& drawn : draws) {
      Trace tr;
      tr.run_index = run_index++;
      tr.seed = cfg.rng_seed;
      tr.N = active.N;
      tr.x0 = x0;

      ControllerState ctrl = new_controller(design, active, cfg.model);
      SimplexVec xi0(xi_true_at(cfg.xi_policy, drawn, 0));
      if (cfg.estimator.oracle)  // exact knowledge from the start
        ctrl.buffer.entries.assign(ctrl.buffer.entries.size(), xi0);
      EstimatorState est = new_estimator(
          cfg.estimator.oracle ? EstimatorConfig{} : cfg.estimator.config, l);
      SimplexVec xi_est = cfg.estimator.oracle ? xi0 : est.xi_current;

      Vector x = x0;
      for (int t = 0; t < cfg.T; ++t) {
        SimplexVec xi_true(xi_true_at(cfg.xi_policy, drawn, t));
        if (cfg.estimator.oracle) xi_est = xi_true;

        StepDiag diag;
        Vector u;
        try {
          u = control_step(ctrl, x, xi_est, &diag);
        } catch (const InfeasibleOnline& e) {
          std::ostringstream msg;
          msg << "run_scenario: run " << tr.run_index << " step " << t
              << " from x0 = [" << x0.transpose() << "]: " << e.what();
          throw InfeasibleOnline(msg.str());
        }

        TraceStep step;
        step.t = t;
        step.x = x;
        step.u = u;
        step.xi_est = xi_est.weights();
        step.xi_true = xi_true.weights();
        step.xi_delayed = ctrl.buffer.entries.front().weights();
        step.xi_tilde = step.xi_true - step.xi_delayed;
        step.value = diag.value;
        step.qp_iterations = diag.iterations;
        step.active_count = static_cast<int>(diag.active_rows.size());
        step.x_margin = margin_of(cfg.model.X, x);
        step.u_margin = margin_of(cfg.model.U, u);
        step.c_margin = margin_of(active.C, x);
        step.est_matrix_err = matrix_space_error(cfg.model, xi_est, xi_true);
        tr.steps.push_back(std::move(step));

        const Vector x_next = cfg.model.blend_A(xi_true) * x + cfg.model.B * u;
        if (!cfg.estimator.oracle)
          xi_est = estimator_step(est, x, u, x_next, cfg.model);
        x = x_next;
      }
      tr.x_final = x;
      for (const TraceStep& s : tr.steps)
        if ((s.xi_true - tr.steps.front().xi_true).norm() > 0) {
          tr.xi_constant = false;
          break;
        }
      traces.push_back(std::move(tr));
    }
  }
  return traces;
}

VerificationReport verify_trace(const Trace& trace, const VertexModel& model,
                                const DesignResult& design,
                                const SetSuite& suite) {
  VerificationReport rep;
  Eigen::SelfAdjointEigenSolver<Matrix> eq(design.Q);
  const double lq = eq.eigenvalues().minCoeff();
  const int T = static_cast<int>(trace.steps.size());
  const int N = trace.N;

  auto flag = [&](bool& ok, int t) {
    if (ok) {
      ok = false;
      if (rep.first_violation_step < 0) rep.first_violation_step = t;
    }
  };

  bool all_tilde_zero = true;
  for (int t = 0; t < T; ++t) {
    const TraceStep& s = trace.steps[static_cast<std::size_t>(t)];
    const double xm = margin_of(model.X, s.x);
    const double um = margin_of(model.U, s.u);
    const double cm = margin_of(suite.C, s.x);
    rep.worst_x_margin = std::max(rep.worst_x_margin, xm);
    rep.worst_u_margin = std::max(rep.worst_u_margin, um);
    rep.worst_c_margin = std::max(rep.worst_c_margin, cm);
    if (xm > 1e-8 || um > 1e-8) flag(rep.constraints_ok, t);
    if (cm > 1e-8) flag(rep.inside_C_ok, t);

    // Delayed-estimate law: the logged delayed value must equal the estimate
    // from N steps earlier, and xi_tilde must be its gap to the truth.
    if (t >= N) {
      const Vector& past = trace.steps[static_cast<std::size_t>(t - N)].xi_est;
      if ((s.xi_delayed - past).norm() > 1e-12) flag(rep.shift_law_ok, t);
    }
    if ((s.xi_tilde - (s.xi_true - s.xi_delayed)).norm() > 1e-12)
      flag(rep.shift_law_ok, t);
    if (s.xi_tilde.norm() > 1e-12) all_tilde_zero = false;
  }

  rep.decrease_applicable = trace.xi_constant && all_tilde_zero;
  for (int t = 0; t + 1 < T; ++t) {
    const TraceStep& s = trace.steps[static_cast<std::size_t>(t)];
    const TraceStep& s1 = trace.steps[static_cast<std::size_t>(t + 1)];
    const double r = s1.value - s.value + lq * s.x.squaredNorm();
    if (s.xi_tilde.norm() > 1e-12) {
      rep.gamma_hat = std::max(rep.gamma_hat, r / s.xi_tilde.norm());
    } else if (r > 1e-6) {
      flag(rep.iss_zero_residual_ok, t);
    }
    if (rep.decrease_applicable) {
      const bool strict = s.x.norm() > 1e-6;
      if ((strict && !(s1.value < s.value)) ||
          (!strict && s1.value > s.value + 1e-9))
        flag(rep.decrease_ok, t);
    }
  }
  rep.final_norm = trace.x_final.norm();
  return rep;
}

int settling_step(const Trace& trace) {
  const double thresh = 0.01 * trace.x0.norm();
  int settle = 0;
  for (int t = 0; t < static_cast<int>(trace.steps.size()); ++t)
    if (trace.steps[static_cast<std::size_t>(t)].x.norm() > thresh)
      settle = t + 1;
  if (trace.x_final.norm() > thresh) return -1;  // never settles in the trace
  return settle;
}

std::vector<SweepRow> sweep_filter_gain(const ScenarioConfig& cfg,
                                        const DesignResult& design,
                                        const SetSuite& suite,
                                        const std::vector<double>& gains) {
  std::vector<SweepRow> rows;
  for (double gain : gains) {
    ScenarioConfig c = cfg;
    c.estimator.oracle = false;
    c.estimator.config.filter_gain = gain;
    const std::vector<Trace> traces = run_scenario(c, design, suite);
    const Trace& tr = traces.front();  // matched seed and start across gains
    SweepRow row;
    row.gain = gain;
    row.settling_step = settling_step(tr);
    for (const TraceStep& s : tr.steps) {
      row.peak_value = std::max(row.peak_value, s.value);
      row.est_err.push_back(s.est_matrix_err);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

void csv_vec(std::ostream& os, const Vector& v) {
  for (int i = 0; i < v.size(); ++i) os << "," << v(i);
}

void csv_header(std::ostream& os, const std::string& base, int count) {
  for (int i = 0; i < count; ++i) os << "," << base << i;
}

}  // namespace

void write_trace_csv(std::ostream& os, const Trace& trace) {
  if (trace.steps.empty()) throw std::invalid_argument("write_trace_csv: empty");
  const int n = static_cast<int>(trace.steps.front().x.size());
  const int m = static_cast<int>(trace.steps.front().u.size());
  const int l = static_cast<int>(trace.steps.front().xi_est.size());
  os << std::setprecision(17);
  os << "# run_index " << trace.run_index << "\n";
  os << "# seed " << trace.seed << "\n";
  os << "# N " << trace.N << "\n";
  os << "# x0";
  for (int i = 0; i < trace.x0.size(); ++i) os << " " << trace.x0(i);
  os << "\n# x_final";
  for (int i = 0; i < trace.x_final.size(); ++i) os << " " << trace.x_final(i);
  os << "\n# xi_constant " << (trace.xi_constant ? 1 : 0) << "\n";
  os << "t";
  csv_header(os, "x", n);
  csv_header(os, "u", m);
  csv_header(os, "xi_est", l);
  csv_header(os, "xi_true", l);
  csv_header(os, "xi_delayed", l);
  csv_header(os, "xi_tilde", l);
  os << ",value,qp_iterations,active_count,x_margin,u_margin,c_margin,"
        "est_matrix_err\n";
  for (const TraceStep& s : trace.steps) {
    os << s.t;
    csv_vec(os, s.x);
    csv_vec(os, s.u);
    csv_vec(os, s.xi_est);
    csv_vec(os, s.xi_true);
    csv_vec(os, s.xi_delayed);
    csv_vec(os, s.xi_tilde);
    os << "," << s.value << "," << s.qp_iterations << "," << s.active_count
       << "," << s.x_margin << "," << s.u_margin << "," << s.c_margin << ","
       << s.est_matrix_err << "\n";
  }
}

Trace read_trace_csv(std::istream& is) {
  Trace tr;
  std::string line;
  int n = 0, m = 0, l = 0;
  // Metadata comments, then the header row describing the column layout.
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ls(line.substr(1));
      std::string key;
      ls >> key;
      if (key == "run_index") ls >> tr.run_index;
      if (key == "seed") ls >> tr.seed;
      if (key == "N") ls >> tr.N;
      if (key == "x0" || key == "x_final") {
        std::vector<double> vals;
        double v;
        while (ls >> v) vals.push_back(v);
        Vector vec = Eigen::Map<Vector>(vals.data(), static_cast<int>(vals.size()));
        (key == "x0" ? tr.x0 : tr.x_final) = vec;
      }
      if (key == "xi_constant") {
        int c;
        ls >> c;
        tr.xi_constant = c != 0;
      }
      continue;
    }
    // Header row: count columns per prefix.
    std::istringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) {
      if (cell.rfind("x", 0) == 0 && std::isdigit(static_cast<unsigned char>(cell[1]))) ++n;
      if (cell.rfind("u", 0) == 0 && std::isdigit(static_cast<unsigned char>(cell[1]))) ++m;
      if (cell.rfind("xi_est", 0) == 0) ++l;
    }
    break;
  }
  if (n == 0 || m == 0 || l == 0)
    throw std::runtime_error("read_trace_csv: malformed header");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ls, cell, ',')) vals.push_back(std::stod(cell));
    const std::size_t expect = 1 + static_cast<std::size_t>(n + m + 4 * l) + 7;
    if (vals.size() != expect)
      throw std::runtime_error("read_trace_csv: malformed row");
    TraceStep s;
    std::size_t at = 0;
    s.t = static_cast<int>(vals[at++]);
    auto take = [&](int count) -> Vector {
      Vector v(count);
      for (int i = 0; i < count; ++i) v(i) = vals[at++];
      return v;
    };
    s.x = take(n);
    s.u = take(m);
    s.xi_est = take(l);
    s.xi_true = take(l);
    s.xi_delayed = take(l);
    s.xi_tilde = take(l);
    s.value = vals[at++];
    s.qp_iterations = static_cast<int>(vals[at++]);
    s.active_count = static_cast<int>(vals[at++]);
    s.x_margin = vals[at++];
    s.u_margin = vals[at++];
    s.c_margin = vals[at++];
    s.est_matrix_err = vals[at++];
    tr.steps.push_back(std::move(s));
  }
  return tr;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << std::setprecision(17);
  os << "gain,peak_value,settling_step";
  std::size_t T = 0;
  for (const SweepRow& r : rows) T = std::max(T, r.est_err.size());
  for (std::size_t t = 0; t < T; ++t) os << ",est_err" << t;
  os << "\n";
  for (const SweepRow& r : rows) {
    os << r.gain << "," << r.peak_value << "," << r.settling_step;
    for (std::size_t t = 0; t < T; ++t)
      os << "," << (t < r.est_err.size() ? r.est_err[t] : 0.0);
    os << "\n";
  }
}

void write_report(std::ostream& os, const VerificationReport& r) {
  os << std::setprecision(17);
  os << "constraints_ok " << r.constraints_ok << "\n";
  os << "inside_C_ok " << r.inside_C_ok << "\n";
  os << "shift_law_ok " << r.shift_law_ok << "\n";
  os << "decrease_applicable " << r.decrease_applicable << "\n";
  os << "decrease_ok " << r.decrease_ok << "\n";
  os << "iss_zero_residual_ok " << r.iss_zero_residual_ok << "\n";
  os << "worst_x_margin " << r.worst_x_margin << "\n";
  os << "worst_u_margin " << r.worst_u_margin << "\n";
  os << "worst_c_margin " << r.worst_c_margin << "\n";
  os << "gamma_hat " << r.gamma_hat << "\n";
  os << "final_norm " << r.final_norm << "\n";
  os << "first_violation_step " << r.first_violation_step << "\n";
  os << "overall " << (r.pass() ? "PASS" : "FAIL") << "\n";
}

}  // namespace iampc
