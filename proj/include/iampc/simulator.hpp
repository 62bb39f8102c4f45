#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "iampc/controller.hpp"

namespace iampc {

/// How the true (unknown to the controller) parameter evolves.
struct XiPolicy {
  enum class Kind { fixed, random_seeded, piecewise } kind = Kind::random_seeded;
  Vector fixed_value;      // Kind::fixed
  int n_draws = 4;         // Kind::random_seeded: number of runs per start
  // Kind::piecewise: (switch step, value) pairs sorted by step; the value
  // with the largest step <= t applies at t.
  std::vector<std::pair<int, Vector>> schedule;
};

/// Where the closed-loop runs start.
struct InitPolicy {
  enum class Kind { explicit_list, support_points, chebyshev_center } kind =
      Kind::support_points;
  std::vector<Vector> states;  // Kind::explicit_list
  int n_directions = 100;      // Kind::support_points (2-D boundary samples)
};

struct EstimatorSetup {
  bool oracle = false;  // exact knowledge: buffer pre-filled, xi(t) = xi_true(t)
  EstimatorConfig config;
};

struct ScenarioConfig {
  VertexModel model;
  Matrix Q, R;
  double eps_margin = -1.0;  // design default when negative
  int horizon_override = 0;  // 0: use the suite's minimal horizon
  EstimatorSetup estimator;
  XiPolicy xi_policy;
  InitPolicy init_policy;
  int T = 100;
  unsigned rng_seed = 0;

  void validate() const;
};

struct TraceStep {
  int t = 0;
  Vector x, u;
  Vector xi_est;      // estimator output xi(t)
  Vector xi_true;     // plant parameter at t
  Vector xi_delayed;  // buffer head = xi(t - N) (uniform before startup)
  Vector xi_tilde;    // xi_true - xi_delayed
  double value = 0.0;
  int qp_iterations = 0;
  int active_count = 0;
  double x_margin = 0.0;  // max row residual of X at x (<= 0 means inside)
  double u_margin = 0.0;
  double c_margin = 0.0;
  double est_matrix_err = 0.0;  // |A(xi_est) - A(xi_true)|_F
};

struct Trace {
  int run_index = 0;
  unsigned seed = 0;
  int N = 0;
  Vector x0;
  std::vector<TraceStep> steps;
  Vector x_final;  // state after the last applied input
  bool xi_constant = true;
};

struct VerificationReport {
  bool constraints_ok = true;   // x in X, u in U at every step
  bool inside_C_ok = true;      // x in C at every step
  bool shift_law_ok = true;     // logged xi_tilde matches the delayed estimate
  bool decrease_applicable = false;  // zero prediction error, constant xi_true
  bool decrease_ok = true;
  bool iss_zero_residual_ok = true;  // r(t) <= 1e-6 whenever xi_tilde = 0
  double worst_x_margin = -1e300;
  double worst_u_margin = -1e300;
  double worst_c_margin = -1e300;
  double gamma_hat = 0.0;  // empirical ISS gain estimate (fit, not certified)
  double final_norm = 0.0;
  int first_violation_step = -1;

  bool pass() const {
    return constraints_ok && inside_C_ok && shift_law_ok &&
           (!decrease_applicable || decrease_ok) && iss_zero_residual_ok &&
           std::isfinite(gamma_hat);
  }
};

/// Simulates the closed loop exactly (true plant, estimator, controller) for
/// every initial state x every parameter draw; deterministic given the seed.
std::vector<Trace> run_scenario(const ScenarioConfig& cfg,
                                const DesignResult& design,
                                const SetSuite& suite);

/// Recomputes every margin and diagnostic from the trace alone.
VerificationReport verify_trace(const Trace& trace, const VertexModel& model,
                                const DesignResult& design,
                                const SetSuite& suite);

struct SweepRow {
  double gain = 0.0;
  double peak_value = 0.0;
  int settling_step = -1;  // first t with |x(tau)| <= 0.01 |x(0)| for all tau >= t
  std::vector<double> est_err;  // matrix-space estimation error per step
};

/// Runs the scenario once per filter gain on the same seed and start state.
std::vector<SweepRow> sweep_filter_gain(const ScenarioConfig& cfg,
                                        const DesignResult& design,
                                        const SetSuite& suite,
                                        const std::vector<double>& gains);

/// CSV: header row, one row per step (columns documented in the header row).
void write_trace_csv(std::ostream& os, const Trace& trace);
Trace read_trace_csv(std::istream& is);
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

void write_report(std::ostream& os, const VerificationReport& r);

int settling_step(const Trace& trace);

}  // namespace iampc
