#include "iampc/controller.hpp"

#include <istream>
#include <ostream>
#include <sstream>

namespace iampc {

ControllerState new_controller(const DesignResult& design, const SetSuite& suite,
                               const VertexModel& model) {
  model.validate();
  const std::uint64_t h = model.hash();
  if (design.model_hash != h || suite.model_hash != h)
    throw std::invalid_argument("new_controller: artifact/model hash mismatch");
  if (suite.N < 1)
    throw std::invalid_argument("new_controller: horizon must be >= 1");
  ControllerState s;
  s.model = model;
  s.design = design;
  s.suite = suite;
  s.buffer.entries.assign(static_cast<std::size_t>(suite.N) + 1,
                          SimplexVec::uniform(model.n_vertices()));
  return s;
}

namespace {

// Feasibility candidate: previous optimum shifted one stage, extended with
// the terminal control law at the predicted stage-(N-1) state.
Vector build_warm_start(const ControllerState& s, const Vector& x) {
  const int N = s.suite.N, m = s.model.n_inputs();
  Vector ws = Vector::Zero(N * m);
  if (!s.last_solution || s.last_solution->status != QPStatus::optimal)
    return ws;
  for (int k = 0; k + 1 < N; ++k)
    ws.segment(k * m, m) = s.last_solution->u_sequence[k + 1];
  Vector xk = x;
  for (int k = 0; k + 1 < N; ++k)
    xk = s.model.blend_A(s.buffer.entries[k]) * xk +
         s.model.B * ws.segment(k * m, m);
  ws.segment((N - 1) * m, m) =
      kappa(s.design, s.buffer.entries[N - 1]) * xk;
  return ws;
}

}  // namespace

Vector control_step(ControllerState& state, const Vector& x,
                    const SimplexVec& xi_new, StepDiag* diag) {
  if (xi_new.size() != state.model.n_vertices())
    throw std::invalid_argument("control_step: estimate dimension mismatch");
  // Delayed prediction: drop the head, append the fresh estimate.
  state.buffer.entries.erase(state.buffer.entries.begin());
  state.buffer.entries.push_back(xi_new);

  // The measured state is a fact; report a violation of X but proceed.
  double viol = 0.0;
  if (state.model.X.rows() > 0)
    viol = (state.model.X.normals() * x - state.model.X.offsets()).maxCoeff();

  CondensedQP qp;
  try {
    qp = condense(state.model, state.design, state.suite, state.buffer, x);
  } catch (const std::invalid_argument& e) {
    throw InfeasibleOnline(
        std::string("control_step: state left the feasible region (") +
        e.what() +
        "); this contradicts the recursive-feasibility certificate and "
        "indicates an artifact or tolerance bug");
  }
  const Vector ws = build_warm_start(state, x);
  QPSolution sol = solve_qp(qp, ws);
  if (sol.status != QPStatus::optimal) {
    std::ostringstream msg;
    msg << "control_step: online problem "
        << (sol.status == QPStatus::infeasible ? "infeasible" : "did not converge")
        << " at step " << state.step_count
        << "; the theory certifies feasibility from C, so this indicates an "
           "artifact or tolerance bug. x = [" << x.transpose() << "]";
    throw InfeasibleOnline(msg.str());
  }
  if (diag) {
    diag->value = sol.objective;
    diag->active_rows = sol.active_rows;
    diag->iterations = sol.iterations;
    diag->x_violation = viol;
    diag->x_outside_X = viol > kSetTol;
  }
  Vector u = sol.u_sequence.front();
  state.last_solution = std::move(sol);
  ++state.step_count;
  return u;
}

double value_of(const ControllerState& state, const Vector& x) {
  return value_function(state.model, state.design, state.suite, state.buffer, x);
}

void save_controller(std::ostream& os, const ControllerState& s) {
  os << "controller 1\n";
  save_model(os, s.model);
  save_design(os, s.design);
  os << "suite " << s.suite.N << " " << s.suite.rci_iterations << " "
     << s.suite.mcas_iterations << " " << s.suite.model_hash << " "
     << s.suite.tol << " " << s.suite.S_family.size() << "\n";
  save_polytope(os, s.suite.C);
  save_polytope(os, s.suite.C_xu);
  save_polytope(os, s.suite.X_N);
  for (const Polytope& S : s.suite.S_family) save_polytope(os, S);
  os << "buffer " << s.buffer.entries.size() << "\n";
  for (const SimplexVec& xi : s.buffer.entries)
    write_matrix(os, "xi", xi.weights());
  os << "step_count " << s.step_count << "\n";
  os << "last_solution " << (s.last_solution ? 1 : 0) << "\n";
  if (s.last_solution) {
    os << "u_sequence " << s.last_solution->u_sequence.size() << "\n";
    for (const Vector& u : s.last_solution->u_sequence) write_matrix(os, "u", u);
  }
}

ControllerState load_controller(std::istream& is) {
  std::string tag;
  int version = 0;
  is >> tag >> version;
  if (tag != "controller" || version != 1)
    throw std::runtime_error("load_controller: bad header");
  ControllerState s;
  s.model = load_model(is);
  s.design = load_design(is);
  std::size_t fam = 0;
  is >> tag >> s.suite.N >> s.suite.rci_iterations >> s.suite.mcas_iterations >>
      s.suite.model_hash >> s.suite.tol >> fam;
  if (tag != "suite") throw std::runtime_error("load_controller: bad suite tag");
  s.suite.C = load_polytope(is);
  s.suite.C_xu = load_polytope(is);
  s.suite.X_N = load_polytope(is);
  s.suite.S_family.clear();
  for (std::size_t i = 0; i < fam; ++i)
    s.suite.S_family.push_back(load_polytope(is));
  std::size_t nbuf = 0;
  is >> tag >> nbuf;
  if (tag != "buffer") throw std::runtime_error("load_controller: bad buffer tag");
  s.buffer.entries.clear();
  for (std::size_t i = 0; i < nbuf; ++i)
    s.buffer.entries.emplace_back(read_matrix(is, "xi"));
  is >> tag >> s.step_count;
  if (tag != "step_count")
    throw std::runtime_error("load_controller: bad step_count tag");
  int has_sol = 0;
  is >> tag >> has_sol;
  if (tag != "last_solution")
    throw std::runtime_error("load_controller: bad last_solution tag");
  if (has_sol) {
    std::size_t nu = 0;
    is >> tag >> nu;
    if (tag != "u_sequence")
      throw std::runtime_error("load_controller: bad u_sequence tag");
    QPSolution sol;
    sol.status = QPStatus::optimal;
    for (std::size_t i = 0; i < nu; ++i)
      sol.u_sequence.push_back(read_matrix(is, "u"));
    s.last_solution = std::move(sol);
  }
  return s;
}

}  // namespace iampc
