#pragma once

#include <string>
#include <utility>
#include <vector>

#include "iampc/design.hpp"
#include "iampc/model.hpp"
#include "iampc/polytope.hpp"

namespace iampc {

/// The constraint sets the controller needs at run time:
///   C     maximal robust control invariant subset of X,
///   C_xu  admissible state-input pairs staying inside C for every vertex,
///   X_N   terminal set (maximal constraint admissible set for the vertex
///         feedback family inside C_xu),
///   N     smallest horizon whose backward reachable set covers C,
///   S_family  S^(0) .. S^(N) kept for diagnostics and incremental reruns.
struct SetSuite {
  Polytope C;
  Polytope C_xu;
  Polytope X_N;
  int N = 0;
  std::vector<Polytope> S_family;

  int rci_iterations = 0;
  int mcas_iterations = 0;
  std::uint64_t model_hash = 0;
  double tol = kSetTol;
};

/// Maximal robust control invariant set inside X:
///   C^(0) = X,  C^(h+1) = {x : exists u in U with A_i x + B u in C^(h)
///   for every vertex i} intersected with C^(h), iterated to a fixpoint.
/// Throws on empty result ("no RCI set within X") or when max_iter steps do
/// not reach the fixpoint. `iterations_out`, when non-null, receives the
/// number of refinement steps performed.
Polytope max_rci(const VertexModel& model, int max_iter = 200,
                 double tol = kSetTol, int* iterations_out = nullptr);

/// C_xu = {(x,u) in C x U : A_i x + B u in C for every vertex i},
/// redundancy-removed, in dimension n+m.
Polytope build_cxu(const VertexModel& model, const Polytope& C);

/// Maximal constraint admissible set of the vertex feedback family:
///   X^(0)   = {x : (x, K_i x) in X_xu for every i}
///   X^(h+1) = {x : (A_i + B K_i) x in X^(h) for every i} intersected with
///             X^(h), iterated to a fixpoint.
/// Vertex containment suffices for all of Xi: X_xu is convex and both the
/// blended gain and the blended closed-loop map are convex combinations of
/// their vertex values.
Polytope mcas(const VertexModel& model, const DesignResult& design,
              const Polytope& X_xu, int max_iter = 200, double tol = kSetTol,
              int* iterations_out = nullptr);

/// One backward step of the per-vertex reachable family:
///   S_i^(h+1) = {x in X : exists u in U with A_i x + B u in S_h},
///   S^(h+1)   = intersection over i.
/// Throws (naming the first offending vertex) when some S_i is empty.
Polytope backward_step(const VertexModel& model, const Polytope& S_h,
                       const Polytope& X, const Polytope& U);

/// Smallest N <= h_max with C contained in S^(N), where S^(0) = X_N and each
/// step applies backward_step. Returns N and the family S^(0)..S^(N).
/// Throws when h_max is reached first; the message reports, per step, the
/// fraction of C's support points already covered.
std::pair<int, std::vector<Polytope>> min_horizon(const VertexModel& model,
                                                  const Polytope& X_N,
                                                  const Polytope& C,
                                                  int h_max = 50);

/// Runs the whole pipeline: max_rci, build_cxu, mcas (with X_xu = C_xu),
/// min_horizon. Errors from each stage are rethrown with a stage label.
SetSuite build_set_suite(const VertexModel& model, const DesignResult& design,
                         int max_iter = 200, double tol = kSetTol,
                         int h_max = 50);

/// Directory layout: manifest.txt plus one polytope file per set
/// (C.poly, C_xu.poly, X_N.poly, S_000.poly .. S_NNN.poly).
void save_set_suite(const std::string& dir, const SetSuite& suite);
SetSuite load_set_suite(const std::string& dir);

}  // namespace iampc
