#include "iampc/invariant_sets.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace iampc {

namespace {

// {x in Sx : exists u in U with A_i x + B u in T for every A_i in As},
// computed by eliminating u from the lifted (x,u) polytope.
Polytope exists_input(const std::vector<Matrix>& As, const Matrix& B,
                      const Polytope& Sx, const Polytope& U,
                      const Polytope& T) {
  const int n = static_cast<int>(B.rows());
  const int m = static_cast<int>(B.cols());
  const int l = static_cast<int>(As.size());
  const int rows = Sx.rows() + U.rows() + l * T.rows();
  Matrix A = Matrix::Zero(rows, n + m);
  Vector b(rows);
  int r = 0;
  A.block(r, 0, Sx.rows(), n) = Sx.normals();
  b.segment(r, Sx.rows()) = Sx.offsets();
  r += Sx.rows();
  A.block(r, n, U.rows(), m) = U.normals();
  b.segment(r, U.rows()) = U.offsets();
  r += U.rows();
  for (int i = 0; i < l; ++i) {
    A.block(r, 0, T.rows(), n) = T.normals() * As[i];
    A.block(r, n, T.rows(), m) = T.normals() * B;
    b.segment(r, T.rows()) = T.offsets();
    r += T.rows();
  }
  std::vector<int> drop(m);
  for (int k = 0; k < m; ++k) drop[k] = n + k;
  return eliminate(Polytope(std::move(A), std::move(b)), drop);
}

void require_interior(const Polytope& P, const std::string& what) {
  auto [c, rad] = chebyshev_center(P);
  (void)c;
  if (rad <= 1e-9)
    throw std::runtime_error(what + ": set has empty interior (Chebyshev radius " +
                             std::to_string(rad) + ")");
}

std::vector<Vector> sphere_directions(int dim, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Vector> dirs;
  dirs.reserve(count);
  while (static_cast<int>(dirs.size()) < count) {
    Vector d(dim);
    for (int i = 0; i < dim; ++i) d(i) = gauss(rng);
    double nrm = d.norm();
    if (nrm < 1e-12) continue;
    dirs.push_back(d / nrm);
  }
  return dirs;
}

}  // namespace

Polytope max_rci(const VertexModel& model, int max_iter, double tol,
                 int* iterations_out) {
  model.validate();
  Polytope C = model.X;
  for (int h = 0; h < max_iter; ++h) {
    Polytope next = exists_input(model.vertex_A, model.B, C, model.U, C);
    if (is_empty(next))
      throw std::runtime_error("max_rci: no RCI set within X (iterate " +
                               std::to_string(h + 1) + " is empty)");
    if (set_equal(next, C, tol)) {
      require_interior(next, "max_rci");
      if (iterations_out) *iterations_out = h + 1;
      return next;
    }
    C = std::move(next);
  }
  throw std::runtime_error(
      "max_rci: fixpoint not reached after " + std::to_string(max_iter) +
      " iterations; last iterate has " + std::to_string(C.rows()) + " rows");
}

Polytope build_cxu(const VertexModel& model, const Polytope& C) {
  if (C.dim() != model.n_states())
    throw std::invalid_argument("build_cxu: C dimension mismatch");
  const int n = model.n_states();
  const int m = model.n_inputs();
  const int l = model.n_vertices();
  const int rows = C.rows() + model.U.rows() + l * C.rows();
  Matrix A = Matrix::Zero(rows, n + m);
  Vector b(rows);
  int r = 0;
  A.block(r, 0, C.rows(), n) = C.normals();
  b.segment(r, C.rows()) = C.offsets();
  r += C.rows();
  A.block(r, n, model.U.rows(), m) = model.U.normals();
  b.segment(r, model.U.rows()) = model.U.offsets();
  r += model.U.rows();
  for (int i = 0; i < l; ++i) {
    A.block(r, 0, C.rows(), n) = C.normals() * model.vertex_A[i];
    A.block(r, n, C.rows(), m) = C.normals() * model.B;
    b.segment(r, C.rows()) = C.offsets();
    r += C.rows();
  }
  Polytope cxu = remove_redundant(Polytope(std::move(A), std::move(b)));
  if (is_empty(cxu))
    throw std::runtime_error(
        "build_cxu: empty result, contradicting the RCI property of C");
  return cxu;
}

Polytope mcas(const VertexModel& model, const DesignResult& design,
              const Polytope& X_xu, int max_iter, double tol,
              int* iterations_out) {
  const int n = model.n_states();
  const int m = model.n_inputs();
  const int l = model.n_vertices();
  if (X_xu.dim() != n + m)
    throw std::invalid_argument("mcas: X_xu must live in state x input space");
  if (static_cast<int>(design.K.size()) != l)
    throw std::invalid_argument("mcas: design/model vertex count mismatch");

  // X^(0): (x, K_i x) in X_xu at every vertex; convexity of X_xu extends
  // this to every blended gain.
  Polytope X0;
  for (int i = 0; i < l; ++i) {
    Matrix lift(n + m, n);
    lift.topRows(n) = Matrix::Identity(n, n);
    lift.bottomRows(m) = design.K[i];
    Polytope Pi = preimage_linear(X_xu, lift);
    X0 = (i == 0) ? Pi : intersect(X0, Pi);
  }

  Polytope Xh = remove_redundant(X0);
  for (int h = 0; h < max_iter; ++h) {
    Polytope next = Xh;
    for (int i = 0; i < l; ++i)
      next = intersect(next,
                       preimage_linear(Xh, model.vertex_A[i] + model.B * design.K[i]));
    if (is_empty(next)) throw std::runtime_error("mcas: iterate became empty");
    if (set_equal(next, Xh, tol)) {
      require_interior(next, "mcas");
      if (iterations_out) *iterations_out = h + 1;
      return next;
    }
    Xh = std::move(next);
  }
  throw std::runtime_error("mcas: fixpoint not reached after " +
                           std::to_string(max_iter) + " iterations");
}

Polytope backward_step(const VertexModel& model, const Polytope& S_h,
                       const Polytope& X, const Polytope& U) {
  if (is_empty(S_h)) throw std::invalid_argument("backward_step: S_h is empty");
  Polytope out;
  for (int i = 0; i < model.n_vertices(); ++i) {
    Polytope Si = exists_input({model.vertex_A[i]}, model.B, X, U, S_h);
    if (is_empty(Si))
      throw std::runtime_error("backward_step: S_i empty at vertex " +
                               std::to_string(i + 1));
    out = (i == 0) ? Si : intersect(out, Si);
  }
  return out;
}

std::pair<int, std::vector<Polytope>> min_horizon(const VertexModel& model,
                                                  const Polytope& X_N,
                                                  const Polytope& C, int h_max) {
  std::vector<Polytope> family{X_N};
  std::vector<double> coverage;
  auto dirs = sphere_directions(C.dim(), 64, 0x5e7f00d);
  auto pts = support_points(C, dirs);
  for (int h = 0; h <= h_max; ++h) {
    if (is_subset(C, family[h])) {
      family.resize(h + 1);
      return {h, std::move(family)};
    }
    int hit = 0;
    for (const auto& sp : pts)
      if (contains(family[h], sp.point, kSetTol)) ++hit;
    coverage.push_back(static_cast<double>(hit) / pts.size());
    if (h == h_max) break;
    family.push_back(backward_step(model, family[h], model.X, model.U));
  }
  std::ostringstream os;
  os << "min_horizon: C not covered within " << h_max
     << " steps; support-point coverage per step:";
  for (size_t h = 0; h < coverage.size(); ++h)
    os << " S(" << h << ")=" << coverage[h];
  throw std::runtime_error(os.str());
}

SetSuite build_set_suite(const VertexModel& model, const DesignResult& design,
                         int max_iter, double tol, int h_max) {
  if (design.model_hash != model.hash())
    throw std::invalid_argument(
        "build_set_suite: design was produced for a different model");
  SetSuite s;
  s.tol = tol;
  s.model_hash = model.hash();
  auto stage = [](const std::string& name, auto&& fn) {
    try {
      return fn();
    } catch (const std::exception& e) {
      throw std::runtime_error("build_set_suite[" + name + "]: " + e.what());
    }
  };
  s.C = stage("max_rci",
              [&] { return max_rci(model, max_iter, tol, &s.rci_iterations); });
  s.C_xu = stage("build_cxu", [&] { return build_cxu(model, s.C); });
  s.X_N = stage("mcas", [&] {
    return mcas(model, design, s.C_xu, max_iter, tol, &s.mcas_iterations);
  });
  auto [N, fam] = stage("min_horizon", [&] {
    return min_horizon(model, s.X_N, s.C, h_max);
  });
  s.N = N;
  s.S_family = std::move(fam);
  return s;
}

void save_set_suite(const std::string& dir, const SetSuite& suite) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  auto write = [&](const std::string& name, const Polytope& P) {
    save_polytope_file((fs::path(dir) / name).string(), P);
  };
  write("C.poly", suite.C);
  write("C_xu.poly", suite.C_xu);
  write("X_N.poly", suite.X_N);
  for (size_t h = 0; h < suite.S_family.size(); ++h) {
    char name[32];
    std::snprintf(name, sizeof(name), "S_%03zu.poly", h);
    write(name, suite.S_family[h]);
  }
  std::ofstream os((fs::path(dir) / "manifest.txt").string());
  os.precision(17);
  os << "set_suite\n"
     << "model_hash " << suite.model_hash << "\n"
     << "tol " << suite.tol << "\n"
     << "N " << suite.N << "\n"
     << "rci_iterations " << suite.rci_iterations << "\n"
     << "mcas_iterations " << suite.mcas_iterations << "\n"
     << "family_size " << suite.S_family.size() << "\n";
  if (!os) throw std::runtime_error("save_set_suite: write failed: " + dir);
}

SetSuite load_set_suite(const std::string& dir) {
  namespace fs = std::filesystem;
  std::ifstream is((fs::path(dir) / "manifest.txt").string());
  if (!is) throw std::runtime_error("load_set_suite: cannot open manifest in " + dir);
  std::string tag, key;
  is >> tag;
  if (tag != "set_suite")
    throw std::runtime_error("load_set_suite: bad manifest header '" + tag + "'");
  SetSuite s;
  size_t family_size = 0;
  auto expect = [&](const std::string& want, auto& value) {
    is >> key >> value;
    if (!is || key != want)
      throw std::runtime_error("load_set_suite: malformed manifest near '" + want + "'");
  };
  expect("model_hash", s.model_hash);
  expect("tol", s.tol);
  expect("N", s.N);
  expect("rci_iterations", s.rci_iterations);
  expect("mcas_iterations", s.mcas_iterations);
  expect("family_size", family_size);
  s.C = load_polytope_file((fs::path(dir) / "C.poly").string());
  s.C_xu = load_polytope_file((fs::path(dir) / "C_xu.poly").string());
  s.X_N = load_polytope_file((fs::path(dir) / "X_N.poly").string());
  for (size_t h = 0; h < family_size; ++h) {
    char name[32];
    std::snprintf(name, sizeof(name), "S_%03zu.poly", h);
    s.S_family.push_back(load_polytope_file((fs::path(dir) / name).string()));
  }
  return s;
}

}  // namespace iampc
