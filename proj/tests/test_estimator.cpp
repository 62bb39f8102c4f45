#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "iampc/estimator.hpp"
#include "iampc/qp.hpp"
#include "test_util.hpp"

using namespace iampc;
using namespace iampc::testutil;

namespace {

// Projection onto the simplex phrased as a QP, solved by the dense solver:
//   min 1/2 |w - v|^2  s.t.  w >= 0, sum w = 1 (equality as opposing rows).
Vector qp_projection(const Vector& v) {
  const int l = static_cast<int>(v.size());
  Matrix H = Matrix::Identity(l, l);
  Vector g = -v;
  Matrix A(l + 2, l);
  Vector b(l + 2);
  A.topRows(l) = -Matrix::Identity(l, l);
  b.head(l).setZero();
  A.row(l) = Vector::Ones(l).transpose();
  b(l) = 1.0;
  A.row(l + 1) = -Vector::Ones(l).transpose();
  b(l + 1) = -1.0;
  QPResult r = solve_qp_dense(H, g, A, b);
  REQUIRE(r.status == QPStatus::optimal);
  return r.x;
}

// Three generic vertices in R^2: no pair is collinear, so the regressor
// columns A_i x span independently for generic x and rho is identifiable.
VertexModel identifiable_model() {
  VertexModel m;
  m.vertex_A = {mat(2, 2, {1.0, 0.2, 0.0, 1.0}),
                mat(2, 2, {0.9, 0.3, 0.4, 0.6}),
                mat(2, 2, {0.95, 0.0, 0.8, 1.02})};
  m.B = mat(2, 1, {-0.035, -0.905});
  m.X = Polytope::box(vec({15, 15}));
  m.U = Polytope::box(vec({10}));
  return m;
}

DataTriple exact_triple(std::mt19937_64& rng, const VertexModel& model,
                        const SimplexVec& xi_true) {
  DataTriple d;
  d.x_prev = random_vec(rng, model.n_states(), -3, 3);
  d.u_prev = random_vec(rng, model.n_inputs(), -2, 2);
  d.x_next = model.blend_A(xi_true) * d.x_prev + model.B * d.u_prev;
  return d;
}

void check_simplex(const SimplexVec& xi) {
  CHECK(xi.weights().minCoeff() >= -1e-12);
  CHECK(xi.weights().sum() == doctest::Approx(1.0).epsilon(1e-12));
}

}  // namespace

TEST_CASE("simplex projection: closed-form cases") {
  // Points already on the simplex are fixed points.
  SimplexVec in = project_simplex(vec({0.2, 0.5, 0.3}));
  CHECK((in.weights() - vec({0.2, 0.5, 0.3})).norm() <= 1e-12);

  SimplexVec a = project_simplex(vec({2, 0, 0}));
  CHECK((a.weights() - vec({1, 0, 0})).norm() <= 1e-12);

  // Symmetric input projects to the barycenter.
  SimplexVec b = project_simplex(vec({0.5, 0.5, 0.5}));
  for (int i = 0; i < 3; ++i)
    CHECK(b[i] == doctest::Approx(1.0 / 3).epsilon(1e-12));

  // Strongly negative coordinates clip to zero.
  SimplexVec c = project_simplex(vec({-5, 0.4, 0.9}));
  CHECK(c[0] == doctest::Approx(0.0).scale(1.0));
  CHECK(c[1] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(c[2] == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("simplex projection matches the QP oracle") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const int l = 2 + static_cast<int>(rng() % 5);  // 2..6
    Vector v = random_vec(rng, l, -3, 3);
    SimplexVec p = project_simplex(v);
    check_simplex(p);
    Vector q = qp_projection(v);
    CHECK((p.weights() - q).norm() <= 1e-7);
  }
}

TEST_CASE("simplex projection optimality against random feasible points") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const int l = 3 + static_cast<int>(rng() % 3);
    Vector v = random_vec(rng, l, -2, 2);
    SimplexVec p = project_simplex(v);
    const double dp = (v - p.weights()).norm();
    for (int s = 0; s < 100; ++s) {
      Vector w = random_simplex_point(rng, l);
      CHECK(dp <= (v - w).norm() + 1e-12);
    }
  }
}

TEST_CASE("least squares recovers an exact vertex") {
  std::mt19937_64 rng(3);
  const VertexModel model = identifiable_model();
  for (int j = 0; j < model.n_vertices(); ++j) {
    SimplexVec truth = SimplexVec::vertex(model.n_vertices(), j);
    std::deque<DataTriple> window;
    for (int t = 0; t < 3; ++t) window.push_back(exact_triple(rng, model, truth));
    LsResult ls = ls_estimate(window, model, Vector::Zero(3), 0.0);
    CHECK_FALSE(ls.min_norm_fallback);
    CHECK((ls.rho - truth.weights()).norm() <= 1e-8);
  }
}

TEST_CASE("least squares: regularizer dominates a zero-information window") {
  const VertexModel model = identifiable_model();
  std::deque<DataTriple> window;
  window.push_back({Vector::Zero(2), Vector::Zero(1), Vector::Zero(2)});
  Vector prev = vec({0.2, 0.3, 0.5});
  LsResult ls = ls_estimate(window, model, prev, 1e-6);
  CHECK((ls.rho - prev).norm() <= 1e-10);

  // Same window without regularization: singular system, flagged min-norm.
  LsResult mn = ls_estimate(window, model, prev, 0.0);
  CHECK(mn.min_norm_fallback);
  CHECK(mn.rho.allFinite());

  CHECK_THROWS_AS(ls_estimate({}, model, prev, 0.0), std::invalid_argument);
}

TEST_CASE("least squares matches the blended matrix under degeneracy") {
  // The benchmark plant has collinear vertices (A_2, A_3 are multiples of
  // A_1), so rho itself is not identifiable; the blended matrix still is.
  std::mt19937_64 rng(17);
  const VertexModel model = example_model();
  const int l = model.n_vertices();
  for (int trial = 0; trial < 25; ++trial) {
    SimplexVec truth(random_simplex_point(rng, l));
    std::deque<DataTriple> window;
    for (int t = 0; t < l; ++t) window.push_back(exact_triple(rng, model, truth));
    LsResult ls = ls_estimate(window, model, Vector::Zero(l), 0.0);
    Matrix blended = Matrix::Zero(2, 2);
    for (int i = 0; i < l; ++i) blended += ls.rho(i) * model.vertex_A[i];
    CHECK((blended - model.blend_A(truth)).norm() <= 1e-6);
  }
}

TEST_CASE("estimator step: jump, freeze and warm start") {
  std::mt19937_64 rng(5);
  const VertexModel model = identifiable_model();
  const int l = model.n_vertices();
  SimplexVec truth = SimplexVec::vertex(l, 1);

  // Initial estimate is uniform.
  EstimatorState s = new_estimator({3, 1.0, 0.0}, l);
  for (int i = 0; i < l; ++i)
    CHECK(s.xi_current[i] == doctest::Approx(1.0 / l).epsilon(1e-12));

  // Unit filter gain with exact identifiable data: the estimate jumps to the
  // true vertex once the window holds enough information.
  SimplexVec xi = s.xi_current;
  for (int t = 0; t < 3; ++t) {
    DataTriple d = exact_triple(rng, model, truth);
    xi = estimator_step(s, d.x_prev, d.u_prev, d.x_next, model);
    check_simplex(xi);
  }
  CHECK((xi.weights() - truth.weights()).norm() <= 1e-7);

  // Zero gain: the estimate never moves regardless of the data.
  EstimatorState frozen = new_estimator({3, 0.0, 1e-8}, l);
  for (int t = 0; t < 5; ++t) {
    DataTriple d = exact_triple(rng, model, truth);
    SimplexVec out = estimator_step(frozen, d.x_prev, d.u_prev, d.x_next, model);
    for (int i = 0; i < l; ++i)
      CHECK(out[i] == doctest::Approx(1.0 / l).epsilon(1e-12));
  }

  CHECK_THROWS_AS(new_estimator({0, 0.5, 0.0}, l), std::invalid_argument);
  CHECK_THROWS_AS(new_estimator({3, 1.5, 0.0}, l), std::invalid_argument);
}

TEST_CASE("filter decays the estimation error geometrically") {
  std::mt19937_64 rng(23);
  const VertexModel model = identifiable_model();
  const int l = model.n_vertices();
  for (double gain : {0.5, 0.05}) {
    SimplexVec truth(random_simplex_point(rng, l));
    EstimatorState s = new_estimator({3, gain, 0.0}, l);
    double prev_err = -1.0;
    for (int t = 0; t < 12; ++t) {
      DataTriple d = exact_triple(rng, model, truth);
      SimplexVec xi = estimator_step(s, d.x_prev, d.u_prev, d.x_next, model);
      double err = matrix_space_error(model, xi, truth);
      if (t >= 3) {
        // After the window fills, exact data makes the projected solution
        // equal the truth, so the error contracts by exactly (1 - gain).
        CHECK(err <= (1.0 - gain) * prev_err + 1e-9);
        if (prev_err > 1e-9)
          CHECK(err / prev_err == doctest::Approx(1.0 - gain).epsilon(1e-6));
      }
      prev_err = err;
    }
  }
}

TEST_CASE("estimates stay on the simplex for adversarial data") {
  std::mt19937_64 rng(31);
  const VertexModel model = example_model();
  EstimatorState s = new_estimator({3, 0.5, 1e-8}, model.n_vertices());
  for (int t = 0; t < 50; ++t) {
    Vector xp = 1e3 * random_vec(rng, 2);
    Vector up = 1e3 * random_vec(rng, 1);
    Vector xn = 1e3 * random_vec(rng, 2);
    SimplexVec xi = estimator_step(s, xp, up, xn, model);
    check_simplex(xi);
    CHECK(static_cast<int>(s.window.size()) <= 3);
  }
}
