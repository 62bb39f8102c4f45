#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "iampc/polytope.hpp"
#include "test_util.hpp"

using namespace iampc;
using namespace iampc::testutil;

static Polytope unit_box(int n) {
  return Polytope::box(Vector::Constant(n, 1.0));
}

TEST_CASE("contains: interior, boundary, violation") {
  Polytope P = unit_box(2);
  CHECK(contains(P, vec({0, 0}), 1e-9));
  CHECK(contains(P, vec({1, 1}), 1e-9));
  CHECK_FALSE(contains(P, vec({1 + 1e-6, 0}), 1e-9));
  CHECK_THROWS(contains(P, vec({0, 0, 0})));
}

TEST_CASE("solve_lp basic cases") {
  Polytope P = unit_box(2);
  auto s = solve_lp(vec({1, 0}), P, LPSense::maximize);
  REQUIRE(s.status == LPStatus::optimal);
  CHECK(s.objective == doctest::Approx(1.0));

  // {x1 >= 2, x1 <= 1} infeasible
  Polytope Q(mat(2, 1, {-1, 1}), vec({-2, 1}));
  CHECK(solve_lp(vec({1}), Q, LPSense::minimize).status == LPStatus::infeasible);

  // simplex in R^2: x >= 0, x1 + x2 <= 1
  Polytope S(mat(3, 2, {-1, 0, 0, -1, 1, 1}), vec({0, 0, 1}));
  auto s2 = solve_lp(vec({1, 1}), S, LPSense::maximize);
  REQUIRE(s2.status == LPStatus::optimal);
  CHECK(s2.objective == doctest::Approx(1.0));

  // unbounded
  Polytope H(mat(1, 1, {-1}), vec({0}));  // x >= 0
  CHECK(solve_lp(vec({1}), H, LPSense::maximize).status == LPStatus::unbounded);
}

TEST_CASE("solve_lp strong duality on random LPs") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    int n = 1 + static_cast<int>(rng() % 3);
    Polytope P = random_polytope(rng, n);
    Vector c = random_vec(rng, n, -2, 2);
    auto s = solve_lp(c, P, LPSense::minimize);
    REQUIRE(s.status == LPStatus::optimal);
    // Primal feasibility.
    CHECK(contains(P, s.optimizer, 1e-7));
    // Dual bound: objective == -b'y, y >= 0, c + A'y = 0.
    REQUIRE(s.duals.size() == P.rows());
    CHECK(s.duals.minCoeff() >= -1e-9);
    CHECK((c + P.normals().transpose() * s.duals).norm() <= 1e-7);
    CHECK(std::abs(s.objective + P.offsets().dot(s.duals)) <= 1e-7 * (1 + std::abs(s.objective)));
  }
}

TEST_CASE("is_subset") {
  Polytope P = unit_box(2);
  Polytope Q = Polytope::box(Vector::Constant(2, 2.0));
  CHECK(is_subset(P, Q));
  CHECK_FALSE(is_subset(Q, P));
  CHECK(is_subset(P, P));
  // Empty P is a subset of everything.
  Polytope E(mat(2, 1, {1, -1}), vec({0, -1}));  // x <= 0, x >= 1
  CHECK(is_subset(E, Polytope::box(Vector::Constant(1, 0.1))));
}

TEST_CASE("intersect") {
  Polytope A = Polytope::box(vec({-2, -2}), vec({2, 2}));
  Polytope B = Polytope::box(vec({-1, -1}), vec({3, 3}));
  Polytope C = intersect(A, B);
  CHECK(set_equal(C, Polytope::box(vec({-1, -1}), vec({2, 2}))));

  std::mt19937_64 rng(3);
  Polytope P = random_polytope(rng, 2);
  CHECK(set_equal(intersect(P, P), P));

  Polytope H1(mat(1, 1, {1}), vec({0}));   // x <= 0
  Polytope H2(mat(1, 1, {-1}), vec({-1})); // x >= 1
  CHECK(is_empty(intersect(H1, H2)));
}

TEST_CASE("intersect subset property (random)") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    int n = 1 + static_cast<int>(rng() % 3);
    Polytope P = random_polytope(rng, n);
    Polytope Q = random_polytope(rng, n);
    Polytope I = intersect(P, Q);
    CHECK(is_subset(I, P));
    CHECK(is_subset(I, Q));
  }
}

TEST_CASE("preimage_linear") {
  Polytope I1 = unit_box(1);
  Polytope half = preimage_linear(I1, mat(1, 1, {2}));
  CHECK(set_equal(half, Polytope::box(Vector::Constant(1, 0.5))));

  Polytope P = unit_box(2);
  CHECK(set_equal(preimage_linear(P, Matrix::Identity(2, 2)), P));

  Matrix rot = mat(2, 2, {0, -1, 1, 0});
  CHECK(set_equal(preimage_linear(P, rot), P));

  CHECK_THROWS(preimage_linear(P, Matrix::Identity(3, 3)));
}

TEST_CASE("preimage identity property (random)") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 30; ++trial) {
    int n = 1 + static_cast<int>(rng() % 3);
    Polytope P = random_polytope(rng, n);
    CHECK(set_equal(preimage_linear(P, Matrix::Identity(n, n)), P));
  }
}

TEST_CASE("remove_redundant") {
  Polytope P(mat(2, 1, {1, 1}), vec({1, 2}));
  Polytope R = remove_redundant(P);
  CHECK(R.rows() == 1);
  CHECK(R.offsets()(0) == doctest::Approx(1.0));

  Polytope B = unit_box(2);
  CHECK(remove_redundant(B).rows() == 4);

  Polytope D(mat(3, 1, {1, 1, -1}), vec({1, 1, 1}));
  CHECK(remove_redundant(D).rows() == 2);
}

TEST_CASE("remove_redundant preserves the set (random)") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 40; ++trial) {
    int n = 1 + static_cast<int>(rng() % 3);
    Polytope P = random_polytope(rng, n);
    // Pad with redundant copies at looser offsets.
    Matrix A(2 * P.rows(), n);
    Vector b(2 * P.rows());
    A << P.normals(), P.normals();
    b << P.offsets(), (P.offsets().array() + 0.5).matrix();
    Polytope padded(A, b);
    Polytope R = remove_redundant(padded);
    CHECK(set_equal(R, P));
    CHECK(R.rows() <= P.rows());
  }
}

TEST_CASE("eliminate: basic cases") {
  // {|x|<=1, |u|<=1, |x+u|<=1}, eliminate u -> {|x|<=1}
  Matrix A(6, 2);
  Vector b(6);
  A << 1, 0, -1, 0, 0, 1, 0, -1, 1, 1, -1, -1;
  b << 1, 1, 1, 1, 1, 1;
  Polytope P(A, b);
  Polytope E = eliminate(P, {1});
  CHECK(set_equal(E, Polytope::box(Vector::Constant(1, 1.0))));

  CHECK(set_equal(eliminate(P, {}), P));

  Polytope B = unit_box(2);
  CHECK(set_equal(eliminate(B, {1}), Polytope::box(Vector::Constant(1, 1.0))));
}

TEST_CASE("eliminate matches per-point LP feasibility oracle") {
  std::mt19937_64 rng(23);
  int agree = 0, total = 0;
  for (int trial = 0; trial < 10; ++trial) {
    Polytope P = random_polytope(rng, 3);
    Polytope E = eliminate(P, {2});
    for (int s = 0; s < 120; ++s) {
      Vector x = random_vec(rng, 2, -2.5, 2.5);
      // Oracle: exists u with (x,u) in P ?
      Matrix Au = P.normals().col(2);
      Vector bu = P.offsets() - P.normals().leftCols(2) * x;
      bool feas = solve_lp_dense(Vector::Zero(1), Au, bu, LPSense::minimize).status ==
                  LPStatus::optimal;
      bool in_proj = contains(E, x, 1e-7);
      // Skip points within tol of the boundary where both answers are legitimate.
      double margin = (E.rows() ? (E.normals() * x - E.offsets()).maxCoeff() : -1.0);
      if (std::abs(margin) < 1e-6) continue;
      ++total;
      if (feas == in_proj) ++agree;
    }
  }
  CHECK(total > 500);
  CHECK(agree == total);
}

TEST_CASE("eliminate row cap") {
  std::mt19937_64 rng(29);
  // Many constraints all involving u -> quadratic pair blow-up beyond a tiny cap.
  int m = 40;
  Matrix A(m, 2);
  Vector b(m);
  for (int i = 0; i < m; ++i) {
    Vector a = random_unit_vec(rng, 2);
    A.row(i) = a.transpose();
    b(i) = 1.0;
  }
  Polytope P(A, b);
  CHECK_THROWS_AS(eliminate(P, {1}, 10), std::runtime_error);
}

TEST_CASE("chebyshev_center") {
  auto [c, r] = chebyshev_center(unit_box(2));
  CHECK(c.norm() == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(r == doctest::Approx(1.0));

  Polytope pt(mat(2, 1, {1, -1}), vec({1, -1}));  // x = 1
  auto [c2, r2] = chebyshev_center(pt);
  CHECK(r2 == doctest::Approx(0.0).epsilon(1e-9));

  Polytope E(mat(2, 1, {1, -1}), vec({0, -1}));  // empty
  auto [c3, r3] = chebyshev_center(E);
  CHECK(r3 < 0);

  Polytope H(mat(1, 2, {1, 0}), vec({1}));  // halfplane, unbounded ball
  CHECK_THROWS(chebyshev_center(H));
}

TEST_CASE("support_points") {
  Polytope P = unit_box(2);
  auto sp = support_points(P, {vec({1, 0})});
  CHECK(sp[0].point(0) == doctest::Approx(1.0));

  auto sp2 = support_points(P, {vec({1, 1})});
  CHECK((sp2[0].point - vec({1, 1})).norm() == doctest::Approx(0.0).epsilon(1e-8));

  auto sp3 = support_points(P, {vec({0, 0})});
  CHECK(sp3[0].degenerate);
  CHECK(contains(P, sp3[0].point, 1e-9));
}

TEST_CASE("serialization round trip") {
  std::mt19937_64 rng(31);
  Polytope P = random_polytope(rng, 3);
  std::stringstream ss;
  save_polytope(ss, P);
  Polytope Q = load_polytope(ss);
  REQUIRE(Q.rows() == P.rows());
  CHECK((Q.normals() - P.normals()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((Q.offsets() - P.offsets()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("zero row flagging") {
  Matrix A = mat(2, 2, {0, 0, 1, 0});
  Polytope ok(A, vec({1, 1}));
  CHECK_FALSE(ok.flagged_empty());
  CHECK(ok.rows() == 1);
  Polytope bad(A, vec({-1, 1}));
  CHECK(bad.flagged_empty());
}
