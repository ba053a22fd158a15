/*
 * (C) Copyright 2026 The varlab Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include <random>

#include "doctest.h"

#include "TestHelpers.h"
#include "varlab/Cost.h"
#include "varlab/Exceptions.h"

using namespace varlab;
using namespace varlab::test;

namespace {

Eigen::VectorXd fdGradient(const WindowProblem & p, const Eigen::VectorXd & x, double h = 1e-5) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (evalJ(p, xp) - evalJ(p, xm)) / (2.0 * h);
  }
  return g;
}

/// J written out term by term, without the library's factorizations.
double naiveJ(const WindowProblem & p, const Eigen::VectorXd & x) {
  const auto & ops = p.operators();
  const Eigen::VectorXd d = p.background().values() - x;
  double J = 0.5 * d.dot(ops.B().matrix().inverse() * d);
  for (std::size_t i = 0; i < ops.blocks().size(); ++i) {
    const auto & blk = ops.blocks()[i];
    Eigen::VectorXd xt = x;
    for (int k = 0; k < blk.offset; ++k) xt = ops.M().matrix() * xt;
    const Eigen::VectorXd r = p.observations()[i] - blk.H.dense() * xt;
    J += 0.5 * r.dot(blk.R.matrix().inverse() * r);
  }
  return J;
}

}  // namespace

// -----------------------------------------------------------------------------

TEST_CASE("scalar cost examples") {
  const WindowProblem p = scalarProblem(1, 1, 1, 0.0, {0}, {0.0});
  CHECK(evalJ(p, Eigen::VectorXd::Constant(1, 1.0)) == 1.0);
  CHECK(gradJ(p, Eigen::VectorXd::Constant(1, 1.0))[0] == 2.0);

  const WindowProblem q = scalarProblem(1, 1, 1, 0.0, {0}, {2.0});
  const AnalysisResult a = solveClosedForm(q);
  CHECK(a.xA.values()[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(a.gradientNorm <= 1e-10 * (1 + 1.0));
  CHECK(a.solver == Solver::ClosedForm);

  const GainOperators g = gainOperators(q);
  CHECK(g.L(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(g.K[0](0, 0) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("brute force grid search finds the scalar minimizer") {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> u(0.2, 3.0);
  std::uniform_real_distribution<double> v(-2.0, 2.0);
  for (int trial = 0; trial < 8; ++trial) {
    const WindowProblem p = scalarProblem(u(gen), u(gen), 0.5 + 0.4 * (u(gen) - 0.2), v(gen),
                                          {0, 1, 2}, {v(gen), v(gen), v(gen)}, 2);
    double best = 0.0, bestJ = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 100000; ++i) {
      const double x = -5.0 + 1e-4 * i;
      const double J = evalJ(p, Eigen::VectorXd::Constant(1, x));
      if (J < bestJ) {bestJ = J; best = x;}
    }
    CHECK(std::abs(solveClosedForm(p).xA.values()[0] - best) <= 1e-3);
  }
}

TEST_CASE("cost agrees with the term-by-term formula") {
  std::mt19937_64 gen(21);
  std::normal_distribution<double> z;
  for (int trial = 0; trial < 10; ++trial) {
    const WindowProblem p = randomProblem(gen, {5, 2, 3, 3});
    Eigen::VectorXd x(p.size());
    for (auto & e : x) e = z(gen);
    CHECK(evalJ(p, x) == doctest::Approx(naiveJ(p, x)).epsilon(1e-12));
    CHECK(evalJ(p, x) >= 0.0);
  }
}

TEST_CASE("consistent data has zero cost") {
  std::mt19937_64 gen(4);
  WindowProblem p = randomProblem(gen, {6, 1, 4, 3});
  const auto & ops = p.operators();
  std::vector<Eigen::VectorXd> ys;
  for (std::size_t i = 0; i < ops.blocks().size(); ++i) {
    ys.push_back(ops.G()[i] * p.background().values());
  }
  const WindowProblem q = p.withObservations(ys);
  CHECK(evalJ(q, q.background()) <= 1e-24);
  CHECK((solveClosedForm(q).xA.values() - q.background().values()).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("doubling the inverse covariances doubles the cost") {
  std::mt19937_64 gen(8);
  const WindowProblem p = randomProblem(gen, {4, 1, 2, 2});
  const auto & ops = p.operators();
  std::vector<ObservationOperatorBlock> half;
  for (const auto & b : ops.blocks()) half.push_back({b.offset, b.H, b.R.scaled(0.5)});
  auto ops2 = std::make_shared<const WindowOperators>(ops.B().scaled(0.5), ops.M(),
                                                      ops.windowSteps(), half);
  const WindowProblem q(ops2, p.background(), p.observations());
  Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(p.size(), -1.0, 2.0);
  CHECK(evalJ(q, x) == doctest::Approx(2.0 * evalJ(p, x)).epsilon(1e-12));
}

TEST_CASE("gradient matches central differences") {
  std::mt19937_64 gen(1);
  std::normal_distribution<double> z;
  for (int trial = 0; trial < 20; ++trial) {
    const int cells = 2 + trial % 8;
    const WindowProblem p = randomProblem(gen, {cells, 1 + trial % 3, 1 + trial % 4, 4});
    Eigen::VectorXd x(p.size());
    for (auto & e : x) e = z(gen);
    const Eigen::VectorXd g = gradJ(p, x);
    const Eigen::VectorXd fd = fdGradient(p, x);
    CHECK((g - fd).norm() / std::max(1.0, fd.norm()) <= 1e-6);
  }
}

TEST_CASE("gradient differences follow the Hessian") {
  std::mt19937_64 gen(2);
  std::normal_distribution<double> z;
  const WindowProblem p = randomProblem(gen, {6, 2, 3, 3});
  Eigen::VectorXd x(p.size()), y(p.size());
  for (auto & e : x) e = z(gen);
  for (auto & e : y) e = z(gen);
  const Eigen::VectorXd lhs = gradJ(p, x) - gradJ(p, y);
  const Eigen::VectorXd rhs = p.operators().hessian() * (x - y);
  CHECK((lhs - rhs).norm() <= 1e-10 * (1 + rhs.norm()));
  // J(x) - J(y) = g(y).(x - y) + 0.5 (x - y).Hess.(x - y)
  const Eigen::VectorXd d = x - y;
  const double quad = gradJ(p, y).dot(d) + 0.5 * d.dot(p.operators().hessian() * d);
  CHECK(evalJ(p, x) - evalJ(p, y) == doctest::Approx(quad).epsilon(1e-10));
}

TEST_CASE("cost is strictly convex") {
  std::mt19937_64 gen(12);
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> u(0.05, 0.95);
  const WindowProblem p = randomProblem(gen, {5, 1, 3, 2});
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd a(p.size()), b(p.size());
    for (auto & e : a) e = z(gen);
    for (auto & e : b) e = z(gen);
    const double l = u(gen);
    CHECK(evalJ(p, l * a + (1 - l) * b) < l * evalJ(p, a) + (1 - l) * evalJ(p, b));
  }
}

TEST_CASE("closed form is the minimizer") {
  std::mt19937_64 gen(13);
  std::normal_distribution<double> z;
  for (int trial = 0; trial < 5; ++trial) {
    const WindowProblem p = randomProblem(gen, {7, 2, 3, 4});
    const AnalysisResult a = solveClosedForm(p);
    CHECK(a.gradientNorm <= 1e-10 * (1 + a.xA.values().norm()));
    CHECK(gradJ(p, a.xA).norm() <= 1e-10);
    const double J0 = evalJ(p, a.xA);
    CHECK(a.costAtMin == J0);
    for (int d = 0; d < 100; ++d) {
      Eigen::VectorXd dir(p.size());
      for (auto & e : dir) e = z(gen);
      CHECK(J0 <= evalJ(p, a.xA.values() + 1e-3 * dir));
    }
  }
}

TEST_CASE("closed form solves the weighted normal equations") {
  // Independent oracle: explicit inverses of B, R and the Hessian.
  std::mt19937_64 gen(14);
  for (int trial = 0; trial < 5; ++trial) {
    const WindowProblem p = randomProblem(gen, {6, 1, 2, 3});
    const auto & ops = p.operators();
    const Eigen::MatrixXd Binv = ops.B().matrix().inverse();
    Eigen::MatrixXd Hess = Binv;
    Eigen::VectorXd rhs = Binv * p.background().values();
    for (std::size_t i = 0; i < ops.blocks().size(); ++i) {
      const auto & blk = ops.blocks()[i];
      Eigen::MatrixXd G = blk.H.dense();
      for (int k = 0; k < blk.offset; ++k) G = G * ops.M().matrix();
      const Eigen::MatrixXd Rinv = blk.R.matrix().inverse();
      Hess += G.transpose() * Rinv * G;
      rhs += G.transpose() * Rinv * p.observations()[i];
    }
    const Eigen::VectorXd oracle = Hess.inverse() * rhs;
    CHECK((solveClosedForm(p).xA.values() - oracle).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("identity weights reduce to the unweighted form") {
  // B = R = I: x = (I + sum G^T G)^-1 (x^B + sum G^T y)
  const GridGeometry grid = GridGeometry::line(3, 1.0);
  const Layout layout(3, 1);
  Eigen::Matrix3d A;
  A << 0.8, 0.1, 0.0, 0.1, 0.8, 0.1, 0.0, 0.1, 0.8;
  const ObsOperator H = buildH(grid, layout, {{Coordinate(0.5, 0), 0}, {Coordinate(2.0, 0), 0}});
  auto ops = std::make_shared<const WindowOperators>(
    Covariance::background(Eigen::Matrix3d::Identity(), layout), TangentLinearModel(A, 1.0), 1,
    std::vector<ObservationOperatorBlock>{{0, H, Covariance::diagonalObservation(2, 1.0)},
                                          {1, H, Covariance::diagonalObservation(2, 1.0)}});
  const Eigen::Vector3d xb(1.0, -1.0, 0.5);
  const std::vector<Eigen::VectorXd> ys = {Eigen::Vector2d(0.2, 0.3), Eigen::Vector2d(-0.1, 0.4)};
  const WindowProblem p(ops, StateVector(layout, xb), ys);
  const Eigen::MatrixXd G0 = H.dense();
  const Eigen::MatrixXd G1 = H.dense() * A;
  const Eigen::MatrixXd Hess = Eigen::Matrix3d::Identity() + G0.transpose() * G0
                               + G1.transpose() * G1;
  const Eigen::VectorXd x = Hess.inverse() * (xb + G0.transpose() * ys[0] + G1.transpose() * ys[1]);
  CHECK((solveClosedForm(p).xA.values() - x).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("gain operators reconstruct the analysis") {
  std::mt19937_64 gen(15);
  for (int trial = 0; trial < 10; ++trial) {
    const WindowProblem p = randomProblem(gen, {2 + trial % 7, 1 + trial % 2, 3, 3});
    const GainOperators g = gainOperators(p);
    Eigen::VectorXd x = g.L * p.background().values();
    for (std::size_t i = 0; i < g.K.size(); ++i) x += g.K[i] * p.observations()[i];
    CHECK((x - solveClosedForm(p).xA.values()).cwiseAbs().maxCoeff() <= 1e-12);
  }
  // no observations
  std::mt19937_64 gen2(3);
  const WindowProblem p = randomProblem(gen2);
  auto ops = std::make_shared<const WindowOperators>(p.operators().B(), p.operators().M(), 3,
                                                     std::vector<ObservationOperatorBlock>{});
  const GainOperators g = gainOperators(WindowProblem(ops, p.background(), {}));
  CHECK((g.L - Eigen::MatrixXd::Identity(p.size(), p.size())).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(g.K.empty());
}

TEST_CASE("iterative solver matches the closed form") {
  std::mt19937_64 gen(16);
  for (int trial = 0; trial < 20; ++trial) {
    const WindowProblem p = randomProblem(gen, {2 + trial % 9, 1 + trial % 3, 1 + trial % 4, 4});
    const AnalysisResult exact = solveClosedForm(p);
    const AnalysisResult cg = solveIterative(p, 1e-12, 1000);
    const double scale = 1 + exact.xA.values().cwiseAbs().maxCoeff();
    CHECK((cg.xA.values() - exact.xA.values()).cwiseAbs().maxCoeff() <= 1e-8 * scale);
    CHECK(cg.iterations <= p.size() + 5);
    CHECK(cg.solver == Solver::ConjugateGradient);
  }
  const WindowProblem s = scalarProblem(2.0, 0.5, 0.9, 1.0, {0, 1}, {0.3, -0.4}, 1);
  CHECK(std::abs(solveIterative(s, 1e-14, 10).xA.values()[0]
                 - solveClosedForm(s).xA.values()[0]) <= 1e-10);
}

TEST_CASE("iterative solver edge cases") {
  std::mt19937_64 gen(18);
  const WindowProblem p = randomProblem(gen, {8, 1, 3, 4});
  const AnalysisResult exact = solveClosedForm(p);
  CHECK(solveIterative(p, 1e-8, 100, exact.xA.values()).iterations == 0);

  // B = I, no observations: the Hessian is the identity
  const Layout layout(4, 1);
  auto ops = std::make_shared<const WindowOperators>(
    Covariance::background(Eigen::MatrixXd::Identity(4, 4), layout),
    TangentLinearModel(Eigen::MatrixXd::Identity(4, 4), 1.0), 1,
    std::vector<ObservationOperatorBlock>{});
  const WindowProblem id(ops, StateVector(layout, Eigen::Vector4d(1, 2, 3, 4)), {});
  CHECK(solveIterative(id, 1e-12, 10, Eigen::VectorXd::Zero(4)).iterations == 1);

  try {
    solveIterative(p, 1e-300, 1);
    FAIL("expected a convergence error");
  } catch (const ConvergenceError & e) {
    CHECK(e.iterations() == 1);
    CHECK(e.gradientNorm() > 0.0);
  }
  CHECK_THROWS_AS(solveIterative(p, 0.0, 10), DomainError);
}

TEST_CASE("uninformative observations leave the background") {
  std::mt19937_64 gen(19);
  const WindowProblem p = randomProblem(gen, {6, 1, 3, 4});
  const auto & ops = p.operators();
  std::vector<ObservationOperatorBlock> blocks;
  for (const auto & b : ops.blocks()) blocks.push_back({b.offset, b.H, b.R.scaled(1e12)});
  auto flat = std::make_shared<const WindowOperators>(ops.B(), ops.M(), ops.windowSteps(), blocks);
  const WindowProblem q(flat, p.background(), p.observations());
  const Eigen::VectorXd xb = p.background().values();
  const double rel = (solveClosedForm(q).xA.values() - xb).cwiseAbs().maxCoeff()
                     / xb.cwiseAbs().maxCoeff();
  CHECK(rel <= 1e-5);
}

TEST_CASE("covariance validation") {
  const Layout layout(2, 2);
  Eigen::Matrix4d coupled = Eigen::Matrix4d::Identity();
  coupled(0, 1) = coupled(1, 0) = 0.1;  // locations 0, compositions 0 and 1
  CHECK_THROWS_AS(Covariance::background(coupled, layout), DomainError);
  Eigen::Matrix2d asym;
  asym << 1.0, 0.2, 0.1, 1.0;
  CHECK_THROWS_AS(Covariance::observation(asym), NumericError);
  Eigen::Matrix2d indefinite;
  indefinite << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS(Covariance::observation(indefinite), NumericError);
  const Covariance B = Covariance::exponentialBackground(GridGeometry::line(2, 1.0), layout, 2.0, 2.0);
  CHECK(B.matrix()(layout.flatIndex(0, 0), layout.flatIndex(1, 0))
        == doctest::Approx(4.0 * std::exp(-0.5)));
  CHECK(B.matrix()(layout.flatIndex(0, 0), layout.flatIndex(1, 1)) == 0.0);
}

TEST_CASE("hessian is shared and assembled once") {
  std::mt19937_64 gen(20);
  const WindowProblem p = randomProblem(gen);
  const Eigen::MatrixXd & H1 = p.operators().hessian();
  const WindowProblem q = p.withObservations(p.observations());
  CHECK(&H1 == &q.operators().hessian());
  Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(p.size(), 0.0, 1.0);
  CHECK((p.operators().applyHessian(v) - H1 * v).norm() <= 1e-12 * (1 + (H1 * v).norm()));
}
