#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "asyncopt/block_norm.hpp"
#include "asyncopt/certify.hpp"
#include "asyncopt/netflow.hpp"

using namespace asyncopt;
using netflow::RegPreset;

namespace {

// Minimizer of alpha/2 x^2 - 100 log(1 + x) over [lo, hi] by bisection on the
// derivative, falling back to the active bound when the root lies outside.
double scalar_box_minimizer(double alpha, double lo, double hi) {
  auto deriv = [&](double x) { return alpha * x - 100.0 / (1.0 + x); };
  if (deriv(lo) >= 0.0) return lo;
  if (deriv(hi) <= 0.0) return hi;
  double a = lo, b = hi;
  for (int it = 0; it < 200; ++it) {
    const double m = 0.5 * (a + b);
    (deriv(m) < 0.0 ? a : b) = m;
  }
  return 0.5 * (a + b);
}

}  // namespace

TEST_CASE("connection matrix structure") {
  const Matrix C = netflow::build_connection_matrix(netflow::benchmark_routes(), 9);
  REQUIRE(C.rows() == 9);
  REQUIRE(C.cols() == 8);

  // agent 8 rides edges 4 and 7 only
  for (int k = 0; k < 9; ++k) {
    const bool expected = (k == 3 || k == 6);
    CHECK(C(k, 7) == (expected ? 1.0 : 0.0));
  }

  const Vector sums = C.colwise().sum();
  Vector expected(8);
  expected << 3, 3, 4, 3, 5, 3, 4, 2;
  CHECK((sums.array() == expected.array()).all());

  // full table golden check
  const int table[8][5] = {{1, 3, 6, 0, 0}, {4, 7, 8, 0, 0}, {2, 4, 7, 5, 0},
                           {3, 4, 7, 0, 0}, {1, 3, 6, 7, 5}, {2, 4, 9, 0, 0},
                           {5, 8, 9, 6, 0}, {7, 4, 0, 0, 0}};
  Matrix golden = Matrix::Zero(9, 8);
  for (int i = 0; i < 8; ++i) {
    for (int e : table[i]) {
      if (e > 0) golden(e - 1, i) = 1.0;
    }
  }
  CHECK((C.array() == golden.array()).all());

  CHECK(netflow::build_connection_matrix({{}, {}}, 3).isZero(0.0));
  CHECK_THROWS_AS(netflow::build_connection_matrix({{10}}, 9),
                  std::invalid_argument);
  CHECK_THROWS_AS(netflow::build_connection_matrix({{0}}, 9),
                  std::invalid_argument);
}

TEST_CASE("build_problem rejects non-binary matrices") {
  Matrix C = Matrix::Zero(2, 2);
  C(0, 0) = 0.5;
  CHECK_THROWS_AS(netflow::build_problem(C), std::invalid_argument);
}

TEST_CASE("decoupled problems match the scalar oracle") {
  const Matrix C = Matrix::Zero(1, 8);

  // the bundled alphas are too small for an interior root on [0, 10]
  Problem p = netflow::build_problem(C);
  Regularization a2{netflow::preset_alphas(RegPreset::kA2), 0.009};
  const Vector x_hat = solve_reference(p, a2, 1e-12);
  for (int i = 0; i < 8; ++i) {
    const double oracle = scalar_box_minimizer(a2.alphas[i], 0.0, 10.0);
    CHECK(std::abs(x_hat[i] - oracle) <= 1e-10);
    CHECK(x_hat[i] == doctest::Approx(10.0).epsilon(1e-12));
  }

  // stiffer regularization puts the root inside the box
  Regularization stiff{Vector::Constant(8, 2.0), 0.009};
  const Vector interior = solve_reference(p, stiff, 1e-12);
  for (int i = 0; i < 8; ++i) {
    const double oracle = scalar_box_minimizer(2.0, 0.0, 10.0);
    CHECK(std::abs(interior[i] - oracle) <= 1e-10);
    CHECK(interior[i] ==
          doctest::Approx(6.5887234393789127).epsilon(1e-10));
  }
}

TEST_CASE("coupling gradient is the scaled gram matvec") {
  const Matrix C = netflow::build_connection_matrix(netflow::benchmark_routes(), 9);
  const Problem p = netflow::build_problem(C);
  const Vector ones = Vector::Ones(8);
  const Vector expected = 0.1 * (C.transpose() * C) * ones;
  const Vector actual = p.coupling_grad(ones);
  CHECK((actual - expected).cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("congestion cost equals the squared edge-load norm") {
  const Matrix C = netflow::build_connection_matrix(netflow::benchmark_routes(), 9);
  const Problem p = netflow::build_problem(C, 100.0, 1.0 / 20.0, 0.0, 15.0);
  Rng rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const Vector x = uniform_feasible_point(p, rng);
    const double direct = p.coupling_cost(x);
    const double identity = (C * x).squaredNorm() / 20.0;
    CHECK(direct == doctest::Approx(identity).epsilon(1e-12));
  }
}

TEST_CASE("instance fidelity") {
  const Vector w = netflow::benchmark_weights();
  Vector w_expected(8);
  w_expected << 12, 8, 6, 7, 6, 10, 9, 10;
  CHECK((w.array() == w_expected.array()).all());

  const Vector p = netflow::benchmark_orders();
  CHECK(std::isinf(p[0]));
  Vector p_tail(7);
  p_tail << 20, 3, 90, 6, 12, 2, 9;
  CHECK((p.tail(7).array() == p_tail.array()).all());

  Vector a1(8), a2(8), a3(8);
  a1 << 3e-4, 1e-4, 9e-4, 2e-4, 1e-3, 1e-3, 5e-4, 4e-4;
  a2 << 0.01, 0.01, 0.003, 0.005, 0.002, 0.01, 0.005, 0.002;
  a3 << 0.08, 0.1, 0.1, 0.09, 0.009, 0.1, 0.08, 0.04;
  CHECK((netflow::preset_alphas(RegPreset::kA1).array() == a1.array()).all());
  CHECK((netflow::preset_alphas(RegPreset::kA2).array() == a2.array()).all());
  CHECK((netflow::preset_alphas(RegPreset::kA3).array() == a3.array()).all());

  CHECK(netflow::preset_alphas(RegPreset::kA3).maxCoeff() == 0.1);
  CHECK(netflow::preset_alphas(RegPreset::kA3).minCoeff() == 0.009);

  CHECK(netflow::preset_reg_norm(RegPreset::kA1) == 0.001);
  CHECK(netflow::preset_reg_norm(RegPreset::kA2) == 0.01);
  CHECK(netflow::preset_reg_norm(RegPreset::kA3) == 0.1);

  const BlockLayout layout = netflow::benchmark_layout();
  CHECK(layout.block_count() == 8);
  CHECK(layout.dim() == 8);
  CHECK(layout.min_order() == 2.0);
  CHECK(layout.min_weight() == 6.0);
}

TEST_CASE("benchmark stepsize and contraction ordering") {
  const Regularization r1 = netflow::benchmark_regularization(RegPreset::kA1);
  const Regularization r3 = netflow::benchmark_regularization(RegPreset::kA3);
  // frozen: 1 / (alpha_max + 100 + lambda_max(C^T C) / 10)
  CHECK(r1.gamma == doctest::Approx(0.0098779546350565035).epsilon(1e-12));
  CHECK(r3.gamma == doctest::Approx(0.0098683042475499645).epsilon(1e-12));

  const Problem p = netflow::benchmark_problem();
  const double q1 =
      compute_q(r1.gamma, r1.alphas, lipschitz_data(p, r1).block);
  const double q3 =
      compute_q(r3.gamma, r3.alphas, lipschitz_data(p, r3).block);
  CHECK(q1 >= q3);
}

TEST_CASE("benchmark_instance assembles the bundled configuration") {
  const World w = netflow::benchmark_instance(RegPreset::kA2, 17);
  CHECK(w.tick == 0);
  CHECK(w.seed == 17);
  CHECK(w.schedule.p_update == 0.1);
  CHECK(w.schedule.p_comm == 0.1);
  CHECK(w.schedule.delay.mode == DelayMode::kInstant);
  CHECK(w.x0.isZero(0.0));
  CHECK(w.reg.gamma ==
        doctest::Approx(0.0098770765472299595).epsilon(1e-12));
  CHECK((w.reg.alphas.array() ==
         netflow::preset_alphas(RegPreset::kA2).array())
            .all());
}

TEST_CASE("benchmark minimizers are interior to the raised box") {
  const Problem p = netflow::benchmark_problem();
  CHECK(p.box_hi[0] == netflow::kBenchmarkBoxHi);

  Regularization none;
  none.alphas = Vector::Zero(8);
  none.gamma = 0.009;
  for (const Vector& x_hat :
       {solve_reference(p, netflow::benchmark_regularization(RegPreset::kA1)),
        solve_reference(p, netflow::benchmark_regularization(RegPreset::kA2)),
        solve_reference(p, netflow::benchmark_regularization(RegPreset::kA3)),
        solve_reference(p, none)}) {
    CHECK((x_hat.array() > p.box_lo.array() + 1e-6).all());
    CHECK((x_hat.array() < p.box_hi.array() - 1e-6).all());
  }
}

TEST_CASE("routes files load and validate") {
  const char* path = "routes.tmp.txt";
  {
    std::ofstream out(path);
    out << "# agent  edges\n";
    out << "1 1 3 6\n2 4 7 8\n3 2 4 7 5\n4 3 4 7\n";
    out << "5 1 3 6 7 5\n6 2 4 9\n7 5 8 9 6\n8 7 4\n";
  }
  const netflow::Routes loaded = netflow::parse_routes_file(path);
  CHECK(loaded == netflow::benchmark_routes());
  std::remove(path);

  {
    std::ofstream out(path);
    out << "1 1 2\n1 3\n";
  }
  CHECK_THROWS_AS(netflow::parse_routes_file(path), std::runtime_error);
  {
    std::ofstream out(path);
    out << "1 1 2\n3 2\n";  // agent 2 missing
  }
  CHECK_THROWS_AS(netflow::parse_routes_file(path), std::runtime_error);
  {
    std::ofstream out(path);
    out << "1 1 x\n";
  }
  CHECK_THROWS_AS(netflow::parse_routes_file(path), std::runtime_error);
  std::remove(path);
  CHECK_THROWS_AS(netflow::parse_routes_file("missing.file"),
                  std::runtime_error);
}
