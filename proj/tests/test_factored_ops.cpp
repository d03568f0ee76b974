#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "ldltr/factored_ops.hpp"

using ldltr::DiagonalFactor;
using ldltr::GivensRotation;
using ldltr::TriangularFactor;
using ldltr::UpdateStats;

namespace {

Eigen::MatrixXd dense_ldlt(const TriangularFactor& L, const DiagonalFactor& D) {
  const Eigen::MatrixXd low = L.m.triangularView<Eigen::Lower>();
  return low * D.v.asDiagonal() * low.transpose();
}

TriangularFactor random_unit_lower(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = j + 1; i < n; ++i) m(i, j) = scale * gauss(rng);
  return TriangularFactor(m);
}

}  // namespace

TEST_CASE("givens_for annihilates the spike entry", "[factored_ops]") {
  const GivensRotation rot = ldltr::givens_for(3.0, 4.0);
  CHECK(rot.c == Catch::Approx(0.6).epsilon(1e-15));
  CHECK(rot.s == Catch::Approx(-0.8).epsilon(1e-15));
  // Applying (c, s) to the pair maps it to (r, 0).
  CHECK(rot.c * 3.0 - rot.s * 4.0 == Catch::Approx(5.0).epsilon(1e-15));
  CHECK(rot.s * 3.0 + rot.c * 4.0 == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("givens_for handles a zero column entry", "[factored_ops]") {
  const GivensRotation rot = ldltr::givens_for(0.0, -2.0);
  CHECK(rot.c * 0.0 - rot.s * -2.0 == Catch::Approx(2.0).epsilon(1e-15));
  CHECK(rot.s * 0.0 + rot.c * -2.0 == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("givens_for rejects the degenerate pair", "[factored_ops]") {
  CHECK_THROWS_AS(ldltr::givens_for(0.0, 0.0), std::invalid_argument);
}

TEST_CASE("rank_one_update scalar case is exact", "[factored_ops]") {
  TriangularFactor L = TriangularFactor::identity(1);
  DiagonalFactor D = DiagonalFactor::constant(1, 3.0);
  Eigen::VectorXd a(1);
  a << 5.0;
  REQUIRE(ldltr::rank_one_update(L, D, 2.0, a));
  // 3 + 2*25 = 53 with the factor staying [1].
  CHECK(L.m(0, 0) == Catch::Approx(1.0).epsilon(1e-15));
  CHECK(D.v(0) == Catch::Approx(53.0).epsilon(1e-14));
}

TEST_CASE("rank_one_update with alpha = 0 is a no-op", "[factored_ops]") {
  std::mt19937_64 rng(7);
  TriangularFactor L = random_unit_lower(6, rng);
  DiagonalFactor D = DiagonalFactor::constant(6, 2.0);
  const Eigen::MatrixXd l_before = L.m;
  const Eigen::VectorXd d_before = D.v;
  UpdateStats stats;
  Eigen::VectorXd a = Eigen::VectorXd::Ones(6);
  REQUIRE(ldltr::rank_one_update(L, D, 0.0, a, &stats));
  CHECK(L.m == l_before);
  CHECK(D.v == d_before);
  CHECK(stats.multiplies == 0);
}

TEST_CASE("rank_one_update reconstructs mixed-sign updates", "[factored_ops]") {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<int> dim(1, 50);
  std::uniform_real_distribution<double> mag(0.1, 1.0);
  std::uniform_real_distribution<double> dval(0.5, 2.0);

  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index n = dim(rng);
    TriangularFactor L = random_unit_lower(n, rng);
    DiagonalFactor D;
    D.v.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) D.v(i) = dval(rng);
    Eigen::VectorXd a(n);
    for (Eigen::Index i = 0; i < n; ++i) a(i) = gauss(rng);
    const double alpha = (trial % 2 == 0 ? 1.0 : -1.0) * mag(rng);

    const Eigen::MatrixXd target =
        dense_ldlt(L, D) + alpha * a * a.transpose();
    REQUIRE(ldltr::rank_one_update(L, D, alpha, a));
    const double err =
        (dense_ldlt(L, D) - target).norm() / std::max(1.0, target.norm());
    worst = std::max(worst, err);

    // Structural invariants: unit diagonal, strictly lower storage.
    CHECK((L.m.diagonal().array() - 1.0).abs().maxCoeff() < 1e-14);
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < j; ++i) CHECK(L.m(i, j) == 0.0);
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("rank_one_update skips zero spike entries", "[factored_ops]") {
  std::mt19937_64 rng(11);
  TriangularFactor L = random_unit_lower(8, rng);
  DiagonalFactor D = DiagonalFactor::constant(8, 1.5);
  Eigen::VectorXd a = Eigen::VectorXd::Zero(8);
  a(2) = 1.0;
  a(5) = -2.0;
  const Eigen::MatrixXd target = dense_ldlt(L, D) + 0.7 * a * a.transpose();
  REQUIRE(ldltr::rank_one_update(L, D, 0.7, a));
  CHECK((dense_ldlt(L, D) - target).norm() <= 1e-12 * target.norm());
}

TEST_CASE("rank_one_update stays within the multiply budget", "[factored_ops]") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (Eigen::Index n : {5, 20, 50}) {
    TriangularFactor L = random_unit_lower(n, rng);
    DiagonalFactor D = DiagonalFactor::constant(n, 1.0);
    Eigen::VectorXd a(n);
    for (Eigen::Index i = 0; i < n; ++i) a(i) = gauss(rng);
    UpdateStats stats;
    REQUIRE(ldltr::rank_one_update(L, D, 0.9, a, &stats));
    CHECK(stats.multiplies <= 8 * n * n + 64 * n + 64);
  }
}

TEST_CASE("rank_one_update rejects mismatched dimensions", "[factored_ops]") {
  TriangularFactor L = TriangularFactor::identity(3);
  DiagonalFactor D = DiagonalFactor::constant(2, 1.0);
  Eigen::VectorXd a = Eigen::VectorXd::Ones(3);
  CHECK_THROWS_AS(ldltr::rank_one_update(L, D, 1.0, a), std::invalid_argument);
}

TEST_CASE("apply_inverse_factors matches the dense product", "[factored_ops]") {
  std::mt19937_64 rng(19);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index n = 1 + trial % 12;
    TriangularFactor T = random_unit_lower(n, rng);
    DiagonalFactor G;
    G.v.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) G.v(i) = 0.5 + std::abs(gauss(rng));
    Eigen::VectorXd g(n);
    for (Eigen::Index i = 0; i < n; ++i) g(i) = gauss(rng);

    const Eigen::MatrixXd low = T.m.triangularView<Eigen::Lower>();
    const Eigen::VectorXd want = low * G.v.asDiagonal() * low.transpose() * g;
    const Eigen::VectorXd got = ldltr::apply_inverse_factors(T, G, g);
    CHECK((got - want).norm() <= 1e-12 * std::max(1.0, want.norm()));
  }
}

TEST_CASE("column_norms_sq matches dense column norms", "[factored_ops]") {
  std::mt19937_64 rng(23);
  TriangularFactor T = random_unit_lower(9, rng);
  const DiagonalFactor E = ldltr::column_norms_sq(T);
  REQUIRE(E.n() == 9);
  for (Eigen::Index j = 0; j < 9; ++j)
    CHECK(E.v(j) == Catch::Approx(T.m.col(j).squaredNorm()).epsilon(1e-14));
}

TEST_CASE("recover_direct_factors scalar example", "[factored_ops]") {
  Eigen::MatrixXd tm(1, 1);
  tm << 2.0;
  const TriangularFactor T(tm);
  DiagonalFactor G;
  G.v.resize(1);
  G.v << 4.0;
  const ldltr::DirectFactors df = ldltr::recover_direct_factors(T, G);
  // H = T G T' = 16, so B = 1/16 with L = [1].
  CHECK(df.L(0, 0) == Catch::Approx(1.0).epsilon(1e-15));
  CHECK(df.D(0) == Catch::Approx(1.0 / 16.0).epsilon(1e-15));
}

TEST_CASE("recover_direct_factors inverts the inverse factorization",
          "[factored_ops]") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::Index n = 2 + trial;
    TriangularFactor T = random_unit_lower(n, rng);
    DiagonalFactor G;
    G.v.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) G.v(i) = 0.5 + std::abs(gauss(rng));

    const ldltr::DirectFactors df = ldltr::recover_direct_factors(T, G);
    // L is unit triangular in the transpose orientation of the input: for a
    // lower-triangular T it comes out unit upper, with exact zeros below the
    // diagonal.
    CHECK((df.L.diagonal().array() - 1.0).abs().maxCoeff() < 1e-12);
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = j + 1; i < n; ++i)
        CHECK(df.L(i, j) == 0.0);

    const Eigen::MatrixXd low = T.m.triangularView<Eigen::Lower>();
    const Eigen::MatrixXd H = low * G.v.asDiagonal() * low.transpose();
    const Eigen::MatrixXd B = df.L * df.D.asDiagonal() * df.L.transpose();
    CHECK((B * H - Eigen::MatrixXd::Identity(n, n)).norm() < 1e-10);
  }
}

TEST_CASE("recover_direct_factors rejects a singular factor", "[factored_ops]") {
  Eigen::MatrixXd tm = Eigen::MatrixXd::Identity(3, 3);
  tm(1, 1) = 0.0;
  const TriangularFactor T(tm);
  const DiagonalFactor G = DiagonalFactor::constant(3, 1.0);
  CHECK_THROWS_AS(ldltr::recover_direct_factors(T, G), std::runtime_error);
}
