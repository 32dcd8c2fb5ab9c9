/// @file test_operators.cpp
/// @brief Dissipation operators, covariances, invariant measures and Q_N.

#include <cmath>
#include <numbers>

#include "doctest.h"
#include "msf/error.hpp"
#include "msf/operators.hpp"
#include "test_util.hpp"

using namespace msf;

namespace {

constexpr double kPi = std::numbers::pi;

/// Trapezoid quadrature of int_0^T e^{Ct} Q e^{Ct} dt for diagonal C.
Eigen::MatrixXd lyapunov_quadrature(const Eigen::VectorXd& c, const Eigen::MatrixXd& Q, double T, int n) {
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(Q.rows(), Q.cols());
  const double h = T / n;
  for (int s = 0; s <= n; ++s) {
    const double t = s * h;
    const double w = (s == 0 || s == n) ? 0.5 * h : h;
    const Eigen::VectorXd e = (c * t).array().exp();
    acc += w * (e.asDiagonal() * Q * e.asDiagonal());
  }
  return acc;
}

}  // namespace

// ============================================================================
// Dissipation operators
// ============================================================================

TEST_CASE("laplacian eigenvalue at k = (1,0)") {
  auto B = make_basis(3);
  const auto A = make_laplacian(1.0, B);
  CHECK(A.eigenvalue(B->index_of({1, 0}, Parity::Cos)) == doctest::Approx(-4 * kPi * kPi).epsilon(1e-15));
  CHECK(A.eigenvalue(B->index_of({1, 0}, Parity::Sin)) == doctest::Approx(-4 * kPi * kPi).epsilon(1e-15));
  CHECK(A.spectral_gap() == doctest::Approx(4 * kPi * kPi).epsilon(1e-15));
}

TEST_CASE("friction is a scalar operator") {
  auto B = make_basis(4);
  const auto C = make_friction(2.0, B);
  for (std::size_t i = 0; i < B->size(); ++i) CHECK(C.eigenvalue(i) == -2.0);
  CHECK(C.spectral_gap() == 2.0);
}

TEST_CASE("fractional power one coincides with the laplacian") {
  auto B = make_basis(5);
  const auto A = make_laplacian(0.3, B);
  const auto F = make_fractional(0.3, 1.0, B);
  for (std::size_t i = 0; i < B->size(); ++i) CHECK(F.eigenvalue(i) == A.eigenvalue(i));
  const auto G = make_fractional(0.3, 0.5, B);
  for (std::size_t i = 0; i < B->size(); ++i)
    CHECK(G.eigenvalue(i) == doctest::Approx(-std::sqrt(-A.eigenvalue(i))).epsilon(1e-14));
}

TEST_CASE("eigenvalues depend only on |k|") {
  auto B = make_basis(5);
  const auto F = make_fractional(1.0, 0.7, B);
  for (std::size_t i = 0; i < B->size(); ++i)
    for (std::size_t j = 0; j < B->size(); ++j)
      if (B->mode(i).k.norm2() == B->mode(j).k.norm2()) CHECK(F.eigenvalue(i) == F.eigenvalue(j));
}

TEST_CASE("invalid dissipation parameters are rejected") {
  auto B = make_basis(2);
  CHECK_THROWS_AS(make_laplacian(0.0, B), InvalidParameter);
  CHECK_THROWS_AS(make_laplacian(-1.0, B), InvalidParameter);
  CHECK_THROWS_AS(make_friction(0.0, B), InvalidParameter);
  CHECK_THROWS_AS(make_fractional(1.0, 0.25, B), InvalidParameter);
  CHECK_THROWS_AS(make_fractional(1.0, 1.5, B), InvalidParameter);
  CHECK_THROWS_AS(DiagonalOperator(B, std::vector<double>(B->size(), 0.0), {}), InvalidOperator);
}

TEST_CASE("C + eps A adds eigenvalues") {
  auto B = make_basis(3);
  const auto C = make_friction(1.5, B), A = make_laplacian(0.2, B);
  const auto Ce = C.plus_scaled(A, 0.1);
  for (std::size_t i = 0; i < B->size(); ++i) CHECK(Ce.eigenvalue(i) == C.eigenvalue(i) + 0.1 * A.eigenvalue(i));
  CHECK(Ce.kind() == DissipationKind::Combined);
}

// ============================================================================
// Covariances
// ============================================================================

TEST_CASE("dense covariance validation") {
  auto B = make_basis(2);
  Eigen::MatrixXd asym(2, 2);
  asym << 1, 0.5, 0.2, 1;
  CHECK_THROWS_AS(CovarianceSpec::dense(B, {0, 1}, asym), InvalidParameter);
  Eigen::MatrixXd indefinite(2, 2);
  indefinite << 1, 2, 2, 1;
  CHECK_THROWS_AS(CovarianceSpec::dense(B, {0, 1}, indefinite), InvalidParameter);
  CHECK_THROWS_AS(CovarianceSpec::dense(B, {0, 0}, Eigen::MatrixXd::Identity(2, 2)), InvalidArgument);
  std::vector<double> neg(B->size(), 0.0);
  neg[0] = -1.0;
  CHECK_THROWS_AS(CovarianceSpec::diagonal(B, neg), InvalidParameter);
  std::vector<std::size_t> many(65);
  for (std::size_t i = 0; i < many.size(); ++i) many[i] = i;
  CHECK_THROWS_AS(CovarianceSpec::dense(make_basis(6), many, Eigen::MatrixXd::Identity(65, 65)), InvalidParameter);
}

TEST_CASE("symmetric square root clamps tiny negative eigenvalues") {
  Eigen::MatrixXd m(2, 2);
  m << 1, 1, 1, 1;
  m(1, 1) -= 1e-13;
  const Eigen::MatrixXd r = psd_sqrt(m);
  CHECK((r * r - m).cwiseAbs().maxCoeff() < 1e-6);
  CHECK((r - r.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

// ============================================================================
// Invariant measure
// ============================================================================

TEST_CASE("friction with unit diagonal noise gives Q_inf = Q / (2 chi)") {
  auto B = make_basis(3);
  const auto C = make_friction(2.0, B);
  const auto mu = invariant_covariance(C, CovarianceSpec::diagonal(B, std::vector<double>(B->size(), 1.0)));
  for (std::size_t i = 0; i < B->size(); ++i) CHECK(mu.covariance().entry(i, i) == 0.25);
  CHECK(mu.lyapunov_residual() <= 1e-10);
}

TEST_CASE("dense Lyapunov solve matches a quadrature oracle") {
  auto B = make_basis(3);
  const auto C = make_fractional(0.05, 0.8, B);
  const std::size_t i = B->index_of({1, 0}, Parity::Cos), j = B->index_of({2, 1}, Parity::Sin);
  REQUIRE(C.rate(i) != C.rate(j));
  Eigen::MatrixXd q(2, 2);
  q << 1.0, 0.4, 0.4, 0.7;
  const auto mu = invariant_covariance(C, CovarianceSpec::dense(B, {i, j}, q));
  Eigen::VectorXd c(2);
  c << C.eigenvalue(i), C.eigenvalue(j);
  const double T = 40.0 / std::min(C.rate(i), C.rate(j));
  const Eigen::MatrixXd oracle = lyapunov_quadrature(c, q, T, 400000);
  CHECK(std::abs(mu.covariance().entry(i, i) - oracle(0, 0)) < 1e-8);
  CHECK(std::abs(mu.covariance().entry(i, j) - oracle(0, 1)) < 1e-8);
  CHECK(std::abs(mu.covariance().entry(j, j) - oracle(1, 1)) < 1e-8);
  CHECK(mu.lyapunov_residual() <= 1e-10);
}

TEST_CASE("zero noise gives a zero invariant covariance and zero samples") {
  auto B = make_basis(2);
  const auto mu = invariant_covariance(make_friction(1.0, B), CovarianceSpec::zero(B));
  CHECK(mu.covariance().is_zero());
  Rng rng(1);
  for (int s = 0; s < 10; ++s) CHECK(max_abs(sample_invariant(mu, rng)) == 0.0);
}

TEST_CASE("commuting pairs satisfy Q_inf = (-C)^{-1} Q / 2 entrywise") {
  auto B = make_basis(4);
  const auto C = make_laplacian(0.5, B);
  Rng rng(2);
  std::vector<double> q(B->size());
  for (auto& v : q) v = rng.uniform();
  const auto mu = invariant_covariance(C, CovarianceSpec::diagonal(B, q));
  for (std::size_t i = 0; i < B->size(); ++i)
    CHECK(mu.covariance().entry(i, i) == doctest::Approx(q[i] / (2 * C.rate(i))).epsilon(1e-15));
}

TEST_CASE("diagonal and dense paths agree") {
  auto B = make_basis(2);
  const auto C = make_laplacian(1.0, B);
  const std::size_t n = B->size();
  std::vector<double> q(n);
  std::vector<std::size_t> modes(n);
  Eigen::MatrixXd Qd = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    q[i] = 0.1 * (i + 1);
    modes[i] = i;
    Qd(i, i) = q[i];
  }
  const auto a = invariant_covariance(C, CovarianceSpec::diagonal(B, q));
  const auto d = invariant_covariance(C, CovarianceSpec::dense(B, modes, Qd));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) CHECK(std::abs(a.covariance().entry(i, j) - d.covariance().entry(i, j)) <= 1e-12);
}

TEST_CASE("basis mismatch is an invalid argument") {
  CHECK_THROWS_AS(invariant_covariance(make_friction(1.0, make_basis(2)), CovarianceSpec::zero(make_basis(2))),
                  InvalidArgument);
}

TEST_CASE("invariant samples have the prescribed covariance and zero mean") {
  auto B = make_basis(1);
  const auto C = make_fractional(0.1, 0.6, B);
  Eigen::MatrixXd q(3, 3);
  q << 1.0, 0.3, 0.1, 0.3, 0.8, -0.2, 0.1, -0.2, 0.5;
  const std::vector<std::size_t> modes{0, 3, 5};
  const auto mu = invariant_covariance(C, CovarianceSpec::dense(B, modes, q));
  Rng rng(2024);
  const int M = 100000;
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(3, 3);
  Eigen::Vector3d m = Eigen::Vector3d::Zero();
  for (int s = 0; s < M; ++s) {
    const auto w = sample_invariant(mu, rng);
    Eigen::Vector3d v(w[0], w[3], w[5]);
    m += v;
    S += v * v.transpose();
  }
  m /= M;
  S /= M;
  for (int a = 0; a < 3; ++a) {
    const double saa = mu.covariance().entry(modes[a], modes[a]);
    CHECK(std::abs(m(a)) < 4 * std::sqrt(saa / M));
    for (int c = 0; c < 3; ++c) {
      const double sab = mu.covariance().entry(modes[a], modes[c]);
      const double scc = mu.covariance().entry(modes[c], modes[c]);
      // Var(w_a w_c) = s_aa s_cc + s_ac^2 for a centred Gaussian pair
      const double se = std::sqrt((saa * scc + sab * sab) / M);
      CHECK(std::abs(S(a, c) - sab) < 4 * se);
    }
  }
}

TEST_CASE("sampling is deterministic given the generator state") {
  auto B = make_basis(3);
  const auto mu = invariant_covariance(make_friction(1.0, B),
                                       CovarianceSpec::diagonal(B, std::vector<double>(B->size(), 1.0)));
  Rng a(77), b(77);
  CHECK(max_abs(sample_invariant(mu, a) - sample_invariant(mu, b)) == 0.0);
}

// ============================================================================
// Q_N scaling family
// ============================================================================

TEST_CASE("Q_N has trace 2 c_kappa^2 and is supported on the shell") {
  auto B = make_basis(16);
  for (int N : {1, 2, 4, 8})
    for (double delta : {0.0, 0.5, 1.3}) {
      const auto Q = make_QN(N, delta, 0.7, B);
      double tr = 0.0;
      for (std::size_t i = 0; i < B->size(); ++i) {
        tr += Q.entry(i, i);
        const int k2 = B->mode(i).k.norm2();
        if (k2 < N * N || k2 > 4 * N * N) CHECK(Q.entry(i, i) == 0.0);
        else CHECK(Q.entry(i, i) > 0.0);
      }
      CHECK(tr == doctest::Approx(2 * 0.49).epsilon(1e-13));
    }
}

TEST_CASE("Q_N with delta = 0 has uniform weights") {
  auto B = make_basis(8);
  const auto Q = make_QN(2, 0.0, 1.5, B);
  std::size_t shell = 0;
  for (std::size_t j = 0; j < B->wavevector_count(); ++j) {
    const int k2 = B->wavevector(j).norm2();
    if (k2 >= 4 && k2 <= 16) ++shell;
  }
  for (std::size_t i = 0; i < B->size(); ++i)
    if (Q.entry(i, i) > 0.0) CHECK(Q.entry(i, i) == doctest::Approx(2.25 / shell).epsilon(1e-14));
}

TEST_CASE("Q_N rejects an empty shell") {
  CHECK_THROWS_AS(make_QN(3, 0.0, 1.0, make_basis(1)), InvalidParameter);
  CHECK_THROWS_AS(make_QN(0, 0.0, 1.0, make_basis(4)), InvalidParameter);
}

// ============================================================================
// Commutation
// ============================================================================

TEST_CASE("commutation checks") {
  auto B = make_basis(3);
  const auto Qd = make_QN(1, 0.5, 1.0, B);
  const auto c1 = check_commute(make_laplacian(1.0, B), Qd);
  CHECK(c1.commute);
  CHECK(c1.residual == 0.0);

  const std::size_t i = B->index_of({1, 0}, Parity::Cos), j = B->index_of({2, 1}, Parity::Cos);
  Eigen::MatrixXd q(2, 2);
  q << 1.0, 0.5, 0.5, 1.0;
  const auto Qx = CovarianceSpec::dense(B, {i, j}, q);
  CHECK(check_commute(make_friction(3.0, B), Qx).commute);

  const auto F = make_fractional(1.0, 0.5, B);
  const auto c3 = check_commute(F, Qx);
  CHECK_FALSE(c3.commute);
  // [C, Q]_ij = (c_i - c_j) q_ij
  CHECK(c3.residual == doctest::Approx(std::abs(F.eigenvalue(i) - F.eigenvalue(j)) * 0.5).epsilon(1e-14));
}
