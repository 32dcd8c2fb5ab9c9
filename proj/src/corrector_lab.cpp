#include "msf/corrector_lab.hpp"

#include <algorithm>
#include <cmath>

#include "msf/error.hpp"

namespace msf {

namespace {

Eigen::VectorXd as_vector(const SpectralField& f) {
  return Eigen::Map<const Eigen::VectorXd>(f.coeffs().data(), static_cast<Eigen::Index>(f.size()));
}

void require_basis(const BasisPtr& a, const BasisPtr& b, const char* where) {
  if (a != b) throw InvalidArgument(std::string(where) + ": basis mismatch");
}

}  // namespace

QuadraticFunctional::QuadraticFunctional(BasisPtr b) : basis(std::move(b)) {
  const auto n = static_cast<Eigen::Index>(basis->size());
  a1 = Eigen::VectorXd::Zero(n);
  A2 = Eigen::MatrixXd::Zero(n, n);
}

QuadraticFunctional QuadraticFunctional::linear(const SpectralField& a) {
  QuadraticFunctional q(a.basis_ptr());
  q.a1 = as_vector(a);
  return q;
}

double QuadraticFunctional::operator()(const SpectralField& y) const {
  require_basis(y.basis_ptr(), basis, "QuadraticFunctional");
  const Eigen::VectorXd v = as_vector(y);
  return a0 + a1.dot(v) + v.dot(A2 * v);
}

double QuadraticFunctional::symmetry_defect() const { return (A2 - A2.transpose()).cwiseAbs().maxCoeff(); }

double trace_product(const CovarianceSpec& X, const Eigen::MatrixXd& A2) {
  double t = 0.0;
  for (const auto& b : X.blocks())
    for (std::size_t a = 0; a < b.modes.size(); ++a)
      for (std::size_t c = 0; c < b.modes.size(); ++c)
        t += b.matrix(a, c) * A2(static_cast<Eigen::Index>(b.modes[c]), static_cast<Eigen::Index>(b.modes[a]));
  return t;
}

double ou_generator_apply(const DiagonalOperator& C_eff, const CovarianceSpec& Q, const QuadraticFunctional& psi,
                          const SpectralField& y) {
  require_basis(C_eff.basis_ptr(), psi.basis, "ou_generator_apply");
  require_basis(Q.basis_ptr(), psi.basis, "ou_generator_apply");
  const Eigen::VectorXd v = as_vector(y);
  const Eigen::VectorXd cy = Eigen::Map<const Eigen::VectorXd>(C_eff.eigenvalues().data(), v.size()).cwiseProduct(v);
  return cy.dot(psi.a1 + 2.0 * (psi.A2 * v)) + trace_product(Q, psi.A2);
}

double gaussian_mean(const QuadraticFunctional& psi, const InvariantMeasure& mu) {
  return psi.a0 + trace_product(mu.covariance(), psi.A2);
}

QuadraticFunctional center(const QuadraticFunctional& psi, const InvariantMeasure& mu) {
  QuadraticFunctional out = psi;
  out.a0 = -trace_product(mu.covariance(), psi.A2);
  return out;
}

double poisson_residual(const DiagonalOperator& C_eff, const CovarianceSpec& Q, const QuadraticFunctional& phi,
                        const QuadraticFunctional& psi, int samples, std::uint64_t seed) {
  Rng rng(seed);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    SpectralField y(psi.basis);
    for (auto& c : y.coeffs()) c = rng.normal();
    const double p = psi(y);
    worst = std::max(worst, std::abs(ou_generator_apply(C_eff, Q, phi, y) + p) / (1.0 + std::abs(p)));
  }
  return worst;
}

QuadraticFunctional poisson_solve(const DiagonalOperator& C_eff, const CovarianceSpec& Q,
                                  const QuadraticFunctional& psi) {
  require_basis(C_eff.basis_ptr(), psi.basis, "poisson_solve");
  const InvariantMeasure mu = invariant_covariance(C_eff, Q);
  const double tr = trace_product(mu.covariance(), psi.A2);
  const double scale = std::max({1.0, std::abs(psi.a0), std::abs(tr)});
  if (std::abs(psi.a0 + tr) > 1e-10 * scale)
    throw InvalidArgument("poisson_solve: functional is not centered (mean " + std::to_string(psi.a0 + tr) + ")");

  QuadraticFunctional phi(psi.basis);
  const auto n = static_cast<Eigen::Index>(psi.basis->size());
  for (Eigen::Index i = 0; i < n; ++i) phi.a1(i) = psi.a1(i) / C_eff.rate(i);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) phi.A2(i, j) = psi.A2(i, j) / (C_eff.rate(i) + C_eff.rate(j));
  phi.a0 = -trace_product(mu.covariance(), phi.A2);

  const double res = poisson_residual(C_eff, Q, phi, psi);
  if (!(res <= 1e-10)) throw NumericFailure("poisson_solve: residual " + std::to_string(res) + " exceeds 1e-10");
  return phi;
}

double phi1_eval(const DiagonalOperator& C_eps, const SpectralField& u, const SpectralField& h,
                 const SpectralField& y) {
  return inner(nonlinear_b(C_eps.apply_neg_inverse(y), u), h);
}

SpectralField phi1_grad_y(const DiagonalOperator& C_eps, const SpectralField& u, const SpectralField& h) {
  return C_eps.apply_neg_inverse(b_adjoint_first(u, h));
}

SpectralField phi1_grad_u(const DiagonalOperator& C_eps, const SpectralField& y, const SpectralField& h) {
  return -nonlinear_b(C_eps.apply_neg_inverse(y), h);
}

QuadraticFunctional phi1_functional(const DiagonalOperator& C_eps, const SpectralField& u, const SpectralField& h) {
  return QuadraticFunctional::linear(phi1_grad_y(C_eps, u, h));
}

double psi_u_eval(const DiagonalOperator& C_eps, const SpectralField& u, const SpectralField& h,
                  const SpectralField& w) {
  return inner(nonlinear_b(w, u), phi1_grad_u(C_eps, w, h)) + inner(nonlinear_b(w, w), phi1_grad_y(C_eps, u, h));
}

QuadraticFunctional assemble_psi_u(const DiagonalOperator& C_eps, const SpectralField& u, const SpectralField& h) {
  require_basis(u.basis_ptr(), h.basis_ptr(), "assemble_psi_u");
  const auto& basis = u.basis_ptr();
  const auto n = static_cast<Eigen::Index>(basis->size());
  // psi_u(w) = sum_ij w_i w_j beta_ij with
  //   beta_ij = -<b(e_i, u), b((-C)^{-1} e_j, h)> - <b(e_i, d), e_j>,  d = D_y phi_1(u).
  Eigen::MatrixXd R(n, n), P(n, n), D(n, n);
  const SpectralField d = phi1_grad_y(C_eps, u, h);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto e = SpectralField::basis_element(basis, static_cast<std::size_t>(i));
    R.col(i) = as_vector(nonlinear_b(e, u));
    P.col(i) = as_vector(nonlinear_b(e, h)) / C_eps.rate(static_cast<std::size_t>(i));
    D.row(i) = as_vector(nonlinear_b(e, d)).transpose();
  }
  const Eigen::MatrixXd beta = -(R.transpose() * P) - D;
  QuadraticFunctional psi(basis);
  psi.A2 = 0.5 * (beta + beta.transpose());
  return psi;
}

double psi_u_mean(const DiagonalOperator& C_eps, const CovarianceSpec& Q, const SpectralField& u,
                  const SpectralField& h) {
  const InvariantMeasure mu = invariant_covariance(C_eps, Q);
  double acc = 0.0;
  for (const auto& p : mu.eigenpairs())
    if (p.value != 0.0) acc += p.value * psi_u_eval(C_eps, u, h, p.direction);
  return acc;
}

double effective_generator(const DiagonalOperator& A, const DiagonalOperator& C_eff, const CovarianceSpec& Q,
                           const SpectralField& u, const SpectralField& h) {
  return inner(A.apply(u) + nonlinear_b(u, u), h) + psi_u_mean(C_eff, Q, u, h);
}

QuadraticFunctional phi2_solve(const DiagonalOperator& C_eps, const CovarianceSpec& Q, const SpectralField& u,
                               const SpectralField& h) {
  const InvariantMeasure mu = invariant_covariance(C_eps, Q);
  return poisson_solve(C_eps, Q, center(assemble_psi_u(C_eps, u, h), mu));
}

}  // namespace msf
