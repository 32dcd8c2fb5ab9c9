#pragma once

#include <Eigen/Dense>

#include "msf/operators.hpp"

namespace msf {

/// psi(y) = a0 + <a1, y> + <y, A2 y> on the truncated space; A2 symmetric.
struct QuadraticFunctional {
  BasisPtr basis;
  double a0 = 0.0;
  Eigen::VectorXd a1;
  Eigen::MatrixXd A2;

  explicit QuadraticFunctional(BasisPtr b);
  static QuadraticFunctional linear(const SpectralField& a);

  double operator()(const SpectralField& y) const;
  double symmetry_defect() const;
};

/// (L psi)(y) = <C_eff y, a1 + 2 A2 y> + Tr(Q A2).
double ou_generator_apply(const DiagonalOperator& C_eff, const CovarianceSpec& Q, const QuadraticFunctional& psi,
                          const SpectralField& y);

/// Tr(X A2) for a covariance X.
double trace_product(const CovarianceSpec& X, const Eigen::MatrixXd& A2);

/// int psi dmu = a0 + Tr(Q_inf A2).
double gaussian_mean(const QuadraticFunctional& psi, const InvariantMeasure& mu);

QuadraticFunctional center(const QuadraticFunctional& psi, const InvariantMeasure& mu);

/// Solves L phi = -psi for centered psi, returning phi with zero mu-mean.
/// The residual is verified on 100 random points before returning.
QuadraticFunctional poisson_solve(const DiagonalOperator& C_eff, const CovarianceSpec& Q,
                                  const QuadraticFunctional& psi);

/// max over `samples` random y of |L phi(y) + psi(y)| / (1 + |psi(y)|).
double poisson_residual(const DiagonalOperator& C_eff, const CovarianceSpec& Q, const QuadraticFunctional& phi,
                        const QuadraticFunctional& psi, int samples = 100, std::uint64_t seed = 0x9d2c5680u);

/// phi_1(u, y) = <b((-C_eps)^{-1} y, u), h>.
double phi1_eval(const DiagonalOperator& C_eps, const SpectralField& u, const SpectralField& h,
                 const SpectralField& y);
/// Gradient in y: the field d with <d, v> = <b((-C_eps)^{-1} v, u), h>.
SpectralField phi1_grad_y(const DiagonalOperator& C_eps, const SpectralField& u, const SpectralField& h);
/// Gradient in u: the field d with <d, v> = <b((-C_eps)^{-1} y, v), h>.
SpectralField phi1_grad_u(const DiagonalOperator& C_eps, const SpectralField& y, const SpectralField& h);
/// y -> phi_1(u, y) as a (linear) quadratic functional.
QuadraticFunctional phi1_functional(const DiagonalOperator& C_eps, const SpectralField& u, const SpectralField& h);

/// psi_u(w) = <b(w, u), D_u phi_1(w)> + <b(w, w), D_y phi_1(u)>.
double psi_u_eval(const DiagonalOperator& C_eps, const SpectralField& u, const SpectralField& h,
                  const SpectralField& w);

/// psi_u as a quadratic functional of w.
QuadraticFunctional assemble_psi_u(const DiagonalOperator& C_eps, const SpectralField& u, const SpectralField& h);

/// int psi_u dmu over the invariant measure of (C_eps, Q), summed over its eigenpairs.
double psi_u_mean(const DiagonalOperator& C_eps, const CovarianceSpec& Q, const SpectralField& u,
                  const SpectralField& h);

/// L^0 phi(u) = <A u + b(u, u), h> + int psi_u dmu for phi(u) = <u, h>.
double effective_generator(const DiagonalOperator& A, const DiagonalOperator& C_eff, const CovarianceSpec& Q,
                           const SpectralField& u, const SpectralField& h);

/// phi_2: the solution of L Phi = -Psi_u with Psi_u the centered psi_u.
QuadraticFunctional phi2_solve(const DiagonalOperator& C_eps, const CovarianceSpec& Q, const SpectralField& u,
                               const SpectralField& h);

}  // namespace msf
