#include "msf/limit_terms.hpp"

#include <cmath>

#include "msf/error.hpp"

namespace msf {

namespace {

// b(e_i, e_i) = 0 identically, so only distinct pairs contribute to
// int b(w, w) dmu = sum_ij X_ij b(e_i, e_j).
SpectralField gaussian_quadratic_mean(const CovarianceSpec& X) {
  SpectralField acc(X.basis_ptr());
  const auto& basis = X.basis_ptr();
  for (const auto& b : X.blocks()) {
    for (std::size_t a = 0; a < b.modes.size(); ++a)
      for (std::size_t c = a + 1; c < b.modes.size(); ++c) {
        const double x = b.matrix(a, c);
        if (x == 0.0) continue;
        const auto ei = SpectralField::basis_element(basis, b.modes[a]);
        const auto ej = SpectralField::basis_element(basis, b.modes[c]);
        acc.add_scaled(x, nonlinear_b(ei, ej) + nonlinear_b(ej, ei));
      }
  }
  return acc;
}

}  // namespace

LimitCoefficients::LimitCoefficients(DiagonalOperator C, CovarianceSpec Q)
    : C_(std::move(C)), Q_(std::move(Q)), mu_(invariant_covariance(C_, Q_)), commute_(check_commute(C_, Q_)) {
  pairs_ = mu_.eigenpairs();
  const auto& basis = C_.basis_ptr();
  for (const auto& b : Q_.blocks()) {
    const Eigen::MatrixXd root = psd_sqrt(b.matrix);
    for (std::size_t col = 0; col < b.modes.size(); ++col) {
      SpectralField g(basis);
      for (std::size_t a = 0; a < b.modes.size(); ++a) g[b.modes[a]] = root(a, col) / C_.rate(b.modes[a]);
      g_.push_back(std::move(g));
    }
  }
  r_ = C_.apply_neg_inverse(gaussian_quadratic_mean(mu_.covariance()));
}

SpectralField ito_stokes_drift(const DiagonalOperator& C, const CovarianceSpec& Q) {
  return LimitCoefficients(C, Q).drift();
}

SpectralField strat_corrector_invariant_form(const LimitCoefficients& c, const SpectralField& u) {
  if (u.basis_ptr() != c.basis_ptr()) throw InvalidArgument("strat_corrector: basis mismatch");
  SpectralField acc(c.basis_ptr());
  for (const auto& p : c.eigenpairs()) {
    if (p.value == 0.0) continue;
    acc.add_scaled(p.value, nonlinear_b(c.C().apply_neg_inverse(p.direction), nonlinear_b(p.direction, u)));
  }
  return acc;
}

SpectralField strat_corrector_covariation_form(const LimitCoefficients& c, const SpectralField& u) {
  if (u.basis_ptr() != c.basis_ptr()) throw InvalidArgument("strat_corrector: basis mismatch");
  SpectralField acc(c.basis_ptr());
  for (const auto& g : c.noise_directions()) acc.add_scaled(0.5, nonlinear_b(g, nonlinear_b(g, u)));
  return acc;
}

SpectralField strat_corrector_apply(const LimitCoefficients& c, const SpectralField& u) {
  if (!c.commutation().commute)
    throw UnsupportedConfiguration("Stratonovich corrector requires [C, Q] = 0 (commutator residual " +
                                   std::to_string(c.commutation().residual) + ")");
  return strat_corrector_invariant_form(c, u);
}

CorrectorComparison compare_corrector_forms(const LimitCoefficients& c, const SpectralField& u) {
  CorrectorComparison out{strat_corrector_invariant_form(c, u), strat_corrector_covariation_form(c, u), 0.0,
                          c.commutation()};
  out.gap = max_abs(out.invariant_form - out.covariation_form);
  return out;
}

SpectralField transport_noise_increment(const LimitCoefficients& c, const SpectralField& u,
                                        std::span<const double> dW) {
  if (dW.size() != c.noise_dimension())
    throw InvalidArgument("transport_noise_increment: expected " + std::to_string(c.noise_dimension()) +
                          " increments, got " + std::to_string(dW.size()));
  if (u.basis_ptr() != c.basis_ptr()) throw InvalidArgument("transport_noise_increment: basis mismatch");
  SpectralField acc(c.basis_ptr());
  const auto& g = c.noise_directions();
  for (std::size_t k = 0; k < g.size(); ++k)
    if (dW[k] != 0.0) acc.add_scaled(dW[k], nonlinear_b(g[k], u));
  return acc;
}

namespace {
void require_diagonal_qn(const CovarianceSpec& QN, const DiagonalOperator& C, const SpectralField& u) {
  if (!QN.is_diagonal()) throw UnsupportedConfiguration("eddy viscosity requires a diagonal covariance");
  if (QN.basis_ptr() != C.basis_ptr() || u.basis_ptr() != C.basis_ptr())
    throw InvalidArgument("eddy_kappa_apply: basis mismatch");
}
}  // namespace

SpectralField eddy_kappa_apply(const CovarianceSpec& QN, const DiagonalOperator& C, const SpectralField& u) {
  require_diagonal_qn(QN, C, u);
  SpectralField acc(u.basis_ptr());
  for (const auto& b : QN.blocks()) {
    const std::size_t k = b.modes[0];
    const double w = b.matrix(0, 0) / (2.0 * C.rate(k) * C.rate(k));
    const auto e = SpectralField::basis_element(u.basis_ptr(), k);
    acc.add_scaled(w, nonlinear_b(e, nonlinear_b(e, u)));
  }
  return acc;
}

double eddy_kappa_energy(const CovarianceSpec& QN, const DiagonalOperator& C, const SpectralField& u) {
  require_diagonal_qn(QN, C, u);
  double acc = 0.0;
  for (const auto& b : QN.blocks()) {
    const std::size_t k = b.modes[0];
    const double w = b.matrix(0, 0) / (2.0 * C.rate(k) * C.rate(k));
    acc -= w * norm_sq(nonlinear_b(SpectralField::basis_element(u.basis_ptr(), k), u));
  }
  return acc;
}

}  // namespace msf
