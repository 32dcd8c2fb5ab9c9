#pragma once

#include <span>
#include <vector>

#include "msf/operators.hpp"

namespace msf {

/**
 * Ingredients of the limit transport-noise equation for a pair (C, Q):
 * the invariant measure, the noise directions g_k = (-C)^{-1} Q^{1/2} e_k
 * and the Ito-Stokes drift r.
 */
class LimitCoefficients {
 public:
  LimitCoefficients(DiagonalOperator C, CovarianceSpec Q);

  const DiagonalOperator& C() const { return C_; }
  const CovarianceSpec& Q() const { return Q_; }
  const InvariantMeasure& mu() const { return mu_; }
  const std::vector<Eigenpair>& eigenpairs() const { return pairs_; }
  const std::vector<SpectralField>& noise_directions() const { return g_; }
  std::size_t noise_dimension() const { return g_.size(); }
  const SpectralField& drift() const { return r_; }
  const CommuteCheck& commutation() const { return commute_; }
  const BasisPtr& basis_ptr() const { return C_.basis_ptr(); }

 private:
  DiagonalOperator C_;
  CovarianceSpec Q_;
  InvariantMeasure mu_;
  CommuteCheck commute_;
  std::vector<Eigenpair> pairs_;
  std::vector<SpectralField> g_;
  SpectralField r_;
};

/// r = int (-C)^{-1} b(w, w) dmu(w).
SpectralField ito_stokes_drift(const DiagonalOperator& C, const CovarianceSpec& Q);

/// Invariant-measure form: sum_m sigma_m b((-C)^{-1} f_m, b(f_m, u)).
SpectralField strat_corrector_invariant_form(const LimitCoefficients& c, const SpectralField& u);

/// Covariation form: 1/2 sum_k b(g_k, b(g_k, u)).
SpectralField strat_corrector_covariation_form(const LimitCoefficients& c, const SpectralField& u);

/// S(u) in the invariant-measure form; requires [C, Q] = 0.
SpectralField strat_corrector_apply(const LimitCoefficients& c, const SpectralField& u);

struct CorrectorComparison {
  SpectralField invariant_form;
  SpectralField covariation_form;
  double gap;  ///< max-abs coefficient difference
  CommuteCheck commutation;
};

/// Both corrector forms and their gap; valid for commuting and non-commuting pairs.
CorrectorComparison compare_corrector_forms(const LimitCoefficients& c, const SpectralField& u);

/// sum_k b(g_k, u) dW_k.
SpectralField transport_noise_increment(const LimitCoefficients& c, const SpectralField& u, std::span<const double> dW);

/// kappa_N(u) = sum_k q_k / (2 lambda_k^2) b(e_k, b(e_k, u)).
SpectralField eddy_kappa_apply(const CovarianceSpec& QN, const DiagonalOperator& C, const SpectralField& u);

/// -sum_k q_k / (2 lambda_k^2) ||b(e_k, u)||^2, the value of <kappa_N(u), u>.
double eddy_kappa_energy(const CovarianceSpec& QN, const DiagonalOperator& C, const SpectralField& u);

}  // namespace msf
