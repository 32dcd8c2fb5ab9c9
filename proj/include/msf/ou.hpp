#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "msf/operators.hpp"
#include "msf/rng.hpp"

namespace msf {

/// Linearised fast process dY = eps^{-1} C_eps Y dt + eps^{-1/2} Q^{1/2} dW,
/// C_eps = C + eps A. Without A the drift is eps^{-1} C.
struct OuParams {
  double epsilon = 1.0;
  DiagonalOperator C;
  std::optional<DiagonalOperator> A;
  CovarianceSpec Q;
};

/// Drift eigenvalues mu_i = eps^{-1}(c_i + eps a_i) < 0.
std::vector<double> drift_rates(const OuParams& p);

/// (e^{m dt} - 1) / m, equal to dt at m = 0.
double phi1(double m, double dt);

/**
 * Exact one-step transition of the OU process for a fixed dt.
 *
 * Because the drift is diagonal in the mode basis, the stochastic
 * convolution over a dense block has the closed-form covariance
 * eps^{-1} Q_ij phi1(mu_i + mu_j); no commutation with C is needed.
 */
class OuPropagator {
 public:
  OuPropagator(const OuParams& p, double dt);

  double dt() const { return dt_; }
  const std::vector<double>& rates() const { return mu_; }
  const std::vector<double>& decay() const { return decay_; }

  /// e^{mu dt} Y
  SpectralField propagate_mean(const SpectralField& Y) const;
  /// Convolution increment eta; consumes one normal per active mode.
  SpectralField convolution_noise(Rng& rng) const;
  /// e^{mu dt} Y + eta
  SpectralField step(const SpectralField& Y, Rng& rng) const;
  /// Jointly Gaussian (eta, Q^{1/2} dW); consumes two normals per active mode.
  std::pair<SpectralField, SpectralField> increments(Rng& rng) const;

  /// Closed-form Cov(eta_i, eta_j).
  double noise_covariance(std::size_t i, std::size_t j) const;
  /// Closed-form Cov(eta_i, (Q^{1/2} dW)_j).
  double cross_covariance(std::size_t i, std::size_t j) const;
  /// Closed-form Cov((Q^{1/2} dW)_i, (Q^{1/2} dW)_j).
  double increment_covariance(std::size_t i, std::size_t j) const;

 private:
  BasisPtr basis_;
  double eps_;
  double dt_;
  CovarianceSpec Q_;
  std::vector<double> mu_, decay_;
  std::vector<Eigen::MatrixXd> eta_factor_, joint_factor_;
};

SpectralField ou_exact_step(const SpectralField& Y, double dt, const OuParams& p, Rng& rng);

std::pair<SpectralField, SpectralField> stochastic_convolution_increment(double dt, const OuParams& p, Rng& rng);

}  // namespace msf
