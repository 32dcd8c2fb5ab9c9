#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <string>
#include <vector>

#include "msf/rng.hpp"
#include "msf/spectral.hpp"

namespace msf {

enum class DissipationKind { Laplacian, Friction, Fractional, Combined };

std::string to_string(DissipationKind k);

/// Parameters of a dissipation operator. nu for laplacian/fractional,
/// chi for friction, gamma for fractional.
struct DissipationSpec {
  DissipationKind kind = DissipationKind::Laplacian;
  double nu = 0.0;
  double chi = 0.0;
  double gamma = 1.0;
};

/// Negative-definite operator acting diagonally on the mode basis.
class DiagonalOperator {
 public:
  DiagonalOperator() = default;
  DiagonalOperator(BasisPtr basis, std::vector<double> eigenvalues, DissipationSpec spec);

  const BasisPtr& basis_ptr() const { return basis_; }
  std::size_t size() const { return eig_.size(); }
  double eigenvalue(std::size_t i) const { return eig_[i]; }
  const std::vector<double>& eigenvalues() const { return eig_; }
  /// lambda_i = -eigenvalue(i) > 0.
  double rate(std::size_t i) const { return -eig_[i]; }
  /// Smallest rate lambda_0.
  double spectral_gap() const { return gap_; }
  const DissipationSpec& spec() const { return spec_; }
  DissipationKind kind() const { return spec_.kind; }

  SpectralField apply(const SpectralField& u) const;
  /// (-D)^{-1} u
  SpectralField apply_neg_inverse(const SpectralField& u) const;
  /// D + s * other, e.g. C_eps = C + eps A.
  DiagonalOperator plus_scaled(const DiagonalOperator& other, double s) const;

 private:
  BasisPtr basis_;
  std::vector<double> eig_;
  DissipationSpec spec_;
  double gap_ = 0.0;
};

DiagonalOperator make_dissipation(const DissipationSpec& spec, const BasisPtr& basis);
DiagonalOperator make_laplacian(double nu, const BasisPtr& basis);
DiagonalOperator make_friction(double chi, const BasisPtr& basis);
DiagonalOperator make_fractional(double nu, double gamma, const BasisPtr& basis);

/// sum_m (-alpha_m)^s u_m v_m with alpha_m the eigenvalues of A.
double sobolev_inner(const SpectralField& u, const SpectralField& v, double s, const DiagonalOperator& A);

/// Symmetric block of a covariance over a subset of modes.
struct CovarianceBlock {
  std::vector<std::size_t> modes;
  Eigen::MatrixXd matrix;
};

/**
 * Noise covariance Q: either diagonal (one q per basis element) or dense over
 * a declared subset of at most kMaxDenseModes modes, zero elsewhere.
 *
 * Internally both are stored as independent symmetric blocks: the diagonal
 * case uses a 1x1 block per active mode, the dense case a single block.
 */
class CovarianceSpec {
 public:
  static constexpr std::size_t kMaxDenseModes = 64;

  CovarianceSpec() = default;
  static CovarianceSpec diagonal(BasisPtr basis, std::vector<double> q);
  static CovarianceSpec dense(BasisPtr basis, std::vector<std::size_t> modes, Eigen::MatrixXd q);
  static CovarianceSpec zero(BasisPtr basis);

  const BasisPtr& basis_ptr() const { return basis_; }
  bool is_diagonal() const { return diagonal_; }
  /// Diagonal entries Q_ii for every basis element.
  const std::vector<double>& diag() const { return diag_; }
  const std::vector<CovarianceBlock>& blocks() const { return blocks_; }
  /// Entry Q_ij.
  double entry(std::size_t i, std::size_t j) const;
  double trace() const;
  bool is_zero() const { return blocks_.empty(); }
  CovarianceSpec scaled(double s) const;
  /// Smallest eigenvalue over all blocks (0 for an empty covariance).
  double min_eigenvalue() const;

 private:
  BasisPtr basis_;
  bool diagonal_ = true;
  std::vector<double> diag_;
  std::vector<CovarianceBlock> blocks_;
};

/// (sigma, f) with f a unit-norm field.
struct Eigenpair {
  double value;
  SpectralField direction;
};

/// Symmetric square root with eigenvalues in [-1e-12, 0) clamped to zero.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m);

/// Gaussian law N(0, Q_inf) on the truncated space.
class InvariantMeasure {
 public:
  InvariantMeasure() = default;
  explicit InvariantMeasure(CovarianceSpec cov);

  const CovarianceSpec& covariance() const { return cov_; }
  /// Per-block Q_inf^{1/2}.
  const std::vector<Eigen::MatrixXd>& sqrt_factors() const { return sqrt_; }
  std::vector<Eigenpair> eigenpairs() const;
  /// max |C Q_inf + Q_inf C + Q| recorded at construction.
  double lyapunov_residual() const { return residual_; }
  void set_lyapunov_residual(double r) { residual_ = r; }

 private:
  CovarianceSpec cov_;
  std::vector<Eigen::MatrixXd> sqrt_;
  double residual_ = 0.0;
};

/// Solves C Q_inf + Q_inf C = -Q.
InvariantMeasure invariant_covariance(const DiagonalOperator& C, const CovarianceSpec& Q);

SpectralField sample_invariant(const InvariantMeasure& mu, Rng& rng);

/// Diagonal covariance on the shell N <= |k| <= 2N with weights |k|^{-2 delta},
/// normalized so that each parity carries total variance c_kappa^2.
CovarianceSpec make_QN(int N, double delta, double c_kappa, const BasisPtr& basis);

struct CommuteCheck {
  bool commute;
  double residual;
};

/// max |CQ - QC| and whether it is at most 1e-12.
CommuteCheck check_commute(const DiagonalOperator& C, const CovarianceSpec& Q);

}  // namespace msf
