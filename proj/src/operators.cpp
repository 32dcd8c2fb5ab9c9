#include "msf/operators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "msf/error.hpp"

namespace msf {

namespace {
constexpr double kFourPi2 = 4.0 * std::numbers::pi * std::numbers::pi;
}

std::string to_string(DissipationKind k) {
  switch (k) {
    case DissipationKind::Laplacian: return "laplacian";
    case DissipationKind::Friction: return "friction";
    case DissipationKind::Fractional: return "fractional";
    case DissipationKind::Combined: return "combined";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// DiagonalOperator

DiagonalOperator::DiagonalOperator(BasisPtr basis, std::vector<double> eigenvalues, DissipationSpec spec)
    : basis_(std::move(basis)), eig_(std::move(eigenvalues)), spec_(spec) {
  if (!basis_ || eig_.size() != basis_->size())
    throw InvalidArgument("DiagonalOperator: eigenvalue count does not match basis");
  gap_ = eig_.empty() ? 0.0 : -*std::max_element(eig_.begin(), eig_.end());
  for (double e : eig_)
    if (!(e < 0.0) || !std::isfinite(e)) throw InvalidOperator("DiagonalOperator must be negative definite");
}

SpectralField DiagonalOperator::apply(const SpectralField& u) const {
  if (u.basis_ptr() != basis_) throw InvalidArgument("DiagonalOperator::apply: basis mismatch");
  SpectralField out = u;
  for (std::size_t i = 0; i < eig_.size(); ++i) out[i] *= eig_[i];
  return out;
}

SpectralField DiagonalOperator::apply_neg_inverse(const SpectralField& u) const {
  if (u.basis_ptr() != basis_) throw InvalidArgument("DiagonalOperator::apply_neg_inverse: basis mismatch");
  SpectralField out = u;
  for (std::size_t i = 0; i < eig_.size(); ++i) out[i] /= -eig_[i];
  return out;
}

DiagonalOperator DiagonalOperator::plus_scaled(const DiagonalOperator& other, double s) const {
  if (other.basis_ != basis_) throw InvalidArgument("DiagonalOperator::plus_scaled: basis mismatch");
  if (s < 0.0) throw InvalidParameter("plus_scaled: scale must be non-negative");
  std::vector<double> e(eig_.size());
  for (std::size_t i = 0; i < e.size(); ++i) e[i] = eig_[i] + s * other.eig_[i];
  DissipationSpec spec = s == 0.0 ? spec_ : DissipationSpec{DissipationKind::Combined};
  return DiagonalOperator(basis_, std::move(e), spec);
}

DiagonalOperator make_dissipation(const DissipationSpec& spec, const BasisPtr& basis) {
  if (!basis) throw InvalidArgument("make_dissipation: missing basis");
  std::vector<double> e(basis->size());
  switch (spec.kind) {
    case DissipationKind::Laplacian:
      if (!(spec.nu > 0.0)) throw InvalidParameter("laplacian requires nu > 0");
      for (std::size_t i = 0; i < e.size(); ++i) e[i] = -spec.nu * kFourPi2 * basis->mode(i).k.norm2();
      break;
    case DissipationKind::Friction:
      if (!(spec.chi > 0.0)) throw InvalidParameter("friction requires chi > 0");
      std::fill(e.begin(), e.end(), -spec.chi);
      break;
    case DissipationKind::Fractional:
      if (!(spec.nu > 0.0)) throw InvalidParameter("fractional requires nu > 0");
      if (!(spec.gamma > 0.25 && spec.gamma <= 1.0)) throw InvalidParameter("fractional requires gamma in (1/4, 1]");
      for (std::size_t i = 0; i < e.size(); ++i)
        e[i] = spec.gamma == 1.0 ? -spec.nu * kFourPi2 * basis->mode(i).k.norm2()
                                 : -std::pow(spec.nu * kFourPi2 * basis->mode(i).k.norm2(), spec.gamma);
      break;
    case DissipationKind::Combined:
      throw InvalidParameter("combined operators are built with plus_scaled");
  }
  return DiagonalOperator(basis, std::move(e), spec);
}

DiagonalOperator make_laplacian(double nu, const BasisPtr& basis) {
  return make_dissipation({DissipationKind::Laplacian, nu, 0.0, 1.0}, basis);
}
DiagonalOperator make_friction(double chi, const BasisPtr& basis) {
  return make_dissipation({DissipationKind::Friction, 0.0, chi, 1.0}, basis);
}
DiagonalOperator make_fractional(double nu, double gamma, const BasisPtr& basis) {
  return make_dissipation({DissipationKind::Fractional, nu, 0.0, gamma}, basis);
}

double sobolev_inner(const SpectralField& u, const SpectralField& v, double s, const DiagonalOperator& A) {
  require_same_basis(u, v, "sobolev_inner");
  if (A.basis_ptr() != u.basis_ptr()) throw InvalidArgument("sobolev_inner: operator basis mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double a = A.eigenvalue(i);
    if (!(a < 0.0)) throw InvalidOperator("sobolev_inner: operator has a non-negative eigenvalue");
    acc += (s == 0.0 ? 1.0 : std::pow(-a, s)) * u[i] * v[i];
  }
  return acc;
}

// ---------------------------------------------------------------------------
// CovarianceSpec

CovarianceSpec CovarianceSpec::diagonal(BasisPtr basis, std::vector<double> q) {
  if (!basis || q.size() != basis->size()) throw InvalidArgument("diagonal covariance: size mismatch with basis");
  CovarianceSpec c;
  c.basis_ = std::move(basis);
  c.diagonal_ = true;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (!std::isfinite(q[i]) || q[i] < 0.0) throw InvalidParameter("diagonal covariance entries must be finite and >= 0");
    if (q[i] > 0.0) c.blocks_.push_back({{i}, Eigen::MatrixXd::Constant(1, 1, q[i])});
  }
  c.diag_ = std::move(q);
  return c;
}

CovarianceSpec CovarianceSpec::dense(BasisPtr basis, std::vector<std::size_t> modes, Eigen::MatrixXd q) {
  if (!basis) throw InvalidArgument("dense covariance: missing basis");
  const auto n = modes.size();
  if (n == 0 || n > kMaxDenseModes)
    throw InvalidParameter("dense covariance subset must contain 1.." + std::to_string(kMaxDenseModes) + " modes");
  if (q.rows() != static_cast<Eigen::Index>(n) || q.cols() != static_cast<Eigen::Index>(n))
    throw InvalidArgument("dense covariance: matrix shape does not match the mode subset");
  std::vector<std::size_t> sorted = modes;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw InvalidArgument("dense covariance: repeated mode in subset");
  if (sorted.back() >= basis->size()) throw InvalidArgument("dense covariance: mode index out of range");
  if (!q.allFinite()) throw InvalidParameter("dense covariance must be finite");
  const double scale = std::max(1.0, q.cwiseAbs().maxCoeff());
  if ((q - q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw InvalidParameter("dense covariance must be symmetric");
  Eigen::MatrixXd sym = 0.5 * (q + q.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  if (es.eigenvalues().minCoeff() < -1e-12) throw InvalidParameter("dense covariance must be positive semidefinite");

  CovarianceSpec c;
  c.basis_ = std::move(basis);
  c.diagonal_ = false;
  c.diag_.assign(c.basis_->size(), 0.0);
  for (std::size_t a = 0; a < n; ++a) c.diag_[modes[a]] = sym(a, a);
  c.blocks_.push_back({std::move(modes), std::move(sym)});
  return c;
}

CovarianceSpec CovarianceSpec::zero(BasisPtr basis) {
  const auto n = basis->size();
  return diagonal(std::move(basis), std::vector<double>(n, 0.0));
}

double CovarianceSpec::entry(std::size_t i, std::size_t j) const {
  if (diagonal_) return i == j ? diag_[i] : 0.0;
  const auto& b = blocks_.front();
  auto ia = std::find(b.modes.begin(), b.modes.end(), i);
  auto ja = std::find(b.modes.begin(), b.modes.end(), j);
  if (ia == b.modes.end() || ja == b.modes.end()) return 0.0;
  return b.matrix(ia - b.modes.begin(), ja - b.modes.begin());
}

double CovarianceSpec::trace() const {
  double t = 0.0;
  for (double v : diag_) t += v;
  return t;
}

CovarianceSpec CovarianceSpec::scaled(double s) const {
  if (!(s >= 0.0)) throw InvalidParameter("covariance scale must be >= 0");
  if (diagonal_) {
    auto q = diag_;
    for (auto& v : q) v *= s;
    return diagonal(basis_, std::move(q));
  }
  return dense(basis_, blocks_.front().modes, s * blocks_.front().matrix);
}

double CovarianceSpec::min_eigenvalue() const {
  double m = 0.0;
  bool first = true;
  for (const auto& b : blocks_) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b.matrix, Eigen::EigenvaluesOnly);
    const double v = es.eigenvalues().minCoeff();
    m = first ? v : std::min(m, v);
    first = false;
  }
  return m;
}

// ---------------------------------------------------------------------------
// Invariant measure

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
  if (m.rows() == 1) {
    const double v = m(0, 0);
    if (v < -1e-12) throw NumericFailure("psd_sqrt: matrix is not positive semidefinite");
    return Eigen::MatrixXd::Constant(1, 1, std::sqrt(std::max(v, 0.0)));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  Eigen::VectorXd ev = es.eigenvalues();
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) < -1e-12 * scale) throw NumericFailure("psd_sqrt: matrix is not positive semidefinite");
    ev(i) = std::sqrt(std::max(ev(i), 0.0));
  }
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

InvariantMeasure::InvariantMeasure(CovarianceSpec cov) : cov_(std::move(cov)) {
  sqrt_.reserve(cov_.blocks().size());
  for (const auto& b : cov_.blocks()) sqrt_.push_back(psd_sqrt(b.matrix));
}

std::vector<Eigenpair> InvariantMeasure::eigenpairs() const {
  std::vector<Eigenpair> out;
  const auto& basis = cov_.basis_ptr();
  for (const auto& b : cov_.blocks()) {
    if (b.modes.size() == 1) {
      out.push_back({b.matrix(0, 0), SpectralField::basis_element(basis, b.modes[0])});
      continue;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b.matrix);
    for (Eigen::Index m = 0; m < es.eigenvalues().size(); ++m) {
      SpectralField f(basis);
      for (std::size_t a = 0; a < b.modes.size(); ++a) f[b.modes[a]] = es.eigenvectors()(a, m);
      out.push_back({std::max(es.eigenvalues()(m), 0.0), std::move(f)});
    }
  }
  return out;
}

InvariantMeasure invariant_covariance(const DiagonalOperator& C, const CovarianceSpec& Q) {
  if (C.basis_ptr() != Q.basis_ptr()) throw InvalidArgument("invariant_covariance: basis mismatch");
  // C is diagonal, so the Lyapunov equation decouples entrywise:
  // -(lambda_i + lambda_j) X_ij = -Q_ij.
  double residual = 0.0;
  double scale = 1.0;
  auto solve_block = [&](const CovarianceBlock& b) {
    const auto n = static_cast<Eigen::Index>(b.modes.size());
    Eigen::MatrixXd X(n, n);
    for (Eigen::Index a = 0; a < n; ++a)
      for (Eigen::Index c = 0; c < n; ++c) {
        const double li = C.rate(b.modes[a]), lj = C.rate(b.modes[c]);
        X(a, c) = b.matrix(a, c) / (li + lj);
      }
    X = 0.5 * (X + X.transpose());
    for (Eigen::Index a = 0; a < n; ++a)
      for (Eigen::Index c = 0; c < n; ++c) {
        const double li = C.rate(b.modes[a]), lj = C.rate(b.modes[c]);
        residual = std::max(residual, std::abs(-li * X(a, c) - X(a, c) * lj + b.matrix(a, c)));
        scale = std::max(scale, std::abs(b.matrix(a, c)));
      }
    return X;
  };

  CovarianceSpec out;
  if (Q.is_diagonal()) {
    std::vector<double> s(Q.diag().size(), 0.0);
    for (const auto& b : Q.blocks()) s[b.modes[0]] = solve_block(b)(0, 0);
    out = CovarianceSpec::diagonal(Q.basis_ptr(), std::move(s));
  } else {
    const auto& b = Q.blocks().front();
    out = CovarianceSpec::dense(Q.basis_ptr(), b.modes, solve_block(b));
  }
  if (residual > 1e-8 * scale) throw NumericFailure("invariant_covariance: Lyapunov residual too large");
  InvariantMeasure mu(std::move(out));
  mu.set_lyapunov_residual(residual);
  return mu;
}

SpectralField sample_invariant(const InvariantMeasure& mu, Rng& rng) {
  SpectralField w(mu.covariance().basis_ptr());
  const auto& blocks = mu.covariance().blocks();
  const auto& roots = mu.sqrt_factors();
  for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
    const auto& modes = blocks[bi].modes;
    const auto n = static_cast<Eigen::Index>(modes.size());
    Eigen::VectorXd xi(n);
    for (Eigen::Index a = 0; a < n; ++a) xi(a) = rng.normal();
    const Eigen::VectorXd v = roots[bi] * xi;
    for (Eigen::Index a = 0; a < n; ++a) w[modes[a]] = v(a);
  }
  return w;
}

CovarianceSpec make_QN(int N, double delta, double c_kappa, const BasisPtr& basis) {
  if (N < 1) throw InvalidParameter("make_QN: N must be >= 1");
  if (!(delta >= 0.0)) throw InvalidParameter("make_QN: delta must be >= 0");
  if (!(c_kappa > 0.0)) throw InvalidParameter("make_QN: c_kappa must be > 0");
  const double lo = static_cast<double>(N) * N, hi = 4.0 * N * N;
  std::vector<std::size_t> shell;
  double norm = 0.0;
  for (std::size_t j = 0; j < basis->wavevector_count(); ++j) {
    const double k2 = basis->wavevector(j).norm2();
    if (k2 >= lo && k2 <= hi) {
      shell.push_back(j);
      norm += std::pow(k2, -delta);
    }
  }
  if (shell.empty())
    throw InvalidParameter("make_QN: shell " + std::to_string(N) + " <= |k| <= " + std::to_string(2 * N) +
                           " does not meet the truncated lattice");
  std::vector<double> q(basis->size(), 0.0);
  for (auto j : shell) {
    const double w = c_kappa * c_kappa * std::pow(basis->wavevector(j).norm2(), -delta) / norm;
    q[2 * j] = w;
    q[2 * j + 1] = w;
  }
  return CovarianceSpec::diagonal(basis, std::move(q));
}

CommuteCheck check_commute(const DiagonalOperator& C, const CovarianceSpec& Q) {
  if (C.basis_ptr() != Q.basis_ptr()) throw InvalidArgument("check_commute: basis mismatch");
  double r = 0.0;
  for (const auto& b : Q.blocks())
    for (std::size_t a = 0; a < b.modes.size(); ++a)
      for (std::size_t c = 0; c < b.modes.size(); ++c)
        r = std::max(r, std::abs((C.eigenvalue(b.modes[a]) - C.eigenvalue(b.modes[c])) * b.matrix(a, c)));
  return {r <= 1e-12, r};
}

}  // namespace msf
