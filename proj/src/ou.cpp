#include "msf/ou.hpp"

#include <cmath>

#include "msf/error.hpp"

namespace msf {

std::vector<double> drift_rates(const OuParams& p) {
  if (!(p.epsilon > 0.0 && p.epsilon <= 1.0)) throw InvalidParameter("epsilon must lie in (0, 1]");
  if (p.C.basis_ptr() != p.Q.basis_ptr()) throw InvalidArgument("OU parameters: C and Q live on different bases");
  std::vector<double> mu(p.C.size());
  for (std::size_t i = 0; i < mu.size(); ++i) {
    double c = p.C.eigenvalue(i);
    if (p.A) c += p.epsilon * p.A->eigenvalue(i);
    mu[i] = c / p.epsilon;
  }
  return mu;
}

double phi1(double m, double dt) { return m == 0.0 ? dt : std::expm1(m * dt) / m; }

OuPropagator::OuPropagator(const OuParams& p, double dt)
    : basis_(p.C.basis_ptr()), eps_(p.epsilon), dt_(dt), Q_(p.Q), mu_(drift_rates(p)) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidParameter("OU step requires dt > 0");
  if (p.A && p.A->basis_ptr() != basis_) throw InvalidArgument("OU parameters: A lives on a different basis");
  decay_.resize(mu_.size());
  for (std::size_t i = 0; i < mu_.size(); ++i) decay_[i] = std::exp(mu_[i] * dt);

  for (const auto& b : Q_.blocks()) {
    const auto n = static_cast<Eigen::Index>(b.modes.size());
    Eigen::MatrixXd ee(n, n), ew(n, n), ww(n, n);
    for (Eigen::Index a = 0; a < n; ++a)
      for (Eigen::Index c = 0; c < n; ++c) {
        ee(a, c) = noise_covariance(b.modes[a], b.modes[c]);
        ew(a, c) = cross_covariance(b.modes[a], b.modes[c]);
        ww(a, c) = increment_covariance(b.modes[a], b.modes[c]);
      }
    Eigen::MatrixXd joint(2 * n, 2 * n);
    joint << ee, ew, ew.transpose(), ww;
    eta_factor_.push_back(psd_sqrt(ee));
    joint_factor_.push_back(psd_sqrt(0.5 * (joint + joint.transpose())));
  }
}

double OuPropagator::noise_covariance(std::size_t i, std::size_t j) const {
  return Q_.entry(i, j) / eps_ * phi1(mu_[i] + mu_[j], dt_);
}

double OuPropagator::cross_covariance(std::size_t i, std::size_t j) const {
  return Q_.entry(i, j) / std::sqrt(eps_) * phi1(mu_[i], dt_);
}

double OuPropagator::increment_covariance(std::size_t i, std::size_t j) const { return Q_.entry(i, j) * dt_; }

SpectralField OuPropagator::propagate_mean(const SpectralField& Y) const {
  if (Y.basis_ptr() != basis_) throw InvalidArgument("OU step: field basis mismatch");
  SpectralField out = Y;
  for (std::size_t i = 0; i < decay_.size(); ++i) out[i] *= decay_[i];
  return out;
}

SpectralField OuPropagator::convolution_noise(Rng& rng) const {
  SpectralField eta(basis_);
  const auto& blocks = Q_.blocks();
  for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
    const auto& modes = blocks[bi].modes;
    if (modes.size() == 1) {
      eta[modes[0]] = eta_factor_[bi](0, 0) * rng.normal();
      continue;
    }
    Eigen::VectorXd xi(modes.size());
    for (Eigen::Index a = 0; a < xi.size(); ++a) xi(a) = rng.normal();
    const Eigen::VectorXd v = eta_factor_[bi] * xi;
    for (std::size_t a = 0; a < modes.size(); ++a) eta[modes[a]] = v(a);
  }
  return eta;
}

SpectralField OuPropagator::step(const SpectralField& Y, Rng& rng) const {
  SpectralField out = propagate_mean(Y);
  out += convolution_noise(rng);
  return out;
}

std::pair<SpectralField, SpectralField> OuPropagator::increments(Rng& rng) const {
  SpectralField eta(basis_), dw(basis_);
  const auto& blocks = Q_.blocks();
  for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
    const auto& modes = blocks[bi].modes;
    const auto n = static_cast<Eigen::Index>(modes.size());
    Eigen::VectorXd xi(2 * n);
    for (Eigen::Index a = 0; a < xi.size(); ++a) xi(a) = rng.normal();
    const Eigen::VectorXd v = joint_factor_[bi] * xi;
    for (Eigen::Index a = 0; a < n; ++a) {
      eta[modes[a]] = v(a);
      dw[modes[a]] = v(n + a);
    }
  }
  return {std::move(eta), std::move(dw)};
}

SpectralField ou_exact_step(const SpectralField& Y, double dt, const OuParams& p, Rng& rng) {
  return OuPropagator(p, dt).step(Y, rng);
}

std::pair<SpectralField, SpectralField> stochastic_convolution_increment(double dt, const OuParams& p, Rng& rng) {
  return OuPropagator(p, dt).increments(rng);
}

}  // namespace msf
