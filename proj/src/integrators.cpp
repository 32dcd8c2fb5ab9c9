#include "msf/integrators.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include "msf/error.hpp"

namespace msf {

namespace {

std::vector<double> exp_factors(const DiagonalOperator& A, double dt) {
  std::vector<double> f(A.size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::exp(A.eigenvalue(i) * dt);
  return f;
}

void scale_modes(SpectralField& f, const std::vector<double>& s) {
  for (std::size_t i = 0; i < s.size(); ++i) f[i] *= s[i];
}

OuParams ou_params(const SlowFastParams& p) { return OuParams{p.epsilon, p.C, p.A, p.Q}; }

void check_shared_basis(const SlowFastParams& p) {
  const auto& b = p.A.basis_ptr();
  if (p.C.basis_ptr() != b || p.Q.basis_ptr() != b || p.u0.basis_ptr() != b || p.y0.basis_ptr() != b)
    throw InvalidArgument("slow-fast parameters live on different bases");
}

}  // namespace

// ---------------------------------------------------------------------------
// Slow-fast

SlowFastStepper::SlowFastStepper(const SlowFastParams& p, double dt)
    : eps_(p.epsilon),
      dt_(dt),
      nonlinear_(p.nonlinear),
      decayA_(exp_factors(p.A, dt)),
      prop_(ou_params(p), dt),
      q_diag_(p.Q.diag()) {
  check_shared_basis(p);
  const auto& mu = prop_.rates();
  w_state_.resize(mu.size());
  w_noise_.resize(mu.size());
  for (std::size_t m = 0; m < mu.size(); ++m) {
    const double a = phi1(2.0 * mu[m], dt);
    w_state_[m] = a;
    // int_0^dt phi1(2 mu, s) ds
    w_noise_[m] = mu[m] == 0.0 ? 0.5 * dt * dt : (a - dt) / (2.0 * mu[m]);
  }
}

double SlowFastStepper::mode_square_integral(std::size_t m, double y_m) const {
  return y_m * y_m * w_state_[m] + q_diag_[m] / eps_ * w_noise_[m];
}

SlowFastState SlowFastStepper::step(const SlowFastState& s, Rng& rng) const {
  SlowFastState n;
  n.step = s.step + 1;
  n.t = static_cast<double>(n.step) * dt_;
  const double ie = 1.0 / std::sqrt(eps_);

  n.u = s.u;
  n.y = s.y;
  if (nonlinear_) {
    SpectralField adv = s.u;
    adv.add_scaled(ie, s.y);
    n.u.add_scaled(dt_, nonlinear_b(adv, s.u));
    n.y.add_scaled(dt_, nonlinear_b(adv, s.y));
  }
  scale_modes(n.u, decayA_);
  const SpectralField eta = prop_.convolution_noise(rng);
  n.y = prop_.propagate_mean(n.y);
  n.y += eta;
  n.Y = prop_.propagate_mean(s.Y);
  n.Y += eta;
  return n;
}

SlowFastState step_slowfast(const SlowFastState& s, const SlowFastParams& p, Rng& rng) {
  return SlowFastStepper(p, p.dt).step(s, rng);
}

// ---------------------------------------------------------------------------
// Limit equation

LimitStepper::LimitStepper(std::shared_ptr<const LimitCoefficients> coeffs, const DiagonalOperator& A, double dt,
                           bool nonlinear)
    : c_(std::move(coeffs)), dt_(dt), nonlinear_(nonlinear), decayA_(exp_factors(A, dt)) {
  if (!(dt > 0.0)) throw InvalidParameter("limit step requires dt > 0");
  if (A.basis_ptr() != c_->basis_ptr()) throw InvalidArgument("limit step: basis mismatch");
  if (!c_->commutation().commute)
    throw UnsupportedConfiguration("limit equation requires [C, Q] = 0 (commutator residual " +
                                   std::to_string(c_->commutation().residual) + ")");
  has_drift_ = max_abs(c_->drift()) > 0.0;
}

SpectralField LimitStepper::step(const SpectralField& u, Rng& rng) const {
  SpectralField next = u;
  if (nonlinear_) {
    SpectralField adv = u;
    if (has_drift_) adv += c_->drift();
    next.add_scaled(dt_, nonlinear_b(adv, u));
  } else if (has_drift_) {
    next.add_scaled(dt_, nonlinear_b(c_->drift(), u));
  }
  // With [C, Q] = 0 the corrector equals 1/2 sum_k b(g_k, b(g_k, u)), which
  // shares b(g_k, u) with the noise increment.
  const double sdt = std::sqrt(dt_);
  for (const auto& g : c_->noise_directions()) {
    const SpectralField bg = nonlinear_b(g, u);
    next.add_scaled(sdt * rng.normal(), bg);
    next.add_scaled(0.5 * dt_, nonlinear_b(g, bg));
  }
  scale_modes(next, decayA_);
  return next;
}

SpectralField step_limit(const SpectralField& u, const LimitCoefficients& coeffs, const DiagonalOperator& A,
                         double dt, Rng& rng, bool nonlinear) {
  return LimitStepper(std::make_shared<const LimitCoefficients>(coeffs), A, dt, nonlinear).step(u, rng);
}

EddyStepper::EddyStepper(CovarianceSpec QN, DiagonalOperator C, const DiagonalOperator& A, double dt, bool nonlinear)
    : QN_(std::move(QN)), C_(std::move(C)), dt_(dt), nonlinear_(nonlinear) {
  if (!(dt > 0.0)) throw InvalidParameter("eddy step requires dt > 0");
  const auto& basis = A.basis_ptr();
  if (QN_.basis_ptr() != basis || C_.basis_ptr() != basis) throw InvalidArgument("eddy step: basis mismatch");
  kdiag_.assign(A.size(), 0.0);
  if (!QN_.is_zero()) {
    // A diagonal kappa maps the all-ones field to its diagonal; a random probe confirms diagonality.
    SpectralField ones(basis);
    for (auto& c : ones.coeffs()) c = 1.0;
    const SpectralField k1 = eddy_kappa_apply(QN_, C_, ones);
    kdiag_.assign(k1.coeffs().begin(), k1.coeffs().end());
    Rng rng(0x5eed);
    SpectralField probe(basis);
    for (auto& c : probe.coeffs()) c = rng.normal();
    SpectralField expect = probe;
    for (std::size_t m = 0; m < expect.size(); ++m) expect[m] *= kdiag_[m];
    const SpectralField got = eddy_kappa_apply(QN_, C_, probe);
    diagonal_ = max_abs(got - expect) <= 1e-10 * std::max(1.0, max_abs(got));
    if (!diagonal_) kdiag_.assign(A.size(), 0.0);
  }
  decay_.resize(A.size());
  for (std::size_t m = 0; m < decay_.size(); ++m) decay_[m] = std::exp((A.eigenvalue(m) + kdiag_[m]) * dt);
}

SpectralField EddyStepper::step(const SpectralField& u) const {
  SpectralField next = u;
  if (nonlinear_) next.add_scaled(dt_, nonlinear_b(u, u));
  if (!diagonal_) next.add_scaled(dt_, eddy_kappa_apply(QN_, C_, u));
  scale_modes(next, decay_);
  return next;
}

SpectralField step_eddy_deterministic(const SpectralField& u, const CovarianceSpec& QN, const DiagonalOperator& C,
                                      const DiagonalOperator& A, double dt, bool nonlinear) {
  return EddyStepper(QN, C, A, dt, nonlinear).step(u);
}

// ---------------------------------------------------------------------------
// Observables and trajectories

ObservableSpec ObservableSpec::pairing(SpectralField h, std::string name, int stride) {
  ObservableSpec o;
  o.kind = ObservableKind::Pairing;
  o.h = std::move(h);
  o.name = std::move(name);
  o.stride = stride;
  return o;
}

ObservableSpec ObservableSpec::simple(ObservableKind kind, std::string name, int stride) {
  ObservableSpec o;
  o.kind = kind;
  o.name = std::move(name);
  o.stride = stride;
  return o;
}

bool is_fast_observable(ObservableKind k) {
  switch (k) {
    case ObservableKind::FastEnergy:
    case ObservableKind::LinearisationGap:
    case ObservableKind::GapNorm:
    case ObservableKind::FrictionIntegral:
    case ObservableKind::ViscousIntegral: return true;
    default: return false;
  }
}

std::string run_kind(const RunParams& p) {
  switch (p.index()) {
    case 0: return "slowfast";
    case 1: return "limit";
    default: return "eddy";
  }
}

namespace {

struct HorizonInfo {
  double dt;
  std::int64_t steps;
};

HorizonInfo resolve_horizon(double dt, double T) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidParameter("dt must be positive");
  if (!(T >= dt)) throw InvalidParameter("horizon T must be at least dt");
  const double ratio = T / dt;
  const auto n = static_cast<std::int64_t>(std::llround(ratio));
  if (std::abs(ratio - static_cast<double>(n)) > 1e-9 * ratio) {
    std::clog << "warning: T/dt = " << ratio << " is not an integer; using " << n << " steps of " << T / n << "\n";
    return {T / static_cast<double>(n), n};
  }
  return {dt, n};
}

}  // namespace

TrajectoryRunner::TrajectoryRunner(RunParams params, std::vector<ObservableSpec> observables, Rng rng)
    : params_(std::move(params)), obs_(std::move(observables)), rng_(std::move(rng)) {
  for (const auto& o : obs_) {
    if (o.stride < 1) throw InvalidParameter("observable stride must be >= 1");
    if (o.kind == ObservableKind::Pairing && o.h.empty()) throw InvalidArgument("pairing observable without h");
  }
  if (auto* p = std::get_if<SlowFastParams>(&params_)) {
    check_shared_basis(*p);
    const auto h = resolve_horizon(p->dt, p->T);
    dt_ = h.dt;
    n_steps_ = h.steps;
    cap_ = p->blowup_cap;
    eps_ = p->epsilon;
    sf_ = std::make_shared<const SlowFastStepper>(*p, dt_);
    state_.u = p->u0;
    state_.y = p->y0;
    if (p->y0_stationary) state_.y += sample_invariant(invariant_covariance(p->C.plus_scaled(p->A, eps_), p->Q), rng_);
    if (p->u0_prepared)
      state_.u += std::sqrt(eps_) * nonlinear_b(p->C.plus_scaled(p->A, eps_).apply_neg_inverse(state_.y), p->u0);
    state_.Y = SpectralField(p->u0.basis_ptr());
    friction_w_.resize(p->C.size());
    viscous_w_.resize(p->A.size());
    for (std::size_t m = 0; m < friction_w_.size(); ++m) {
      friction_w_[m] = p->C.rate(m);
      viscous_w_[m] = p->A.rate(m);
    }
  } else {
    for (const auto& o : obs_)
      if (is_fast_observable(o.kind))
        throw InvalidArgument("observable '" + o.name + "' requires a slow-fast run");
    if (auto* l = std::get_if<LimitParams>(&params_)) {
      const auto h = resolve_horizon(l->dt, l->T);
      dt_ = h.dt;
      n_steps_ = h.steps;
      cap_ = l->blowup_cap;
      lim_ = std::make_shared<const LimitStepper>(l->coeffs, l->A, dt_, l->nonlinear);
      state_.u = l->u0;
    } else {
      auto& e = std::get<EddyParams>(params_);
      const auto h = resolve_horizon(e.dt, e.T);
      dt_ = h.dt;
      n_steps_ = h.steps;
      cap_ = e.blowup_cap;
      eddy_ = std::make_shared<const EddyStepper>(e.QN, e.C, e.A, dt_, e.nonlinear);
      state_.u = e.u0;
    }
  }
  for (const auto& o : obs_)
    if (o.kind == ObservableKind::Pairing) require_same_basis(o.h, state_.u, "observable");
  series_.resize(obs_.size());
  record_observables();
}

TrajectoryRunner TrajectoryRunner::resume(RunParams params, std::vector<ObservableSpec> observables,
                                          const TrajectoryCheckpoint& cp) {
  TrajectoryRunner r(std::move(params), std::move(observables), Rng::deserialize(cp.rng));
  const auto& basis = r.state_.u.basis_ptr();
  r.state_.step = cp.step;
  r.state_.t = static_cast<double>(cp.step) * r.dt_;
  r.state_.u = SpectralField(basis, cp.u);
  if (r.sf_) {
    r.state_.y = SpectralField(basis, cp.y);
    r.state_.Y = SpectralField(basis, cp.Y);
  }
  r.rng_ = Rng::deserialize(cp.rng);
  r.friction_integral_ = cp.friction_integral;
  r.viscous_integral_ = cp.viscous_integral;
  r.gap_integral_ = cp.gap_integral;
  if (cp.series.size() != r.obs_.size()) throw InvalidArgument("checkpoint does not match the observable list");
  r.series_ = cp.series;
  return r;
}

void TrajectoryRunner::record_observables() {
  const auto s = state_.step;
  for (std::size_t i = 0; i < obs_.size(); ++i) {
    const auto& o = obs_[i];
    if (s % o.stride != 0 && s != n_steps_) continue;
    double v = 0.0;
    switch (o.kind) {
      case ObservableKind::Pairing: v = inner(state_.u, o.h); break;
      case ObservableKind::Energy: v = norm_sq(state_.u); break;
      case ObservableKind::FastEnergy: v = norm_sq(state_.y); break;
      case ObservableKind::LinearisationGap: v = gap_integral_; break;
      case ObservableKind::GapNorm: v = norm_sq(state_.y - state_.Y); break;
      case ObservableKind::FrictionIntegral: v = friction_integral_; break;
      case ObservableKind::ViscousIntegral: v = viscous_integral_; break;
      case ObservableKind::LargeScaleEnergy: {
        const auto& B = state_.u.basis();
        for (std::size_t m = 0; m < state_.u.size(); ++m) {
          const auto k = B.mode(m).k;
          if (std::abs(k.kx) <= o.cutoff && std::abs(k.ky) <= o.cutoff) v += state_.u[m] * state_.u[m];
        }
        break;
      }
    }
    series_[i].t.push_back(state_.t);
    series_[i].v.push_back(v);
  }
}

void TrajectoryRunner::check_finite() const {
  const double nu = norm_sq(state_.u);
  const double ny = state_.y.empty() ? 0.0 : norm_sq(state_.y);
  const double cap2 = cap_ * cap_;
  if (!std::isfinite(nu) || !std::isfinite(ny) || nu > cap2 || ny > cap2)
    throw DivergenceError("trajectory exceeded the blow-up cap", state_.step);
}

void TrajectoryRunner::step_once() {
  if (sf_) {
    for (std::size_t m = 0; m < state_.y.size(); ++m) {
      const double I = sf_->mode_square_integral(m, state_.y[m]);
      friction_integral_ += friction_w_[m] * I;
      viscous_integral_ += viscous_w_[m] * I;
    }
    const double g0 = norm_sq(state_.y - state_.Y);
    state_ = sf_->step(state_, rng_);
    const double g1 = norm_sq(state_.y - state_.Y);
    gap_integral_ += 0.5 * dt_ * (g0 + g1) / eps_;
  } else if (lim_) {
    state_.u = lim_->step(state_.u, rng_);
    state_.step += 1;
    state_.t = static_cast<double>(state_.step) * dt_;
  } else {
    state_.u = eddy_->step(state_.u);
    state_.step += 1;
    state_.t = static_cast<double>(state_.step) * dt_;
  }
  check_finite();
}

void TrajectoryRunner::advance(std::int64_t n) {
  for (std::int64_t i = 0; i < n && !finished(); ++i) {
    step_once();
    record_observables();
  }
}

TrajectoryCheckpoint TrajectoryRunner::checkpoint() const {
  TrajectoryCheckpoint cp;
  cp.step = state_.step;
  cp.u.assign(state_.u.coeffs().begin(), state_.u.coeffs().end());
  if (sf_) {
    cp.y.assign(state_.y.coeffs().begin(), state_.y.coeffs().end());
    cp.Y.assign(state_.Y.coeffs().begin(), state_.Y.coeffs().end());
  }
  cp.rng = rng_.serialize();
  cp.friction_integral = friction_integral_;
  cp.viscous_integral = viscous_integral_;
  cp.gap_integral = gap_integral_;
  cp.series = series_;
  return cp;
}

TrajectoryRecord TrajectoryRunner::record() const {
  TrajectoryRecord r;
  r.series = series_;
  r.u_final = state_.u;
  if (sf_) r.y_final = state_.y;
  return r;
}

TrajectoryRecord run_trajectory(const RunParams& params, const std::vector<ObservableSpec>& observables, Rng& rng) {
  TrajectoryRunner runner(params, observables, rng);
  runner.run();
  rng = Rng::deserialize(runner.checkpoint().rng);
  return runner.record();
}

}  // namespace msf
