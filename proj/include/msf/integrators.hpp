#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "msf/limit_terms.hpp"
#include "msf/ou.hpp"

namespace msf {

inline constexpr double kDefaultBlowupCap = 1e6;

struct SlowFastParams {
  double epsilon = 0.1;
  DiagonalOperator A;
  DiagonalOperator C;
  CovarianceSpec Q;
  double dt = 0.01;
  double T = 1.0;
  SpectralField u0;
  SpectralField y0;
  /// Add an independent draw from the stationary law N(0, Q_inf) of (C + eps A, Q) to y0
  /// at the start of every trajectory.
  bool y0_stationary = false;
  /// Add sqrt(eps) b((-C - eps A)^{-1} y, u0) to u0, where y is the starting fast field.
  /// This is the conditional mean of the small scales given y and removes the O(eps) initial layer.
  bool u0_prepared = false;
  bool nonlinear = true;
  double blowup_cap = kDefaultBlowupCap;
};

struct SlowFastState {
  double t = 0.0;
  std::int64_t step = 0;
  SpectralField u;  ///< slow component
  SpectralField y;  ///< rescaled fast component
  SpectralField Y;  ///< linearised fast component, driven by the same noise as y
};

/**
 * Lie splitting for the slow-fast system:
 *   u' = e^{A dt} (u + dt [b(u,u) + eps^{-1/2} b(y,u)])
 *   y' = e^{mu dt} (y + dt [b(u,y) + eps^{-1/2} b(y,y)]) + eta
 *   Y' = e^{mu dt} Y + eta
 * with mu the eigenvalues of eps^{-1} C_eps and eta the exact stochastic
 * convolution over the step.
 */
class SlowFastStepper {
 public:
  SlowFastStepper(const SlowFastParams& p, double dt);

  SlowFastState step(const SlowFastState& s, Rng& rng) const;
  const OuPropagator& propagator() const { return prop_; }
  double dt() const { return dt_; }

  /// Conditional expectation of int_0^dt y_m(s)^2 ds given y_m(0), per mode,
  /// under the linear dynamics; used for the dissipation integrals.
  double mode_square_integral(std::size_t m, double y_m) const;

 private:
  double eps_;
  double dt_;
  bool nonlinear_;
  std::vector<double> decayA_;
  OuPropagator prop_;
  std::vector<double> q_diag_;
  std::vector<double> w_state_, w_noise_;
};

SlowFastState step_slowfast(const SlowFastState& s, const SlowFastParams& p, Rng& rng);

/// Exponential Euler-Maruyama for the limit equation in Ito form:
/// drift A u + b(u,u) + S(u) + b(r,u), noise sum_k b(g_k, u) dW_k.
class LimitStepper {
 public:
  LimitStepper(std::shared_ptr<const LimitCoefficients> coeffs, const DiagonalOperator& A, double dt,
               bool nonlinear = true);
  SpectralField step(const SpectralField& u, Rng& rng) const;
  double dt() const { return dt_; }

 private:
  std::shared_ptr<const LimitCoefficients> c_;
  double dt_;
  bool nonlinear_;
  bool has_drift_;
  std::vector<double> decayA_;
};

SpectralField step_limit(const SpectralField& u, const LimitCoefficients& coeffs, const DiagonalOperator& A,
                         double dt, Rng& rng, bool nonlinear = true);

/**
 * Deterministic exponential Euler with drift b(u,u) + kappa_N(u).
 *
 * When kappa_N is diagonal in the mode basis (the case for covariances with
 * equal weight on the cosine and sine element of every wavevector) it is
 * folded into the exact linear factor e^{(A + kappa_N) dt}; otherwise it is
 * treated explicitly.
 */
class EddyStepper {
 public:
  EddyStepper(CovarianceSpec QN, DiagonalOperator C, const DiagonalOperator& A, double dt, bool nonlinear = true);
  SpectralField step(const SpectralField& u) const;
  bool kappa_is_diagonal() const { return diagonal_; }
  /// <kappa_N(e_m), e_m> per basis element.
  const std::vector<double>& kappa_diagonal() const { return kdiag_; }

 private:
  CovarianceSpec QN_;
  DiagonalOperator C_;
  double dt_;
  bool nonlinear_;
  bool diagonal_ = true;
  std::vector<double> kdiag_, decay_;
};

SpectralField step_eddy_deterministic(const SpectralField& u, const CovarianceSpec& QN, const DiagonalOperator& C,
                                      const DiagonalOperator& A, double dt, bool nonlinear = true);

struct LimitParams {
  DiagonalOperator A;
  std::shared_ptr<const LimitCoefficients> coeffs;
  double dt = 0.01;
  double T = 1.0;
  SpectralField u0;
  bool nonlinear = true;
  double blowup_cap = kDefaultBlowupCap;
};

struct EddyParams {
  DiagonalOperator A;
  DiagonalOperator C;
  CovarianceSpec QN;  ///< zero covariance gives plain truncated Navier-Stokes
  double dt = 0.01;
  double T = 1.0;
  SpectralField u0;
  bool nonlinear = true;
  double blowup_cap = kDefaultBlowupCap;
};

using RunParams = std::variant<SlowFastParams, LimitParams, EddyParams>;

std::string run_kind(const RunParams& p);

enum class ObservableKind {
  Pairing,           ///< <u_t, h>
  Energy,            ///< ||u_t||^2
  FastEnergy,        ///< ||y_t||^2
  LinearisationGap,  ///< eps^{-1} int_0^t ||y - Y||^2 ds
  GapNorm,           ///< ||y_t - Y_t||^2
  FrictionIntegral,  ///< int_0^t ||(-C)^{1/2} y||^2 ds
  ViscousIntegral,   ///< int_0^t ||y||_{H^1}^2 ds with ||y||_{H^1}^2 = <(-A) y, y>
  LargeScaleEnergy,  ///< sum over |k|_inf <= cutoff of u_m^2
};

struct ObservableSpec {
  ObservableKind kind = ObservableKind::Energy;
  SpectralField h;     ///< test field for Pairing
  int cutoff = 1;      ///< for LargeScaleEnergy
  int stride = 1;      ///< record every `stride` steps (and at the final step)
  std::string name;    ///< label used in outputs

  static ObservableSpec pairing(SpectralField h, std::string name, int stride = 1);
  static ObservableSpec simple(ObservableKind kind, std::string name, int stride = 1);
};

/// Whether the observable needs the fast variables.
bool is_fast_observable(ObservableKind k);

struct ObservableSeries {
  std::vector<double> t;
  std::vector<double> v;
};

struct TrajectoryRecord {
  std::vector<ObservableSeries> series;  ///< one per observable
  SpectralField u_final;
  SpectralField y_final;  ///< empty unless slow-fast
};

/// Complete resumable state of a trajectory in progress.
struct TrajectoryCheckpoint {
  std::int64_t step = 0;
  std::vector<double> u, y, Y;
  std::string rng;
  double friction_integral = 0.0;
  double viscous_integral = 0.0;
  double gap_integral = 0.0;
  std::vector<ObservableSeries> series;
};

/// Steps one trajectory to its horizon, recording observables.
class TrajectoryRunner {
 public:
  TrajectoryRunner(RunParams params, std::vector<ObservableSpec> observables, Rng rng);

  static TrajectoryRunner resume(RunParams params, std::vector<ObservableSpec> observables,
                                 const TrajectoryCheckpoint& cp);

  std::int64_t total_steps() const { return n_steps_; }
  std::int64_t steps_done() const { return state_.step; }
  bool finished() const { return state_.step >= n_steps_; }
  double dt() const { return dt_; }

  /// Advances up to n steps (stops at the horizon).
  void advance(std::int64_t n);
  void run() { advance(n_steps_); }

  TrajectoryCheckpoint checkpoint() const;
  TrajectoryRecord record() const;

 private:
  void record_observables();
  void step_once();
  void check_finite() const;

  RunParams params_;
  std::vector<ObservableSpec> obs_;
  Rng rng_;
  double dt_ = 0.0;
  std::int64_t n_steps_ = 0;
  double cap_ = kDefaultBlowupCap;
  double eps_ = 1.0;
  SlowFastState state_;
  std::shared_ptr<const SlowFastStepper> sf_;
  std::shared_ptr<const LimitStepper> lim_;
  std::shared_ptr<const EddyStepper> eddy_;
  std::vector<double> friction_w_, viscous_w_;
  double friction_integral_ = 0.0, viscous_integral_ = 0.0, gap_integral_ = 0.0;
  std::vector<ObservableSeries> series_;
};

TrajectoryRecord run_trajectory(const RunParams& params, const std::vector<ObservableSpec>& observables, Rng& rng);

}  // namespace msf
