#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "msf/error.hpp"
#include "msf/integrators.hpp"

namespace msf {

/// Scalars of the run needed by the energy ledger.
struct RunSummary {
  std::string kind;
  double epsilon = 0.0;
  double trace_q = 0.0;
  double y0_norm_sq = 0.0;
  double T = 0.0;
  double dt = 0.0;
};

RunSummary summarize(const RunParams& p);

struct EnsembleResult {
  std::string fingerprint;
  RunSummary summary;
  std::vector<ObservableSpec> observables;
  std::vector<std::vector<double>> times;  ///< per observable
  std::vector<Eigen::MatrixXd> samples;    ///< per observable, replica x time
  std::vector<std::uint64_t> seeds;
  SpectralField u_final0;  ///< final slow field of replica 0
  SpectralField y_final0;  ///< final fast field of replica 0 (slow-fast only)

  std::size_t replicas() const { return seeds.size(); }
  std::size_t observable_index(const std::string& name) const;
  /// Column of observable `name` at time t.
  Eigen::VectorXd column(const std::string& name, double t) const;
  Eigen::VectorXd final_column(const std::string& name) const;
};

struct EnsembleOptions {
  unsigned threads = 1;  ///< 0 uses the hardware concurrency
  std::optional<std::vector<std::uint64_t>> seeds;  ///< overrides hash(master, i)
  std::string fingerprint;
  /// Records already available (e.g. from a checkpoint), keyed by replica.
  std::map<std::size_t, TrajectoryRecord> completed;
  /// Called after each newly computed replica, serialized by the harness.
  std::function<void(std::size_t, const TrajectoryRecord&)> on_replica;
  /// Stop after this many newly computed replicas (interruption testing).
  std::optional<std::size_t> halt_after;
};

/// Raised when some replicas fail; carries everything that did complete.
class PartialEnsembleError : public NumericFailure {
 public:
  PartialEnsembleError(const std::string& what, std::vector<std::size_t> failed,
                       std::map<std::size_t, TrajectoryRecord> done)
      : NumericFailure(what), failed_(std::move(failed)), done_(std::move(done)) {}
  const std::vector<std::size_t>& failed() const { return failed_; }
  const std::map<std::size_t, TrajectoryRecord>& completed() const { return done_; }

 private:
  std::vector<std::size_t> failed_;
  std::map<std::size_t, TrajectoryRecord> done_;
};

/// Raised when halt_after stops an ensemble early.
class EnsembleInterrupted : public Error {
 public:
  EnsembleInterrupted(std::map<std::size_t, TrajectoryRecord> done)
      : Error("ensemble interrupted"), done_(std::move(done)) {}
  const std::map<std::size_t, TrajectoryRecord>& completed() const { return done_; }

 private:
  std::map<std::size_t, TrajectoryRecord> done_;
};

EnsembleResult run_ensemble(const RunParams& params, const std::vector<ObservableSpec>& observables, std::size_t M,
                            std::uint64_t master_seed, const EnsembleOptions& options = {});

double sample_mean(std::span<const double> x);
/// Unbiased sample variance.
double sample_variance(std::span<const double> x);

/// Two-sample Kolmogorov-Smirnov statistic.
double ks_distance(std::span<const double> a, std::span<const double> b);
/// Asymptotic two-sample KS critical value at significance alpha.
double ks_critical(std::size_t n, std::size_t m, double alpha);

struct LawComparison {
  double mean_diff = 0.0;  ///< mean(a) - mean(b)
  double var_diff = 0.0;   ///< var(a) - var(b)
  double ks = 0.0;
  double se_mean = 0.0;
  double se_var = 0.0;
  std::size_t n_a = 0, n_b = 0;
};

LawComparison compare_samples(std::span<const double> a, std::span<const double> b);
LawComparison compare_laws(const EnsembleResult& a, const EnsembleResult& b, const std::string& observable,
                           double t);

struct EnergyBalance {
  double fast_energy = 0.0;     ///< E||y_T||^2
  double friction_term = 0.0;   ///< 2 eps^{-1} int E||(-C)^{1/2} y||^2
  double viscous_term = 0.0;    ///< 2 int E||y||_{H^1}^2
  double initial_term = 0.0;    ///< ||y_0||^2
  double forcing_term = 0.0;    ///< eps^{-1} Tr(Q) T
  double residual = 0.0;        ///< left side minus right side
  double standard_error = 0.0;  ///< of the residual across replicas
  double dt = 0.0;
};

/// Expects observables named "fast_energy", "friction_integral", "viscous_integral".
EnergyBalance energy_balance_report(const EnsembleResult& res);

/// Bias estimate at the coarse step for a first-order scheme: 2 |R(dt) - R(dt/2)|.
double energy_bias_budget(const EnergyBalance& coarse, const EnergyBalance& fine);

}  // namespace msf
