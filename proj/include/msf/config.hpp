#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "msf/error.hpp"
#include "msf/integrators.hpp"

namespace msf {

inline constexpr const char* kToolVersion = "0.1.0";

/// Configuration rejected before any run; lists every violated precondition.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

/// Command-line values that take precedence over the file.
struct ConfigOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> replicas;
  std::optional<std::string> out_dir;
};

/**
 * Validated experiment configuration.
 *
 * The file is JSON with the sections basis, operators, noise, run and
 * outputs; see README.md for the key set.
 */
struct ExperimentConfig {
  std::string canonical;    ///< canonical JSON of the effective configuration
  std::string fingerprint;  ///< 16 hex digits, FNV-1a of `canonical` without outputs.dir

  BasisPtr basis;
  DiagonalOperator A;
  DiagonalOperator C;
  CovarianceSpec Q;
  std::string noise_kind;

  double epsilon = 0.1;
  std::vector<double> epsilons;
  double dt = 0.01;
  double T = 1.0;
  std::size_t replicas = 100;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  bool nonlinear = true;
  double blowup_cap = kDefaultBlowupCap;
  SpectralField u0;
  SpectralField y0;
  bool y0_stationary = false;
  bool u0_prepared = false;

  // experiment-specific settings
  std::vector<int> eddy_N;
  double qn_delta = 0.0;
  double qn_c_kappa = 1.0;
  std::size_t mc_samples = 0;
  int poisson_trials = 100;
  double ratio_tolerance = 0.10;

  std::vector<ObservableSpec> observables;
  std::string out_dir = "out";

  SlowFastParams slowfast_params(double eps) const;
  LimitParams limit_params() const;
  EddyParams eddy_params(const CovarianceSpec& QN) const;
};

/// Parses and validates JSON text; relative snapshot paths resolve against base_dir.
ExperimentConfig parse_config(const std::string& json_text, const ConfigOverrides& overrides = {},
                              const std::string& base_dir = ".");
ExperimentConfig load_config(const std::string& path, const ConfigOverrides& overrides = {});

/// 64-bit FNV-1a as 16 lowercase hex digits.
std::string fnv1a_hex(const std::string& data);

}  // namespace msf
