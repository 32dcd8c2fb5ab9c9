#include "msf/runner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "msf/corrector_lab.hpp"
#include "msf/limit_terms.hpp"
#include "msf/snapshot.hpp"
#include "msf/stats.hpp"

namespace msf {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

/// Checks whose failure maps to exit code 4.
class CheckFailed : public Error {
 public:
  using Error::Error;
};

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

const char* parity_name(Parity p) { return p == Parity::Cos ? "cos" : "sin"; }

json series_to_json(const TrajectoryRecord& r) {
  json j;
  j["series"] = json::array();
  for (const auto& s : r.series) j["series"].push_back({{"t", s.t}, {"v", s.v}});
  j["u"] = std::vector<double>(r.u_final.coeffs().begin(), r.u_final.coeffs().end());
  if (!r.y_final.empty()) j["y"] = std::vector<double>(r.y_final.coeffs().begin(), r.y_final.coeffs().end());
  return j;
}

TrajectoryRecord series_from_json(const json& j, const BasisPtr& B) {
  TrajectoryRecord r;
  for (const auto& s : j.at("series")) r.series.push_back({s.at("t").get<std::vector<double>>(), s.at("v").get<std::vector<double>>()});
  r.u_final = SpectralField(B, j.at("u").get<std::vector<double>>());
  if (j.contains("y")) r.y_final = SpectralField(B, j.at("y").get<std::vector<double>>());
  return r;
}

/// Output directory, checkpoint and manifest of one invocation. Single writer.
class Session {
 public:
  Session(const CliOptions& opts, const ExperimentConfig& cfg, std::ostream& out)
      : opts_(opts), cfg_(cfg), out_(out), dir_(cfg.out_dir), remaining_(opts.halt_after) {
    fs::create_directories(dir_);
    if (opts.resume) load_checkpoint(*opts.resume);
    write_manifest(false, "running", "");
  }

  const ExperimentConfig& cfg() const { return cfg_; }

  std::string header_comment() const {
    return "# msf version=" + std::string(kToolVersion) + " fingerprint=" + cfg_.fingerprint + " command=" +
           opts_.command + "\n";
  }

  /// Opens a CSV in the output directory with the provenance line and column header.
  std::ofstream csv(const std::string& name, const std::string& columns) {
    std::ofstream f(dir_ / name, std::ios::binary | std::ios::trunc);
    if (!f) throw NumericFailure("cannot write " + (dir_ / name).string());
    f << header_comment() << columns << "\n";
    note_file(name);
    return f;
  }

  void snapshot(const std::string& name, const SpectralField& f) {
    write_snapshot((dir_ / name).string(), f);
    note_file(name);
  }

  /// Runs (or resumes) the ensemble `label`, checkpointing after every replica.
  EnsembleResult ensemble(const std::string& label, const RunParams& p, const std::vector<ObservableSpec>& obs,
                          std::uint64_t master) {
    labels_[label] = obs;
    auto& done = records_[label];
    EnsembleOptions eo;
    eo.threads = cfg_.threads;
    eo.fingerprint = cfg_.fingerprint;
    eo.completed = done;
    eo.halt_after = remaining_;
    std::size_t fresh = 0;
    eo.on_replica = [&](std::size_t i, const TrajectoryRecord& rec) {
      done.emplace(i, rec);
      ++fresh;
      write_checkpoint();
    };
    auto res = run_ensemble(p, obs, cfg_.replicas, master, eo);
    if (remaining_) *remaining_ -= std::min(*remaining_, fresh);
    return res;
  }

  /// Long-form samples of every replica completed so far for `label`.
  void write_samples(const std::string& label, const std::string& name) {
    if (!labels_.count(label)) return;
    const auto& obs = labels_.at(label);
    auto f = csv(name, "replica,t,observable,value");
    for (const auto& [i, rec] : records_[label])
      for (std::size_t o = 0; o < obs.size() && o < rec.series.size(); ++o)
        for (std::size_t j = 0; j < rec.series[o].t.size(); ++j)
          f << i << "," << num(rec.series[o].t[j]) << "," << obs[o].name << "," << num(rec.series[o].v[j]) << "\n";
  }

  /// Per-time ensemble mean, variance and standard error.
  void write_stats(const EnsembleResult& res, const std::string& name) {
    auto f = csv(name, "t,observable,mean,variance,se,n");
    const auto n = res.replicas();
    for (std::size_t o = 0; o < res.observables.size(); ++o)
      for (std::size_t j = 0; j < res.times[o].size(); ++j) {
        const Eigen::VectorXd c = res.samples[o].col(static_cast<Eigen::Index>(j));
        const std::span<const double> x(c.data(), static_cast<std::size_t>(c.size()));
        const double v = sample_variance(x);
        f << num(res.times[o][j]) << "," << res.observables[o].name << "," << num(sample_mean(x)) << "," << num(v)
          << "," << num(std::sqrt(v / static_cast<double>(n))) << "," << n << "\n";
      }
  }

  /// Observable paths of replica 0.
  void write_trajectory(const std::string& label, const std::string& name) {
    const auto& obs = labels_.at(label);
    const auto& rec = records_.at(label).at(0);
    auto f = csv(name, "t,observable,value");
    for (std::size_t o = 0; o < obs.size(); ++o)
      for (std::size_t j = 0; j < rec.series[o].t.size(); ++j)
        f << num(rec.series[o].t[j]) << "," << obs[o].name << "," << num(rec.series[o].v[j]) << "\n";
  }

  /// Writes partial samples of every ensemble touched so far.
  void preserve_partial() {
    for (const auto& [label, obs] : labels_) write_samples(label, sample_file(label));
  }

  static std::string sample_file(const std::string& label) {
    return label.empty() ? "samples.csv" : "samples_" + label + ".csv";
  }

  void write_manifest(bool complete, const std::string& status, const std::string& message,
                      const std::vector<std::size_t>& failed = {}) {
    json m;
    m["tool"] = "msf";
    m["version"] = kToolVersion;
    m["fingerprint"] = cfg_.fingerprint;
    m["command"] = opts_.command;
    m["complete"] = complete;
    m["status"] = status;
    if (!message.empty()) m["message"] = message;
    if (!failed.empty()) m["failed_replicas"] = failed;
    m["files"] = files_;
    json replicas = json::object();
    for (const auto& [label, recs] : records_) replicas[label.empty() ? "main" : label] = recs.size();
    m["replicas_done"] = replicas;
    m["config"] = json::parse(cfg_.canonical);
    atomic_write(dir_ / "MANIFEST.json", m.dump(2) + "\n");
  }

 private:
  void note_file(const std::string& name) {
    if (std::find(files_.begin(), files_.end(), name) == files_.end()) files_.push_back(name);
  }

  static void atomic_write(const fs::path& p, const std::string& text) {
    const fs::path tmp = p.string() + ".tmp";
    {
      std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
      if (!f) throw NumericFailure("cannot write " + tmp.string());
      f << text;
      if (!f) throw NumericFailure("write to " + tmp.string() + " failed");
    }
    fs::rename(tmp, p);
  }

  void write_checkpoint() {
    json c;
    c["version"] = kToolVersion;
    c["fingerprint"] = cfg_.fingerprint;
    c["command"] = opts_.command;
    c["ensembles"] = json::object();
    for (const auto& [label, recs] : records_) {
      json e = json::object();
      for (const auto& [i, r] : recs) e[std::to_string(i)] = series_to_json(r);
      c["ensembles"][label.empty() ? "main" : label] = std::move(e);
    }
    atomic_write(dir_ / "checkpoint.json", c.dump());
  }

  void load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError({"cannot read checkpoint '" + path + "'"});
    json c;
    try {
      c = json::parse(f);
    } catch (const json::parse_error& e) {
      throw ConfigError({"checkpoint '" + path + "' is not valid JSON"});
    }
    std::vector<std::string> problems;
    if (c.value("fingerprint", "") != cfg_.fingerprint)
      problems.push_back("checkpoint fingerprint " + c.value("fingerprint", "?") + " does not match configuration " +
                         cfg_.fingerprint);
    if (c.value("command", "") != opts_.command)
      problems.push_back("checkpoint was written by '" + c.value("command", "?") + "', not '" + opts_.command + "'");
    if (!problems.empty()) throw ConfigError(problems);
    for (auto it = c.at("ensembles").begin(); it != c.at("ensembles").end(); ++it) {
      const std::string label = it.key() == "main" ? "" : it.key();
      for (auto r = it.value().begin(); r != it.value().end(); ++r)
        records_[label].emplace(std::stoul(r.key()), series_from_json(r.value(), cfg_.basis));
    }
  }

  const CliOptions& opts_;
  const ExperimentConfig& cfg_;
  std::ostream& out_;
  fs::path dir_;
  std::optional<std::size_t> remaining_;
  std::vector<std::string> files_;
  std::map<std::string, std::map<std::size_t, TrajectoryRecord>> records_;
  std::map<std::string, std::vector<ObservableSpec>> labels_;
};

std::vector<ObservableSpec> slow_only(const std::vector<ObservableSpec>& obs) {
  std::vector<ObservableSpec> out;
  for (const auto& o : obs)
    if (!is_fast_observable(o.kind)) out.push_back(o);
  if (out.empty()) throw ConfigError({"outputs.observables must contain at least one slow observable"});
  return out;
}

std::string mode_columns(const ModeBasis& B, std::size_t i) {
  const auto m = B.mode(i);
  return std::to_string(i) + "," + std::to_string(m.k.kx) + "," + std::to_string(m.k.ky) + "," +
         parity_name(m.parity);
}

// ---------------------------------------------------------------------------
// subcommands
// ---------------------------------------------------------------------------

void simulate_ensemble(Session& s, const RunParams& p, std::ostream& out) {
  const auto& cfg = s.cfg();
  const auto res = s.ensemble("", p, cfg.observables, cfg.seed);
  s.write_samples("", "samples.csv");
  s.write_stats(res, "stats.csv");
  s.write_trajectory("", "trajectory.csv");
  s.snapshot("u_final.msf", res.u_final0);
  if (!res.y_final0.empty()) s.snapshot("y_final.msf", res.y_final0);

  bool has_ledger = true;
  for (const char* n : {"fast_energy", "friction_integral", "viscous_integral"}) {
    bool found = false;
    for (const auto& o : res.observables) found = found || o.name == n;
    has_ledger = has_ledger && found;
  }
  if (has_ledger && std::holds_alternative<SlowFastParams>(p)) {
    const auto e = energy_balance_report(res);
    auto f = s.csv("energy_balance.csv",
                   "fast_energy,friction_term,viscous_term,initial_term,forcing_term,residual,standard_error");
    f << num(e.fast_energy) << "," << num(e.friction_term) << "," << num(e.viscous_term) << ","
      << num(e.initial_term) << "," << num(e.forcing_term) << "," << num(e.residual) << ","
      << num(e.standard_error) << "\n";
    out << "energy balance residual " << num(e.residual) << " (s.e. " << num(e.standard_error) << ")\n";
  }
  out << "ran " << res.replicas() << " replicas of " << run_kind(p) << "\n";
}

int simulate_slowfast(Session& s, std::ostream& out) {
  simulate_ensemble(s, s.cfg().slowfast_params(s.cfg().epsilon), out);
  return kExitOk;
}

int simulate_limit(Session& s, std::ostream& out) {
  if (slow_only(s.cfg().observables).size() != s.cfg().observables.size())
    throw ConfigError({"simulate-limit has no fast variables; remove fast observables"});
  simulate_ensemble(s, s.cfg().limit_params(), out);
  return kExitOk;
}

int simulate_eddy(Session& s, std::ostream& out) {
  const auto& cfg = s.cfg();
  if (cfg.eddy_N.empty()) throw ConfigError({"simulate-eddy needs run.eddy_N or a qn noise section"});
  const auto obs = slow_only(cfg.observables);
  auto f = s.csv("eddy.csv", "N,t,observable,value");
  for (int N : cfg.eddy_N) {
    const auto QN = make_QN(N, cfg.qn_delta, cfg.qn_c_kappa, cfg.basis);
    Rng rng(cfg.seed);
    const auto rec = run_trajectory(cfg.eddy_params(QN), obs, rng);
    for (std::size_t o = 0; o < obs.size(); ++o)
      for (std::size_t j = 0; j < rec.series[o].t.size(); ++j)
        f << N << "," << num(rec.series[o].t[j]) << "," << obs[o].name << "," << num(rec.series[o].v[j]) << "\n";
    s.snapshot("u_final_N" + std::to_string(N) + ".msf", rec.u_final);
    out << "N=" << N << " final energy " << num(norm_sq(rec.u_final)) << "\n";
  }
  return kExitOk;
}

int compute_drift(Session& s, std::ostream& out) {
  const auto& cfg = s.cfg();
  const auto r = ito_stokes_drift(cfg.C, cfg.Q);
  const auto& B = *cfg.basis;
  const std::size_t n = B.size();
  std::vector<double> mean(n, 0.0), se(n, 0.0);
  bool ok = true;
  double worst = 0.0;
  if (cfg.mc_samples > 0) {
    const auto mu = invariant_covariance(cfg.C, cfg.Q);
    Rng rng(cfg.seed);
    std::vector<double> s2(n, 0.0);
    for (std::size_t m = 0; m < cfg.mc_samples; ++m) {
      const auto w = sample_invariant(mu, rng);
      const auto v = cfg.C.apply_neg_inverse(nonlinear_b(w, w));
      for (std::size_t i = 0; i < n; ++i) {
        mean[i] += v[i];
        s2[i] += v[i] * v[i];
      }
    }
    const double M = static_cast<double>(cfg.mc_samples);
    for (std::size_t i = 0; i < n; ++i) {
      mean[i] /= M;
      se[i] = std::sqrt(std::max(s2[i] / M - mean[i] * mean[i], 0.0) / M);
      const double z = std::abs(mean[i] - r[i]) / std::max(se[i], 1e-300);
      if (std::abs(mean[i] - r[i]) > 4.0 * se[i] + 1e-14) ok = false;
      if (std::abs(mean[i] - r[i]) > 1e-14) worst = std::max(worst, z);
    }
  }
  auto f = s.csv("drift.csv", "index,kx,ky,parity,r,mc_mean,mc_se");
  for (std::size_t i = 0; i < n; ++i)
    f << mode_columns(B, i) << "," << num(r[i]) << "," << num(mean[i]) << "," << num(se[i]) << "\n";
  s.snapshot("drift.msf", r);
  out << "max |r| = " << num(max_abs(r)) << "\n";
  if (cfg.mc_samples > 0) {
    out << "Monte Carlo (" << cfg.mc_samples << " samples): max |r - mean| / se = " << num(worst) << "\n";
    if (!ok) throw CheckFailed("Monte Carlo drift differs from the analytic drift by more than 4 s.e.");
  }
  return kExitOk;
}

int compute_corrector(Session& s, std::ostream& out) {
  const auto& cfg = s.cfg();
  const LimitCoefficients coeffs(cfg.C, cfg.Q);
  const auto cmp = compare_corrector_forms(coeffs, cfg.u0);
  const auto& B = *cfg.basis;
  auto f = s.csv("corrector.csv", "index,kx,ky,parity,invariant_form,covariation_form,difference");
  for (std::size_t i = 0; i < B.size(); ++i)
    f << mode_columns(B, i) << "," << num(cmp.invariant_form[i]) << "," << num(cmp.covariation_form[i]) << ","
      << num(cmp.invariant_form[i] - cmp.covariation_form[i]) << "\n";
  out << "commuting: " << (cmp.commutation.commute ? "yes" : "no") << " (residual "
      << num(cmp.commutation.residual) << ")\n";
  out << "max |invariant form - covariation form| = " << num(cmp.gap) << "\n";
  return kExitOk;
}

QuadraticFunctional random_quadratic(const BasisPtr& B, Rng& rng) {
  QuadraticFunctional q(B);
  q.a0 = rng.normal();
  for (Eigen::Index i = 0; i < q.a1.size(); ++i) q.a1(i) = rng.normal();
  for (Eigen::Index i = 0; i < q.A2.rows(); ++i)
    for (Eigen::Index j = 0; j <= i; ++j) q.A2(i, j) = q.A2(j, i) = rng.normal();
  return q;
}

int poisson_check(Session& s, std::ostream& out) {
  constexpr double kTol = 1e-10;
  const auto& cfg = s.cfg();
  const auto mu = invariant_covariance(cfg.C, cfg.Q);
  Rng rng(cfg.seed);
  auto f = s.csv("poisson.csv", "trial,residual");
  double worst = 0.0;
  int failures = 0;
  for (int t = 0; t < cfg.poisson_trials; ++t) {
    const auto psi = center(random_quadratic(cfg.basis, rng), mu);
    double res = 0.0;
    try {
      const auto phi = poisson_solve(cfg.C, cfg.Q, psi);
      res = poisson_residual(cfg.C, cfg.Q, phi, psi, 100, derive_seed(cfg.seed, static_cast<std::uint64_t>(t)));
    } catch (const NumericFailure&) {
      res = std::numeric_limits<double>::infinity();
    }
    if (!(res <= kTol)) ++failures;
    worst = std::max(worst, res);
    f << t << "," << num(res) << "\n";
  }
  out << cfg.poisson_trials << " trials, worst residual " << num(worst) << ", " << failures << " above " << num(kTol)
      << "\n";
  if (failures > 0) throw CheckFailed("Poisson residual above tolerance in " + std::to_string(failures) + " trials");
  return kExitOk;
}

int epsilon_sweep(Session& s, std::ostream& out) {
  const auto& cfg = s.cfg();
  const auto eps = cfg.epsilons.empty() ? std::vector<double>{cfg.epsilon} : cfg.epsilons;
  const auto obs = slow_only(cfg.observables);
  const auto lim = s.ensemble("limit", cfg.limit_params(), obs, derive_seed(cfg.seed, 0));
  s.write_samples("limit", Session::sample_file("limit"));
  std::vector<std::pair<double, EnsembleResult>> runs;
  for (std::size_t e = 0; e < eps.size(); ++e) {
    const std::string label = "eps_" + num(eps[e]);
    runs.emplace_back(eps[e], s.ensemble(label, cfg.slowfast_params(eps[e]), obs, derive_seed(cfg.seed, e + 1)));
    s.write_samples(label, Session::sample_file(label));
  }
  auto f = s.csv("comparison.csv", "epsilon,observable,mean_diff,var_diff,ks,se_mean,n");
  for (const auto& [e, res] : runs)
    for (const auto& o : obs) {
      const Eigen::VectorXd a = res.final_column(o.name), b = lim.final_column(o.name);
      const auto c = compare_samples({a.data(), static_cast<std::size_t>(a.size())},
                                     {b.data(), static_cast<std::size_t>(b.size())});
      f << num(e) << "," << o.name << "," << num(c.mean_diff) << "," << num(c.var_diff) << "," << num(c.ks) << ","
        << num(c.se_mean) << "," << c.n_a << "\n";
      out << "eps=" << num(e) << " " << o.name << ": KS " << num(c.ks) << ", mean diff " << num(c.mean_diff)
          << " (s.e. " << num(c.se_mean) << ")\n";
    }
  return kExitOk;
}

int eddy_ratio(Session& s, std::ostream& out) {
  const auto& cfg = s.cfg();
  if (cfg.eddy_N.empty()) throw ConfigError({"eddy-ratio needs run.eddy_N or a qn noise section"});
  const auto& B = cfg.basis;
  const auto Lap = make_laplacian(1.0, B);
  const std::size_t n_modes = std::min<std::size_t>(8, B->size());
  SpectralField u = cfg.u0;
  if (max_abs(u) == 0.0) {
    Rng rng(cfg.seed);
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = rng.normal() / (1.0 + B->mode(i).k.norm2());
  }
  auto f = s.csv("eddy_ratio.csv", "N,index,kx,ky,parity,kappa,laplacian,ratio");
  auto g = s.csv("eddy_ratio_summary.csv", "N,mean_ratio,relative_spread,kappa_energy");
  bool ok = true;
  for (int N : cfg.eddy_N) {
    const auto QN = make_QN(N, cfg.qn_delta, cfg.qn_c_kappa, B);
    std::vector<double> ratios;
    for (std::size_t i = 0; i < n_modes; ++i) {
      const double kap = eddy_kappa_apply(QN, cfg.C, SpectralField::basis_element(B, i))[i];
      ratios.push_back(kap / Lap.eigenvalue(i));
      f << N << "," << mode_columns(*B, i) << "," << num(kap) << "," << num(Lap.eigenvalue(i)) << ","
        << num(ratios.back()) << "\n";
    }
    const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
    const double mean = sample_mean(ratios);
    const double spread = (*hi - *lo) / std::abs(mean);
    const double energy = inner(eddy_kappa_apply(QN, cfg.C, u), u);
    g << N << "," << num(mean) << "," << num(spread) << "," << num(energy) << "\n";
    out << "N=" << N << ": mean ratio " << num(mean) << ", relative spread " << num(spread) << ", <kappa u, u> "
        << num(energy) << "\n";
    if (!(spread <= cfg.ratio_tolerance) || energy > 0.0) ok = false;
  }
  if (!ok) throw CheckFailed("eddy viscosity ratio spread exceeds " + num(cfg.ratio_tolerance));
  return kExitOk;
}

using Handler = int (*)(Session&, std::ostream&);

const std::map<std::string, Handler>& handlers() {
  static const std::map<std::string, Handler> h = {
      {"simulate-slowfast", simulate_slowfast}, {"simulate-limit", simulate_limit},
      {"simulate-eddy", simulate_eddy},         {"compute-drift", compute_drift},
      {"compute-corrector", compute_corrector}, {"poisson-check", poisson_check},
      {"epsilon-sweep", epsilon_sweep},         {"eddy-ratio", eddy_ratio},
  };
  return h;
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [k, _] : handlers()) v.push_back(k);
    return v;
  }();
  return names;
}

int run_cli(const CliOptions& opts, std::ostream& out, std::ostream& err) {
  const auto h = handlers().find(opts.command);
  if (h == handlers().end()) {
    err << "unknown subcommand '" << opts.command << "'\n";
    return kExitConfig;
  }
  ExperimentConfig cfg;
  try {
    cfg = load_config(opts.config_path, opts.overrides);
  } catch (const ConfigError& e) {
    err << e.what() << "\n";
    return kExitConfig;
  }
  std::optional<Session> session;
  try {
    session.emplace(opts, cfg, out);
    const int code = h->second(*session, out);
    session->write_manifest(true, "ok", "");
    return code;
  } catch (const ConfigError& e) {
    err << e.what() << "\n";
    if (session) session->write_manifest(false, "config_error", e.what());
    return kExitConfig;
  } catch (const UnsupportedConfiguration& e) {
    err << "unsupported configuration: " << e.what() << "\n";
    if (session) session->write_manifest(false, "config_error", e.what());
    return kExitConfig;
  } catch (const InvalidParameter& e) {
    err << "invalid parameter: " << e.what() << "\n";
    if (session) session->write_manifest(false, "config_error", e.what());
    return kExitConfig;
  } catch (const InsufficientSamples& e) {
    err << "insufficient samples: " << e.what() << "\n";
    if (session) session->write_manifest(false, "config_error", e.what());
    return kExitConfig;
  } catch (const CheckFailed& e) {
    err << "check failed: " << e.what() << "\n";
    session->write_manifest(true, "check_failed", e.what());
    return kExitAcceptance;
  } catch (const EnsembleInterrupted& e) {
    err << "interrupted; resume with --resume " << (fs::path(cfg.out_dir) / "checkpoint.json").string() << "\n";
    session->preserve_partial();
    session->write_manifest(false, "interrupted", e.what());
    return kExitNumeric;
  } catch (const PartialEnsembleError& e) {
    err << "numeric failure: " << e.what() << "\n";
    session->preserve_partial();
    session->write_manifest(false, "numeric_failure", e.what(), e.failed());
    return kExitNumeric;
  } catch (const NumericFailure& e) {
    err << "numeric failure: " << e.what() << "\n";
    if (session) {
      session->preserve_partial();
      session->write_manifest(false, "numeric_failure", e.what());
    }
    return kExitNumeric;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    if (session) session->write_manifest(false, "error", e.what());
    return kExitConfig;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "i/o error: " << e.what() << "\n";
    return kExitNumeric;
  }
}

}  // namespace msf
