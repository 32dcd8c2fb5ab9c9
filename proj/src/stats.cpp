#include "msf/stats.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

namespace msf {

RunSummary summarize(const RunParams& p) {
  RunSummary s;
  s.kind = run_kind(p);
  if (auto* sf = std::get_if<SlowFastParams>(&p)) {
    s.epsilon = sf->epsilon;
    s.trace_q = sf->Q.trace();
    s.y0_norm_sq = norm_sq(sf->y0);
    s.T = sf->T;
    s.dt = sf->dt;
  } else if (auto* l = std::get_if<LimitParams>(&p)) {
    s.trace_q = l->coeffs->Q().trace();
    s.T = l->T;
    s.dt = l->dt;
  } else {
    const auto& e = std::get<EddyParams>(p);
    s.trace_q = e.QN.trace();
    s.T = e.T;
    s.dt = e.dt;
  }
  return s;
}

std::size_t EnsembleResult::observable_index(const std::string& name) const {
  for (std::size_t i = 0; i < observables.size(); ++i)
    if (observables[i].name == name) return i;
  throw InvalidArgument("no observable named '" + name + "'");
}

Eigen::VectorXd EnsembleResult::column(const std::string& name, double t) const {
  const auto i = observable_index(name);
  const auto& ts = times[i];
  for (std::size_t j = 0; j < ts.size(); ++j)
    if (std::abs(ts[j] - t) <= 1e-9 * std::max(1.0, std::abs(t))) return samples[i].col(static_cast<Eigen::Index>(j));
  throw InvalidArgument("observable '" + name + "' was not recorded at t = " + std::to_string(t));
}

Eigen::VectorXd EnsembleResult::final_column(const std::string& name) const {
  const auto i = observable_index(name);
  return samples[i].col(samples[i].cols() - 1);
}

EnsembleResult run_ensemble(const RunParams& params, const std::vector<ObservableSpec>& observables, std::size_t M,
                            std::uint64_t master_seed, const EnsembleOptions& options) {
  if (M < 2) throw InvalidParameter("an ensemble needs at least 2 replicas");
  std::vector<std::uint64_t> seeds(M);
  if (options.seeds) {
    if (options.seeds->size() != M) throw InvalidArgument("seed override count does not match M");
    seeds = *options.seeds;
  } else {
    for (std::size_t i = 0; i < M; ++i) seeds[i] = derive_seed(master_seed, i);
  }

  std::map<std::size_t, TrajectoryRecord> done = options.completed;
  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < M; ++i)
    if (!done.count(i)) todo.push_back(i);
  std::size_t budget = options.halt_after ? std::min(*options.halt_after, todo.size()) : todo.size();
  const bool interrupted = budget < todo.size();
  todo.resize(budget);

  std::mutex mtx;
  std::vector<std::size_t> failed;
  std::string first_error;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t slot = next.fetch_add(1);
      if (slot >= todo.size()) return;
      const std::size_t i = todo[slot];
      try {
        Rng rng(seeds[i]);
        TrajectoryRecord rec = run_trajectory(params, observables, rng);
        std::lock_guard lock(mtx);
        if (options.on_replica) options.on_replica(i, rec);
        done.emplace(i, std::move(rec));
      } catch (const std::exception& e) {
        std::lock_guard lock(mtx);
        failed.push_back(i);
        if (first_error.empty()) first_error = e.what();
      }
    }
  };
  unsigned threads = options.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : options.threads;
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(todo.size(), 1)));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (!failed.empty()) {
    std::sort(failed.begin(), failed.end());
    throw PartialEnsembleError("replica failures (first: " + first_error + ")", failed, std::move(done));
  }
  if (interrupted) throw EnsembleInterrupted(std::move(done));

  EnsembleResult res;
  res.fingerprint = options.fingerprint;
  res.summary = summarize(params);
  res.observables = observables;
  res.seeds = seeds;
  const auto& first = done.at(0);
  for (std::size_t o = 0; o < observables.size(); ++o) {
    res.times.push_back(first.series[o].t);
    Eigen::MatrixXd S(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(first.series[o].t.size()));
    for (std::size_t i = 0; i < M; ++i) {
      const auto& v = done.at(i).series[o].v;
      if (v.size() != static_cast<std::size_t>(S.cols())) throw NumericFailure("replica records have unequal lengths");
      for (std::size_t j = 0; j < v.size(); ++j) S(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v[j];
    }
    res.samples.push_back(std::move(S));
  }
  res.u_final0 = first.u_final;
  res.y_final0 = first.y_final;
  return res;
}

double sample_mean(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return x.empty() ? 0.0 : s / static_cast<double>(x.size());
}

double sample_variance(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double m = sample_mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

double ks_distance(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw InsufficientSamples("KS distance needs non-empty samples");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double na = static_cast<double>(x.size()), nb = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double ks_critical(std::size_t n, std::size_t m, double alpha) {
  const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
  return c * std::sqrt(static_cast<double>(n + m) / (static_cast<double>(n) * static_cast<double>(m)));
}

namespace {
/// Standard error of the unbiased sample variance.
double variance_se(std::span<const double> x) {
  const double m = sample_mean(x);
  const double n = static_cast<double>(x.size());
  double m2 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d = (v - m) * (v - m);
    m2 += d;
    m4 += d * d;
  }
  m2 /= n;
  m4 /= n;
  return std::sqrt(std::max(m4 - m2 * m2, 0.0) / n);
}
}  // namespace

LawComparison compare_samples(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 30 || b.size() < 30)
    throw InsufficientSamples("law comparison needs at least 30 samples per side (got " + std::to_string(a.size()) +
                              " and " + std::to_string(b.size()) + ")");
  LawComparison c;
  c.n_a = a.size();
  c.n_b = b.size();
  c.mean_diff = sample_mean(a) - sample_mean(b);
  c.var_diff = sample_variance(a) - sample_variance(b);
  c.ks = ks_distance(a, b);
  c.se_mean = std::sqrt(sample_variance(a) / c.n_a + sample_variance(b) / c.n_b);
  const double sa = variance_se(a), sb = variance_se(b);
  c.se_var = std::sqrt(sa * sa + sb * sb);
  return c;
}

LawComparison compare_laws(const EnsembleResult& a, const EnsembleResult& b, const std::string& observable,
                           double t) {
  const auto& oa = a.observables[a.observable_index(observable)];
  const auto& ob = b.observables[b.observable_index(observable)];
  if (oa.kind != ob.kind) throw InvalidArgument("compare_laws: observable definitions differ");
  if (oa.kind == ObservableKind::Pairing) {
    if (oa.h.size() != ob.h.size() ||
        !std::equal(oa.h.coeffs().begin(), oa.h.coeffs().end(), ob.h.coeffs().begin()))
      throw InvalidArgument("compare_laws: pairing fields differ");
  }
  const Eigen::VectorXd x = a.column(observable, t), y = b.column(observable, t);
  return compare_samples({x.data(), static_cast<std::size_t>(x.size())}, {y.data(), static_cast<std::size_t>(y.size())});
}

EnergyBalance energy_balance_report(const EnsembleResult& res) {
  if (res.summary.kind != "slowfast") throw InvalidArgument("energy balance needs a slow-fast ensemble");
  const Eigen::VectorXd yT = res.final_column("fast_energy");
  const Eigen::VectorXd F = res.final_column("friction_integral");
  const Eigen::VectorXd V = res.final_column("viscous_integral");
  const auto& s = res.summary;
  EnergyBalance e;
  e.dt = s.dt;
  e.initial_term = s.y0_norm_sq;
  e.forcing_term = s.trace_q * s.T / s.epsilon;
  const Eigen::VectorXd R = yT + (2.0 / s.epsilon) * F + 2.0 * V -
                            Eigen::VectorXd::Constant(yT.size(), e.initial_term + e.forcing_term);
  e.fast_energy = yT.mean();
  e.friction_term = 2.0 / s.epsilon * F.mean();
  e.viscous_term = 2.0 * V.mean();
  e.residual = R.mean();
  std::vector<double> r(R.data(), R.data() + R.size());
  e.standard_error = std::sqrt(sample_variance(r) / static_cast<double>(r.size()));
  return e;
}

double energy_bias_budget(const EnergyBalance& coarse, const EnergyBalance& fine) {
  return 2.0 * std::abs(coarse.residual - fine.residual);
}

}  // namespace msf
