/// @file acceptance.cpp
/// @brief End-to-end acceptance checks; prints one PASS/FAIL line per criterion.
///
/// Usage: acceptance [n ...]  runs the listed criteria (all by default).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "msf/config.hpp"
#include "msf/corrector_lab.hpp"
#include "msf/limit_terms.hpp"
#include "msf/ou.hpp"
#include "msf/stats.hpp"

using namespace msf;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  /// Records a sub-check; the criterion passes only if all sub-checks do.
  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [FAILED]");
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string sci(double v) { return fmt("%.3g", v); }

SpectralField random_field(const BasisPtr& B, Rng& rng, double decay = 1.0) {
  SpectralField f(B);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = rng.normal() / std::pow(1.0 + B->mode(i).k.norm2(), 0.5 * decay);
  return f;
}

QuadraticFunctional random_quadratic(const BasisPtr& B, Rng& rng) {
  QuadraticFunctional q(B);
  q.a0 = rng.normal();
  for (Eigen::Index i = 0; i < q.a1.size(); ++i) q.a1(i) = rng.normal();
  for (Eigen::Index i = 0; i < q.A2.rows(); ++i)
    for (Eigen::Index j = 0; j <= i; ++j) q.A2(i, j) = q.A2(j, i) = rng.normal();
  return q;
}

CovarianceSpec random_diagonal(const BasisPtr& B, Rng& rng) {
  std::vector<double> q(B->size());
  for (auto& v : q) v = rng.uniform();
  return CovarianceSpec::diagonal(B, q);
}

CovarianceSpec low_mode_noise(const BasisPtr& B, double q, int max_k2) {
  std::vector<double> v(B->size(), 0.0);
  for (std::size_t i = 0; i < v.size(); ++i)
    if (B->mode(i).k.norm2() <= max_k2) v[i] = q;
  return CovarianceSpec::diagonal(B, v);
}

/// max |C Q_inf + Q_inf C + Q| evaluated entrywise from the stored covariances.
double lyapunov_residual(const DiagonalOperator& C, const CovarianceSpec& Q, const InvariantMeasure& mu) {
  double r = 0.0;
  for (const auto& blk : Q.blocks())
    for (auto i : blk.modes)
      for (auto j : blk.modes)
        r = std::max(r, std::abs((C.eigenvalue(i) + C.eigenvalue(j)) * mu.covariance().entry(i, j) + Q.entry(i, j)));
  return r;
}

std::string config_path(const std::string& name) { return std::string(MSF_SOURCE_DIR) + "/configs/" + name; }

EnsembleOptions threads_opt() {
  EnsembleOptions o;
  o.threads = 0;
  return o;
}

// ---------------------------------------------------------------------------
// 1. algebraic identities
// ---------------------------------------------------------------------------

Outcome algebraic_identities() {
  Outcome out;
  constexpr double tol = 1e-10;
  Rng rng(101);
  double leray = 0.0, anti = 0.0, energy = 0.0, self = 0.0;
  for (int K : {2, 4, 8}) {
    auto B = make_basis(K);
    for (int t = 0; t < 10; ++t) {
      RawVectorField raw(B);
      raw.mean = {rng.normal(), rng.normal()};
      for (std::size_t j = 0; j < raw.cos_part.size(); ++j) {
        raw.cos_part[j] = {rng.normal(), rng.normal()};
        raw.sin_part[j] = {rng.normal(), rng.normal()};
      }
      const auto p = leray_project(raw);
      leray = std::max(leray, max_abs(leray_project(to_raw(p)) - p) / std::max(1.0, max_abs(p)));

      const auto u = random_field(B, rng), v = random_field(B, rng), w = random_field(B, rng);
      const double scale = std::sqrt(norm_sq(u) * norm_sq(v) * norm_sq(w)) * B->truncation();
      anti = std::max(anti, std::abs(inner(nonlinear_b(u, v), w) + inner(nonlinear_b(u, w), v)) / scale);
      energy = std::max(energy, std::abs(inner(nonlinear_b(u, v), v)) / scale);
    }
    for (std::size_t i = 0; i < B->size(); ++i)
      self = std::max(self, max_abs(nonlinear_b(SpectralField::basis_element(B, i), SpectralField::basis_element(B, i))));
  }
  out.check(leray <= tol, "Leray idempotence " + sci(leray));
  out.check(anti <= tol, "b antisymmetry " + sci(anti));
  out.check(energy <= tol, "<b(u,v),v> " + sci(energy));
  out.check(self <= tol, "b(e,e) " + sci(self));

  double lyap = 0.0;
  {
    auto B = make_basis(8);
    const auto C = make_laplacian(0.3, B);
    const std::vector<std::size_t> modes{0, 3, 5, 9, 14};
    Eigen::MatrixXd G = Eigen::MatrixXd::Random(5, 5);
    const auto Q = CovarianceSpec::dense(B, modes, G * G.transpose());
    for (const auto& Cop : {make_fractional(0.4, 0.6, B), make_friction(1.3, B), C})
      lyap = std::max(lyap, lyapunov_residual(Cop, Q, invariant_covariance(Cop, Q)));
    const auto Qd = random_diagonal(B, rng);
    lyap = std::max(lyap, lyapunov_residual(C, Qd, invariant_covariance(C, Qd)));
  }
  out.check(lyap <= tol, "Lyapunov " + sci(lyap));

  double poisson = 0.0;
  {
    auto B = make_basis(2);
    for (int t = 0; t < 100; ++t) {
      const auto C = t % 2 ? make_laplacian(0.1 + rng.uniform(), B) : make_fractional(0.5, 0.3 + 0.7 * rng.uniform(), B);
      CovarianceSpec Q;
      if (t % 3 == 0) {
        Eigen::MatrixXd G(4, 4);
        for (Eigen::Index i = 0; i < 16; ++i) G(i / 4, i % 4) = rng.normal();
        Q = CovarianceSpec::dense(B, {0, 3, 5, 9}, G * G.transpose());
      } else {
        Q = random_diagonal(B, rng);
      }
      const auto psi = center(random_quadratic(B, rng), invariant_covariance(C, Q));
      poisson = std::max(poisson, poisson_residual(C, Q, poisson_solve(C, Q, psi), psi, 100, 1000 + t));
    }
  }
  out.check(poisson <= tol, "Poisson (100 functionals) " + sci(poisson));
  return out;
}

// ---------------------------------------------------------------------------
// 2. corrector consistency
// ---------------------------------------------------------------------------

Outcome corrector_consistency() {
  Outcome out;
  constexpr double tol = 1e-10;
  Rng rng(202);
  auto B = make_basis(3);
  double phi1 = 0.0, phi2 = 0.0, split = 0.0;
  Eigen::MatrixXd q(3, 3);
  q << 1.0, 0.3, 0.2, 0.3, 0.9, -0.1, 0.2, -0.1, 0.7;
  const std::vector<std::size_t> modes{B->index_of({1, 0}, Parity::Cos), B->index_of({1, 1}, Parity::Sin),
                                       B->index_of({0, 1}, Parity::Cos)};
  std::vector<std::pair<DiagonalOperator, CovarianceSpec>> cases;
  cases.emplace_back(make_laplacian(0.3, B), random_diagonal(B, rng));
  cases.emplace_back(make_laplacian(0.3, B), make_QN(1, 0.5, 1.0, B));
  cases.emplace_back(make_friction(1.2, B), CovarianceSpec::dense(B, modes, q));
  cases.emplace_back(make_fractional(0.5, 0.6, B), random_diagonal(B, rng));
  for (const auto& [C, Q] : cases) {
    for (int t = 0; t < 5; ++t) {
      const auto u = random_field(B, rng), h = random_field(B, rng), y = random_field(B, rng);
      const double target = inner(nonlinear_b(y, u), h);
      phi1 = std::max(phi1, std::abs(ou_generator_apply(C, Q, phi1_functional(C, u, h), y) + target) /
                                std::max(1.0, std::abs(target)));

      const auto mu = invariant_covariance(C, Q);
      const auto Psi = center(assemble_psi_u(C, u, h), mu);
      phi2 = std::max(phi2, poisson_residual(C, Q, phi2_solve(C, Q, u, h), Psi, 100, 7 + t));

      const LimitCoefficients c(C, Q);
      const double lhs = psi_u_mean(C, Q, u, h);
      const double rhs = inner(strat_corrector_apply(c, u) + nonlinear_b(c.drift(), u), h);
      split = std::max(split, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
    }
  }
  out.check(phi1 <= tol, "L phi1 + <b(y,u),h> " + sci(phi1));
  out.check(phi2 <= tol, "L phi2 + Psi_u " + sci(phi2));
  out.check(split <= tol, "int psi_u dmu - <S(u)+b(r,u),h> " + sci(split));
  return out;
}

// ---------------------------------------------------------------------------
// 3. Stratonovich corrector forms
// ---------------------------------------------------------------------------

Outcome corrector_forms() {
  Outcome out;
  Rng rng(303);
  double gap = 0.0;
  for (int K : {3, 6}) {
    auto B = make_basis(K);
    for (const auto& C : {make_laplacian(0.4, B), make_friction(1.0, B), make_fractional(0.5, 0.7, B)}) {
      const LimitCoefficients c(C, random_diagonal(B, rng));
      for (int t = 0; t < 3; ++t) {
        const auto cmp = compare_corrector_forms(c, random_field(B, rng));
        gap = std::max(gap, cmp.gap / std::max(1.0, max_abs(cmp.invariant_form)));
      }
    }
  }
  out.check(gap <= 1e-10, "diagonal (C,Q) gap " + sci(gap));

  const auto cfg = load_config(config_path("noncommuting.json"));
  const LimitCoefficients c(cfg.C, cfg.Q);
  const auto cmp = compare_corrector_forms(c, cfg.u0);
  out.check(!cmp.commutation.commute, "bundled dense Q non-commuting (residual " + sci(cmp.commutation.residual) + ")");
  out.check(cmp.gap > 1e-6, "reported gap " + sci(cmp.gap));
  return out;
}

// ---------------------------------------------------------------------------
// 4. Ito-Stokes drift
// ---------------------------------------------------------------------------

Outcome ito_stokes() {
  Outcome out;
  Rng rng(404);
  double iso = 0.0;
  for (int K : {3, 6}) {
    auto B = make_basis(K);
    for (const auto& C : {make_laplacian(0.4, B), make_friction(1.0, B)}) {
      iso = std::max(iso, max_abs(ito_stokes_drift(C, random_diagonal(B, rng))));
      iso = std::max(iso, max_abs(ito_stokes_drift(C, make_QN(1, 0.0, 1.0, B))));
    }
  }
  out.check(iso == 0.0, "isotropic max|r| = " + sci(iso));

  const auto cfg = load_config(config_path("correlated_drift.json"));
  const auto r = ito_stokes_drift(cfg.C, cfg.Q);
  const auto mu = invariant_covariance(cfg.C, cfg.Q);
  const std::size_t n = cfg.basis->size();
  const std::size_t M = 1000000;
  Rng mc(cfg.seed);
  std::vector<double> s1(n, 0.0), s2(n, 0.0);
  for (std::size_t s = 0; s < M; ++s) {
    const auto w = sample_invariant(mu, mc);
    const auto v = cfg.C.apply_neg_inverse(nonlinear_b(w, w));
    for (std::size_t i = 0; i < n; ++i) {
      s1[i] += v[i];
      s2[i] += v[i] * v[i];
    }
  }
  double worst = 0.0;
  bool ok = true;
  for (std::size_t i = 0; i < n; ++i) {
    const double m = s1[i] / M;
    const double se = std::sqrt(std::max(s2[i] / M - m * m, 0.0) / M);
    const double d = std::abs(m - r[i]);
    ok = ok && d <= 4.0 * se + 1e-14;
    if (d > 1e-14) worst = std::max(worst, d / se);
  }
  out.check(max_abs(r) > 0.0, "correlated pair max|r| = " + sci(max_abs(r)));
  out.check(ok, "10^6-sample Monte Carlo within " + fmt("%.2f", worst) + " s.e. (limit 4)");
  return out;
}

// ---------------------------------------------------------------------------
// 5. energy identity
// ---------------------------------------------------------------------------

Outcome energy_identity() {
  Outcome out;
  auto B = make_basis(6);
  const double eps = 0.1;
  SlowFastParams p;
  p.epsilon = eps;
  p.A = make_laplacian(0.05, B);
  p.C = make_friction(1.0, B);
  p.Q = low_mode_noise(B, 0.2, 2);
  p.dt = eps / 5;
  p.T = 0.5;
  Rng rng(505);
  p.u0 = 0.5 * random_field(B, rng, 2.0);
  p.y0 = 0.5 * random_field(B, rng, 2.0);
  const std::vector<ObservableSpec> obs{ObservableSpec::simple(ObservableKind::FastEnergy, "fast_energy"),
                                        ObservableSpec::simple(ObservableKind::FrictionIntegral, "friction_integral"),
                                        ObservableSpec::simple(ObservableKind::ViscousIntegral, "viscous_integral")};
  auto fine = p;
  fine.dt = p.dt / 2;
  const auto coarse = energy_balance_report(run_ensemble(p, obs, 200, 5050, threads_opt()));
  const auto half = energy_balance_report(run_ensemble(fine, obs, 200, 5051, threads_opt()));
  const double budget = energy_bias_budget(coarse, half);
  const double se = std::hypot(coarse.standard_error, half.standard_error);
  out.check(std::abs(coarse.residual) <= 3.0 * se + budget,
            "residual " + sci(coarse.residual) + " vs 3 s.e. " + sci(3 * se) + " + dt budget " + sci(budget) +
                " (E||y_T||^2 = " + sci(coarse.fast_energy) + ")");
  return out;
}

// ---------------------------------------------------------------------------
// 6. linearisation bound
// ---------------------------------------------------------------------------

Outcome linearisation_bound() {
  Outcome out;
  auto B = make_basis(6);
  std::vector<double> gaps;
  std::string vals;
  for (double eps : {0.2, 0.1, 0.05}) {
    SlowFastParams p;
    p.epsilon = eps;
    // weak viscosity keeps eps A small against C; weak noise keeps the explicit transport resolved at K = 6
    p.A = make_laplacian(0.005, B);
    p.C = make_friction(1.0, B);
    p.Q = low_mode_noise(B, 0.05, 2);
    p.dt = 0.0025;
    p.T = 2.0;
    Rng rng(606);
    p.u0 = 0.5 * random_field(B, rng, 2.0);
    p.y0 = SpectralField(B);
    const auto res = run_ensemble(p, {ObservableSpec::simple(ObservableKind::LinearisationGap, "gap", 800)}, 200, 6060,
                                  threads_opt());
    gaps.push_back(res.final_column("gap").mean());
    vals += (vals.empty() ? "" : ", ") + sci(gaps.back());
  }
  const auto [lo, hi] = std::minmax_element(gaps.begin(), gaps.end());
  out.check(*lo > 0.0 && *hi < 2.0 * *lo, "eps^{-1} int E||y-Y||^2 at eps 0.2/0.1/0.05: " + vals + " (max/min " +
                                              fmt("%.3f", *hi / *lo) + ", limit 2)");
  return out;
}

// ---------------------------------------------------------------------------
// 7. convergence in law
// ---------------------------------------------------------------------------

Outcome convergence_in_law() {
  Outcome out;
  auto B = make_basis(6);
  // weak viscosity keeps eps A small against C; a small u0 keeps b(u, u) small against the transport
  const auto A = make_laplacian(0.005, B);
  const auto C = make_friction(1.0, B);
  const auto Q = low_mode_noise(B, 0.01, 2);
  const double dt = 0.0025, T = 0.5;
  const int stride = static_cast<int>(std::lround(T / dt));
  SpectralField u0(B);
  std::vector<ObservableSpec> obs;
  for (auto [k, p, sign, name] : {std::tuple{WaveVector{1, 0}, Parity::Cos, 1.0, "h10"},
                                  std::tuple{WaveVector{0, 1}, Parity::Sin, -1.0, "h01"},
                                  std::tuple{WaveVector{1, 1}, Parity::Cos, 1.0, "h11"}}) {
    const auto i = B->index_of(k, p);
    u0[i] = 0.05 * sign;
    obs.push_back(ObservableSpec::pairing(SpectralField::basis_element(B, i), name, stride));
  }

  LimitParams lp;
  lp.A = A;
  lp.coeffs = std::make_shared<const LimitCoefficients>(C, Q);
  lp.dt = dt;
  lp.T = T;
  lp.u0 = u0;
  const std::size_t M = 400;
  const auto lim = run_ensemble(lp, obs, M, derive_seed(7070, 0), threads_opt());

  std::vector<std::vector<LawComparison>> cmp(obs.size());
  const std::vector<double> eps_list{0.2, 0.1, 0.05};
  for (std::size_t e = 0; e < eps_list.size(); ++e) {
    SlowFastParams sp;
    sp.epsilon = eps_list[e];
    sp.A = A;
    sp.C = C;
    sp.Q = Q;
    sp.dt = dt;
    sp.T = T;
    sp.u0 = u0;
    sp.y0 = SpectralField(B);
    sp.y0_stationary = true;
    // common random numbers across the sweep: replica i sees the same increments at every eps
    const auto res = run_ensemble(sp, obs, M, derive_seed(7070, 1), threads_opt());
    for (std::size_t o = 0; o < obs.size(); ++o) cmp[o].push_back(compare_laws(res, lim, obs[o].name, T));
  }
  for (std::size_t o = 0; o < obs.size(); ++o) {
    const auto& c = cmp[o];
    const bool decreasing = c[0].ks > c[1].ks && c[1].ks > c[2].ks;
    out.check(decreasing, obs[o].name + " KS " + fmt("%.3f", c[0].ks) + " > " + fmt("%.3f", c[1].ks) + " > " +
                              fmt("%.3f", c[2].ks));
    out.check(std::abs(c[2].mean_diff) <= 4.0 * c[2].se_mean,
              obs[o].name + " eps=0.05 mean diff " + sci(c[2].mean_diff) + " vs 4 s.e. " + sci(4 * c[2].se_mean));
  }
  return out;
}

// ---------------------------------------------------------------------------
// 8. eddy viscosity
// ---------------------------------------------------------------------------

Outcome eddy_viscosity() {
  Outcome out;
  for (int N : {8, 16}) {
    auto B = make_basis(2 * N + 1);
    const auto C = make_friction(1.0, B);
    const auto Lap = make_laplacian(1.0, B);
    const auto QN = make_QN(N, 0.0, 1.0, B);
    std::vector<double> ratios;
    for (std::size_t i = 0; i < 8; ++i)
      ratios.push_back(eddy_kappa_apply(QN, C, SpectralField::basis_element(B, i))[i] / Lap.eigenvalue(i));
    const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
    const double mean = std::accumulate(ratios.begin(), ratios.end(), 0.0) / 8.0;
    out.check((*hi - *lo) / std::abs(mean) <= 0.10,
              "N=" + std::to_string(N) + " ratio " + fmt("%.4f", mean) + " spread " + sci((*hi - *lo) / std::abs(mean)));
    Rng rng(800 + N);
    double worst = -1e300;
    for (int t = 0; t < 5; ++t) {
      const auto u = random_field(B, rng, 2.0);
      worst = std::max(worst, inner(eddy_kappa_apply(QN, C, u), u));
    }
    out.check(worst <= 0.0, "N=" + std::to_string(N) + " max <kappa u,u> " + sci(worst));
  }

  // slow-fast with Q_N versus the deterministic eddy-viscosity run. Weak viscosity keeps the small
  // scales alive for the fast correlation time eps / chi; the prepared start removes the initial layer.
  const int N = 8;
  auto B = make_basis(2 * N + 1);
  const auto A = make_laplacian(1e-4, B);
  const auto C = make_friction(5.0, B);
  const auto QN = make_QN(N, 0.0, 0.1, B);
  SpectralField u0(B);
  Rng rng(808);
  for (std::size_t i = 0; i < B->size(); ++i)
    if (B->mode(i).k.norm2() <= 2) u0[i] = 0.05 * rng.normal();
  const double T = 0.5, dt = 1e-4;
  const int stride = 1000;
  const std::vector<ObservableSpec> obs{ObservableSpec{ObservableKind::LargeScaleEnergy, SpectralField(), 1, stride,
                                                       "large_scale_energy"}};
  EddyParams ep;
  ep.A = A;
  ep.C = C;
  ep.QN = QN;
  ep.dt = dt;
  ep.T = T;
  ep.u0 = u0;
  Rng unused(0);
  const auto det = run_trajectory(ep, obs, unused);
  ep.QN = CovarianceSpec::zero(B);
  const auto bare = run_trajectory(ep, obs, unused);

  SlowFastParams sp;
  sp.epsilon = 0.05;
  sp.A = A;
  sp.C = C;
  sp.Q = QN;
  sp.dt = dt;
  sp.T = T;
  sp.u0 = u0;
  sp.y0 = SpectralField(B);
  sp.y0_stationary = true;
  sp.u0_prepared = true;
  const auto res = run_ensemble(sp, obs, 100, 8080, threads_opt());
  double worst = 0.0, effect = 0.0;
  bool ok = true;
  for (std::size_t j = 0; j < res.times[0].size(); ++j) {
    const Eigen::VectorXd col = res.samples[0].col(static_cast<Eigen::Index>(j));
    const double m = col.mean();
    const double se = std::sqrt((col.array() - m).square().sum() / (col.size() - 1) / col.size());
    const double d = std::abs(m - det.series[0].v[j]);
    ok = ok && d <= 3.0 * se + 1e-14;
    if (d > 1e-14) worst = std::max(worst, d / std::max(se, 1e-300));
    if (j + 1 == res.times[0].size()) effect = std::abs(det.series[0].v[j] - bare.series[0].v[j]) / se;
  }
  out.check(ok, "large-scale energy of slow-fast (eps=0.05, M=100) vs eddy run: worst " + fmt("%.2f", worst) +
                    " s.e. (limit 3); eddy term at T is " + fmt("%.0f", effect) + " s.e.");
  return out;
}

// ---------------------------------------------------------------------------
// 9. exponential mixing
// ---------------------------------------------------------------------------

Outcome exponential_mixing() {
  Outcome out;
  auto B = make_basis(4);
  OuParams p;
  p.epsilon = 1.0;
  p.C = make_laplacian(0.02, B);
  p.Q = CovarianceSpec::diagonal(B, std::vector<double>(B->size(), 0.05));
  const double lam0 = p.C.spectral_gap();
  SpectralField y0(B), a(B);
  for (std::size_t i = 0; i < B->size(); ++i) {
    y0[i] = 1.0;
    a[i] = 1.0;
  }
  // psi(y) = <a, y>, whose invariant mean is 0
  const double h = 0.5 / lam0;
  const OuPropagator prop(p, h);
  const int M = 100000, steps = 8;
  std::vector<double> sums(steps + 1, 0.0);
  Rng rng(909);
  for (int r = 0; r < M; ++r) {
    SpectralField y = y0;
    for (int s = 1; s <= steps; ++s) {
      y = prop.step(y, rng);
      sums[s] += inner(y, a);
    }
  }
  std::vector<double> ts, logs;
  for (int s = 2; s <= steps; ++s) {
    ts.push_back(s * h);
    logs.push_back(std::log(std::abs(sums[s] / M)));
  }
  const double n = static_cast<double>(ts.size());
  double st = 0, sl = 0, stt = 0, stl = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    st += ts[i];
    sl += logs[i];
    stt += ts[i] * ts[i];
    stl += ts[i] * logs[i];
  }
  const double rate = -(n * stl - st * sl) / (n * stt - st * st);
  out.check(std::abs(rate - lam0) <= 0.15 * lam0,
            "fitted rate " + fmt("%.4f", rate) + " vs lambda_0 " + fmt("%.4f", lam0) + " (rel. err " +
                fmt("%.3f", std::abs(rate - lam0) / lam0) + ", limit 0.15)");
  return out;
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "algebraic identities", 10, algebraic_identities},
      {2, "corrector consistency", 30, corrector_consistency},
      {3, "Stratonovich corrector forms", 10, corrector_forms},
      {4, "Ito-Stokes drift", 60, ito_stokes},
      {5, "energy identity", 300, energy_identity},
      {6, "linearisation bound", 600, linearisation_bound},
      {7, "convergence in law", 1200, convergence_in_law},
      {8, "eddy viscosity", 900, eddy_viscosity},
      {9, "exponential mixing", 120, exponential_mixing},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : all) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.check(secs <= c.budget_s, "runtime " + fmt("%.1f", secs) + " s (budget " + fmt("%.0f", c.budget_s) + " s)");
    std::printf("AC%d %s  %s: %s\n", c.id, o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str());
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
