#include "msf/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "msf/snapshot.hpp"

namespace msf {

using nlohmann::json;

ConfigError::ConfigError(std::vector<std::string> problems)
    : Error([&] {
        std::string s = "invalid configuration:";
        for (const auto& p : problems) s += "\n  - " + p;
        return s;
      }()),
      problems_(std::move(problems)) {}

std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

/// Collects problems instead of failing on the first one.
class Checker {
 public:
  void add(std::string p) { problems_.push_back(std::move(p)); }
  bool ok() const { return problems_.empty(); }
  std::vector<std::string>& problems() { return problems_; }

  /// Reports keys of `obj` outside `allowed`.
  void keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) {
      add(where + " must be an object");
      return;
    }
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = obj.begin(); it != obj.end(); ++it)
      if (!ok.count(it.key())) add(where + ": unknown key '" + it.key() + "'");
  }

  double number(const json& obj, const char* key, const std::string& where, std::optional<double> def) {
    if (!obj.is_object() || !obj.contains(key)) {
      if (!def) add(where + "." + key + " is required");
      return def.value_or(0.0);
    }
    const auto& v = obj.at(key);
    if (!v.is_number()) {
      add(where + "." + key + " must be a number");
      return def.value_or(0.0);
    }
    return v.get<double>();
  }

  long long integer(const json& obj, const char* key, const std::string& where, std::optional<long long> def) {
    if (!obj.is_object() || !obj.contains(key)) {
      if (!def) add(where + "." + key + " is required");
      return def.value_or(0);
    }
    const auto& v = obj.at(key);
    if (!v.is_number_integer()) {
      add(where + "." + key + " must be an integer");
      return def.value_or(0);
    }
    return v.get<long long>();
  }

  std::string string(const json& obj, const char* key, const std::string& where, std::optional<std::string> def) {
    if (!obj.is_object() || !obj.contains(key)) {
      if (!def) add(where + "." + key + " is required");
      return def.value_or("");
    }
    const auto& v = obj.at(key);
    if (!v.is_string()) {
      add(where + "." + key + " must be a string");
      return def.value_or("");
    }
    return v.get<std::string>();
  }

  bool boolean(const json& obj, const char* key, const std::string& where, bool def) {
    if (!obj.is_object() || !obj.contains(key)) return def;
    const auto& v = obj.at(key);
    if (!v.is_boolean()) {
      add(where + "." + key + " must be true or false");
      return def;
    }
    return v.get<bool>();
  }

 private:
  std::vector<std::string> problems_;
};

/// Runs `f`, turning library validation errors into recorded problems.
template <class F>
auto guarded(Checker& chk, const std::string& where, F f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    chk.add(where + ": " + e.what());
    return decltype(f()){};
  }
}

std::optional<std::pair<WaveVector, std::string>> mode_ref(Checker& chk, const json& m, const std::string& where) {
  if (!m.is_object() || !m.contains("k") || !m.at("k").is_array() || m.at("k").size() != 2 ||
      !m.at("k")[0].is_number_integer() || !m.at("k")[1].is_number_integer()) {
    chk.add(where + ".k must be an integer pair [kx, ky]");
    return std::nullopt;
  }
  const std::string parity = chk.string(m, "parity", where, "cos");
  if (parity != "cos" && parity != "sin" && parity != "both") {
    chk.add(where + ".parity must be cos, sin or both");
    return std::nullopt;
  }
  return std::make_pair(WaveVector{m.at("k")[0].get<int>(), m.at("k")[1].get<int>()}, parity);
}

/// Element indices and signs of a (k, parity) reference; empty if outside the basis.
std::vector<std::pair<std::size_t, double>> resolve(Checker& chk, const BasisPtr& B, WaveVector k,
                                                    const std::string& parity, const std::string& where) {
  std::vector<std::pair<std::size_t, double>> out;
  if (k.kx == 0 && k.ky == 0) {
    chk.add(where + ": k = (0, 0) carries no divergence-free mode");
    return out;
  }
  for (Parity p : {Parity::Cos, Parity::Sin}) {
    if (parity == "cos" && p != Parity::Cos) continue;
    if (parity == "sin" && p != Parity::Sin) continue;
    double sign = 1.0;
    const auto i = B->find(k, p, &sign);
    if (!i) {
      chk.add(where + ": k = (" + std::to_string(k.kx) + ", " + std::to_string(k.ky) + ") is outside |k|_inf <= " +
              std::to_string(B->truncation()));
      return {};
    }
    out.emplace_back(*i, sign);
  }
  return out;
}

SpectralField parse_field(Checker& chk, const json& spec, const BasisPtr& B, const std::string& where,
                          const std::string& base_dir) {
  SpectralField f(B);
  if (spec.is_null()) return f;
  const std::string kind = chk.string(spec, "kind", where, std::nullopt);
  if (kind == "zero") {
    chk.keys(spec, where, {"kind"});
  } else if (kind == "modes") {
    chk.keys(spec, where, {"kind", "modes"});
    if (!spec.contains("modes") || !spec.at("modes").is_array()) {
      chk.add(where + ".modes must be a list");
      return f;
    }
    std::size_t n = 0;
    for (const auto& m : spec.at("modes")) {
      const std::string w = where + ".modes[" + std::to_string(n++) + "]";
      chk.keys(m, w, {"k", "parity", "value"});
      const auto ref = mode_ref(chk, m, w);
      const double v = chk.number(m, "value", w, std::nullopt);
      if (!ref) continue;
      for (auto [i, s] : resolve(chk, B, ref->first, ref->second, w)) f[i] += s * v;
    }
  } else if (kind == "random") {
    chk.keys(spec, where, {"kind", "seed", "amplitude", "decay", "max_k2"});
    Rng rng(static_cast<std::uint64_t>(chk.integer(spec, "seed", where, 0)));
    const double amp = chk.number(spec, "amplitude", where, 1.0);
    const double decay = chk.number(spec, "decay", where, 1.0);
    const long long max_k2 = chk.integer(spec, "max_k2", where, -1);
    for (std::size_t i = 0; i < f.size(); ++i) {
      const int k2 = B->mode(i).k.norm2();
      const double xi = rng.normal();
      if (max_k2 >= 0 && k2 > max_k2) continue;
      f[i] = amp * xi / std::pow(1.0 + k2, 0.5 * decay);
    }
  } else if (kind == "snapshot") {
    chk.keys(spec, where, {"kind", "path"});
    std::filesystem::path p = chk.string(spec, "path", where, std::nullopt);
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    return guarded(chk, where, [&] { return read_snapshot(p.string(), B); });
  } else if (!kind.empty()) {
    chk.add(where + ".kind must be zero, modes, random or snapshot");
  }
  return f;
}

DiagonalOperator parse_operator(Checker& chk, const json& spec, const BasisPtr& B, const std::string& where,
                                DissipationSpec* out_spec) {
  const std::string kind = chk.string(spec, "kind", where, std::nullopt);
  DissipationSpec s;
  if (kind == "laplacian") {
    chk.keys(spec, where, {"kind", "nu"});
    s.kind = DissipationKind::Laplacian;
    s.nu = chk.number(spec, "nu", where, std::nullopt);
  } else if (kind == "friction") {
    chk.keys(spec, where, {"kind", "chi"});
    s.kind = DissipationKind::Friction;
    s.chi = chk.number(spec, "chi", where, std::nullopt);
  } else if (kind == "fractional") {
    chk.keys(spec, where, {"kind", "nu", "gamma"});
    s.kind = DissipationKind::Fractional;
    s.nu = chk.number(spec, "nu", where, std::nullopt);
    s.gamma = chk.number(spec, "gamma", where, std::nullopt);
  } else if (kind == "combined") {
    chk.keys(spec, where, {"kind", "nu", "chi"});
    s.kind = DissipationKind::Combined;
    s.nu = chk.number(spec, "nu", where, std::nullopt);
    s.chi = chk.number(spec, "chi", where, std::nullopt);
  } else {
    if (!kind.empty()) chk.add(where + ".kind must be laplacian, friction, fractional or combined");
    return {};
  }
  if (out_spec) *out_spec = s;
  return guarded(chk, where, [&] {
    if (s.kind == DissipationKind::Combined) return make_friction(s.chi, B).plus_scaled(make_laplacian(s.nu, B), 1.0);
    return make_dissipation(s, B);
  });
}

CovarianceSpec parse_noise(Checker& chk, const json& spec, const BasisPtr& B, std::string& kind_out, int& qn_N,
                           double& qn_delta, double& qn_c) {
  const std::string where = "noise";
  const std::string kind = chk.string(spec, "kind", where, std::nullopt);
  kind_out = kind;
  if (kind == "zero") {
    chk.keys(spec, where, {"kind"});
    return CovarianceSpec::zero(B);
  }
  if (kind == "isotropic") {
    chk.keys(spec, where, {"kind", "q", "max_k2"});
    const double q = chk.number(spec, "q", where, std::nullopt);
    const long long max_k2 = chk.integer(spec, "max_k2", where, -1);
    std::vector<double> v(B->size(), 0.0);
    for (std::size_t i = 0; i < v.size(); ++i)
      if (max_k2 < 0 || B->mode(i).k.norm2() <= max_k2) v[i] = q;
    return guarded(chk, where, [&] { return CovarianceSpec::diagonal(B, v); });
  }
  if (kind == "diagonal") {
    chk.keys(spec, where, {"kind", "modes"});
    std::vector<double> v(B->size(), 0.0);
    if (!spec.contains("modes") || !spec.at("modes").is_array()) {
      chk.add("noise.modes must be a list");
      return {};
    }
    std::size_t n = 0;
    for (const auto& m : spec.at("modes")) {
      const std::string w = "noise.modes[" + std::to_string(n++) + "]";
      chk.keys(m, w, {"k", "parity", "q"});
      const auto ref = mode_ref(chk, m, w);
      const double q = chk.number(m, "q", w, std::nullopt);
      if (!ref) continue;
      for (auto [i, s] : resolve(chk, B, ref->first, ref->second, w)) v[i] = q;
    }
    return guarded(chk, where, [&] { return CovarianceSpec::diagonal(B, v); });
  }
  if (kind == "dense") {
    chk.keys(spec, where, {"kind", "modes", "matrix"});
    if (!spec.contains("modes") || !spec.at("modes").is_array() || !spec.contains("matrix") ||
        !spec.at("matrix").is_array()) {
      chk.add("noise.modes and noise.matrix must be lists");
      return {};
    }
    std::vector<std::size_t> modes;
    std::vector<double> signs;
    std::size_t n = 0;
    for (const auto& m : spec.at("modes")) {
      const std::string w = "noise.modes[" + std::to_string(n++) + "]";
      chk.keys(m, w, {"k", "parity"});
      const auto ref = mode_ref(chk, m, w);
      if (!ref) continue;
      if (ref->second == "both") {
        chk.add(w + ": dense noise needs a single parity per entry");
        continue;
      }
      for (auto [i, s] : resolve(chk, B, ref->first, ref->second, w)) {
        modes.push_back(i);
        signs.push_back(s);
      }
    }
    const auto& mat = spec.at("matrix");
    const auto d = static_cast<Eigen::Index>(modes.size());
    if (static_cast<Eigen::Index>(mat.size()) != d) {
      chk.add("noise.matrix must be " + std::to_string(d) + " x " + std::to_string(d));
      return {};
    }
    Eigen::MatrixXd Q(d, d);
    for (Eigen::Index a = 0; a < d; ++a) {
      if (!mat[a].is_array() || static_cast<Eigen::Index>(mat[a].size()) != d) {
        chk.add("noise.matrix row " + std::to_string(a) + " has the wrong length");
        return {};
      }
      for (Eigen::Index c = 0; c < d; ++c) {
        if (!mat[a][c].is_number()) {
          chk.add("noise.matrix entries must be numbers");
          return {};
        }
        // entries refer to the stated (k, parity); flip for negative-k references
        Q(a, c) = signs[a] * signs[c] * mat[a][c].get<double>();
      }
    }
    return guarded(chk, where, [&] { return CovarianceSpec::dense(B, modes, Q); });
  }
  if (kind == "qn") {
    chk.keys(spec, where, {"kind", "N", "delta", "c_kappa"});
    qn_N = static_cast<int>(chk.integer(spec, "N", where, std::nullopt));
    qn_delta = chk.number(spec, "delta", where, 0.0);
    qn_c = chk.number(spec, "c_kappa", where, 1.0);
    return guarded(chk, where, [&] { return make_QN(qn_N, qn_delta, qn_c, B); });
  }
  if (!kind.empty()) chk.add("noise.kind must be zero, isotropic, diagonal, dense or qn");
  return {};
}

std::optional<ObservableKind> observable_kind(const std::string& s) {
  if (s == "pairing") return ObservableKind::Pairing;
  if (s == "energy") return ObservableKind::Energy;
  if (s == "fast_energy") return ObservableKind::FastEnergy;
  if (s == "linearisation_gap") return ObservableKind::LinearisationGap;
  if (s == "gap_norm") return ObservableKind::GapNorm;
  if (s == "friction_integral") return ObservableKind::FrictionIntegral;
  if (s == "viscous_integral") return ObservableKind::ViscousIntegral;
  if (s == "large_scale_energy") return ObservableKind::LargeScaleEnergy;
  return std::nullopt;
}

}  // namespace

SlowFastParams ExperimentConfig::slowfast_params(double eps) const {
  SlowFastParams p;
  p.epsilon = eps;
  p.A = A;
  p.C = C;
  p.Q = Q;
  p.dt = dt;
  p.T = T;
  p.u0 = u0;
  p.y0 = y0;
  p.y0_stationary = y0_stationary;
  p.u0_prepared = u0_prepared;
  p.nonlinear = nonlinear;
  p.blowup_cap = blowup_cap;
  return p;
}

LimitParams ExperimentConfig::limit_params() const {
  LimitParams p;
  p.A = A;
  p.coeffs = std::make_shared<const LimitCoefficients>(C, Q);
  p.dt = dt;
  p.T = T;
  p.u0 = u0;
  p.nonlinear = nonlinear;
  p.blowup_cap = blowup_cap;
  return p;
}

EddyParams ExperimentConfig::eddy_params(const CovarianceSpec& QN) const {
  EddyParams p;
  p.A = A;
  p.C = C;
  p.QN = QN;
  p.dt = dt;
  p.T = T;
  p.u0 = u0;
  p.nonlinear = nonlinear;
  p.blowup_cap = blowup_cap;
  return p;
}

ExperimentConfig parse_config(const std::string& json_text, const ConfigOverrides& overrides,
                              const std::string& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError({std::string("not valid JSON: ") + e.what()});
  }
  if (!j.is_object()) throw ConfigError({"the configuration must be a JSON object"});

  // apply command-line overrides before fingerprinting
  if (overrides.seed) j["run"]["seed"] = *overrides.seed;
  if (overrides.replicas) j["run"]["replicas"] = *overrides.replicas;
  if (overrides.out_dir) j["outputs"]["dir"] = *overrides.out_dir;

  Checker chk;
  chk.keys(j, "config", {"basis", "operators", "noise", "run", "outputs"});
  for (const char* s : {"basis", "operators", "noise", "run"})
    if (!j.contains(s)) chk.add(std::string("section '") + s + "' is required");
  if (!chk.ok()) throw ConfigError(chk.problems());

  ExperimentConfig cfg;
  const auto& jb = j.at("basis");
  chk.keys(jb, "basis", {"K"});
  const long long K = chk.integer(jb, "K", "basis", std::nullopt);
  if (K < 1 || K > ModeBasis::kMaxTruncation) {
    chk.add("basis.K must lie in [1, " + std::to_string(ModeBasis::kMaxTruncation) + "]");
    throw ConfigError(chk.problems());
  }
  cfg.basis = make_basis(static_cast<int>(K));
  const auto& B = cfg.basis;

  const auto& jo = j.at("operators");
  chk.keys(jo, "operators", {"A", "C"});
  if (!jo.contains("A")) chk.add("operators.A is required");
  if (!jo.contains("C")) chk.add("operators.C is required");
  if (jo.contains("A")) cfg.A = parse_operator(chk, jo.at("A"), B, "operators.A", nullptr);
  if (jo.contains("C")) cfg.C = parse_operator(chk, jo.at("C"), B, "operators.C", nullptr);

  int qn_N = 0;
  cfg.Q = parse_noise(chk, j.at("noise"), B, cfg.noise_kind, qn_N, cfg.qn_delta, cfg.qn_c_kappa);

  const auto& jr = j.at("run");
  chk.keys(jr, "run",
           {"epsilon", "epsilons", "dt", "T", "replicas", "seed", "threads", "nonlinear", "blowup_cap", "u0", "y0", "y0_stationary",
            "u0_prepared", "eddy_N", "mc_samples", "poisson_trials", "ratio_tolerance"});
  cfg.epsilon = chk.number(jr, "epsilon", "run", 0.1);
  if (!(cfg.epsilon > 0.0 && cfg.epsilon <= 1.0)) chk.add("run.epsilon must lie in (0, 1]");
  if (jr.contains("epsilons")) {
    if (!jr.at("epsilons").is_array() || jr.at("epsilons").empty()) {
      chk.add("run.epsilons must be a non-empty list");
    } else {
      for (const auto& e : jr.at("epsilons")) {
        if (!e.is_number() || !(e.get<double>() > 0.0 && e.get<double>() <= 1.0))
          chk.add("run.epsilons entries must lie in (0, 1]");
        else
          cfg.epsilons.push_back(e.get<double>());
      }
    }
  }
  // the explicit fast advection is resolved at dt <= eps / 5
  double eps_min = cfg.epsilon;
  for (double e : cfg.epsilons) eps_min = std::min(eps_min, e);
  cfg.dt = chk.number(jr, "dt", "run", std::min(0.01, eps_min / 5.0));
  cfg.T = chk.number(jr, "T", "run", 1.0);
  if (!(cfg.dt > 0.0)) chk.add("run.dt must be positive");
  if (!(cfg.T >= cfg.dt)) chk.add("run.T must be at least run.dt");
  const long long M = chk.integer(jr, "replicas", "run", 100);
  if (M < 2) chk.add("run.replicas must be at least 2");
  cfg.replicas = static_cast<std::size_t>(std::max(M, 2LL));
  if (!jr.contains("seed")) {
    chk.add("run.seed is required (or pass --seed)");
  } else if (!jr.at("seed").is_number_unsigned() && !(jr.at("seed").is_number_integer() && jr.at("seed").get<long long>() >= 0)) {
    chk.add("run.seed must be a non-negative integer");
  } else {
    cfg.seed = jr.at("seed").get<std::uint64_t>();
  }
  const long long threads = chk.integer(jr, "threads", "run", 1);
  if (threads < 0) chk.add("run.threads must be >= 0");
  cfg.threads = static_cast<unsigned>(std::max(threads, 0LL));
  cfg.nonlinear = chk.boolean(jr, "nonlinear", "run", true);
  cfg.blowup_cap = chk.number(jr, "blowup_cap", "run", kDefaultBlowupCap);
  if (!(cfg.blowup_cap > 0.0)) chk.add("run.blowup_cap must be positive");
  cfg.u0 = jr.contains("u0") ? parse_field(chk, jr.at("u0"), B, "run.u0", base_dir) : SpectralField(B);
  cfg.y0_stationary = chk.boolean(jr, "y0_stationary", "run", false);
  cfg.u0_prepared = chk.boolean(jr, "u0_prepared", "run", false);
  cfg.y0 = jr.contains("y0") ? parse_field(chk, jr.at("y0"), B, "run.y0", base_dir) : SpectralField(B);
  if (jr.contains("eddy_N")) {
    if (!jr.at("eddy_N").is_array()) chk.add("run.eddy_N must be a list of integers");
    else
      for (const auto& n : jr.at("eddy_N")) {
        if (!n.is_number_integer() || n.get<int>() < 1) chk.add("run.eddy_N entries must be positive integers");
        else cfg.eddy_N.push_back(n.get<int>());
      }
  } else if (qn_N > 0) {
    cfg.eddy_N = {qn_N};
  }
  const long long mc = chk.integer(jr, "mc_samples", "run", 0);
  if (mc < 0) chk.add("run.mc_samples must be >= 0");
  cfg.mc_samples = static_cast<std::size_t>(std::max(mc, 0LL));
  cfg.poisson_trials = static_cast<int>(chk.integer(jr, "poisson_trials", "run", 100));
  if (cfg.poisson_trials < 1) chk.add("run.poisson_trials must be >= 1");
  cfg.ratio_tolerance = chk.number(jr, "ratio_tolerance", "run", 0.10);

  const json jout = j.contains("outputs") ? j.at("outputs") : json::object();
  chk.keys(jout, "outputs", {"dir", "stride", "observables"});
  cfg.out_dir = chk.string(jout, "dir", "outputs", "out");
  const long long stride = chk.integer(jout, "stride", "outputs", 1);
  if (stride < 1) chk.add("outputs.stride must be >= 1");
  if (jout.contains("observables")) {
    if (!jout.at("observables").is_array()) {
      chk.add("outputs.observables must be a list");
    } else {
      std::size_t n = 0;
      std::set<std::string> names;
      for (const auto& o : jout.at("observables")) {
        const std::string w = "outputs.observables[" + std::to_string(n++) + "]";
        chk.keys(o, w, {"kind", "name", "h", "cutoff", "stride"});
        const std::string ks = chk.string(o, "kind", w, std::nullopt);
        const auto kind = observable_kind(ks);
        if (!kind) {
          if (!ks.empty()) chk.add(w + ": unknown observable kind '" + ks + "'");
          continue;
        }
        ObservableSpec spec;
        spec.kind = *kind;
        spec.name = chk.string(o, "name", w, ks);
        spec.stride = static_cast<int>(chk.integer(o, "stride", w, std::max(stride, 1LL)));
        spec.cutoff = static_cast<int>(chk.integer(o, "cutoff", w, 1));
        if (*kind == ObservableKind::Pairing) {
          if (!o.contains("h")) chk.add(w + ".h is required for a pairing");
          else spec.h = parse_field(chk, o.at("h"), B, w + ".h", base_dir);
        }
        if (!names.insert(spec.name).second) chk.add(w + ": duplicate observable name '" + spec.name + "'");
        cfg.observables.push_back(std::move(spec));
      }
    }
  } else {
    cfg.observables.push_back(ObservableSpec::simple(ObservableKind::Energy, "energy", static_cast<int>(stride)));
  }
  if (!chk.ok()) throw ConfigError(chk.problems());

  cfg.canonical = j.dump();
  json fp = j;
  if (fp.contains("outputs")) fp["outputs"].erase("dir");
  cfg.fingerprint = fnv1a_hex(fp.dump());
  return cfg;
}

ExperimentConfig load_config(const std::string& path, const ConfigOverrides& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot read configuration file '" + path + "'"});
  std::stringstream ss;
  ss << in.rdbuf();
  const auto dir = std::filesystem::path(path).parent_path();
  return parse_config(ss.str(), overrides, dir.empty() ? "." : dir.string());
}

}  // namespace msf
