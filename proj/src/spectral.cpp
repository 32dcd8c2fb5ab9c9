#include "msf/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>

#include "msf/error.hpp"

namespace msf {

using cplx = std::complex<double>;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
const double kSqrt2 = std::numbers::sqrt2;

// The FFTW planner is not reentrant; execution with new arrays is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

int smooth_size_at_least(int n) {
  for (int m = n;; ++m) {
    int r = m;
    for (int p : {2, 3, 5})
      while (r % p == 0) r /= p;
    if (r == 1) return m;
  }
}

}  // namespace

/// Square-grid transforms used for the dealiased quadratic products.
class GridTransform {
 public:
  GridTransform(const ModeBasis& basis, int M) : M_(M) {
    const std::size_t nk = basis.wavevector_count();
    pos_.resize(nk);
    neg_.resize(nk);
    for (std::size_t j = 0; j < nk; ++j) {
      const auto& k = basis.wavevector(j);
      pos_[j] = flat(k.kx, k.ky);
      neg_[j] = flat(-k.kx, -k.ky);
    }
    std::vector<cplx> a(points()), b(points());
    auto* pa = reinterpret_cast<fftw_complex*>(a.data());
    auto* pb = reinterpret_cast<fftw_complex*>(b.data());
    std::lock_guard lock(planner_mutex());
    fwd_ = fftw_plan_dft_2d(M, M, pa, pb, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    bwd_ = fftw_plan_dft_2d(M, M, pa, pb, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  }

  ~GridTransform() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
  }

  GridTransform(const GridTransform&) = delete;
  GridTransform& operator=(const GridTransform&) = delete;

  int size() const { return M_; }
  std::size_t points() const { return static_cast<std::size_t>(M_) * M_; }

  /// Grid spectrum of the complex field a + i b, with a, b real fields whose
  /// coefficients at +k_j are fa[j], fb[j].
  void fill_pair(std::vector<cplx>& g, std::span<const cplx> fa, std::span<const cplx> fb) const {
    std::fill(g.begin(), g.end(), cplx{});
    const cplx I{0.0, 1.0};
    for (std::size_t j = 0; j < pos_.size(); ++j) {
      g[pos_[j]] = fa[j] + I * fb[j];
      g[neg_[j]] = std::conj(fa[j]) + I * std::conj(fb[j]);
    }
  }

  /// Splits a grid spectrum of a + i b back into the coefficients of a and b.
  void split_pair(const std::vector<cplx>& g, std::span<cplx> fa, std::span<cplx> fb) const {
    const cplx I{0.0, 1.0};
    for (std::size_t j = 0; j < pos_.size(); ++j) {
      const cplx p = g[pos_[j]];
      const cplx m = std::conj(g[neg_[j]]);
      fa[j] = 0.5 * (p + m);
      fb[j] = (p - m) / (2.0 * I);
    }
  }

  void backward(std::vector<cplx>& in, std::vector<cplx>& out) const {
    fftw_execute_dft(bwd_, reinterpret_cast<fftw_complex*>(in.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
  }

  /// Forward transform normalized so that it inverts backward().
  void forward(std::vector<cplx>& in, std::vector<cplx>& out) const {
    fftw_execute_dft(fwd_, reinterpret_cast<fftw_complex*>(in.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
    const double s = 1.0 / static_cast<double>(points());
    for (auto& v : out) v *= s;
  }

 private:
  std::size_t flat(int kx, int ky) const {
    const int ix = (kx % M_ + M_) % M_;
    const int iy = (ky % M_ + M_) % M_;
    return static_cast<std::size_t>(ix) * M_ + iy;
  }

  int M_;
  std::vector<std::size_t> pos_, neg_;
  fftw_plan fwd_ = nullptr;
  fftw_plan bwd_ = nullptr;
};

// ---------------------------------------------------------------------------
// ModeBasis

ModeBasis::ModeBasis(int K) : K_(K) {
  if (K < 1 || K > kMaxTruncation)
    throw InvalidParameter("truncation K must lie in [1, " + std::to_string(kMaxTruncation) + "], got " +
                           std::to_string(K));
  for (int kx = 0; kx <= K; ++kx)
    for (int ky = -K; ky <= K; ++ky)
      if (kx > 0 || ky > 0) wavevectors_.push_back({kx, ky});
  std::sort(wavevectors_.begin(), wavevectors_.end(), [](const WaveVector& a, const WaveVector& b) {
    if (a.norm2() != b.norm2()) return a.norm2() < b.norm2();
    if (a.kx != b.kx) return a.kx < b.kx;
    return a.ky < b.ky;
  });
  perp_.reserve(wavevectors_.size());
  for (const auto& k : wavevectors_) {
    const double n = std::sqrt(static_cast<double>(k.norm2()));
    perp_.push_back({-k.ky / n, k.kx / n});
  }
  transform_ = std::make_unique<GridTransform>(*this, smooth_size_at_least(3 * K + 1));
}

ModeBasis::~ModeBasis() = default;

int ModeBasis::grid_size() const { return transform_->size(); }

std::optional<std::size_t> ModeBasis::find(WaveVector k, Parity p, double* sign) const {
  if (std::abs(k.kx) > K_ || std::abs(k.ky) > K_ || (k.kx == 0 && k.ky == 0)) return std::nullopt;
  double s = 1.0;
  if (!(k.kx > 0 || (k.kx == 0 && k.ky > 0))) {
    k = {-k.kx, -k.ky};
    // a_{-k} = -a_k; the sine additionally changes sign under k -> -k.
    s = (p == Parity::Cos) ? -1.0 : 1.0;
  }
  auto it = std::lower_bound(wavevectors_.begin(), wavevectors_.end(), k,
                             [](const WaveVector& a, const WaveVector& b) {
                               if (a.norm2() != b.norm2()) return a.norm2() < b.norm2();
                               if (a.kx != b.kx) return a.kx < b.kx;
                               return a.ky < b.ky;
                             });
  if (it == wavevectors_.end() || !(*it == k)) return std::nullopt;
  if (sign) *sign = s;
  return 2 * static_cast<std::size_t>(it - wavevectors_.begin()) + (p == Parity::Sin ? 1 : 0);
}

std::size_t ModeBasis::index_of(WaveVector k, Parity p) const {
  double s = 1.0;
  auto i = find(k, p, &s);
  if (!i) throw InvalidArgument("wavevector (" + std::to_string(k.kx) + "," + std::to_string(k.ky) +
                                ") is not in the truncated basis");
  return *i;
}

BasisPtr make_basis(int K) { return std::make_shared<const ModeBasis>(K); }

// ---------------------------------------------------------------------------
// SpectralField

SpectralField::SpectralField(BasisPtr basis) : basis_(std::move(basis)) {
  if (!basis_) throw InvalidArgument("SpectralField requires a basis");
  c_.assign(basis_->size(), 0.0);
}

SpectralField::SpectralField(BasisPtr basis, std::vector<double> coeffs)
    : basis_(std::move(basis)), c_(std::move(coeffs)) {
  if (!basis_) throw InvalidArgument("SpectralField requires a basis");
  if (c_.size() != basis_->size())
    throw InvalidArgument("coefficient count " + std::to_string(c_.size()) + " does not match basis size " +
                          std::to_string(basis_->size()));
}

SpectralField SpectralField::basis_element(BasisPtr basis, std::size_t i) {
  SpectralField f(std::move(basis));
  if (i >= f.size()) throw InvalidArgument("basis element index out of range");
  f.c_[i] = 1.0;
  return f;
}

bool SpectralField::all_finite() const {
  return std::all_of(c_.begin(), c_.end(), [](double v) { return std::isfinite(v); });
}

SpectralField& SpectralField::operator+=(const SpectralField& o) { return add_scaled(1.0, o); }
SpectralField& SpectralField::operator-=(const SpectralField& o) { return add_scaled(-1.0, o); }

SpectralField& SpectralField::operator*=(double s) {
  for (auto& v : c_) v *= s;
  return *this;
}

SpectralField& SpectralField::add_scaled(double s, const SpectralField& o) {
  require_same_basis(*this, o, "add_scaled");
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += s * o.c_[i];
  return *this;
}

void require_same_basis(const SpectralField& a, const SpectralField& b, const char* where) {
  if (!a.basis_ptr() || a.basis_ptr() != b.basis_ptr())
    throw InvalidArgument(std::string(where) + ": fields live on different bases");
}

double inner(const SpectralField& a, const SpectralField& b) {
  require_same_basis(a, b, "inner");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm_sq(const SpectralField& a) {
  double s = 0.0;
  for (double v : a.coeffs()) s += v * v;
  return s;
}

double max_abs(const SpectralField& a) {
  double m = 0.0;
  for (double v : a.coeffs()) m = std::max(m, std::abs(v));
  return m;
}

std::array<double, 2> evaluate(const SpectralField& f, double x, double y) {
  std::array<double, 2> out{0.0, 0.0};
  const auto& B = f.basis();
  for (std::size_t j = 0; j < B.wavevector_count(); ++j) {
    const auto& k = B.wavevector(j);
    const double th = kTwoPi * (k.kx * x + k.ky * y);
    const double amp = kSqrt2 * (f[2 * j] * std::cos(th) + f[2 * j + 1] * std::sin(th));
    const auto& a = B.perp(2 * j);
    out[0] += amp * a[0];
    out[1] += amp * a[1];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Raw fields and projection

RawVectorField::RawVectorField(BasisPtr b) : basis(std::move(b)) {
  if (!basis) throw InvalidArgument("RawVectorField requires a basis");
  cos_part.assign(basis->wavevector_count(), {0.0, 0.0});
  sin_part.assign(basis->wavevector_count(), {0.0, 0.0});
}

double inner(const RawVectorField& a, const RawVectorField& b) {
  if (a.basis != b.basis) throw InvalidArgument("inner: raw fields live on different bases");
  double s = a.mean[0] * b.mean[0] + a.mean[1] * b.mean[1];
  for (std::size_t j = 0; j < a.cos_part.size(); ++j)
    for (int d = 0; d < 2; ++d) s += a.cos_part[j][d] * b.cos_part[j][d] + a.sin_part[j][d] * b.sin_part[j][d];
  return s;
}

RawVectorField to_raw(const SpectralField& f) {
  RawVectorField r(f.basis_ptr());
  for (std::size_t j = 0; j < r.cos_part.size(); ++j) {
    const auto& a = f.basis().perp(2 * j);
    for (int d = 0; d < 2; ++d) {
      r.cos_part[j][d] = a[d] * f[2 * j];
      r.sin_part[j][d] = a[d] * f[2 * j + 1];
    }
  }
  return r;
}

double max_divergence(const RawVectorField& f) {
  double m = 0.0;
  for (std::size_t j = 0; j < f.cos_part.size(); ++j) {
    const auto& k = f.basis->wavevector(j);
    const double dc = kTwoPi * (k.kx * f.cos_part[j][0] + k.ky * f.cos_part[j][1]);
    const double ds = kTwoPi * (k.kx * f.sin_part[j][0] + k.ky * f.sin_part[j][1]);
    m = std::max({m, std::abs(dc), std::abs(ds)});
  }
  return m;
}

SpectralField leray_project(const RawVectorField& raw) {
  SpectralField out(raw.basis);
  for (std::size_t j = 0; j < raw.cos_part.size(); ++j) {
    const auto& a = raw.basis->perp(2 * j);
    const double c = a[0] * raw.cos_part[j][0] + a[1] * raw.cos_part[j][1];
    const double s = a[0] * raw.sin_part[j][0] + a[1] * raw.sin_part[j][1];
    if (!std::isfinite(c) || !std::isfinite(s)) throw NumericFailure("leray_project: non-finite input");
    out[2 * j] = c;
    out[2 * j + 1] = s;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Quadratic products

namespace {

/// Complex coefficient at +k_j of the scalar amplitude of the field.
std::vector<cplx> amplitudes(const SpectralField& f) {
  std::vector<cplx> p(f.basis().wavevector_count());
  for (std::size_t j = 0; j < p.size(); ++j) p[j] = cplx(f[2 * j], -f[2 * j + 1]) / kSqrt2;
  return p;
}

struct Workspace {
  std::vector<cplx> spec, g1, g2, g3, fa, fb;
  explicit Workspace(const ModeBasis& B)
      : spec(B.transform().points()),
        g1(spec.size()),
        g2(spec.size()),
        g3(spec.size()),
        fa(B.wavevector_count()),
        fb(B.wavevector_count()) {}
};

/// Grids of (u_x + i u_y), (d_x v_x + i d_y v_x), (d_x v_y + i d_y v_y).
void velocity_and_gradient(const SpectralField& u, const SpectralField& v, Workspace& w) {
  const auto& B = u.basis();
  const auto& T = B.transform();
  const auto pu = amplitudes(u);
  const auto pv = amplitudes(v);
  const std::size_t nk = pu.size();
  const cplx I{0.0, 1.0};

  for (std::size_t j = 0; j < nk; ++j) {
    const auto& a = B.perp(2 * j);
    w.fa[j] = a[0] * pu[j];
    w.fb[j] = a[1] * pu[j];
  }
  T.fill_pair(w.spec, w.fa, w.fb);
  T.backward(w.spec, w.g1);

  for (int comp = 0; comp < 2; ++comp) {
    for (std::size_t j = 0; j < nk; ++j) {
      const auto& k = B.wavevector(j);
      const cplx vc = B.perp(2 * j)[comp] * pv[j];
      w.fa[j] = kTwoPi * k.kx * I * vc;
      w.fb[j] = kTwoPi * k.ky * I * vc;
    }
    T.fill_pair(w.spec, w.fa, w.fb);
    T.backward(w.spec, comp == 0 ? w.g2 : w.g3);
  }
}

/// Projects the grid field held in w.g1 (as w_x + i w_y) onto the basis.
SpectralField project_grid(const BasisPtr& basis, Workspace& w) {
  const auto& T = basis->transform();
  T.forward(w.g1, w.spec);
  T.split_pair(w.spec, w.fa, w.fb);
  SpectralField out(basis);
  for (std::size_t j = 0; j < w.fa.size(); ++j) {
    const auto& a = basis->perp(2 * j);
    const cplx p = a[0] * w.fa[j] + a[1] * w.fb[j];
    out[2 * j] = kSqrt2 * p.real();
    out[2 * j + 1] = -kSqrt2 * p.imag();
  }
  return out;
}

}  // namespace

SpectralField nonlinear_b(const SpectralField& u, const SpectralField& v) {
  require_same_basis(u, v, "nonlinear_b");
  Workspace w(u.basis());
  velocity_and_gradient(u, v, w);
  for (std::size_t i = 0; i < w.g1.size(); ++i) {
    const double ux = w.g1[i].real(), uy = w.g1[i].imag();
    const double wx = -(ux * w.g2[i].real() + uy * w.g2[i].imag());
    const double wy = -(ux * w.g3[i].real() + uy * w.g3[i].imag());
    w.g1[i] = cplx(wx, wy);
  }
  return project_grid(u.basis_ptr(), w);
}

SpectralField b_adjoint_first(const SpectralField& y, const SpectralField& z) {
  require_same_basis(y, z, "b_adjoint_first");
  // <b(x,y),z> = -int x_j (d_j y_i) z_i, so w_j = -sum_i z_i d_j y_i.
  Workspace w(y.basis());
  velocity_and_gradient(z, y, w);
  for (std::size_t i = 0; i < w.g1.size(); ++i) {
    const double zx = w.g1[i].real(), zy = w.g1[i].imag();
    const double wx = -(zx * w.g2[i].real() + zy * w.g3[i].real());
    const double wy = -(zx * w.g2[i].imag() + zy * w.g3[i].imag());
    w.g1[i] = cplx(wx, wy);
  }
  return project_grid(y.basis_ptr(), w);
}

}  // namespace msf
