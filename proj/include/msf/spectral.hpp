#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace msf {

/// Integer wavevector on the two-dimensional lattice.
struct WaveVector {
  int kx = 0;
  int ky = 0;
  int norm2() const { return kx * kx + ky * ky; }
  bool operator==(const WaveVector&) const = default;
};

enum class Parity : std::uint8_t { Cos = 0, Sin = 1 };

/// One basis element: sqrt(2) a_k cos(2 pi k.x) or sqrt(2) a_k sin(2 pi k.x).
struct Mode {
  WaveVector k;
  Parity parity;
};

class GridTransform;

/**
 * Orthonormal basis of zero-mean divergence-free fields on the unit torus,
 * truncated to |k|_inf <= K.
 *
 * Wavevectors are taken from the half-lattice (kx > 0, or kx == 0 and ky > 0)
 * and sorted by |k|^2, then kx, then ky. Element 2j is the cosine and element
 * 2j+1 the sine of wavevector j.
 */
class ModeBasis {
 public:
  static constexpr int kMaxTruncation = 64;

  explicit ModeBasis(int K);
  ~ModeBasis();
  ModeBasis(const ModeBasis&) = delete;
  ModeBasis& operator=(const ModeBasis&) = delete;

  int truncation() const { return K_; }
  std::size_t size() const { return 2 * wavevectors_.size(); }
  std::size_t wavevector_count() const { return wavevectors_.size(); }

  const WaveVector& wavevector(std::size_t j) const { return wavevectors_[j]; }
  Mode mode(std::size_t i) const { return {wavevectors_[i / 2], i % 2 == 0 ? Parity::Cos : Parity::Sin}; }
  /// Unit vector a_k perpendicular to the wavevector of element i.
  const std::array<double, 2>& perp(std::size_t i) const { return perp_[i / 2]; }

  /// Index of the element (k, parity); k may be any nonzero lattice vector.
  /// For -k the cosine is the same element and the sine flips sign; `sign`
  /// receives that factor.
  std::optional<std::size_t> find(WaveVector k, Parity p, double* sign = nullptr) const;
  std::size_t index_of(WaveVector k, Parity p) const;

  /// Side of the square grid used for dealiased products.
  int grid_size() const;
  const GridTransform& transform() const { return *transform_; }

 private:
  int K_;
  std::vector<WaveVector> wavevectors_;
  std::vector<std::array<double, 2>> perp_;
  std::unique_ptr<GridTransform> transform_;
};

using BasisPtr = std::shared_ptr<const ModeBasis>;

/// Builds the basis of truncation K; K must lie in [1, ModeBasis::kMaxTruncation].
BasisPtr make_basis(int K);

/// Divergence-free zero-mean field as real coefficients over a ModeBasis.
class SpectralField {
 public:
  SpectralField() = default;
  explicit SpectralField(BasisPtr basis);
  SpectralField(BasisPtr basis, std::vector<double> coeffs);

  static SpectralField basis_element(BasisPtr basis, std::size_t i);

  const BasisPtr& basis_ptr() const { return basis_; }
  const ModeBasis& basis() const { return *basis_; }
  std::size_t size() const { return c_.size(); }
  bool empty() const { return !basis_; }

  double operator[](std::size_t i) const { return c_[i]; }
  double& operator[](std::size_t i) { return c_[i]; }
  std::span<const double> coeffs() const { return c_; }
  std::span<double> coeffs() { return c_; }

  bool all_finite() const;

  SpectralField& operator+=(const SpectralField& o);
  SpectralField& operator-=(const SpectralField& o);
  SpectralField& operator*=(double s);
  /// this += s * o
  SpectralField& add_scaled(double s, const SpectralField& o);

  friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
  friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
  friend SpectralField operator*(double s, SpectralField a) { return a *= s; }
  friend SpectralField operator*(SpectralField a, double s) { return a *= s; }
  friend SpectralField operator-(SpectralField a) { return a *= -1.0; }

 private:
  BasisPtr basis_;
  std::vector<double> c_;
};

/// Throws InvalidArgument unless both fields live on the same basis object.
void require_same_basis(const SpectralField& a, const SpectralField& b, const char* where);

double inner(const SpectralField& a, const SpectralField& b);
double norm_sq(const SpectralField& a);
double max_abs(const SpectralField& a);

/// Velocity of the field at the physical point (x, y) of the unit torus.
std::array<double, 2> evaluate(const SpectralField& f, double x, double y);

/**
 * General (not necessarily divergence-free) real vector field over the same
 * truncation, including the mean. Coefficients refer to the orthonormal
 * system {unit constants, sqrt(2) cos(2 pi k.x) e_i, sqrt(2) sin(2 pi k.x) e_i}
 * with k in the half-lattice and e_i the Cartesian unit vectors.
 */
struct RawVectorField {
  BasisPtr basis;
  std::array<double, 2> mean{0.0, 0.0};
  std::vector<std::array<double, 2>> cos_part;  ///< per wavevector
  std::vector<std::array<double, 2>> sin_part;  ///< per wavevector

  explicit RawVectorField(BasisPtr b);
};

double inner(const RawVectorField& a, const RawVectorField& b);
RawVectorField to_raw(const SpectralField& f);
/// Largest absolute Fourier coefficient of the divergence.
double max_divergence(const RawVectorField& f);

/// Orthogonal Leray projection onto the divergence-free zero-mean subspace.
SpectralField leray_project(const RawVectorField& raw);

/// b(u, v) = -Pi (u . grad) v, truncated back to the basis; alias-free.
SpectralField nonlinear_b(const SpectralField& u, const SpectralField& v);

/// The field w with <b(x, y), z> = <x, w> for every x in the truncated space.
SpectralField b_adjoint_first(const SpectralField& y, const SpectralField& z);

}  // namespace msf
