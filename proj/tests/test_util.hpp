#pragma once

#include <cmath>

#include "msf/rng.hpp"
#include "msf/spectral.hpp"

namespace msf::test {

/// Field with i.i.d. normal coefficients damped as 1/(1+|k|^2)^{decay/2}.
inline SpectralField random_field(const BasisPtr& basis, Rng& rng, double decay = 1.0) {
  SpectralField f(basis);
  for (std::size_t i = 0; i < f.size(); ++i)
    f[i] = rng.normal() / std::pow(1.0 + basis->mode(i).k.norm2(), 0.5 * decay);
  return f;
}

inline double max_diff(const SpectralField& a, const SpectralField& b) { return max_abs(a - b); }

}  // namespace msf::test
