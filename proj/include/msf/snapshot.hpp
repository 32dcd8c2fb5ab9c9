#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "msf/spectral.hpp"

namespace msf {

/**
 * Binary field snapshot:
 *   "MSF1" | version u32 | K u32 | mode count u32 | coefficients f64...
 * All integers and doubles are little-endian; coefficients follow basis order.
 */
inline constexpr std::uint32_t kSnapshotVersion = 1;

std::vector<unsigned char> encode_snapshot(const SpectralField& f);
/// Decodes onto `basis`; throws InvalidArgument on a malformed or mismatched buffer.
SpectralField decode_snapshot(const std::vector<unsigned char>& bytes, const BasisPtr& basis);

void write_snapshot(const std::string& path, const SpectralField& f);
SpectralField read_snapshot(const std::string& path, const BasisPtr& basis);

}  // namespace msf
