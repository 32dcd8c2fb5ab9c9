#include "msf/snapshot.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "msf/error.hpp"

namespace msf {

namespace {

constexpr unsigned char kMagic[4] = {'M', 'S', 'F', '1'};

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<unsigned char>(v >> (8 * b)));
}

void put_u64(std::vector<unsigned char>& out, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<unsigned char>(v >> (8 * b)));
}

std::uint32_t get_u32(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(p[b]) << (8 * b);
  return v;
}

std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(p[b]) << (8 * b);
  return v;
}

}  // namespace

std::vector<unsigned char> encode_snapshot(const SpectralField& f) {
  if (f.empty()) throw InvalidArgument("cannot snapshot an empty field");
  std::vector<unsigned char> out(kMagic, kMagic + 4);
  put_u32(out, kSnapshotVersion);
  put_u32(out, static_cast<std::uint32_t>(f.basis().truncation()));
  put_u32(out, static_cast<std::uint32_t>(f.size()));
  for (double c : f.coeffs()) put_u64(out, std::bit_cast<std::uint64_t>(c));
  return out;
}

SpectralField decode_snapshot(const std::vector<unsigned char>& bytes, const BasisPtr& basis) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw InvalidArgument("snapshot: missing MSF1 header");
  const auto version = get_u32(bytes.data() + 4);
  if (version != kSnapshotVersion) throw InvalidArgument("snapshot: unsupported version " + std::to_string(version));
  const auto K = get_u32(bytes.data() + 8);
  const auto n = get_u32(bytes.data() + 12);
  if (static_cast<int>(K) != basis->truncation())
    throw InvalidArgument("snapshot: truncation K=" + std::to_string(K) + " does not match the configured K=" +
                          std::to_string(basis->truncation()));
  if (n != basis->size()) throw InvalidArgument("snapshot: mode count does not match the basis");
  if (bytes.size() != 16 + 8 * static_cast<std::size_t>(n)) throw InvalidArgument("snapshot: truncated payload");
  std::vector<double> c(n);
  for (std::size_t i = 0; i < n; ++i) c[i] = std::bit_cast<double>(get_u64(bytes.data() + 16 + 8 * i));
  return SpectralField(basis, std::move(c));
}

void write_snapshot(const std::string& path, const SpectralField& f) {
  const auto bytes = encode_snapshot(f);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidArgument("cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw InvalidArgument("failed writing '" + path + "'");
}

SpectralField read_snapshot(const std::string& path, const BasisPtr& basis) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open snapshot '" + path + "'");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_snapshot(bytes, basis);
}

}  // namespace msf
