#pragma once

#include <iosfwd>
#include <string>

#include "spectral/conv.hpp"
#include "spectral/tensor.hpp"

namespace spectral {

// SPFB flat binary container, one record per tensor:
//   magic "SPFB" | version u32 | dtype u32 (0 real, 1 complex) |
//   rank u32 | dims u32[rank] | payload f64 little-endian
// Complex payloads are interleaved (re, im).
inline constexpr std::uint32_t kSpfbVersion = 1;

void write_spfb(std::ostream& out, const RealTensor& t);
void write_spfb(std::ostream& out, const ComplexTensor& t);
RealTensor read_spfb_real(std::istream& in);
ComplexTensor read_spfb_complex(std::istream& in);

// A filter bank file is two consecutive records: filters then bias.
void save_filter_bank(const std::string& path, const SpatialFilterBank& bank);
void save_filter_bank(const std::string& path, const SpectralFilterBank& bank);
SpatialFilterBank load_spatial_filter_bank(const std::string& path);
SpectralFilterBank load_spectral_filter_bank(const std::string& path);

}  // namespace spectral
