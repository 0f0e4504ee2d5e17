#include "spectral/serialize.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

static_assert(std::endian::native == std::endian::little,
              "SPFB writer assumes a little-endian host");

namespace spectral {

namespace {

constexpr char kMagic[4] = {'S', 'P', 'F', 'B'};

void write_u32(std::ostream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint32_t read_u32(std::istream& in) {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) throw std::runtime_error("SPFB: truncated header");
    return v;
}

void write_header(std::ostream& out, std::uint32_t dtype, const Shape& shape) {
    out.write(kMagic, 4);
    write_u32(out, kSpfbVersion);
    write_u32(out, dtype);
    write_u32(out, static_cast<std::uint32_t>(shape.rank()));
    for (int d : shape.dims()) write_u32(out, static_cast<std::uint32_t>(d));
}

Shape read_header(std::istream& in, std::uint32_t expected_dtype) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) throw std::runtime_error("SPFB: bad magic");
    const std::uint32_t version = read_u32(in);
    if (version != kSpfbVersion)
        throw std::runtime_error("SPFB: unsupported version " + std::to_string(version));
    const std::uint32_t dtype = read_u32(in);
    if (dtype != expected_dtype)
        throw std::runtime_error("SPFB: dtype " + std::to_string(dtype) + ", expected " +
                                 std::to_string(expected_dtype));
    const std::uint32_t rank = read_u32(in);
    if (rank == 0 || rank > 16) throw std::runtime_error("SPFB: implausible rank");
    std::vector<int> dims(rank);
    for (auto& d : dims) d = static_cast<int>(read_u32(in));
    return Shape(dims);
}

void read_doubles(std::istream& in, double* dst, std::size_t n) {
    in.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) throw std::runtime_error("SPFB: truncated payload");
}

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    return f;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for reading: " + path);
    return f;
}

}  // namespace

void write_spfb(std::ostream& out, const RealTensor& t) {
    write_header(out, 0, t.shape());
    out.write(reinterpret_cast<const char*>(t.data()),
              static_cast<std::streamsize>(t.size() * sizeof(double)));
}

void write_spfb(std::ostream& out, const ComplexTensor& t) {
    write_header(out, 1, t.shape());
    out.write(reinterpret_cast<const char*>(t.data()),
              static_cast<std::streamsize>(t.size() * 2 * sizeof(double)));
}

RealTensor read_spfb_real(std::istream& in) {
    RealTensor t(read_header(in, 0));
    read_doubles(in, t.data(), t.size());
    return t;
}

ComplexTensor read_spfb_complex(std::istream& in) {
    ComplexTensor t(read_header(in, 1));
    read_doubles(in, reinterpret_cast<double*>(t.data()), t.size() * 2);
    return t;
}

void save_filter_bank(const std::string& path, const SpatialFilterBank& bank) {
    auto f = open_out(path);
    write_spfb(f, bank.filters);
    write_spfb(f, bank.bias);
}

void save_filter_bank(const std::string& path, const SpectralFilterBank& bank) {
    auto f = open_out(path);
    write_spfb(f, bank.params);
    write_spfb(f, bank.bias);
}

SpatialFilterBank load_spatial_filter_bank(const std::string& path) {
    auto f = open_in(path);
    SpatialFilterBank bank;
    bank.filters = read_spfb_real(f);
    bank.bias = read_spfb_real(f);
    return bank;
}

SpectralFilterBank load_spectral_filter_bank(const std::string& path) {
    auto f = open_in(path);
    SpectralFilterBank bank;
    bank.params = read_spfb_complex(f);
    bank.bias = read_spfb_real(f);
    return bank;
}

}  // namespace spectral
