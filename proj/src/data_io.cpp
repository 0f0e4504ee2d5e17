#include "spectral/data_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <stdexcept>

namespace spectral {

namespace {

constexpr int kCifarSide = 32;
constexpr int kCifarChannels = 3;
constexpr std::size_t kCifarRecord = 1 + 1024 * 3;

std::vector<unsigned char> read_file_bytes(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open: " + path);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

}  // namespace

Dataset load_cifar10_binary(const std::vector<std::string>& paths) {
    std::vector<unsigned char> bytes;
    for (const auto& p : paths) {
        auto chunk = read_file_bytes(p);
        if (chunk.size() % kCifarRecord != 0)
            throw std::runtime_error(p + ": size " + std::to_string(chunk.size()) +
                                     " is not a multiple of 3073");
        bytes.insert(bytes.end(), chunk.begin(), chunk.end());
    }
    const int n = static_cast<int>(bytes.size() / kCifarRecord);
    if (n == 0) throw std::runtime_error("no CIFAR records found");

    Dataset ds;
    ds.name = "cifar10";
    ds.classes = 10;
    ds.images = RealTensor(Shape({n, kCifarChannels, kCifarSide, kCifarSide}));
    ds.labels.resize(static_cast<std::size_t>(n));
    const std::size_t image_sz = static_cast<std::size_t>(kCifarChannels) * 1024;
    for (int i = 0; i < n; ++i) {
        const unsigned char* rec = bytes.data() + static_cast<std::size_t>(i) * kCifarRecord;
        if (rec[0] > 9)
            throw std::runtime_error("record " + std::to_string(i) + ": label byte " +
                                     std::to_string(rec[0]) + " out of range");
        ds.labels[static_cast<std::size_t>(i)] = rec[0];
        double* dst = ds.images.data() + static_cast<std::size_t>(i) * image_sz;
        for (std::size_t j = 0; j < image_sz; ++j) dst[j] = rec[1 + j] / 255.0;
    }
    return ds;
}

FrequencyMap power_law_spectrum(int size, double exponent, std::mt19937_64& rng) {
    if (exponent < 0.0) throw std::invalid_argument("power_law_spectrum: exponent must be >= 0");
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    std::uniform_int_distribution<int> coin(0, 1);
    ComplexTensor y(Shape({size, size}));
    for (int r = 0; r < size; ++r)
        for (int c = 0; c < size; ++c) {
            const int pr = (size - r) % size, pc = (size - c) % size;
            if (std::make_pair(pr, pc) < std::make_pair(r, c)) continue;  // partner writes both
            const double fr = r <= size / 2 ? r : r - size;
            const double fc = c <= size / 2 ? c : c - size;
            const double amp = std::pow(std::hypot(fr, fc) + 1.0, -exponent);
            if (pr == r && pc == c) {
                y(r, c) = cdouble{coin(rng) ? amp : -amp, 0.0};
            } else {
                const double ph = phase(rng);
                y(r, c) = std::polar(amp, ph);
                y(pr, pc) = std::polar(amp, -ph);
            }
        }
    return FrequencyMap{std::move(y), Frame::Natural};
}

namespace {

// min-max normalize one [C, S, S] image to [0, 1] in place
void normalize01(double* img, std::size_t n) {
    double lo = img[0], hi = img[0];
    for (std::size_t i = 1; i < n; ++i) {
        lo = std::min(lo, img[i]);
        hi = std::max(hi, img[i]);
    }
    const double range = hi - lo;
    if (range < 1e-300) {
        for (std::size_t i = 0; i < n; ++i) img[i] = 0.5;
        return;
    }
    for (std::size_t i = 0; i < n; ++i) img[i] = (img[i] - lo) / range;
}

}  // namespace

Dataset synth_power_law_images(int n, int size, double exponent, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Dataset ds;
    ds.name = "synth";
    ds.classes = 10;
    ds.images = RealTensor(Shape({n, kCifarChannels, size, size}));
    ds.labels.assign(static_cast<std::size_t>(n), 0);
    const std::size_t plane = static_cast<std::size_t>(size) * size;
    for (int i = 0; i < n; ++i) {
        double* img = ds.images.data() + static_cast<std::size_t>(i) * kCifarChannels * plane;
        for (int ch = 0; ch < kCifarChannels; ++ch) {
            ComplexTensor field = idft2(power_law_spectrum(size, exponent, rng));
            for (std::size_t j = 0; j < plane; ++j) img[ch * plane + j] = field[j].real();
        }
        normalize01(img, kCifarChannels * plane);
    }
    return ds;
}

Dataset synth_oriented_textures(int n, int size, int classes, double noise_exponent,
                                std::uint64_t seed, double band_deg, double iso_mix) {
    if (classes < 2) throw std::invalid_argument("synth_oriented_textures: classes must be >= 2");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    std::uniform_int_distribution<int> coin(0, 1);
    const double sigma = band_deg * std::numbers::pi / 180.0;
    Dataset ds;
    ds.name = "synth_textures";
    ds.classes = classes;
    ds.images = RealTensor(Shape({n, kCifarChannels, size, size}));
    ds.labels.resize(static_cast<std::size_t>(n));
    const std::size_t plane = static_cast<std::size_t>(size) * size;

    // per-class amplitude template: power-law radial falloff times an
    // orientation band around the class angle, over an isotropic floor
    std::vector<std::vector<double>> amplitude(static_cast<std::size_t>(classes),
                                               std::vector<double>(plane));
    for (int k = 0; k < classes; ++k) {
        const double theta_k = std::numbers::pi * k / classes;
        for (int r = 0; r < size; ++r)
            for (int c = 0; c < size; ++c) {
                const double fr = r <= size / 2 ? r : r - size;
                const double fc = c <= size / 2 ? c : c - size;
                const double radial = std::pow(std::hypot(fr, fc) + 1.0, -noise_exponent);
                double orient = iso_mix;
                if (fr != 0.0 || fc != 0.0) {
                    double d = std::fmod(std::atan2(fr, fc) - theta_k, std::numbers::pi);
                    if (d < 0) d += std::numbers::pi;
                    d = std::min(d, std::numbers::pi - d);
                    orient += std::exp(-d * d / (2.0 * sigma * sigma));
                }
                amplitude[static_cast<std::size_t>(k)][static_cast<std::size_t>(r) * size + c] =
                    radial * orient;
            }
    }

    ComplexTensor spec(Shape({size, size}));
    for (int i = 0; i < n; ++i) {
        const int label = static_cast<int>(rng() % static_cast<std::uint64_t>(classes));
        ds.labels[static_cast<std::size_t>(i)] = label;
        const auto& amp = amplitude[static_cast<std::size_t>(label)];
        double* img = ds.images.data() + static_cast<std::size_t>(i) * kCifarChannels * plane;
        for (int ch = 0; ch < kCifarChannels; ++ch) {
            for (int r = 0; r < size; ++r)
                for (int c = 0; c < size; ++c) {
                    const int pr = (size - r) % size, pc = (size - c) % size;
                    if (std::make_pair(pr, pc) < std::make_pair(r, c)) continue;
                    const double a = amp[static_cast<std::size_t>(r) * size + c];
                    if (pr == r && pc == c) {
                        spec(r, c) = cdouble{coin(rng) ? a : -a, 0.0};
                    } else {
                        const double ph = phase(rng);
                        spec(r, c) = std::polar(a, ph);
                        spec(pr, pc) = std::polar(a, -ph);
                    }
                }
            ComplexTensor field = idft2(FrequencyMap{spec, Frame::Natural});
            for (std::size_t j = 0; j < plane; ++j) img[ch * plane + j] = field[j].real();
        }
        normalize01(img, kCifarChannels * plane);
    }
    return ds;
}

RealTensor augment(const RealTensor& batch, const AugmentSpec& spec, std::mt19937_64& rng) {
    if (batch.shape().rank() != 4)
        throw std::invalid_argument("augment: batch must be [n, channels, H, W]");
    const int B = batch.shape().dim(0), C = batch.shape().dim(1);
    const int H = batch.shape().dim(2), W = batch.shape().dim(3);
    std::uniform_int_distribution<int> shift(-spec.max_shift, spec.max_shift);
    std::uniform_int_distribution<int> coin(0, 1);
    RealTensor out(batch.shape());
    const std::size_t plane = static_cast<std::size_t>(H) * W;
    for (int b = 0; b < B; ++b) {
        const int dy = spec.max_shift > 0 ? shift(rng) : 0;
        const int dx = spec.max_shift > 0 ? shift(rng) : 0;
        const bool flip = spec.hflip && coin(rng) == 1;
        for (int ch = 0; ch < C; ++ch) {
            const double* src = batch.data() + (static_cast<std::size_t>(b) * C + ch) * plane;
            double* dst = out.data() + (static_cast<std::size_t>(b) * C + ch) * plane;
            for (int r = 0; r < H; ++r)
                for (int c = 0; c < W; ++c) {
                    const int sr = r - dy;
                    const int sc_pre = c - dx;
                    const int sc = flip ? W - 1 - sc_pre : sc_pre;
                    const bool in_bounds = sr >= 0 && sr < H && sc_pre >= 0 && sc_pre < W;
                    dst[static_cast<std::size_t>(r) * W + c] =
                        in_bounds ? src[static_cast<std::size_t>(sr) * W + sc] : 0.0;
                }
        }
    }
    return out;
}

ChannelStats normalize(Dataset& train, Dataset* eval) {
    const int C = train.images.shape().dim(1);
    const std::size_t n = train.images.size() / static_cast<std::size_t>(C);
    ChannelStats stats;
    stats.mean.assign(static_cast<std::size_t>(C), 0.0);
    stats.stddev.assign(static_cast<std::size_t>(C), 0.0);
    const int B = train.images.shape().dim(0);
    const std::size_t plane = train.images.size() / (static_cast<std::size_t>(B) * C);
    for (int b = 0; b < B; ++b)
        for (int ch = 0; ch < C; ++ch) {
            const double* src = train.images.data() + (static_cast<std::size_t>(b) * C + ch) * plane;
            for (std::size_t i = 0; i < plane; ++i) stats.mean[static_cast<std::size_t>(ch)] += src[i];
        }
    for (auto& m : stats.mean) m /= static_cast<double>(n);
    for (int b = 0; b < B; ++b)
        for (int ch = 0; ch < C; ++ch) {
            const double* src = train.images.data() + (static_cast<std::size_t>(b) * C + ch) * plane;
            const double m = stats.mean[static_cast<std::size_t>(ch)];
            for (std::size_t i = 0; i < plane; ++i)
                stats.stddev[static_cast<std::size_t>(ch)] += (src[i] - m) * (src[i] - m);
        }
    for (auto& s : stats.stddev) s = std::sqrt(s / static_cast<double>(n));
    for (auto& s : stats.stddev)
        if (s == 0.0) s = 1.0;

    auto apply = [&](Dataset& ds) {
        const int nb = ds.images.shape().dim(0);
        for (int b = 0; b < nb; ++b)
            for (int ch = 0; ch < C; ++ch) {
                double* dst = ds.images.data() + (static_cast<std::size_t>(b) * C + ch) * plane;
                const double m = stats.mean[static_cast<std::size_t>(ch)];
                const double s = stats.stddev[static_cast<std::size_t>(ch)];
                for (std::size_t i = 0; i < plane; ++i) dst[i] = (dst[i] - m) / s;
            }
    };
    apply(train);
    if (eval != nullptr) apply(*eval);
    return stats;
}

void write_pgm(const RealTensor& image, const std::string& path) {
    if (image.shape().rank() != 2)
        throw std::invalid_argument("write_pgm: expects a 2D image, got " + image.shape().str());
    const int H = image.shape().rows(), W = image.shape().cols();
    double lo = image[0], hi = image[0];
    for (double v : image.storage()) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double range = hi - lo;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << "P5\n" << W << " " << H << "\n255\n";
    for (double v : image.storage()) {
        const double t = range < 1e-300 ? 0.5 : (v - lo) / range;
        const int byte = std::clamp(static_cast<int>(std::lround(t * 255.0)), 0, 255);
        f.put(static_cast<char>(byte));
    }
    if (!f) throw std::runtime_error("write failed: " + path);
}

RealTensor read_pgm(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open: " + path);
    auto next_token = [&]() {
        std::string tok;
        while (f >> tok) {
            if (tok[0] == '#') {
                std::string rest;
                std::getline(f, rest);
                continue;
            }
            return tok;
        }
        throw std::runtime_error(path + ": truncated PGM header");
    };
    if (next_token() != "P5") throw std::runtime_error(path + ": not a binary PGM (P5)");
    const int W = std::stoi(next_token());
    const int H = std::stoi(next_token());
    const int maxval = std::stoi(next_token());
    if (maxval < 1 || maxval > 255) throw std::runtime_error(path + ": unsupported maxval");
    f.get();  // single whitespace after maxval
    RealTensor img(Shape({H, W}));
    std::vector<char> bytes(static_cast<std::size_t>(H) * W);
    f.read(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw std::runtime_error(path + ": truncated PGM payload");
    for (std::size_t i = 0; i < bytes.size(); ++i)
        img[i] = static_cast<unsigned char>(bytes[i]) / static_cast<double>(maxval);
    return img;
}

std::string csv_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    for (std::size_t i = 0; i < header.size(); ++i) f << (i ? "," : "") << header[i];
    f << "\n";
    for (const auto& row : rows) {
        if (row.size() != header.size())
            throw std::invalid_argument(path + ": row width " + std::to_string(row.size()) +
                                        " does not match header " + std::to_string(header.size()));
        for (std::size_t i = 0; i < row.size(); ++i) f << (i ? "," : "") << row[i];
        f << "\n";
    }
    if (!f) throw std::runtime_error("write failed: " + path);
}

}  // namespace spectral
