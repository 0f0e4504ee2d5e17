#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "spectral/fourier.hpp"
#include "spectral/tensor.hpp"

namespace spectral {

struct Dataset {
    RealTensor images;  // [n, channels, size, size], values in [0, 1] after load
    std::vector<int> labels;
    std::string name;
    int classes = 10;

    int size() const { return images.shape().rank() ? images.shape().dim(0) : 0; }
};

// CIFAR-10 binary batches: 3073-byte records, one label byte (0-9) followed
// by 3072 pixel bytes (1024 R, 1024 G, 1024 B, row-major 32x32).
Dataset load_cifar10_binary(const std::vector<std::string>& paths);

// Hermitian-symmetric random spectrum with amplitude 1/(r+1)^exponent, where
// r is the Euclidean distance from DC in the shifted frame; phases are
// uniform with conjugate pairing, self-paired bins get a random sign.
FrequencyMap power_law_spectrum(int size, double exponent, std::mt19937_64& rng);

// Unlabeled natural-image stand-in corpus: three independent power-law
// channels per image, min-max normalized to [0, 1].
Dataset synth_power_law_images(int n, int size, double exponent, std::uint64_t seed);

// Labeled synthetic corpus: power-law noise whose spectral power is
// concentrated in an orientation band, one band angle per class. Used where
// a classification task is needed and no real dataset is on disk; band width
// and the isotropic floor tune the difficulty.
Dataset synth_oriented_textures(int n, int size, int classes, double noise_exponent,
                                std::uint64_t seed, double band_deg = 15.0,
                                double iso_mix = 1.0);

struct AugmentSpec {
    int max_shift = 0;
    bool hflip = false;
    std::uint64_t seed = 0;
};

// Per image: integer shift drawn uniformly from [-max_shift, max_shift]^2
// with zero padding, then a horizontal flip with probability 1/2 when
// enabled. Consumes rng in a fixed order, so results are seed-deterministic.
RealTensor augment(const RealTensor& batch, const AugmentSpec& spec, std::mt19937_64& rng);

struct ChannelStats {
    std::vector<double> mean;
    std::vector<double> stddev;
};

// Standardizes every split with statistics computed from the training split.
ChannelStats normalize(Dataset& train, Dataset* eval = nullptr);

// 8-bit binary PGM (P5); values are min-max scaled per image and clamped.
void write_pgm(const RealTensor& image, const std::string& path);
RealTensor read_pgm(const std::string& path);

std::string csv_num(double v);
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

}  // namespace spectral
