#pragma once

#include <optional>
#include <random>
#include <utility>

#include "spectral/fourier.hpp"
#include "spectral/tensor.hpp"

namespace spectral {

enum class ScaleMode {
    MeanPreserving,  // multiply the cropped spectrum by sqrt(HW/(MN))
    Unscaled
};

// Linear schedule of the truncation-radius lower bound across network depth:
// c_m = alpha + (m/M)(beta - alpha) for layer m of M.
struct FrequencyDropoutSpec {
    double alpha = 0.0;
    double beta = 0.0;
    int layer_index = 1;   // m, 1-indexed
    int total_layers = 1;  // M
};

struct SpectralPoolConfig {
    int out_h = 0;
    int out_w = 0;
    ScaleMode scale_mode = ScaleMode::MeanPreserving;
    std::optional<FrequencyDropoutSpec> dropout;
};

// Everything backward needs to be the exact adjoint of the forward map that
// ran: input size, applied scale, and the dropout mask actually drawn.
struct PoolCache {
    Shape in_shape;
    int out_h = 0;
    int out_w = 0;
    double scale = 1.0;
    RealTensor mask;            // shifted-frame 0/1 mask over out_h x out_w; empty if none
    double imag_residue = 0.0;  // max |imag| discarded by the final real cast
};

// Spectral pooling: transform, centered crop in the shifted frame, optional
// frequency dropout, scale, Hermitian projection, inverse transform. Accepts
// [M,N] or [C,M,N]; the dropout radius (when rng != nullptr and cfg has a
// dropout spec) is drawn once and shared across channels.
std::pair<RealTensor, PoolCache> spectral_pool_forward(const RealTensor& x,
                                                       const SpectralPoolConfig& cfg,
                                                       std::mt19937_64* rng = nullptr);

RealTensor spectral_pool_backward(const RealTensor& g, const PoolCache& cache);

// 0/1 mask with ones on the centered R x R window (shifted frame, same offset
// convention as centered_crop). R >= max(H, W) gives all ones.
RealTensor frequency_dropout_mask(int out_h, int out_w, int radius);

// R ~ Uniform{max(1, floor(c_m * H_m)), ..., H_m}.
int sample_truncation_radius(const FrequencyDropoutSpec& spec, int map_size, std::mt19937_64& rng);

// Same-size low-pass reconstruction: zero all shifted-frame bins outside the
// centered H x W window and invert. Retained parameter fraction is HW/(MN).
RealTensor spectral_approximate(const RealTensor& x, int keep_h, int keep_w);

struct MaxPoolCache {
    Shape in_shape;
    int window = 0;
    int stride = 0;
    std::vector<int> argmax;  // flat input index per output element
};

std::pair<RealTensor, MaxPoolCache> max_pool_forward(const RealTensor& x, int window, int stride);
RealTensor max_pool_backward(const RealTensor& g, const MaxPoolCache& cache);

// Replicates each pooled value over its source window (last writer wins in
// row-major order); used only for the information-preservation metric.
RealTensor max_pool_reconstruct(const RealTensor& pooled, const MaxPoolCache& cache);

}  // namespace spectral
