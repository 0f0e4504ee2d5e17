#pragma once

#include <array>
#include <vector>

#include "spectral/fourier.hpp"
#include "spectral/tensor.hpp"

namespace spectral {

// Convolution filters held in the spatial domain: real taps plus one bias per
// output channel.
struct SpatialFilterBank {
    RealTensor filters;  // [out_ch, in_ch, H_f, W_f]
    RealTensor bias;     // [out_ch]
};

// The same filters parametrized directly in the frequency domain (Natural
// frame). The non-Hermitian component of params never reaches the model:
// materialization projects first.
struct SpectralFilterBank {
    ComplexTensor params;  // [out_ch, in_ch, H_f, W_f]
    RealTensor bias;       // [out_ch]
};

// f = Re(idft2(P(z))) per (out_ch, in_ch) slice.
SpatialFilterBank materialize_filters(const SpectralFilterBank& bank);

// z = dft2(f) per slice; materialize_filters inverts this exactly.
SpectralFilterBank init_spectral_from_spatial(const SpatialFilterBank& bank);

// Adjoint of materialization: transports a spatial filter gradient to the
// (re, im) parameter gradient, P(dft2(g)) per slice.
ComplexTensor spectral_param_gradient(const RealTensor& filter_grad);

struct ConvCache {
    RealTensor input;            // [in_ch, M, N]
    SpatialFilterBank bank;      // filters as applied (materialized if spectral)
    bool from_spectral = false;
    ConvPath path = ConvPath::FFT;
};

struct ConvGrads {
    RealTensor input;            // [in_ch, M, N]
    RealTensor filters;          // spatial-domain filter gradient
    ComplexTensor params;        // spectral parameter gradient; empty for spatial banks
    RealTensor bias;             // [out_ch]
};

// Same-size circular cross-correlation over channels plus bias. Filters are
// zero-embedded into an M x N canvas with the center tap (H_f/2, W_f/2) at
// the origin; FFT and Direct paths agree within 1e-10.
RealTensor conv_forward(const RealTensor& x, const SpatialFilterBank& bank, ConvPath path,
                        ConvCache* cache = nullptr);
RealTensor conv_forward(const RealTensor& x, const SpectralFilterBank& bank, ConvPath path,
                        ConvCache* cache = nullptr);

ConvGrads conv_backward(const RealTensor& g, const ConvCache& cache);

// Histogram of |coefficient| / max |coefficient| over a bank's filter
// parameters, 50 fixed bins on [0, 1]. An all-zero bank counts everything in
// the first bin.
struct SparsityHistogram {
    std::array<int, 50> counts{};
    int total = 0;
};
SparsityHistogram sparsity_profile(const SpatialFilterBank& bank);
SparsityHistogram sparsity_profile(const SpectralFilterBank& bank);

namespace detail {

// Per-sample kernels shared by the public API and the network layer; grad
// pointers may be null to skip that output. Filter/bias gradients accumulate.
void conv_fwd_sample(const double* x, int in_ch, int M, int N, const SpatialFilterBank& bank,
                     ConvPath path, double* out);
void conv_bwd_sample(const double* x, const double* g, int in_ch, int M, int N,
                     const SpatialFilterBank& bank, ConvPath path, double* grad_x,
                     double* grad_filters, double* grad_bias);

}  // namespace detail

}  // namespace spectral
