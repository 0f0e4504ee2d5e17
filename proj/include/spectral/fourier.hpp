#pragma once

#include "spectral/tensor.hpp"

namespace spectral {

// Layout of a spectrum: Natural has the DC bin at index (0,0); Shifted has it
// rolled to (floor(M/2), floor(N/2)).
enum class Frame { Natural, Shifted };

struct FrequencyMap {
    ComplexTensor spectrum;
    Frame frame = Frame::Natural;
};

// Unitary 2D DFT, normalization 1/sqrt(MN) on both directions. Tensors of
// rank > 2 are transformed per trailing 2D slice.
FrequencyMap dft2(const RealTensor& x);
FrequencyMap dft2(const ComplexTensor& x);
ComplexTensor idft2(const FrequencyMap& y);

RealTensor real_part(const ComplexTensor& t);
double max_abs_imag(const ComplexTensor& t);

// Circular roll by (floor(M/2), floor(N/2)) that moves the DC bin to the
// center; ifftshift undoes it for both parities.
FrequencyMap fftshift(const FrequencyMap& y);
FrequencyMap ifftshift(const FrequencyMap& y);

// Orthogonal projection onto the conjugate-symmetric subspace,
// P(y)_{mn} = (y_{mn} + conj(y_{-m,-n})) / 2. Self-paired bins (DC and
// Nyquist rows/columns at even sizes) keep only their real part, so the
// inverse transform of the result is real.
FrequencyMap hermitian_project(const FrequencyMap& y);
ComplexTensor hermitian_project(const ComplexTensor& y);  // Natural-frame data

bool is_conjugate_symmetric(const FrequencyMap& y, double tol);

enum class ConvPath { FFT, Direct };

// Circular (wrap-around) convolution of equal-shape 2D maps. The FFT path
// evaluates sqrt(MN) * idft2(dft2(x) . dft2(f)), the sqrt(MN) compensating
// the unitary normalization; Direct is the plain double loop.
RealTensor circular_conv(const RealTensor& x, const RealTensor& f, ConvPath path);

namespace detail {

// Unnormalized forward/inverse FFT of length n (any n >= 1); inverse carries
// no 1/n factor. Radix-2 in place for powers of two, Bluestein otherwise.
void fft_1d(cdouble* data, int n, bool inverse);

// In-place unnormalized transform of each trailing 2D slice.
void fft2_inplace(ComplexTensor& t, bool inverse);

}  // namespace detail

}  // namespace spectral
