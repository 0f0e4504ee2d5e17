#include "spectral/conv.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace spectral {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;

template <typename T>
void check_bank(const Tensor<T>& filters, const RealTensor& bias, const char* who) {
    if (filters.shape().rank() != 4)
        throw std::invalid_argument(std::string(who) + ": filters must be [out_ch, in_ch, H_f, W_f]");
    if (bias.shape().rank() != 1 || bias.shape().dim(0) != filters.shape().dim(0))
        throw std::invalid_argument(std::string(who) + ": bias must be [out_ch]");
}

// Gather the circular im2col matrix: rows (ic, u, v), columns (m, n).
void im2col_circular(const double* x, int in_ch, int M, int N, int Hf, int Wf, double* col) {
    const int cy = Hf / 2, cx = Wf / 2;
    const std::size_t plane = static_cast<std::size_t>(M) * N;
    std::size_t row = 0;
    for (int ic = 0; ic < in_ch; ++ic)
        for (int u = 0; u < Hf; ++u)
            for (int v = 0; v < Wf; ++v, ++row) {
                const double* src = x + ic * plane;
                double* dst = col + row * plane;
                const int du = u - cy, dv = v - cx;
                for (int m = 0; m < M; ++m) {
                    const int mm = (m + du % M + M) % M;
                    const double* srow = src + static_cast<std::size_t>(mm) * N;
                    const int base = (dv % N + N) % N;
                    double* drow = dst + static_cast<std::size_t>(m) * N;
                    // circular row copy split at the wrap point
                    const int first = N - base;
                    for (int n = 0; n < first; ++n) drow[n] = srow[base + n];
                    for (int n = first; n < N; ++n) drow[n] = srow[n - first];
                }
            }
}

// Scatter-add the adjoint of im2col.
void col2im_circular(const double* col, int in_ch, int M, int N, int Hf, int Wf, double* x) {
    const int cy = Hf / 2, cx = Wf / 2;
    const std::size_t plane = static_cast<std::size_t>(M) * N;
    std::size_t row = 0;
    for (int ic = 0; ic < in_ch; ++ic)
        for (int u = 0; u < Hf; ++u)
            for (int v = 0; v < Wf; ++v, ++row) {
                double* dst = x + ic * plane;
                const double* src = col + row * plane;
                const int du = u - cy, dv = v - cx;
                for (int m = 0; m < M; ++m) {
                    const int mm = (m + du % M + M) % M;
                    double* drow = dst + static_cast<std::size_t>(mm) * N;
                    const int base = (dv % N + N) % N;
                    const double* srow = src + static_cast<std::size_t>(m) * N;
                    const int first = N - base;
                    for (int n = 0; n < first; ++n) drow[base + n] += srow[n];
                    for (int n = first; n < N; ++n) drow[n - first] += srow[n];
                }
            }
}

// Zero-embed one filter slice into an M x N canvas with its center tap at the
// origin, then transform (unnormalized).
ComplexTensor filter_spectrum(const double* f, int Hf, int Wf, int M, int N) {
    const int cy = Hf / 2, cx = Wf / 2;
    ComplexTensor canvas(Shape({M, N}));
    for (int u = 0; u < Hf; ++u)
        for (int v = 0; v < Wf; ++v) {
            const int r = ((u - cy) % M + M) % M;
            const int c = ((v - cx) % N + N) % N;
            canvas(r, c) = cdouble{f[u * Wf + v], 0.0};
        }
    detail::fft2_inplace(canvas, false);
    return canvas;
}

ComplexTensor plane_spectrum(const double* x, int M, int N) {
    ComplexTensor t(Shape({M, N}));
    for (std::size_t i = 0; i < static_cast<std::size_t>(M) * N; ++i) t[i] = cdouble{x[i], 0.0};
    detail::fft2_inplace(t, false);
    return t;
}

SparsityHistogram magnitude_histogram(const std::vector<double>& mags) {
    SparsityHistogram h;
    double peak = 0.0;
    for (double m : mags) peak = std::max(peak, m);
    if (peak == 0.0) peak = 1.0;
    for (double m : mags) {
        int bin = static_cast<int>(m / peak * 50.0);
        if (bin > 49) bin = 49;
        ++h.counts[static_cast<std::size_t>(bin)];
    }
    h.total = static_cast<int>(mags.size());
    return h;
}

}  // namespace

SpatialFilterBank materialize_filters(const SpectralFilterBank& bank) {
    check_bank(bank.params, bank.bias, "materialize_filters");
    ComplexTensor projected = hermitian_project(bank.params);
    ComplexTensor spatial = idft2(FrequencyMap{std::move(projected), Frame::Natural});
    return SpatialFilterBank{real_part(spatial), bank.bias};
}

SpectralFilterBank init_spectral_from_spatial(const SpatialFilterBank& bank) {
    check_bank(bank.filters, bank.bias, "init_spectral_from_spatial");
    return SpectralFilterBank{dft2(bank.filters).spectrum, bank.bias};
}

ComplexTensor spectral_param_gradient(const RealTensor& filter_grad) {
    return hermitian_project(dft2(filter_grad).spectrum);
}

namespace detail {

void conv_fwd_sample(const double* x, int in_ch, int M, int N, const SpatialFilterBank& bank,
                     ConvPath path, double* out) {
    const int out_ch = bank.filters.shape().dim(0);
    const int Hf = bank.filters.shape().dim(2), Wf = bank.filters.shape().dim(3);
    const std::size_t plane = static_cast<std::size_t>(M) * N;

    if (path == ConvPath::Direct) {
        const std::size_t K = static_cast<std::size_t>(in_ch) * Hf * Wf;
        std::vector<double> col(K * plane);
        im2col_circular(x, in_ch, M, N, Hf, Wf, col.data());
        ConstMapMat F(bank.filters.data(), out_ch, static_cast<Eigen::Index>(K));
        ConstMapMat C(col.data(), static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(plane));
        MapMat O(out, out_ch, static_cast<Eigen::Index>(plane));
        O.noalias() = F * C;
    } else {
        std::vector<ComplexTensor> xhat;
        xhat.reserve(static_cast<std::size_t>(in_ch));
        for (int ic = 0; ic < in_ch; ++ic) xhat.push_back(plane_spectrum(x + ic * plane, M, N));
        const double inv_mn = 1.0 / static_cast<double>(plane);
        for (int oc = 0; oc < out_ch; ++oc) {
            ComplexTensor acc(Shape({M, N}));
            for (int ic = 0; ic < in_ch; ++ic) {
                ComplexTensor khat = filter_spectrum(
                    bank.filters.data() + (static_cast<std::size_t>(oc) * in_ch + ic) *
                                              static_cast<std::size_t>(Hf) * Wf,
                    Hf, Wf, M, N);
                for (std::size_t i = 0; i < plane; ++i) acc[i] += xhat[static_cast<std::size_t>(ic)][i] * std::conj(khat[i]);
            }
            fft2_inplace(acc, true);
            for (std::size_t i = 0; i < plane; ++i) out[oc * plane + i] = acc[i].real() * inv_mn;
        }
    }
    for (int oc = 0; oc < out_ch; ++oc) {
        const double b = bank.bias[static_cast<std::size_t>(oc)];
        for (std::size_t i = 0; i < plane; ++i) out[oc * plane + i] += b;
    }
}

void conv_bwd_sample(const double* x, const double* g, int in_ch, int M, int N,
                     const SpatialFilterBank& bank, ConvPath path, double* grad_x,
                     double* grad_filters, double* grad_bias) {
    const int out_ch = bank.filters.shape().dim(0);
    const int Hf = bank.filters.shape().dim(2), Wf = bank.filters.shape().dim(3);
    const std::size_t plane = static_cast<std::size_t>(M) * N;
    const std::size_t K = static_cast<std::size_t>(in_ch) * Hf * Wf;

    if (grad_bias != nullptr)
        for (int oc = 0; oc < out_ch; ++oc) {
            double s = 0.0;
            for (std::size_t i = 0; i < plane; ++i) s += g[oc * plane + i];
            grad_bias[oc] += s;
        }

    if (path == ConvPath::Direct) {
        std::vector<double> col(K * plane);
        im2col_circular(x, in_ch, M, N, Hf, Wf, col.data());
        ConstMapMat G(g, out_ch, static_cast<Eigen::Index>(plane));
        ConstMapMat C(col.data(), static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(plane));
        if (grad_filters != nullptr) {
            MapMat GF(grad_filters, out_ch, static_cast<Eigen::Index>(K));
            GF.noalias() += G * C.transpose();
        }
        if (grad_x != nullptr) {
            std::vector<double> gcol(K * plane);
            ConstMapMat F(bank.filters.data(), out_ch, static_cast<Eigen::Index>(K));
            MapMat GC(gcol.data(), static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(plane));
            GC.noalias() = F.transpose() * G;
            col2im_circular(gcol.data(), in_ch, M, N, Hf, Wf, grad_x);
        }
    } else {
        const double inv_mn = 1.0 / static_cast<double>(plane);
        const int cy = Hf / 2, cx = Wf / 2;
        std::vector<ComplexTensor> ghat;
        ghat.reserve(static_cast<std::size_t>(out_ch));
        for (int oc = 0; oc < out_ch; ++oc) ghat.push_back(plane_spectrum(g + oc * plane, M, N));

        if (grad_x != nullptr) {
            for (int ic = 0; ic < in_ch; ++ic) {
                ComplexTensor acc(Shape({M, N}));
                for (int oc = 0; oc < out_ch; ++oc) {
                    ComplexTensor khat = filter_spectrum(
                        bank.filters.data() + (static_cast<std::size_t>(oc) * in_ch + ic) *
                                                  static_cast<std::size_t>(Hf) * Wf,
                        Hf, Wf, M, N);
                    for (std::size_t i = 0; i < plane; ++i)
                        acc[i] += ghat[static_cast<std::size_t>(oc)][i] * khat[i];
                }
                fft2_inplace(acc, true);
                for (std::size_t i = 0; i < plane; ++i) grad_x[ic * plane + i] += acc[i].real() * inv_mn;
            }
        }
        if (grad_filters != nullptr) {
            for (int ic = 0; ic < in_ch; ++ic) {
                ComplexTensor xh = plane_spectrum(x + ic * plane, M, N);
                for (int oc = 0; oc < out_ch; ++oc) {
                    ComplexTensor corr(Shape({M, N}));
                    for (std::size_t i = 0; i < plane; ++i)
                        corr[i] = xh[i] * std::conj(ghat[static_cast<std::size_t>(oc)][i]);
                    fft2_inplace(corr, true);
                    double* gf = grad_filters +
                                 (static_cast<std::size_t>(oc) * in_ch + ic) * static_cast<std::size_t>(Hf) * Wf;
                    for (int u = 0; u < Hf; ++u)
                        for (int v = 0; v < Wf; ++v) {
                            const int r = ((u - cy) % M + M) % M;
                            const int c = ((v - cx) % N + N) % N;
                            gf[u * Wf + v] += corr(r, c).real() * inv_mn;
                        }
                }
            }
        }
    }
}

}  // namespace detail

RealTensor conv_forward(const RealTensor& x, const SpatialFilterBank& bank, ConvPath path,
                        ConvCache* cache) {
    check_bank(bank.filters, bank.bias, "conv_forward");
    if (x.shape().rank() != 3 || x.shape().dim(0) != bank.filters.shape().dim(1))
        throw std::invalid_argument("conv_forward: input must be [in_ch, M, N] with in_ch " +
                                    std::to_string(bank.filters.shape().dim(1)) + ", got " +
                                    x.shape().str());
    const int M = x.shape().rows(), N = x.shape().cols();
    if (bank.filters.shape().dim(2) > M || bank.filters.shape().dim(3) > N)
        throw std::invalid_argument("conv_forward: filter " +
                                    std::to_string(bank.filters.shape().dim(2)) + "x" +
                                    std::to_string(bank.filters.shape().dim(3)) +
                                    " larger than map " + x.shape().str());
    RealTensor out(Shape({bank.filters.shape().dim(0), M, N}));
    detail::conv_fwd_sample(x.data(), x.shape().dim(0), M, N, bank, path, out.data());
    if (cache != nullptr) *cache = ConvCache{x, bank, false, path};
    return out;
}

RealTensor conv_forward(const RealTensor& x, const SpectralFilterBank& bank, ConvPath path,
                        ConvCache* cache) {
    RealTensor out = conv_forward(x, materialize_filters(bank), path, cache);
    if (cache != nullptr) cache->from_spectral = true;
    return out;
}

ConvGrads conv_backward(const RealTensor& g, const ConvCache& cache) {
    const int in_ch = cache.input.shape().dim(0);
    const int M = cache.input.shape().rows(), N = cache.input.shape().cols();
    const int out_ch = cache.bank.filters.shape().dim(0);
    if (g.shape().rank() != 3 || g.shape().dim(0) != out_ch || g.shape().rows() != M ||
        g.shape().cols() != N)
        throw std::invalid_argument("conv_backward: gradient shape " + g.shape().str() +
                                    " does not match cache");
    ConvGrads grads;
    grads.input = RealTensor(cache.input.shape());
    grads.filters = RealTensor(cache.bank.filters.shape());
    grads.bias = RealTensor(cache.bank.bias.shape());
    detail::conv_bwd_sample(cache.input.data(), g.data(), in_ch, M, N, cache.bank, cache.path,
                            grads.input.data(), grads.filters.data(), grads.bias.data());
    if (cache.from_spectral) grads.params = spectral_param_gradient(grads.filters);
    return grads;
}

SparsityHistogram sparsity_profile(const SpatialFilterBank& bank) {
    std::vector<double> mags;
    mags.reserve(bank.filters.size());
    for (double v : bank.filters.storage()) mags.push_back(std::abs(v));
    return magnitude_histogram(mags);
}

SparsityHistogram sparsity_profile(const SpectralFilterBank& bank) {
    std::vector<double> mags;
    mags.reserve(bank.params.size());
    for (const cdouble& v : bank.params.storage()) mags.push_back(std::abs(v));
    return magnitude_histogram(mags);
}

}  // namespace spectral
