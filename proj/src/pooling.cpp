#include "spectral/pooling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "spectral/parallel.hpp"

namespace spectral {

namespace {

// Centered H x W keep-window, same offset convention as centered_crop.
RealTensor window_mask(int full_h, int full_w, int keep_h, int keep_w) {
    const int r0 = full_h / 2 - keep_h / 2, c0 = full_w / 2 - keep_w / 2;
    RealTensor mask(Shape({full_h, full_w}));
    for (int r = r0; r < r0 + keep_h; ++r)
        for (int c = c0; c < c0 + keep_w; ++c) mask(r, c) = 1.0;
    return mask;
}

void apply_mask_per_plane(ComplexTensor& t, const RealTensor& mask) {
    const std::size_t plane = mask.size();
    const std::size_t planes = t.shape().planes();
    for (std::size_t p = 0; p < planes; ++p) {
        cdouble* base = t.data() + p * plane;
        for (std::size_t i = 0; i < plane; ++i) base[i] *= mask[i];
    }
}

void scale_in_place(ComplexTensor& t, double s) {
    if (s == 1.0) return;
    for (auto& v : t.storage()) v *= s;
}

}  // namespace

namespace {

// The chain shift -> centered crop -> unshift is a pure index map from the
// M x N natural-frame spectrum to the H x W one. source_index[k] gives the
// flat input bin feeding output bin k; weight[k] carries the dropout mask
// (read in the shifted frame) and the scale factor.
struct CropPlan {
    std::vector<int> source_index;  // H*W entries
    std::vector<double> weight;
};

CropPlan make_crop_plan(int M, int N, int H, int W, const RealTensor& mask, double scale) {
    CropPlan plan;
    plan.source_index.resize(static_cast<std::size_t>(H) * W);
    plan.weight.resize(static_cast<std::size_t>(H) * W);
    const int r0 = M / 2 - H / 2, c0 = N / 2 - W / 2;
    for (int i = 0; i < H; ++i)
        for (int j = 0; j < W; ++j) {
            const int si = (i + H / 2) % H, sj = (j + W / 2) % W;  // shifted output bin
            const int in_sr = r0 + si, in_sc = c0 + sj;            // shifted input bin
            const int in_r = (in_sr + M - M / 2) % M, in_c = (in_sc + N - N / 2) % N;
            const std::size_t k = static_cast<std::size_t>(i) * W + j;
            plan.source_index[k] = in_r * N + in_c;
            plan.weight[k] = (mask.size() > 0 ? mask(si, sj) : 1.0) * scale;
        }
    return plan;
}

void fft2_plane(cdouble* plane, int rows, int cols, bool inverse, std::vector<cdouble>& col_buf) {
    if (!inverse) {
        for (int r = 0; r < rows; ++r) detail::fft_1d(plane + static_cast<std::size_t>(r) * cols, cols, false);
    } else {
        for (int r = 0; r < rows; ++r) detail::fft_1d(plane + static_cast<std::size_t>(r) * cols, cols, true);
    }
    col_buf.resize(static_cast<std::size_t>(rows));
    for (int c = 0; c < cols; ++c) {
        for (int r = 0; r < rows; ++r) col_buf[static_cast<std::size_t>(r)] = plane[static_cast<std::size_t>(r) * cols + c];
        detail::fft_1d(col_buf.data(), rows, inverse);
        for (int r = 0; r < rows; ++r) plane[static_cast<std::size_t>(r) * cols + c] = col_buf[static_cast<std::size_t>(r)];
    }
}

}  // namespace

std::pair<RealTensor, PoolCache> spectral_pool_forward(const RealTensor& x,
                                                       const SpectralPoolConfig& cfg,
                                                       std::mt19937_64* rng) {
    const int M = x.shape().rows(), N = x.shape().cols();
    const int H = cfg.out_h, W = cfg.out_w;
    if (H < 1 || W < 1 || H > M || W > N)
        throw std::invalid_argument("spectral_pool_forward: output " + std::to_string(H) + "x" +
                                    std::to_string(W) + " invalid for input " + x.shape().str());

    PoolCache cache;
    cache.in_shape = x.shape();
    cache.out_h = H;
    cache.out_w = W;
    cache.scale = cfg.scale_mode == ScaleMode::MeanPreserving
                      ? std::sqrt(static_cast<double>(H) * W / (static_cast<double>(M) * N))
                      : 1.0;
    if (cfg.dropout && rng != nullptr) {
        const int radius = sample_truncation_radius(*cfg.dropout, std::max(H, W), *rng);
        cache.mask = frequency_dropout_mask(H, W, radius);
    }
    const CropPlan plan = make_crop_plan(M, N, H, W, cache.mask, cache.scale);
    // unitary normalization of dft2 then idft2
    const double norm = 1.0 / std::sqrt(static_cast<double>(M) * N * H * W);

    std::vector<int> dims = x.shape().dims();
    dims[dims.size() - 2] = H;
    dims[dims.size() - 1] = W;
    RealTensor out{Shape(dims)};
    const std::size_t planes = x.shape().planes();
    const std::size_t in_plane = static_cast<std::size_t>(M) * N;
    const std::size_t out_plane = static_cast<std::size_t>(H) * W;
    std::vector<double> residues(planes, 0.0);

    auto run_plane = [&](std::size_t p) {
        thread_local std::vector<cdouble> big, small, sym, col;
        big.resize(in_plane);
        small.resize(out_plane);
        sym.resize(out_plane);
        const double* src = x.data() + p * in_plane;
        for (std::size_t i = 0; i < in_plane; ++i) big[i] = cdouble{src[i], 0.0};
        fft2_plane(big.data(), M, N, false, col);
        for (std::size_t k = 0; k < out_plane; ++k)
            small[k] = big[static_cast<std::size_t>(plan.source_index[k])] * plan.weight[k];
        for (int i = 0; i < H; ++i)
            for (int j = 0; j < W; ++j) {
                const std::size_t k = static_cast<std::size_t>(i) * W + j;
                const std::size_t pk = static_cast<std::size_t>((H - i) % H) * W + (W - j) % W;
                sym[k] = 0.5 * (small[k] + std::conj(small[pk]));
            }
        fft2_plane(sym.data(), H, W, true, col);
        double* dst = out.data() + p * out_plane;
        double residue = 0.0;
        for (std::size_t k = 0; k < out_plane; ++k) {
            dst[k] = sym[k].real() * norm;
            residue = std::max(residue, std::abs(sym[k].imag()) * norm);
        }
        residues[p] = residue;
    };
    if (planes >= 4)
        detail::parallel_for(planes, run_plane);
    else
        for (std::size_t p = 0; p < planes; ++p) run_plane(p);

    cache.imag_residue = *std::max_element(residues.begin(), residues.end());
    return {std::move(out), std::move(cache)};
}

RealTensor spectral_pool_backward(const RealTensor& g, const PoolCache& cache) {
    const int H = cache.out_h, W = cache.out_w;
    if (g.shape().rows() != H || g.shape().cols() != W ||
        g.shape().planes() != cache.in_shape.planes())
        throw std::invalid_argument("spectral_pool_backward: gradient shape " + g.shape().str() +
                                    " does not match cache output " + std::to_string(H) + "x" +
                                    std::to_string(W));
    const int M = cache.in_shape.rows(), N = cache.in_shape.cols();
    const CropPlan plan = make_crop_plan(M, N, H, W, cache.mask, cache.scale);
    const double norm = 1.0 / std::sqrt(static_cast<double>(M) * N * H * W);

    RealTensor out(cache.in_shape);
    const std::size_t planes = cache.in_shape.planes();
    const std::size_t in_plane = static_cast<std::size_t>(M) * N;
    const std::size_t out_plane = static_cast<std::size_t>(H) * W;

    auto run_plane = [&](std::size_t p) {
        thread_local std::vector<cdouble> big, small, sym, col;
        big.assign(in_plane, cdouble{0.0, 0.0});
        small.resize(out_plane);
        sym.resize(out_plane);
        const double* src = g.data() + p * out_plane;
        for (std::size_t k = 0; k < out_plane; ++k) small[k] = cdouble{src[k], 0.0};
        fft2_plane(small.data(), H, W, false, col);
        for (int i = 0; i < H; ++i)
            for (int j = 0; j < W; ++j) {
                const std::size_t k = static_cast<std::size_t>(i) * W + j;
                const std::size_t pk = static_cast<std::size_t>((H - i) % H) * W + (W - j) % W;
                sym[k] = 0.5 * (small[k] + std::conj(small[pk]));
            }
        for (std::size_t k = 0; k < out_plane; ++k)
            big[static_cast<std::size_t>(plan.source_index[k])] += sym[k] * plan.weight[k];
        fft2_plane(big.data(), M, N, true, col);
        double* dst = out.data() + p * in_plane;
        for (std::size_t i = 0; i < in_plane; ++i) dst[i] = big[i].real() * norm;
    };
    if (planes >= 4)
        detail::parallel_for(planes, run_plane);
    else
        for (std::size_t p = 0; p < planes; ++p) run_plane(p);
    return out;
}

RealTensor frequency_dropout_mask(int out_h, int out_w, int radius) {
    if (radius < 1) throw std::invalid_argument("frequency_dropout_mask: radius must be >= 1");
    const int r0 = out_h / 2 - radius / 2, c0 = out_w / 2 - radius / 2;
    RealTensor mask(Shape({out_h, out_w}));
    for (int r = std::max(0, r0); r < std::min(out_h, r0 + radius); ++r)
        for (int c = std::max(0, c0); c < std::min(out_w, c0 + radius); ++c) mask(r, c) = 1.0;
    return mask;
}

int sample_truncation_radius(const FrequencyDropoutSpec& spec, int map_size, std::mt19937_64& rng) {
    const double c_m = spec.alpha + (static_cast<double>(spec.layer_index) / spec.total_layers) *
                                        (spec.beta - spec.alpha);
    const int lo = std::max(1, static_cast<int>(std::floor(c_m * map_size)));
    const int hi = std::max(lo, map_size);
    std::uniform_int_distribution<int> dist(lo, hi);
    return dist(rng);
}

RealTensor spectral_approximate(const RealTensor& x, int keep_h, int keep_w) {
    const int M = x.shape().rows(), N = x.shape().cols();
    if (keep_h < 1 || keep_w < 1 || keep_h > M || keep_w > N)
        throw std::invalid_argument("spectral_approximate: window " + std::to_string(keep_h) + "x" +
                                    std::to_string(keep_w) + " invalid for input " + x.shape().str());
    FrequencyMap y = fftshift(dft2(x));
    apply_mask_per_plane(y.spectrum, window_mask(M, N, keep_h, keep_w));
    return real_part(idft2(hermitian_project(ifftshift(y))));
}

std::pair<RealTensor, MaxPoolCache> max_pool_forward(const RealTensor& x, int window, int stride) {
    const int M = x.shape().rows(), N = x.shape().cols();
    if (window < 1 || stride < 1)
        throw std::invalid_argument("max_pool_forward: window and stride must be >= 1");
    if (window > M || window > N)
        throw std::invalid_argument("max_pool_forward: window " + std::to_string(window) +
                                    " larger than input " + x.shape().str());
    const int out_h = (M - window) / stride + 1;
    const int out_w = (N - window) / stride + 1;

    MaxPoolCache cache;
    cache.in_shape = x.shape();
    cache.window = window;
    cache.stride = stride;

    std::vector<int> dims = x.shape().dims();
    dims[dims.size() - 2] = out_h;
    dims[dims.size() - 1] = out_w;
    RealTensor out{Shape(dims)};
    cache.argmax.resize(out.size());

    const std::size_t planes = x.shape().planes();
    for (std::size_t p = 0; p < planes; ++p) {
        const double* src = x.data() + p * static_cast<std::size_t>(M) * N;
        double* dst = out.data() + p * static_cast<std::size_t>(out_h) * out_w;
        int* amax = cache.argmax.data() + p * static_cast<std::size_t>(out_h) * out_w;
        for (int r = 0; r < out_h; ++r)
            for (int c = 0; c < out_w; ++c) {
                double best = -std::numeric_limits<double>::infinity();
                int best_idx = -1;
                for (int u = 0; u < window; ++u)
                    for (int v = 0; v < window; ++v) {
                        const int idx = (r * stride + u) * N + (c * stride + v);
                        if (src[idx] > best) {
                            best = src[idx];
                            best_idx = idx;
                        }
                    }
                dst[r * out_w + c] = best;
                amax[r * out_w + c] = best_idx;
            }
    }
    return {std::move(out), std::move(cache)};
}

RealTensor max_pool_backward(const RealTensor& g, const MaxPoolCache& cache) {
    if (g.size() != cache.argmax.size())
        throw std::invalid_argument("max_pool_backward: gradient shape " + g.shape().str() +
                                    " does not match cache");
    RealTensor out(cache.in_shape);
    const int M = cache.in_shape.rows(), N = cache.in_shape.cols();
    const std::size_t plane_out = g.size() / cache.in_shape.planes();
    for (std::size_t p = 0; p < cache.in_shape.planes(); ++p) {
        double* dst = out.data() + p * static_cast<std::size_t>(M) * N;
        for (std::size_t i = 0; i < plane_out; ++i)
            dst[cache.argmax[p * plane_out + i]] += g[p * plane_out + i];
    }
    return out;
}

RealTensor max_pool_reconstruct(const RealTensor& pooled, const MaxPoolCache& cache) {
    if (pooled.size() != cache.argmax.size())
        throw std::invalid_argument("max_pool_reconstruct: shape does not match cache");
    RealTensor out(cache.in_shape);
    const int M = cache.in_shape.rows(), N = cache.in_shape.cols();
    const int out_h = (M - cache.window) / cache.stride + 1;
    const int out_w = (N - cache.window) / cache.stride + 1;
    for (std::size_t p = 0; p < cache.in_shape.planes(); ++p) {
        double* dst = out.data() + p * static_cast<std::size_t>(M) * N;
        const double* src = pooled.data() + p * static_cast<std::size_t>(out_h) * out_w;
        for (int r = 0; r < out_h; ++r)
            for (int c = 0; c < out_w; ++c)
                for (int u = 0; u < cache.window; ++u)
                    for (int v = 0; v < cache.window; ++v)
                        dst[(r * cache.stride + u) * N + (c * cache.stride + v)] = src[r * out_w + c];
    }
    return out;
}

}  // namespace spectral
