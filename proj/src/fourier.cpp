#include "spectral/fourier.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <unordered_map>

#include "spectral/parallel.hpp"
#include <utility>
#include <vector>

namespace spectral {

namespace detail {
namespace {

constexpr double kPi = std::numbers::pi;
// Primes above this go through Bluestein; everything else is mixed-radix
// Cooley-Tukey with a direct DFT combine per prime factor.
constexpr int kMaxDirectPrime = 64;

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

int next_pow2(int n) {
    int m = 1;
    while (m < n) m <<= 1;
    return m;
}

int smallest_factor(int n) {
    for (int p = 2; p * p <= n; ++p)
        if (n % p == 0) return p;
    return n;
}

struct Plan {
    int n = 0;
    std::vector<cdouble> twiddle;     // exp(-2*pi*i*k/n), k < n/2 (pow2 path)
    std::vector<int> bitrev;          // pow2 path
    std::vector<cdouble> root_table;  // exp(-2*pi*i*k/n), k < n (mixed-radix path)
    // Bluestein members, used when n is a prime above kMaxDirectPrime
    int m = 0;                        // pow2 convolution length >= 2n-1
    std::vector<cdouble> chirp;       // exp(-i*pi*k^2/n) with k^2 reduced mod 2n
    std::vector<cdouble> chirp_fft;   // forward FFT of the paired chirp
};

void build_pow2(Plan& p) {
    const int n = p.n;
    p.twiddle.resize(static_cast<std::size_t>(n) / 2);
    for (int k = 0; k < n / 2; ++k)
        p.twiddle[static_cast<std::size_t>(k)] = std::polar(1.0, -2.0 * kPi * k / n);
    p.bitrev.assign(static_cast<std::size_t>(n), 0);
    for (int i = 1, j = 0; i < n; ++i) {
        int bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        p.bitrev[static_cast<std::size_t>(i)] = j;
    }
}

void fft_pow2(cdouble* a, const Plan& p) {
    const int n = p.n;
    for (int i = 0; i < n; ++i) {
        const int j = p.bitrev[static_cast<std::size_t>(i)];
        if (i < j) std::swap(a[i], a[j]);
    }
    for (int len = 2; len <= n; len <<= 1) {
        const int half = len >> 1;
        const int step = n / len;
        for (int i = 0; i < n; i += len) {
            for (int j = 0; j < half; ++j) {
                const cdouble w = p.twiddle[static_cast<std::size_t>(j) * step];
                const cdouble u = a[i + j];
                const cdouble v = a[i + j + half] * w;
                a[i + j] = u + v;
                a[i + j + half] = u - v;
            }
        }
    }
}

Plan make_plan(int n);

const Plan& plan_for(int n) {
    thread_local std::unordered_map<int, Plan> cache;
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, make_plan(n)).first;
    return it->second;
}

void fft_forward(cdouble* a, const Plan& p);

// Decimation-in-time over the smallest prime factor p of n: m-point
// sub-transforms of the p decimated subsequences, then a direct p-point DFT
// across them with twiddles taken from the root table at stride N/n.
// dst receives the result; scratch has root-length capacity.
void fft_mixed_rec(const cdouble* src, int stride, cdouble* dst, int n, int root_stride,
                   const cdouble* table, int root_n, cdouble* scratch) {
    if (n == 1) {
        dst[0] = src[0];
        return;
    }
    const int p = smallest_factor(n);
    const int m = n / p;
    if (m > 1) {
        for (int b = 0; b < p; ++b)
            fft_mixed_rec(src + static_cast<std::size_t>(b) * stride, stride * p, dst + b * m, m,
                          root_stride * p, table, root_n, scratch);
    } else {
        for (int b = 0; b < p; ++b) dst[b] = src[static_cast<std::size_t>(b) * stride];
    }
    // X[c*m + d] = sum_b w_n^{b (c*m + d)} * Y_b[d]
    for (int d = 0; d < m; ++d) {
        for (int c = 0; c < p; ++c) {
            const int k = c * m + d;
            cdouble acc = dst[d];  // b = 0 term
            long long idx = 0;
            for (int b = 1; b < p; ++b) {
                idx += k;
                if (idx >= n) idx -= n;  // k < n and idx < n keeps this a single subtraction
                acc += table[idx * root_stride] * dst[b * m + d];
            }
            scratch[k] = acc;
        }
    }
    std::copy(scratch, scratch + n, dst);
}

void fft_mixed(cdouble* a, const Plan& p) {
    thread_local std::vector<cdouble> dst, scratch;
    if (static_cast<int>(dst.size()) < p.n) {
        dst.resize(static_cast<std::size_t>(p.n));
        scratch.resize(static_cast<std::size_t>(p.n));
    }
    fft_mixed_rec(a, 1, dst.data(), p.n, 1, p.root_table.data(), p.n, scratch.data());
    std::copy(dst.data(), dst.data() + p.n, a);
}

Plan make_plan(int n) {
    Plan p;
    p.n = n;
    if (is_pow2(n)) {
        build_pow2(p);
        return p;
    }
    if (smallest_factor(n) == n && n > kMaxDirectPrime) {
        // Bluestein: reduce k^2 mod 2n before the angle to keep trig
        // arguments small at large n.
        p.m = next_pow2(2 * n - 1);
        p.chirp.resize(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k) {
            const long long k2 = (static_cast<long long>(k) * k) % (2LL * n);
            p.chirp[static_cast<std::size_t>(k)] = std::polar(1.0, -kPi * static_cast<double>(k2) / n);
        }
        std::vector<cdouble> b(static_cast<std::size_t>(p.m), cdouble{0.0, 0.0});
        b[0] = std::conj(p.chirp[0]);
        for (int k = 1; k < n; ++k) {
            b[static_cast<std::size_t>(k)] = std::conj(p.chirp[static_cast<std::size_t>(k)]);
            b[static_cast<std::size_t>(p.m - k)] = std::conj(p.chirp[static_cast<std::size_t>(k)]);
        }
        const Plan& inner = plan_for(p.m);
        fft_forward(b.data(), inner);
        p.chirp_fft = std::move(b);
        return p;
    }
    p.root_table.resize(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k)
        p.root_table[static_cast<std::size_t>(k)] = std::polar(1.0, -2.0 * kPi * k / n);
    return p;
}

void fft_bluestein(cdouble* a, const Plan& p) {
    const int n = p.n, m = p.m;
    std::vector<cdouble> buf(static_cast<std::size_t>(m), cdouble{0.0, 0.0});
    for (int k = 0; k < n; ++k) buf[static_cast<std::size_t>(k)] = a[k] * p.chirp[static_cast<std::size_t>(k)];
    const Plan& inner = plan_for(m);
    fft_forward(buf.data(), inner);
    for (int k = 0; k < m; ++k) buf[static_cast<std::size_t>(k)] *= p.chirp_fft[static_cast<std::size_t>(k)];
    // Unnormalized inverse via conjugation.
    for (auto& v : buf) v = std::conj(v);
    fft_forward(buf.data(), inner);
    const double inv_m = 1.0 / m;
    for (int k = 0; k < n; ++k) a[k] = std::conj(buf[static_cast<std::size_t>(k)]) * inv_m * p.chirp[static_cast<std::size_t>(k)];
}

void fft_forward(cdouble* a, const Plan& p) {
    if (p.n == 1) return;
    if (!p.bitrev.empty())
        fft_pow2(a, p);
    else if (!p.chirp.empty())
        fft_bluestein(a, p);
    else
        fft_mixed(a, p);
}

}  // namespace

void fft_1d(cdouble* data, int n, bool inverse) {
    if (n < 1) throw std::invalid_argument("fft_1d: length must be >= 1");
    const Plan& p = plan_for(n);
    if (!inverse) {
        fft_forward(data, p);
    } else {
        for (int i = 0; i < n; ++i) data[i] = std::conj(data[i]);
        fft_forward(data, p);
        for (int i = 0; i < n; ++i) data[i] = std::conj(data[i]);
    }
}

void fft2_inplace(ComplexTensor& t, bool inverse) {
    const int M = t.shape().rows(), N = t.shape().cols();
    const std::size_t planes = t.shape().planes();
    auto transform_plane = [&](std::size_t p) {
        std::vector<cdouble> col(static_cast<std::size_t>(M));
        cdouble* base = t.data() + p * static_cast<std::size_t>(M) * N;
        for (int r = 0; r < M; ++r) fft_1d(base + static_cast<std::size_t>(r) * N, N, inverse);
        for (int c = 0; c < N; ++c) {
            for (int r = 0; r < M; ++r) col[static_cast<std::size_t>(r)] = base[static_cast<std::size_t>(r) * N + c];
            fft_1d(col.data(), M, inverse);
            for (int r = 0; r < M; ++r) base[static_cast<std::size_t>(r) * N + c] = col[static_cast<std::size_t>(r)];
        }
    };
    // planes land in disjoint regions, so this parallelizes freely
    if (planes >= 8)
        parallel_for(planes, transform_plane);
    else
        for (std::size_t p = 0; p < planes; ++p) transform_plane(p);
}

}  // namespace detail

namespace {

void require_rank2(const Shape& s, const char* who) {
    if (s.rank() < 2) throw std::invalid_argument(std::string(who) + ": need rank >= 2, have " + s.str());
}

ComplexTensor to_complex(const RealTensor& x) {
    ComplexTensor out(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = cdouble{x[i], 0.0};
    return out;
}

std::size_t conj_partner(int r, int c, int M, int N) {
    const int rp = (M - r) % M, cp = (N - c) % N;
    return static_cast<std::size_t>(rp) * N + cp;
}

// Roll the trailing 2D plane forward by (dr, dc).
ComplexTensor roll2(const ComplexTensor& t, int dr, int dc) {
    const int M = t.shape().rows(), N = t.shape().cols();
    ComplexTensor out(t.shape());
    const std::size_t planes = t.shape().planes();
    for (std::size_t p = 0; p < planes; ++p) {
        const cdouble* src = t.data() + p * static_cast<std::size_t>(M) * N;
        cdouble* dst = out.data() + p * static_cast<std::size_t>(M) * N;
        for (int r = 0; r < M; ++r) {
            const int rr = (r + dr) % M;
            for (int c = 0; c < N; ++c)
                dst[static_cast<std::size_t>(rr) * N + (c + dc) % N] = src[static_cast<std::size_t>(r) * N + c];
        }
    }
    return out;
}

}  // namespace

FrequencyMap dft2(const ComplexTensor& x) {
    require_rank2(x.shape(), "dft2");
    ComplexTensor y = x;
    detail::fft2_inplace(y, false);
    const double scale = 1.0 / std::sqrt(static_cast<double>(x.shape().rows()) * x.shape().cols());
    for (auto& v : y.storage()) v *= scale;
    return FrequencyMap{std::move(y), Frame::Natural};
}

FrequencyMap dft2(const RealTensor& x) { return dft2(to_complex(x)); }

ComplexTensor idft2(const FrequencyMap& y) {
    if (y.frame != Frame::Natural)
        throw std::invalid_argument("idft2: input must be in the Natural frame (ifftshift first)");
    ComplexTensor x = y.spectrum;
    detail::fft2_inplace(x, true);
    const double scale = 1.0 / std::sqrt(static_cast<double>(x.shape().rows()) * x.shape().cols());
    for (auto& v : x.storage()) v *= scale;
    return x;
}

RealTensor real_part(const ComplexTensor& t) {
    RealTensor out(t.shape());
    for (std::size_t i = 0; i < t.size(); ++i) out[i] = t[i].real();
    return out;
}

double max_abs_imag(const ComplexTensor& t) {
    double m = 0.0;
    for (const auto& v : t.storage()) m = std::max(m, std::abs(v.imag()));
    return m;
}

FrequencyMap fftshift(const FrequencyMap& y) {
    if (y.frame != Frame::Natural) throw std::invalid_argument("fftshift: input already Shifted");
    const int M = y.spectrum.shape().rows(), N = y.spectrum.shape().cols();
    return FrequencyMap{roll2(y.spectrum, M / 2, N / 2), Frame::Shifted};
}

FrequencyMap ifftshift(const FrequencyMap& y) {
    if (y.frame != Frame::Shifted) throw std::invalid_argument("ifftshift: input not Shifted");
    const int M = y.spectrum.shape().rows(), N = y.spectrum.shape().cols();
    return FrequencyMap{roll2(y.spectrum, M - M / 2, N - N / 2), Frame::Natural};
}

ComplexTensor hermitian_project(const ComplexTensor& y) {
    require_rank2(y.shape(), "hermitian_project");
    const int M = y.shape().rows(), N = y.shape().cols();
    ComplexTensor out(y.shape());
    const std::size_t planes = y.shape().planes();
    for (std::size_t p = 0; p < planes; ++p) {
        const cdouble* src = y.data() + p * static_cast<std::size_t>(M) * N;
        cdouble* dst = out.data() + p * static_cast<std::size_t>(M) * N;
        for (int r = 0; r < M; ++r)
            for (int c = 0; c < N; ++c)
                dst[static_cast<std::size_t>(r) * N + c] =
                    0.5 * (src[static_cast<std::size_t>(r) * N + c] + std::conj(src[conj_partner(r, c, M, N)]));
    }
    return out;
}

FrequencyMap hermitian_project(const FrequencyMap& y) {
    if (y.frame != Frame::Natural)
        throw std::invalid_argument("hermitian_project: input must be in the Natural frame");
    return FrequencyMap{hermitian_project(y.spectrum), Frame::Natural};
}

bool is_conjugate_symmetric(const FrequencyMap& y, double tol) {
    const int M = y.spectrum.shape().rows(), N = y.spectrum.shape().cols();
    if (y.frame != Frame::Natural)
        throw std::invalid_argument("is_conjugate_symmetric: input must be in the Natural frame");
    const std::size_t planes = y.spectrum.shape().planes();
    for (std::size_t p = 0; p < planes; ++p) {
        const cdouble* src = y.spectrum.data() + p * static_cast<std::size_t>(M) * N;
        for (int r = 0; r < M; ++r)
            for (int c = 0; c < N; ++c) {
                const cdouble d = src[static_cast<std::size_t>(r) * N + c] - std::conj(src[conj_partner(r, c, M, N)]);
                if (std::abs(d) > tol) return false;
            }
    }
    return true;
}

RealTensor circular_conv(const RealTensor& x, const RealTensor& f, ConvPath path) {
    if (!(x.shape() == f.shape()))
        throw std::invalid_argument("circular_conv: shape mismatch " + x.shape().str() + " vs " + f.shape().str());
    require_rank2(x.shape(), "circular_conv");
    const int M = x.shape().rows(), N = x.shape().cols();
    if (path == ConvPath::FFT) {
        FrequencyMap prod{elementwise_mul(dft2(x).spectrum, dft2(f).spectrum), Frame::Natural};
        ComplexTensor out = idft2(prod);
        const double scale = std::sqrt(static_cast<double>(M) * N);
        RealTensor res(x.shape());
        for (std::size_t i = 0; i < out.size(); ++i) res[i] = out[i].real() * scale;
        return res;
    }
    RealTensor out(x.shape());
    for (int m = 0; m < M; ++m)
        for (int n = 0; n < N; ++n) {
            double acc = 0.0;
            for (int p = 0; p < M; ++p) {
                const int rm = (m - p + M) % M;
                for (int q = 0; q < N; ++q) acc += x(p, q) * f(rm, (n - q + N) % N);
            }
            out(m, n) = acc;
        }
    return out;
}

}  // namespace spectral
