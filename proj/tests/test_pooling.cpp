#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "spectral/pooling.hpp"

using namespace spectral;

namespace {

// Brute-force spectral pooling oracle: full DFT via the naive transform,
// centered crop by explicit index arithmetic, Hermitian symmetrization by
// pair averaging, naive inverse.
RealTensor brute_spectral_pool(const RealTensor& x, int H, int W, double scale) {
    const int M = x.shape().rows(), N = x.shape().cols();
    ComplexTensor y = oracles::brute_dft2(x);
    // shift
    ComplexTensor shifted(Shape({M, N}));
    for (int r = 0; r < M; ++r)
        for (int c = 0; c < N; ++c) shifted((r + M / 2) % M, (c + N / 2) % N) = y(r, c);
    // crop
    const int r0 = M / 2 - H / 2, c0 = N / 2 - W / 2;
    ComplexTensor small(Shape({H, W}));
    for (int r = 0; r < H; ++r)
        for (int c = 0; c < W; ++c) small(r, c) = shifted(r0 + r, c0 + c) * scale;
    // unshift
    ComplexTensor natural(Shape({H, W}));
    for (int r = 0; r < H; ++r)
        for (int c = 0; c < W; ++c) natural(r, c) = small((r + H / 2) % H, (c + W / 2) % W);
    // hermitian pair averaging
    ComplexTensor sym(Shape({H, W}));
    for (int r = 0; r < H; ++r)
        for (int c = 0; c < W; ++c)
            sym(r, c) = 0.5 * (natural(r, c) + std::conj(natural((H - r) % H, (W - c) % W)));
    ComplexTensor back = oracles::brute_dft2(sym, true);
    RealTensor out(Shape({H, W}));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = back[i].real();
    return out;
}

}  // namespace

TEST_CASE("full-size spectral pool is the identity") {
    std::mt19937_64 rng(101);
    RealTensor x = oracles::random_real(Shape({6, 6}), rng);
    SpectralPoolConfig cfg{6, 6, ScaleMode::Unscaled, std::nullopt};
    auto [y, cache] = spectral_pool_forward(x, cfg);
    CHECK(oracles::max_abs_diff(y, x) < 1e-10);
    CHECK(cache.imag_residue < 1e-12);
}

TEST_CASE("mean-preserving pooling keeps constant level") {
    const double c = 0.37;
    RealTensor x(Shape({5, 7}), std::vector<double>(35, c));
    for (auto [H, W] : {std::pair{3, 4}, std::pair{5, 7}, std::pair{1, 1}, std::pair{2, 2}}) {
        SpectralPoolConfig cfg{H, W, ScaleMode::MeanPreserving, std::nullopt};
        auto [y, cache] = spectral_pool_forward(x, cfg);
        for (double v : y.storage()) CHECK(v == doctest::Approx(c).epsilon(1e-12));
    }
}

TEST_CASE("checkerboard pools to its mean") {
    RealTensor x(Shape({4, 4}));
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) x(r, c) = static_cast<double>((r + c) % 2);
    SpectralPoolConfig cfg{2, 2, ScaleMode::MeanPreserving, std::nullopt};
    auto [y, cache] = spectral_pool_forward(x, cfg);
    for (double v : y.storage()) CHECK(v == doctest::Approx(0.5).epsilon(1e-12));

    RealTensor expect = brute_spectral_pool(x, 2, 2, std::sqrt(4.0 / 16.0));
    CHECK(oracles::max_abs_diff(y, expect) < 1e-12);
}

TEST_CASE("forward matches brute-force oracle on random input") {
    std::mt19937_64 rng(103);
    for (auto [M, N, H, W] : {std::tuple{5, 5, 3, 3}, std::tuple{6, 4, 4, 2}, std::tuple{7, 6, 3, 4}}) {
        RealTensor x = oracles::random_real(Shape({M, N}), rng);
        const double scale = std::sqrt(static_cast<double>(H) * W / (static_cast<double>(M) * N));
        SpectralPoolConfig cfg{H, W, ScaleMode::MeanPreserving, std::nullopt};
        auto [y, cache] = spectral_pool_forward(x, cfg);
        CHECK(oracles::max_abs_diff(y, brute_spectral_pool(x, H, W, scale)) < 1e-10);
    }
}

TEST_CASE("backward of the identity config passes gradients through") {
    std::mt19937_64 rng(107);
    RealTensor x = oracles::random_real(Shape({4, 4}), rng);
    SpectralPoolConfig cfg{4, 4, ScaleMode::MeanPreserving, std::nullopt};
    auto [y, cache] = spectral_pool_forward(x, cfg);
    RealTensor g = oracles::random_real(Shape({4, 4}), rng);
    CHECK(oracles::max_abs_diff(spectral_pool_backward(g, cache), g) < 1e-10);
}

TEST_CASE("forward and backward are adjoint") {
    std::mt19937_64 rng(109);
    RealTensor x = oracles::random_real(Shape({6, 6}), rng);
    RealTensor g = oracles::random_real(Shape({4, 4}), rng);
    SpectralPoolConfig cfg{4, 4, ScaleMode::MeanPreserving, std::nullopt};
    auto [y, cache] = spectral_pool_forward(x, cfg);
    const double lhs = oracles::real_inner(y, g);
    const double rhs = oracles::real_inner(x, spectral_pool_backward(g, cache));
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
}

TEST_CASE("adjoint holds over random shapes, parities, and dropout masks") {
    std::mt19937_64 rng(113);
    for (int rep = 0; rep < 30; ++rep) {
        const int M = 2 + static_cast<int>(rng() % 9), N = 2 + static_cast<int>(rng() % 9);
        const int H = 1 + static_cast<int>(rng() % M), W = 1 + static_cast<int>(rng() % N);
        const bool dropout = rep % 2 == 0;
        SpectralPoolConfig cfg{H, W,
                               rep % 3 ? ScaleMode::MeanPreserving : ScaleMode::Unscaled,
                               dropout ? std::optional<FrequencyDropoutSpec>({0.3, 0.7, 1, 2})
                                       : std::nullopt};
        RealTensor x = oracles::random_real(Shape({M, N}), rng);
        RealTensor g = oracles::random_real(Shape({H, W}), rng);
        auto [y, cache] = spectral_pool_forward(x, cfg, &rng);
        const double lhs = oracles::real_inner(y, g);
        const double rhs = oracles::real_inner(x, spectral_pool_backward(g, cache));
        CHECK(std::abs(lhs - rhs) < 1e-10 * std::max(1.0, std::abs(lhs)));
        CHECK(cache.imag_residue < 1e-10);
    }
}

TEST_CASE("backward matches finite differences") {
    std::mt19937_64 rng(127);
    RealTensor x = oracles::random_real(Shape({5, 5}), rng);
    RealTensor w = oracles::random_real(Shape({3, 3}), rng);
    SpectralPoolConfig cfg{3, 3, ScaleMode::MeanPreserving, std::nullopt};

    auto loss = [&]() {
        auto [y, c] = spectral_pool_forward(x, cfg);
        return oracles::real_inner(y, w);
    };
    auto numeric = oracles::finite_diff_gradient(std::span<double>(x.storage()), loss);

    auto [y, cache] = spectral_pool_forward(x, cfg);
    RealTensor analytic = spectral_pool_backward(w, cache);
    for (std::size_t i = 0; i < analytic.size(); ++i)
        CHECK(oracles::rel_err(analytic[i], numeric[i]) < 1e-6);
}

TEST_CASE("frequency_dropout_mask geometry") {
    RealTensor full = frequency_dropout_mask(4, 4, 4);
    for (double v : full.storage()) CHECK(v == 1.0);
    RealTensor bigger = frequency_dropout_mask(3, 5, 9);
    for (double v : bigger.storage()) CHECK(v == 1.0);

    RealTensor dc = frequency_dropout_mask(5, 4, 1);
    for (int r = 0; r < 5; ++r)
        for (int c = 0; c < 4; ++c) CHECK(dc(r, c) == ((r == 2 && c == 2) ? 1.0 : 0.0));

    RealTensor m = frequency_dropout_mask(8, 8, 3);
    double total = 0.0;
    for (int r = 0; r < 8; ++r)
        for (int c = 0; c < 8; ++c) {
            total += m(r, c);
            const bool in = r >= 3 && r <= 5 && c >= 3 && c <= 5;
            CHECK(m(r, c) == (in ? 1.0 : 0.0));
        }
    CHECK(total == 9.0);

    CHECK_THROWS_AS(frequency_dropout_mask(4, 4, 0), std::invalid_argument);
}

TEST_CASE("sample_truncation_radius distribution bounds") {
    std::mt19937_64 rng(131);
    FrequencyDropoutSpec all_keep{1.0, 1.0, 1, 1};
    for (int i = 0; i < 16; ++i) CHECK(sample_truncation_radius(all_keep, 9, rng) == 9);

    FrequencyDropoutSpec free_spec{0.0, 0.0, 1, 1};
    bool saw_low = false, saw_high = false;
    for (int i = 0; i < 400; ++i) {
        const int r = sample_truncation_radius(free_spec, 5, rng);
        CHECK(r >= 1);
        CHECK(r <= 5);
        saw_low = saw_low || r == 1;
        saw_high = saw_high || r == 5;
    }
    CHECK(saw_low);
    CHECK(saw_high);

    // alpha = 0.30, beta = 0.15, final layer, map 32: floor(0.15*32) = 4
    FrequencyDropoutSpec paper{0.30, 0.15, 3, 3};
    int lo_seen = 100, hi_seen = 0;
    for (int i = 0; i < 2000; ++i) {
        const int r = sample_truncation_radius(paper, 32, rng);
        lo_seen = std::min(lo_seen, r);
        hi_seen = std::max(hi_seen, r);
    }
    CHECK(lo_seen == 4);
    CHECK(hi_seen == 32);
}

TEST_CASE("seeded pooling is reproducible") {
    std::mt19937_64 rng_a(999), rng_b(999);
    RealTensor x = oracles::random_real(Shape({8, 8}), rng_a);
    std::mt19937_64 xa(1), xb(1);
    SpectralPoolConfig cfg{5, 5, ScaleMode::MeanPreserving, FrequencyDropoutSpec{0.2, 0.6, 1, 2}};
    auto [ya, ca] = spectral_pool_forward(x, cfg, &xa);
    auto [yb, cb] = spectral_pool_forward(x, cfg, &xb);
    CHECK(oracles::max_abs_diff(ya, yb) == 0.0);
}

TEST_CASE("spectral_approximate basics") {
    std::mt19937_64 rng(137);
    RealTensor x = oracles::random_real(Shape({6, 6}), rng);
    CHECK(oracles::max_abs_diff(spectral_approximate(x, 6, 6), x) < 1e-10);

    RealTensor cb(Shape({4, 4}));
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) cb(r, c) = static_cast<double>((r + c) % 2);
    RealTensor approx = spectral_approximate(cb, 2, 2);
    for (double v : approx.storage()) CHECK(v == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("spectral_approximate error is monotone in the kept window") {
    std::mt19937_64 rng(139);
    // smooth-ish random inputs: random spectra with decaying magnitude
    for (int rep = 0; rep < 4; ++rep) {
        RealTensor x = oracles::random_real(Shape({8, 8}), rng);
        double prev = std::numeric_limits<double>::infinity();
        for (int k = 1; k <= 8; ++k) {
            RealTensor approx = spectral_approximate(x, k, k);
            RealTensor diff(x.shape());
            for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = x[i] - approx[i];
            const double err = std::sqrt(l2_norm_sq(diff) / l2_norm_sq(x));
            CHECK(err <= prev + 1e-12);
            prev = err;
        }
    }
}

TEST_CASE("approximation error energy vs zeroed-bin energy (Parseval)") {
    std::mt19937_64 rng(149);
    for (auto [M, N, H, W] : {std::tuple{7, 7, 3, 5}, std::tuple{6, 6, 3, 3}, std::tuple{5, 9, 1, 7}}) {
        // odd windows: exact equality
        RealTensor x = oracles::random_real(Shape({M, N}), rng);
        RealTensor approx = spectral_approximate(x, H, W);
        RealTensor diff(x.shape());
        for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = x[i] - approx[i];

        FrequencyMap y = fftshift(dft2(x));
        const int r0 = M / 2 - H / 2, c0 = N / 2 - W / 2;
        double zeroed = 0.0;
        for (int r = 0; r < M; ++r)
            for (int c = 0; c < N; ++c)
                if (!(r >= r0 && r < r0 + H && c >= c0 && c < c0 + W))
                    zeroed += std::norm(y.spectrum(r, c));
        CHECK(l2_norm_sq(diff) == doctest::Approx(zeroed).epsilon(1e-10));
    }
    // even windows drop one member of some conjugate pairs; the projection
    // halves those kept bins, so the error sits at or below the zeroed sum.
    for (auto [M, N, H, W] : {std::tuple{6, 6, 4, 4}, std::tuple{8, 5, 2, 4}}) {
        RealTensor x = oracles::random_real(Shape({M, N}), rng);
        RealTensor approx = spectral_approximate(x, H, W);
        RealTensor diff(x.shape());
        for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = x[i] - approx[i];
        FrequencyMap y = fftshift(dft2(x));
        const int r0 = M / 2 - H / 2, c0 = N / 2 - W / 2;
        double zeroed = 0.0;
        for (int r = 0; r < M; ++r)
            for (int c = 0; c < N; ++c)
                if (!(r >= r0 && r < r0 + H && c >= c0 && c < c0 + W))
                    zeroed += std::norm(y.spectrum(r, c));
        CHECK(l2_norm_sq(diff) <= zeroed + 1e-10);
    }
}

TEST_CASE("max pooling forward/backward") {
    RealTensor x(Shape({2, 2}), {1.0, 2.0, 3.0, 4.0});
    auto [y, cache] = max_pool_forward(x, 2, 2);
    CHECK(y.size() == 1);
    CHECK(y[0] == 4.0);

    RealTensor g(Shape({1, 1}), {2.5});
    RealTensor gx = max_pool_backward(g, cache);
    CHECK(gx(0, 0) == 0.0);
    CHECK(gx(1, 1) == 2.5);

    // ties route to the first window position in row-major order
    RealTensor flat(Shape({2, 2}), std::vector<double>(4, 7.0));
    auto [yf, cf] = max_pool_forward(flat, 2, 2);
    CHECK(yf[0] == 7.0);
    RealTensor gf = max_pool_backward(RealTensor(Shape({1, 1}), {1.0}), cf);
    CHECK(gf(0, 0) == 1.0);
    CHECK(gf(0, 1) == 0.0);

    CHECK_THROWS_AS(max_pool_forward(x, 3, 1), std::invalid_argument);
}

TEST_CASE("max pooling gradient matches finite differences") {
    std::mt19937_64 rng(151);
    RealTensor x = oracles::random_real(Shape({6, 6}), rng);
    RealTensor w = oracles::random_real(Shape({2, 2}), rng);
    auto loss = [&]() {
        auto [y, c] = max_pool_forward(x, 3, 2);
        return oracles::real_inner(y, w);
    };
    auto numeric = oracles::finite_diff_gradient(std::span<double>(x.storage()), loss);
    auto [y, cache] = max_pool_forward(x, 3, 2);
    RealTensor analytic = max_pool_backward(w, cache);
    for (std::size_t i = 0; i < analytic.size(); ++i)
        CHECK(oracles::rel_err(analytic[i], numeric[i]) < 1e-6);
}

TEST_CASE("max_pool_reconstruct") {
    RealTensor c(Shape({4, 4}), std::vector<double>(16, 3.0));
    auto [yc, cc] = max_pool_forward(c, 2, 2);
    RealTensor rc = max_pool_reconstruct(yc, cc);
    CHECK(oracles::max_abs_diff(rc, c) == 0.0);

    RealTensor x(Shape({2, 2}), {1.0, 2.0, 3.0, 4.0});
    auto [y, cache] = max_pool_forward(x, 2, 2);
    RealTensor r = max_pool_reconstruct(y, cache);
    for (double v : r.storage()) CHECK(v == 4.0);

    // replication error on a ramp equals the directly computed distance
    RealTensor ramp(Shape({4, 4}));
    for (int i = 0; i < 16; ++i) ramp[static_cast<std::size_t>(i)] = i;
    auto [yr, cr] = max_pool_forward(ramp, 2, 2);
    RealTensor rec = max_pool_reconstruct(yr, cr);
    double direct = 0.0;
    for (std::size_t i = 0; i < 16; ++i) direct += (ramp[i] - rec[i]) * (ramp[i] - rec[i]);
    RealTensor diff(Shape({4, 4}));
    for (std::size_t i = 0; i < 16; ++i) diff[i] = ramp[i] - rec[i];
    CHECK(l2_norm_sq(diff) == doctest::Approx(direct).epsilon(1e-15));
}

TEST_CASE("multi-channel pooling shares one mask") {
    std::mt19937_64 rng(157);
    RealTensor x = oracles::random_real(Shape({3, 6, 6}), rng);
    std::mt19937_64 drop_rng(5);
    SpectralPoolConfig cfg{4, 4, ScaleMode::MeanPreserving, FrequencyDropoutSpec{0.1, 0.5, 1, 1}};
    auto [y, cache] = spectral_pool_forward(x, cfg, &drop_rng);
    CHECK(y.shape() == Shape({3, 4, 4}));
    CHECK(cache.mask.size() == 16);  // one 2D mask for all channels

    RealTensor g = oracles::random_real(Shape({3, 4, 4}), rng);
    const double lhs = oracles::real_inner(y, g);
    const double rhs = oracles::real_inner(x, spectral_pool_backward(g, cache));
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
}
