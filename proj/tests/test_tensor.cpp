#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "spectral/tensor.hpp"

using namespace spectral;

TEST_CASE("shape validation") {
    CHECK_THROWS_AS(Shape({3, 0}), std::invalid_argument);
    CHECK_THROWS_AS(Shape({-1}), std::invalid_argument);
    CHECK(Shape({2, 3, 4}).numel() == 24);
    CHECK(Shape({2, 3, 4}).rows() == 3);
    CHECK(Shape({2, 3, 4}).cols() == 4);
    CHECK(Shape({2, 3, 4}).planes() == 2);
}

TEST_CASE("tensor construction checks data length") {
    CHECK_THROWS_AS(RealTensor(Shape({2, 2}), std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("l2_norm_sq basics") {
    RealTensor zeros(Shape({3, 3}));
    CHECK(l2_norm_sq(zeros) == 0.0);

    RealTensor t(Shape({1, 2}), {3.0, 4.0});
    CHECK(l2_norm_sq(t) == doctest::Approx(25.0).epsilon(1e-15));
}

TEST_CASE("l2_norm_sq complex matches scalar loop") {
    std::mt19937_64 rng(11);
    ComplexTensor t = oracles::random_complex(Shape({5, 7}), rng);
    double expect = 0.0;
    for (const auto& v : t.storage()) expect += v.real() * v.real() + v.imag() * v.imag();
    CHECK(l2_norm_sq(t) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("elementwise_mul") {
    ComplexTensor a(Shape({2, 2}), std::vector<cdouble>(4, {1.0, 1.0}));
    ComplexTensor b(Shape({2, 2}), std::vector<cdouble>(4, {1.0, -1.0}));
    ComplexTensor p = elementwise_mul(a, b);
    for (const auto& v : p.storage()) {
        CHECK(v.real() == doctest::Approx(2.0));
        CHECK(v.imag() == doctest::Approx(0.0));
    }

    ComplexTensor z(Shape({2, 2}));
    ComplexTensor az = elementwise_mul(a, z);
    for (const auto& v : az.storage()) CHECK(std::abs(v) == 0.0);

    CHECK_THROWS_AS(elementwise_mul(a, ComplexTensor(Shape({2, 3}))), std::invalid_argument);

    std::mt19937_64 rng(7);
    ComplexTensor x = oracles::random_complex(Shape({4, 4}), rng);
    ComplexTensor y = oracles::random_complex(Shape({4, 4}), rng);
    ComplexTensor out = elementwise_mul(x, y);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const cdouble expect = x[i] * y[i];
        CHECK(out[i].real() == expect.real());
        CHECK(out[i].imag() == expect.imag());
    }
}

TEST_CASE("centered_crop convention") {
    // identity at full size
    std::mt19937_64 rng(3);
    ComplexTensor y = oracles::random_complex(Shape({4, 4}), rng);
    CHECK(oracles::max_abs_diff(centered_crop(y, 4, 4), y) == 0.0);

    // M=5, H=3 keeps rows 1..3
    ComplexTensor t(Shape({5, 1}));
    for (int r = 0; r < 5; ++r) t(r, 0) = cdouble{static_cast<double>(r), 0.0};
    ComplexTensor c = centered_crop(t, 3, 1);
    CHECK(c(0, 0).real() == 1.0);
    CHECK(c(1, 0).real() == 2.0);
    CHECK(c(2, 0).real() == 3.0);

    // M=4, H=2 keeps rows 1..2; the DC row of the shifted frame (index 2) stays inside
    ComplexTensor t4(Shape({4, 1}));
    for (int r = 0; r < 4; ++r) t4(r, 0) = cdouble{static_cast<double>(r), 0.0};
    ComplexTensor c4 = centered_crop(t4, 2, 1);
    CHECK(c4(0, 0).real() == 1.0);
    CHECK(c4(1, 0).real() == 2.0);

    CHECK_THROWS_AS(centered_crop(t4, 5, 1), std::invalid_argument);
}

TEST_CASE("zero_pad_centered convention and round trip") {
    ComplexTensor ones(Shape({2, 2}), std::vector<cdouble>(4, {1.0, 0.0}));
    ComplexTensor p = zero_pad_centered(ones, 4, 4);
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) {
            const double expect = (r >= 1 && r <= 2 && c >= 1 && c <= 2) ? 1.0 : 0.0;
            CHECK(p(r, c).real() == expect);
        }

    std::mt19937_64 rng(5);
    ComplexTensor y = oracles::random_complex(Shape({3, 5}), rng);
    CHECK(oracles::max_abs_diff(centered_crop(zero_pad_centered(y, 7, 9), 3, 5), y) == 0.0);

    CHECK_THROWS_AS(zero_pad_centered(y, 2, 5), std::invalid_argument);
}

TEST_CASE("crop and pad are adjoint") {
    std::mt19937_64 rng(9);
    for (int rep = 0; rep < 20; ++rep) {
        const int M = 1 + static_cast<int>(rng() % 8), N = 1 + static_cast<int>(rng() % 8);
        const int H = 1 + static_cast<int>(rng() % M), W = 1 + static_cast<int>(rng() % N);
        ComplexTensor x = oracles::random_complex(Shape({M, N}), rng);
        ComplexTensor g = oracles::random_complex(Shape({H, W}), rng);
        const double lhs = oracles::real_inner(centered_crop(x, H, W), g);
        const double rhs = oracles::real_inner(x, zero_pad_centered(g, M, N));
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
}

TEST_CASE("pad-then-crop projection properties") {
    std::mt19937_64 rng(13);
    ComplexTensor x = oracles::random_complex(Shape({6, 6}), rng);
    auto proj = [](const ComplexTensor& t) { return zero_pad_centered(centered_crop(t, 4, 4), 6, 6); };
    ComplexTensor p1 = proj(x);
    ComplexTensor p2 = proj(p1);
    CHECK(oracles::max_abs_diff(p1, p2) == 0.0);  // idempotent

    ComplexTensor y = oracles::random_complex(Shape({6, 6}), rng);
    CHECK(oracles::real_inner(proj(x), y) == doctest::Approx(oracles::real_inner(x, proj(y))).epsilon(1e-12));

    // padding preserves energy exactly
    ComplexTensor small = oracles::random_complex(Shape({3, 4}), rng);
    CHECK(l2_norm_sq(zero_pad_centered(small, 8, 8)) == l2_norm_sq(small));
}
