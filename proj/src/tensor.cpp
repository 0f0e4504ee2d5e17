#include "spectral/tensor.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace spectral {

Shape::Shape(std::vector<int> dims) : dims_(std::move(dims)) {
    for (int d : dims_) {
        if (d < 1) throw std::invalid_argument("Shape: dimensions must be >= 1, got " + str());
    }
    std::size_t n = 1;
    for (int d : dims_) {
        if (n > std::numeric_limits<std::size_t>::max() / static_cast<std::size_t>(d))
            throw std::invalid_argument("Shape: element count overflows");
        n *= static_cast<std::size_t>(d);
    }
}

std::size_t Shape::numel() const {
    std::size_t n = 1;
    for (int d : dims_) n *= static_cast<std::size_t>(d);
    return n;
}

int Shape::rows() const {
    if (rank() < 2) throw std::invalid_argument("Shape::rows: need rank >= 2, have " + str());
    return dims_[dims_.size() - 2];
}

int Shape::cols() const {
    if (rank() < 1) throw std::invalid_argument("Shape::cols: empty shape");
    return dims_.back();
}

std::size_t Shape::planes() const {
    return numel() / (static_cast<std::size_t>(rows()) * cols());
}

std::string Shape::str() const {
    std::string s = "[";
    for (std::size_t i = 0; i < dims_.size(); ++i) {
        if (i) s += ", ";
        s += std::to_string(dims_[i]);
    }
    return s + "]";
}

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> data) : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != shape_.numel())
        throw std::invalid_argument("Tensor: data length " + std::to_string(data_.size()) +
                                    " does not match shape " + shape_.str());
}

template class Tensor<double>;
template class Tensor<cdouble>;

double l2_norm_sq(const RealTensor& t) {
    double s = 0.0;
    for (double v : t.storage()) s += v * v;
    return s;
}

double l2_norm_sq(const ComplexTensor& t) {
    double s = 0.0;
    for (const cdouble& v : t.storage()) s += v.real() * v.real() + v.imag() * v.imag();
    return s;
}

ComplexTensor elementwise_mul(const ComplexTensor& a, const ComplexTensor& b) {
    if (!(a.shape() == b.shape()))
        throw std::invalid_argument("elementwise_mul: shape mismatch " + a.shape().str() + " vs " +
                                    b.shape().str());
    ComplexTensor out(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
    return out;
}

namespace {

// Shared offset convention for crop and pad.
inline int window_start(int full, int window) { return full / 2 - window / 2; }

}  // namespace

ComplexTensor centered_crop(const ComplexTensor& y, int out_h, int out_w) {
    const int M = y.shape().rows(), N = y.shape().cols();
    if (out_h < 1 || out_w < 1 || out_h > M || out_w > N)
        throw std::invalid_argument("centered_crop: target " + std::to_string(out_h) + "x" +
                                    std::to_string(out_w) + " invalid for input " + y.shape().str());
    const int r0 = window_start(M, out_h), c0 = window_start(N, out_w);
    std::vector<int> dims = y.shape().dims();
    dims[dims.size() - 2] = out_h;
    dims[dims.size() - 1] = out_w;
    ComplexTensor out{Shape(dims)};
    const std::size_t planes = y.shape().planes();
    for (std::size_t p = 0; p < planes; ++p) {
        const cdouble* src = y.data() + p * static_cast<std::size_t>(M) * N;
        cdouble* dst = out.data() + p * static_cast<std::size_t>(out_h) * out_w;
        for (int r = 0; r < out_h; ++r)
            for (int c = 0; c < out_w; ++c)
                dst[static_cast<std::size_t>(r) * out_w + c] =
                    src[static_cast<std::size_t>(r0 + r) * N + (c0 + c)];
    }
    return out;
}

ComplexTensor zero_pad_centered(const ComplexTensor& y, int out_h, int out_w) {
    const int H = y.shape().rows(), W = y.shape().cols();
    if (out_h < H || out_w < W)
        throw std::invalid_argument("zero_pad_centered: target " + std::to_string(out_h) + "x" +
                                    std::to_string(out_w) + " smaller than input " + y.shape().str());
    const int r0 = window_start(out_h, H), c0 = window_start(out_w, W);
    std::vector<int> dims = y.shape().dims();
    dims[dims.size() - 2] = out_h;
    dims[dims.size() - 1] = out_w;
    ComplexTensor out{Shape(dims)};
    const std::size_t planes = y.shape().planes();
    for (std::size_t p = 0; p < planes; ++p) {
        const cdouble* src = y.data() + p * static_cast<std::size_t>(H) * W;
        cdouble* dst = out.data() + p * static_cast<std::size_t>(out_h) * out_w;
        for (int r = 0; r < H; ++r)
            for (int c = 0; c < W; ++c)
                dst[static_cast<std::size_t>(r0 + r) * out_w + (c0 + c)] =
                    src[static_cast<std::size_t>(r) * W + c];
    }
    return out;
}

bool all_finite(const RealTensor& t) {
    for (double v : t.storage())
        if (!std::isfinite(v)) return false;
    return true;
}

bool all_finite(const ComplexTensor& t) {
    for (const cdouble& v : t.storage())
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
}

}  // namespace spectral
