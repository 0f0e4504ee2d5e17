#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace spectral {

using cdouble = std::complex<double>;

// Shape of a dense row-major tensor. Every dimension is >= 1.
class Shape {
public:
    Shape() = default;
    Shape(std::initializer_list<int> dims) : Shape(std::vector<int>(dims)) {}
    explicit Shape(std::vector<int> dims);

    int rank() const { return static_cast<int>(dims_.size()); }
    int dim(int i) const { return dims_[static_cast<std::size_t>(i)]; }
    const std::vector<int>& dims() const { return dims_; }
    std::size_t numel() const;

    // Trailing 2D plane accessors; 2D operations act per plane.
    int rows() const;
    int cols() const;
    std::size_t planes() const;  // numel / (rows*cols)

    bool operator==(const Shape&) const = default;
    std::string str() const;

private:
    std::vector<int> dims_;
};

template <typename T>
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape) : shape_(std::move(shape)), data_(shape_.numel(), T{}) {}
    Tensor(Shape shape, std::vector<T> data);

    const Shape& shape() const { return shape_; }
    std::size_t size() const { return data_.size(); }
    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }
    std::vector<T>& storage() { return data_; }
    const std::vector<T>& storage() const { return data_; }

    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    // Row-major index helpers for common ranks.
    T& operator()(int r, int c) {
        return data_[static_cast<std::size_t>(r) * shape_.cols() + c];
    }
    const T& operator()(int r, int c) const {
        return data_[static_cast<std::size_t>(r) * shape_.cols() + c];
    }
    T& operator()(int p, int r, int c) {
        return data_[(static_cast<std::size_t>(p) * shape_.rows() + r) * shape_.cols() + c];
    }
    const T& operator()(int p, int r, int c) const {
        return data_[(static_cast<std::size_t>(p) * shape_.rows() + r) * shape_.cols() + c];
    }

private:
    Shape shape_;
    std::vector<T> data_;
};

using RealTensor = Tensor<double>;
using ComplexTensor = Tensor<cdouble>;

double l2_norm_sq(const RealTensor& t);
double l2_norm_sq(const ComplexTensor& t);

ComplexTensor elementwise_mul(const ComplexTensor& a, const ComplexTensor& b);

// Centered crop/pad on the trailing 2D plane, in the DC-centered (shifted)
// frame. The crop window starts at r0 = floor(M/2) - floor(H/2),
// c0 = floor(N/2) - floor(W/2), which keeps the DC bin inside the window for
// both parities. zero_pad_centered writes into the exact window
// centered_crop reads, so crop(pad(y)) == y.
ComplexTensor centered_crop(const ComplexTensor& y, int out_h, int out_w);
ComplexTensor zero_pad_centered(const ComplexTensor& y, int out_h, int out_w);

bool all_finite(const RealTensor& t);
bool all_finite(const ComplexTensor& t);

}  // namespace spectral
