#pragma once

#include <cassert>
#include <cstddef>
#include <string>
#include <vector>

#include "slimnet/errors.hpp"

namespace slimnet {

/// Dense multi-dimensional array of 64-bit reals, row-major flat storage.
/// The only numeric carrier in the library: inputs, activations, weights.
class Tensor {
public:
    Tensor() = default;

    /// Zero-filled tensor of the given shape. Extents must be positive.
    explicit Tensor(std::vector<std::size_t> shape);

    Tensor(std::vector<std::size_t> shape, std::vector<double> data);

    /// 1-D tensor from a value list.
    static Tensor of(std::vector<double> values);

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t numel() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& values() { return data_; }
    const std::vector<double>& values() const { return data_; }

    double& operator[](std::size_t i) {
        assert(i < data_.size());
        return data_[i];
    }
    double operator[](std::size_t i) const {
        assert(i < data_.size());
        return data_[i];
    }

    /// 2-D access, shape [R, C].
    double& operator()(std::size_t r, std::size_t c) {
        assert(rank() == 2);
        return data_[r * shape_[1] + c];
    }
    double operator()(std::size_t r, std::size_t c) const {
        assert(rank() == 2);
        return data_[r * shape_[1] + c];
    }

    /// 3-D access, shape [C, H, W].
    double& operator()(std::size_t c, std::size_t y, std::size_t x) {
        assert(rank() == 3);
        return data_[(c * shape_[1] + y) * shape_[2] + x];
    }
    double operator()(std::size_t c, std::size_t y, std::size_t x) const {
        assert(rank() == 3);
        return data_[(c * shape_[1] + y) * shape_[2] + x];
    }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
    bool all_finite() const;

    /// "[2, 3, 4]" style rendering for error messages.
    std::string shape_str() const;
    static std::string shape_str(const std::vector<std::size_t>& shape);

private:
    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

/// sqrt of the sum of squared entries. Throws std::domain_error on an empty
/// tensor. Summation order is flat index ascending.
double l2_norm(const Tensor& t);
double l2_norm(const double* data, std::size_t n);

/// Sum of absolute entries. Throws std::domain_error on an empty tensor.
double l1_norm(const Tensor& t);
double l1_norm(const double* data, std::size_t n);

/// Elementwise sum/product; shapes must match exactly.
Tensor add(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& t, double c);

/// Elementwise max(x, 0).
Tensor relu(const Tensor& t);

/// [M, K] x [K, N] -> [M, N].
Tensor matmul(const Tensor& a, const Tensor& b);

/// 1-D correlation of a 1-D signal with a 1-D kernel: out[i] = sum_k
/// signal[i*stride - padding + k] * kernel[k], positions outside the signal
/// reading zero. Output length is floor((n + 2p - d) / s) + 1.
Tensor conv1d(const Tensor& signal, const Tensor& kernel, std::size_t stride = 1,
              std::size_t padding = 0);

std::size_t conv1d_output_length(std::size_t n, std::size_t d, std::size_t stride,
                                 std::size_t padding);

/// 2-D max pooling over the spatial axes of a [C, H, W] tensor.
Tensor max_pool2d(const Tensor& t, std::size_t window, std::size_t stride);

}  // namespace slimnet
