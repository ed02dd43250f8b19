#include "slimnet/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace slimnet {

namespace {

std::size_t checked_numel(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t e : shape) {
        if (e == 0) throw ShapeError("tensor extent must be positive, got shape " + Tensor::shape_str(shape));
        n *= e;
    }
    return n;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (!a.same_shape(b)) {
        throw ShapeError(std::string(op) + ": shape mismatch between " + a.shape_str() + " and " + b.shape_str());
    }
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(checked_numel(shape_), 0.0) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
    if (checked_numel(shape_) != data_.size()) {
        throw ShapeError("tensor data length " + std::to_string(data_.size()) + " does not match shape " + shape_str());
    }
}

Tensor Tensor::of(std::vector<double> values) {
    std::size_t n = values.size();
    return Tensor({n}, std::move(values));
}

bool Tensor::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

std::string Tensor::shape_str(const std::vector<std::size_t>& shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ", ";
        os << shape[i];
    }
    os << ']';
    return os.str();
}

std::string Tensor::shape_str() const { return shape_str(shape_); }

double l2_norm(const double* data, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += data[i] * data[i];
    return std::sqrt(acc);
}

double l2_norm(const Tensor& t) {
    if (t.empty()) throw std::domain_error("l2_norm: empty tensor");
    return l2_norm(t.data(), t.numel());
}

double l1_norm(const double* data, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += std::abs(data[i]);
    return acc;
}

double l1_norm(const Tensor& t) {
    if (t.empty()) throw std::domain_error("l1_norm: empty tensor");
    return l1_norm(t.data(), t.numel());
}

Tensor add(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "add");
    Tensor out = a;
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] += b[i];
    return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "mul");
    Tensor out = a;
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= b[i];
    return out;
}

Tensor scale(const Tensor& t, double c) {
    Tensor out = t;
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= c;
    return out;
}

Tensor relu(const Tensor& t) {
    Tensor out = t;
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] = out[i] > 0.0 ? out[i] : 0.0;
    return out;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2 || a.shape()[1] != b.shape()[0]) {
        throw ShapeError("matmul: incompatible shapes " + a.shape_str() + " and " + b.shape_str());
    }
    const std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
    Tensor out({m, n});
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            const double aij = a(i, j);
            for (std::size_t l = 0; l < n; ++l) out(i, l) += aij * b(j, l);
        }
    }
    return out;
}

std::size_t conv1d_output_length(std::size_t n, std::size_t d, std::size_t stride, std::size_t padding) {
    if (stride == 0) throw ShapeError("conv1d: stride must be >= 1");
    if (n + 2 * padding < d) {
        throw ShapeError("conv1d: kernel extent " + std::to_string(d) + " exceeds padded signal length " +
                         std::to_string(n + 2 * padding));
    }
    return (n + 2 * padding - d) / stride + 1;
}

Tensor conv1d(const Tensor& signal, const Tensor& kernel, std::size_t stride, std::size_t padding) {
    if (signal.rank() != 1 || kernel.rank() != 1) {
        throw ShapeError("conv1d: expected 1-D signal and kernel, got " + signal.shape_str() + " and " + kernel.shape_str());
    }
    const std::size_t n = signal.numel(), d = kernel.numel();
    const std::size_t out_len = conv1d_output_length(n, d, stride, padding);
    Tensor out({out_len});
    for (std::size_t i = 0; i < out_len; ++i) {
        double acc = 0.0;
        // start index in the unpadded signal may be negative
        const long long base = static_cast<long long>(i * stride) - static_cast<long long>(padding);
        for (std::size_t k = 0; k < d; ++k) {
            const long long sx = base + static_cast<long long>(k);
            if (sx >= 0 && sx < static_cast<long long>(n)) acc += signal[static_cast<std::size_t>(sx)] * kernel[k];
        }
        out[i] = acc;
    }
    return out;
}

Tensor max_pool2d(const Tensor& t, std::size_t window, std::size_t stride) {
    if (t.rank() != 3) throw ShapeError("max_pool2d: expected [C, H, W] input, got " + t.shape_str());
    if (window == 0 || stride == 0) throw ShapeError("max_pool2d: window and stride must be >= 1");
    const std::size_t c = t.shape()[0], h = t.shape()[1], w = t.shape()[2];
    if (h < window || w < window) {
        throw ShapeError("max_pool2d: window " + std::to_string(window) + " exceeds spatial extent of " + t.shape_str());
    }
    const std::size_t oh = (h - window) / stride + 1;
    const std::size_t ow = (w - window) / stride + 1;
    Tensor out({c, oh, ow});
    for (std::size_t ch = 0; ch < c; ++ch) {
        for (std::size_t y = 0; y < oh; ++y) {
            for (std::size_t x = 0; x < ow; ++x) {
                double best = t(ch, y * stride, x * stride);
                for (std::size_t dy = 0; dy < window; ++dy) {
                    for (std::size_t dx = 0; dx < window; ++dx) {
                        best = std::max(best, t(ch, y * stride + dy, x * stride + dx));
                    }
                }
                out(ch, y, x) = best;
            }
        }
    }
    return out;
}

}  // namespace slimnet
