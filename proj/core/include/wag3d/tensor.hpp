#pragma once

#include <cstdint>
#include <initializer_list>
#include <vector>

#include "wag3d/common.hpp"

namespace wag3d {

// Dense row-major nd array of doubles. The last axis is contiguous.
// This is the working type for latent feature maps and network activations;
// file payloads convert to the dtype their format mandates at the boundary.
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<int64_t> shape) : shape_(std::move(shape)) {
        data_.assign(static_cast<size_t>(numel_of(shape_)), 0.0);
    }

    Tensor(std::vector<int64_t> shape, std::vector<double> data)
        : shape_(std::move(shape)), data_(std::move(data)) {
        require(static_cast<int64_t>(data_.size()) == numel_of(shape_),
                "tensor data size ", data_.size(), " does not match shape volume ",
                numel_of(shape_));
    }

    static Tensor zeros(std::vector<int64_t> shape) { return Tensor(std::move(shape)); }

    static Tensor full(std::vector<int64_t> shape, double v) {
        Tensor t(std::move(shape));
        for (auto& x : t.data_) x = v;
        return t;
    }

    int64_t numel() const { return static_cast<int64_t>(data_.size()); }
    int ndim() const { return static_cast<int>(shape_.size()); }
    int64_t dim(int i) const { return shape_[static_cast<size_t>(i)]; }
    const std::vector<int64_t>& shape() const { return shape_; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& vec() { return data_; }
    const std::vector<double>& vec() const { return data_; }

    double& operator[](int64_t i) { return data_[static_cast<size_t>(i)]; }
    double operator[](int64_t i) const { return data_[static_cast<size_t>(i)]; }

    // flat offset of (i0, i1, ...) in row-major order
    template <typename... Ix>
    int64_t offset(Ix... ix) const {
        const int64_t idx[] = {static_cast<int64_t>(ix)...};
        int64_t off = 0;
        for (size_t d = 0; d < sizeof...(Ix); ++d) off = off * shape_[d] + idx[d];
        return off;
    }

    template <typename... Ix>
    double& at(Ix... ix) { return data_[static_cast<size_t>(offset(ix...))]; }
    template <typename... Ix>
    double at(Ix... ix) const { return data_[static_cast<size_t>(offset(ix...))]; }

    Tensor reshaped(std::vector<int64_t> shape) const {
        require(numel_of(shape) == numel(), "reshape volume mismatch");
        return Tensor(std::move(shape), data_);
    }

    bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

    static int64_t numel_of(const std::vector<int64_t>& shape) {
        int64_t n = 1;
        for (int64_t d : shape) {
            require(d >= 0, "negative dimension");
            n *= d;
        }
        return n;
    }

private:
    std::vector<int64_t> shape_;
    std::vector<double> data_;
};

inline double dot(const Tensor& a, const Tensor& b) {
    double s = 0.0;
    for (int64_t i = 0; i < a.numel(); ++i) s += a[i] * b[i];
    return s;
}

inline double max_abs_diff(const Tensor& a, const Tensor& b) {
    double m = 0.0;
    for (int64_t i = 0; i < a.numel(); ++i) {
        double d = std::abs(a[i] - b[i]);
        if (d > m) m = d;
    }
    return m;
}

} // namespace wag3d
