#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <string>
#include <vector>

#include "sacl/common.hpp"

namespace sacl {

// Dense row-major tensor. Heavy math lives in kernels.hpp; this type only
// owns storage and shape.
template <class T>
struct Tensor {
    std::vector<std::int64_t> shape;
    std::vector<T> v;

    Tensor() = default;
    explicit Tensor(std::vector<std::int64_t> s) : shape(std::move(s)) {
        v.assign(static_cast<std::size_t>(numel_of(shape)), T(0));
    }

    static std::int64_t numel_of(const std::vector<std::int64_t>& s) {
        std::int64_t n = 1;
        for (auto d : s) {
            require(d >= 0, "tensor: negative dimension");
            n *= d;
        }
        return n;
    }

    static Tensor zeros(std::vector<std::int64_t> s) { return Tensor(std::move(s)); }

    std::int64_t numel() const { return static_cast<std::int64_t>(v.size()); }
    int ndim() const { return static_cast<int>(shape.size()); }
    std::int64_t size(int i) const { return shape.at(static_cast<std::size_t>(i)); }

    T* data() { return v.data(); }
    const T* data() const { return v.data(); }

    T& at2(std::int64_t i, std::int64_t j) { return v[static_cast<std::size_t>(i * shape[1] + j)]; }
    T at2(std::int64_t i, std::int64_t j) const { return v[static_cast<std::size_t>(i * shape[1] + j)]; }
    T& at3(std::int64_t i, std::int64_t j, std::int64_t k) {
        return v[static_cast<std::size_t>((i * shape[1] + j) * shape[2] + k)];
    }
    T at3(std::int64_t i, std::int64_t j, std::int64_t k) const {
        return v[static_cast<std::size_t>((i * shape[1] + j) * shape[2] + k)];
    }

    void zero() { std::fill(v.begin(), v.end(), T(0)); }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    bool all_finite() const {
        for (const T& x : v)
            if (!std::isfinite(static_cast<double>(x))) return false;
        return true;
    }

    std::string shape_str() const {
        std::string s = "(";
        for (std::size_t i = 0; i < shape.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(shape[i]);
        }
        return s + ")";
    }
};

} // namespace sacl
