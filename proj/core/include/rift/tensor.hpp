#pragma once

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <vector>

#include "rift/errors.hpp"

namespace rift {

/// Dense row-major double tensor. Shapes are limited to what the two policy
/// families need (rank <= 3); most of the library works with rank-1/2 data.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> values;
    bool requires_grad = false;
    std::optional<std::vector<double>> grad;

    Tensor() = default;
    Tensor(std::vector<std::size_t> s, std::vector<double> v, bool rg = false)
        : shape(std::move(s)), values(std::move(v)), requires_grad(rg) {
        if (numel_of(shape) != values.size()) {
            throw InputError("tensor shape does not match value count");
        }
    }

    static std::size_t numel_of(const std::vector<std::size_t>& shape) {
        std::size_t n = 1;
        for (std::size_t d : shape) n *= d;
        return n;
    }

    static Tensor zeros(std::vector<std::size_t> shape, bool rg = false) {
        std::size_t n = numel_of(shape);
        return Tensor(std::move(shape), std::vector<double>(n, 0.0), rg);
    }

    static Tensor scalar(double v, bool rg = false) {
        return Tensor({}, {v}, rg);
    }

    static Tensor vector1d(std::vector<double> v, bool rg = false) {
        std::size_t n = v.size();
        return Tensor({n}, std::move(v), rg);
    }

    std::size_t numel() const { return values.size(); }
    std::size_t rank() const { return shape.size(); }
    bool is_scalar() const { return values.size() == 1 && shape.empty(); }

    /// Row/column extents for rank-2 views. Rank-1 tensors are treated as a
    /// single row; scalars as 1x1.
    std::size_t rows() const {
        if (shape.size() >= 2) return shape[0];
        return 1;
    }
    std::size_t cols() const {
        if (shape.size() >= 2) return shape[1];
        if (shape.size() == 1) return shape[0];
        return 1;
    }

    double& at(std::size_t r, std::size_t c) { return values[r * cols() + c]; }
    double at(std::size_t r, std::size_t c) const { return values[r * cols() + c]; }

    void zero_grad() {
        grad = std::vector<double>(values.size(), 0.0);
    }
};

}  // namespace rift
