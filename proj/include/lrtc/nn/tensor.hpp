#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "lrtc/error.hpp"
#include "lrtc/rng.hpp"

namespace lrtc::nn {

using Shape = std::vector<std::size_t>;

inline std::string shape_str(const Shape &s) {
    std::string out = "[";
    for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "x" : "") + std::to_string(s[i]);
    return out + "]";
}

inline std::size_t shape_size(const Shape &s) {
    return std::accumulate(s.begin(), s.end(), std::size_t{1}, std::multiplies<>());
}

/// Dense row-major float64 array.
class Tensor {
   public:
    Tensor() = default;

    explicit Tensor(Shape shape, double fill = 0.0) : shape_(std::move(shape)) {
        check_extents();
        data_.assign(shape_size(shape_), fill);
    }

    Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
        check_extents();
        if (shape_size(shape_) != data_.size()) {
            throw ShapeError("shape " + shape_str(shape_) + " does not match " + std::to_string(data_.size()) +
                             " values");
        }
    }

    static Tensor matrix(std::size_t rows, std::size_t cols, double fill = 0.0) { return Tensor({rows, cols}, fill); }

    static Tensor from_rows(std::initializer_list<std::initializer_list<double>> rows) {
        const std::size_t r = rows.size();
        const std::size_t c = r ? rows.begin()->size() : 0;
        std::vector<double> data;
        for (const auto &row : rows) {
            if (row.size() != c) throw ShapeError("ragged rows");
            data.insert(data.end(), row.begin(), row.end());
        }
        return Tensor({r, c}, std::move(data));
    }

    static Tensor scalar(double v) { return Tensor({1, 1}, v); }

    static Tensor identity(std::size_t n) {
        Tensor t = matrix(n, n);
        for (std::size_t i = 0; i < n; ++i) t(i, i) = 1.0;
        return t;
    }

    /// Values uniform in [-scale, scale).
    static Tensor uniform(Shape shape, double scale, Rng &rng) {
        Tensor t(std::move(shape));
        for (double &v : t.data_) v = rng.uniform(-scale, scale);
        return t;
    }

    const Shape &shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    std::size_t rows() const { return shape_.empty() ? 0 : shape_.front(); }
    std::size_t cols() const { return shape_.size() < 2 ? 1 : shape_.back(); }

    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }
    std::vector<double> &values() { return data_; }
    const std::vector<double> &values() const { return data_; }

    double &operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }
    double &operator()(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

    double item() const {
        if (data_.size() != 1) throw ShapeError("item() on tensor of shape " + shape_str(shape_));
        return data_[0];
    }

    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols(), cols()}; }
    std::span<double> row(std::size_t r) { return {data_.data() + r * cols(), cols()}; }

    bool is_matrix() const { return shape_.size() == 2; }

    bool all_finite() const {
        for (double v : data_) {
            if (!std::isfinite(v)) return false;
        }
        return true;
    }

    void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

    bool operator==(const Tensor &) const = default;

   private:
    void check_extents() const {
        for (std::size_t e : shape_) {
            if (e == 0) throw ShapeError("zero extent in shape " + shape_str(shape_));
        }
    }

    Shape shape_;
    std::vector<double> data_;
};

namespace kernel {

/// C (+)= op(A) * op(B), op = optional transpose. Shapes are of op(A): m x k, op(B): k x n.
inline void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k, const double *a,
                 const double *b, double *c, bool accumulate) {
    if (!accumulate) std::fill(c, c + m * n, 0.0);
    const std::size_t lda = trans_a ? m : k;
    const std::size_t ldb = trans_b ? k : n;
    for (std::size_t i = 0; i < m; ++i) {
        double *crow = c + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const double av = trans_a ? a[p * lda + i] : a[i * lda + p];
            if (av == 0.0) continue;
            if (!trans_b) {
                const double *brow = b + p * ldb;
                for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
            } else {
                for (std::size_t j = 0; j < n; ++j) crow[j] += av * b[j * ldb + p];
            }
        }
    }
}

}  // namespace kernel

}  // namespace lrtc::nn
