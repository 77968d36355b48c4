#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace v2x {

using Vec = std::vector<double>;

/// Dense row-major matrix.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    Vec a;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

    double& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }
};

/// out = W x
inline void matvec(const Matrix& w, std::span<const double> x, std::span<double> out) {
    if (x.size() != w.cols || out.size() != w.rows) throw std::invalid_argument("matvec: shape mismatch");
    const double* row = w.a.data();
    for (std::size_t i = 0; i < w.rows; ++i, row += w.cols) {
        double acc = 0.0;
        for (std::size_t j = 0; j < w.cols; ++j) acc += row[j] * x[j];
        out[i] = acc;
    }
}

/// out = W^T g
inline void matvec_transposed(const Matrix& w, std::span<const double> g, std::span<double> out) {
    if (g.size() != w.rows || out.size() != w.cols) throw std::invalid_argument("matvec_transposed: shape mismatch");
    for (std::size_t j = 0; j < w.cols; ++j) out[j] = 0.0;
    const double* row = w.a.data();
    for (std::size_t i = 0; i < w.rows; ++i, row += w.cols) {
        const double gi = g[i];
        for (std::size_t j = 0; j < w.cols; ++j) out[j] += gi * row[j];
    }
}

/// G += g x^T
inline void outer_accumulate(std::span<const double> g, std::span<const double> x, Matrix& acc) {
    if (g.size() != acc.rows || x.size() != acc.cols) throw std::invalid_argument("outer_accumulate: shape mismatch");
    double* row = acc.a.data();
    for (std::size_t i = 0; i < acc.rows; ++i, row += acc.cols) {
        const double gi = g[i];
        for (std::size_t j = 0; j < acc.cols; ++j) row[j] += gi * x[j];
    }
}

/// y += alpha x
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("axpy: shape mismatch");
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

}  // namespace v2x
