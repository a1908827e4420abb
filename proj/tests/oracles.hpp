#pragma once

// Independent reference implementations used as test oracles. Everything
// here walks explicit multi-indices with nested loops and shares no code with
// the library's reshaping or GEMM paths.

#include <cmath>
#include <cstdint>
#include <vector>

#include "trnn/random.hpp"
#include "trnn/tensor.hpp"

namespace oracle {

using trnn::Matrix;
using trnn::Shape;
using trnn::Tensor;

/// Row-major flat offset of a zero-based multi-index.
inline std::size_t offset(const Shape& shape, const std::vector<std::size_t>& idx) {
    std::size_t off = 0;
    for (std::size_t k = 0; k < shape.size(); ++k) off = off * shape[k] + idx[k];
    return off;
}

/// Advances idx like an odometer; returns false after the last index.
inline bool next_index(const Shape& shape, std::vector<std::size_t>& idx) {
    for (std::size_t k = shape.size(); k-- > 0;) {
        if (++idx[k] < shape[k]) return true;
        idx[k] = 0;
    }
    return false;
}

inline double get(const Tensor& t, const std::vector<std::size_t>& idx) {
    return t.values()[offset(t.shape(), idx)];
}

/// result[.., j, ..] = sum_i t[.., i, ..] m(j, i), mode is 1-based.
inline Tensor mode_product(const Tensor& t, const Matrix& m, std::size_t mode) {
    Shape out_shape = t.shape();
    out_shape[mode - 1] = static_cast<std::size_t>(m.rows());
    std::vector<double> out(trnn::shape_size(out_shape), 0.0);
    std::vector<std::size_t> idx(out_shape.size(), 0);
    do {
        double acc = 0.0;
        std::vector<std::size_t> src = idx;
        for (std::size_t i = 0; i < t.shape()[mode - 1]; ++i) {
            src[mode - 1] = i;
            acc += get(t, src) * m(static_cast<Eigen::Index>(idx[mode - 1]),
                                   static_cast<Eigen::Index>(i));
        }
        out[offset(out_shape, idx)] = acc;
    } while (next_index(out_shape, idx));
    return Tensor(out_shape, std::move(out));
}

/// out[j..] = sum_{i..} x[i..] c[i.., j..]
inline Tensor contract(const Tensor& x, const Tensor& c) {
    const std::size_t lead = x.order();
    Shape out_shape(c.shape().begin() + static_cast<std::ptrdiff_t>(lead), c.shape().end());
    if (out_shape.empty()) out_shape = {1};
    std::vector<double> out(trnn::shape_size(out_shape), 0.0);
    std::vector<std::size_t> ci(c.order(), 0);
    do {
        std::vector<std::size_t> xi(ci.begin(), ci.begin() + static_cast<std::ptrdiff_t>(lead));
        std::vector<std::size_t> oi(ci.begin() + static_cast<std::ptrdiff_t>(lead), ci.end());
        if (oi.empty()) oi = {0};
        out[offset(out_shape, oi)] += get(x, xi) * get(c, ci);
    } while (next_index(c.shape(), ci));
    return Tensor(out_shape, std::move(out));
}

/// out[i_1..i_N] = sum_{r_1..r_N} core[r..] prod_k U_k(i_k, r_k)
inline Tensor tucker(const Tensor& core, const std::vector<Matrix>& factors) {
    Shape out_shape;
    for (const auto& f : factors) out_shape.push_back(static_cast<std::size_t>(f.rows()));
    std::vector<double> out(trnn::shape_size(out_shape), 0.0);
    std::vector<std::size_t> oi(out_shape.size(), 0);
    do {
        double acc = 0.0;
        std::vector<std::size_t> ri(core.order(), 0);
        do {
            double term = get(core, ri);
            for (std::size_t k = 0; k < factors.size(); ++k) {
                term *= factors[k](static_cast<Eigen::Index>(oi[k]), static_cast<Eigen::Index>(ri[k]));
            }
            acc += term;
        } while (next_index(core.shape(), ri));
        out[offset(out_shape, oi)] = acc;
    } while (next_index(out_shape, oi));
    return Tensor(out_shape, std::move(out));
}

inline Tensor random_tensor(const Shape& shape, std::uint64_t seed) {
    trnn::CounterRng rng(seed, 17);
    Tensor t(shape);
    for (double& v : t.data()) v = rng.uniform(-1.0, 1.0);
    return t;
}

inline Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    trnn::CounterRng rng(seed, 23);
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rng.uniform(-1.0, 1.0);
    }
    return m;
}

/// max_i |a_i - b_i| / max(1, max_i |b_i|)
inline double rel_diff(const Tensor& a, const Tensor& b) {
    double diff = 0.0;
    double scale = 1.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        diff = std::max(diff, std::abs(a[i] - b[i]));
        scale = std::max(scale, std::abs(b[i]));
    }
    return diff / scale;
}

/// Every shape of the given order with extents in [1, max_extent] and at
/// most max_size entries.
inline std::vector<Shape> all_shapes(std::size_t order, std::size_t max_extent,
                                     std::size_t max_size) {
    std::vector<Shape> out;
    Shape s(order, 1);
    while (true) {
        if (trnn::shape_size(s) <= max_size) out.push_back(s);
        std::size_t k = order;
        while (k-- > 0) {
            if (++s[k] <= max_extent) break;
            s[k] = 1;
        }
        if (k == static_cast<std::size_t>(-1)) break;
    }
    return out;
}

}  // namespace oracle
