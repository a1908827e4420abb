#include "trnn/standardize.hpp"

#include <cmath>

namespace trnn {

Standardizer Standardizer::fit(const Tensor& data) {
    const Shape sample = data.sample_shape().empty() ? Shape{1} : data.sample_shape();
    const std::size_t n = data.shape().front();
    const std::size_t m = data.sample_size();
    Tensor mean(sample);
    Tensor scale(sample, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) mean[j] += data[i * m + j];
    }
    for (std::size_t j = 0; j < m; ++j) mean[j] /= static_cast<double>(n);
    for (std::size_t j = 0; j < m; ++j) {
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = data[i * m + j] - mean[j];
            ss += d * d;
        }
        const double sd = std::sqrt(ss / static_cast<double>(n));
        if (sd > 1e-8 * (1.0 + std::abs(mean[j]))) scale[j] = sd;
    }
    return {std::move(mean), std::move(scale)};
}

Tensor Standardizer::apply(const Tensor& data) const {
    if (data.sample_size() != mean.size()) {
        throw ShapeError("standardizer fitted on samples of " + shape_string(mean.shape()) +
                         " applied to " + shape_string(data.shape()));
    }
    Tensor out = data;
    const std::size_t m = mean.size();
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = (out[i] - mean[i % m]) / scale[i % m];
    }
    return out;
}

Tensor Standardizer::invert(const Tensor& data) const {
    if (data.sample_size() != mean.size()) {
        throw ShapeError("standardizer fitted on samples of " + shape_string(mean.shape()) +
                         " applied to " + shape_string(data.shape()));
    }
    Tensor out = data;
    const std::size_t m = mean.size();
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = out[i] * scale[i % m] + mean[i % m];
    }
    return out;
}

}  // namespace trnn
