#pragma once

#include "trnn/tensor.hpp"

namespace trnn {

/// Per-entry affine normalization over the sample mode. mean and scale have
/// the sample shape; entries whose spread is negligible get scale 1.
struct Standardizer {
    Tensor mean;
    Tensor scale;

    static Standardizer fit(const Tensor& data);
    /// (x - mean) / scale, broadcast over samples.
    [[nodiscard]] Tensor apply(const Tensor& data) const;
    /// x * scale + mean.
    [[nodiscard]] Tensor invert(const Tensor& data) const;

    friend bool operator==(const Standardizer&, const Standardizer&) = default;
};

}  // namespace trnn
