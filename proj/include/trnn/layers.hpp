#pragma once

#include <cstddef>
#include <vector>

#include "trnn/network.hpp"
#include "trnn/tensor.hpp"

namespace trnn {

enum class TuckerKind { shrink, expand };

/// Mode-wise linear map over every non-sample mode. factors()[j] acts on
/// mode j + 2 and has shape (output extent) x (input extent). Shrinking
/// layers never grow a mode, expanding layers never shrink one.
class TuckerLayer {
public:
    TuckerLayer() = default;
    TuckerLayer(TuckerKind kind, std::vector<Matrix> factors);

    [[nodiscard]] TuckerKind kind() const { return kind_; }
    [[nodiscard]] const std::vector<Matrix>& factors() const { return factors_; }
    /// Mutable access for optimizers; callers keep each factor's shape.
    [[nodiscard]] std::vector<Matrix>& factors() { return factors_; }

    [[nodiscard]] Shape input_extents() const;
    [[nodiscard]] Shape output_extents() const;

    /// in x_2 F_2 x_3 ... x_m F_m; the sample mode is untouched.
    [[nodiscard]] Tensor forward(const Tensor& in) const;

    friend bool operator==(const TuckerLayer&, const TuckerLayer&) = default;

private:
    TuckerKind kind_ = TuckerKind::shrink;
    std::vector<Matrix> factors_;
};

/// Per-sample Einstein contraction against a learnable core whose leading
/// modes match the encoder output and trailing modes give Q^(0).
struct ContractionLayer {
    Tensor core;
    std::size_t input_modes = 0;

    [[nodiscard]] Shape input_extents() const;
    [[nodiscard]] Shape output_extents() const;

    friend bool operator==(const ContractionLayer&, const ContractionLayer&) = default;
};

Tensor shrink_tucker_forward(const TuckerLayer& layer, const Tensor& s_prev);
Tensor expand_tucker_forward(const TuckerLayer& layer, const Tensor& a_prev);
Tensor contraction_forward(const ContractionLayer& layer, const Tensor& s_last);

Tensor relu_forward(const Tensor& t);
/// g masked by 1{pre >= 0}; the subgradient at exactly zero passes through.
Tensor relu_backward(const Tensor& g, const Tensor& pre);
Tensor apply_activation(Activation act, const Tensor& t);

/// (1 / 2N) * ||y_hat - y||_F^2 with N the leading extent.
double mse_loss(const Tensor& y_hat, const Tensor& y);

/// Everything backprop needs from one forward pass. Index conventions match
/// the layer numbering: s[0] is the input, r[0] is unused, z.back() is the
/// prediction.
struct ForwardCache {
    std::vector<Tensor> s;
    std::vector<Tensor> r;
    std::vector<Tensor> z;
    std::vector<Tensor> a;
    Activation activation = Activation::relu;

    [[nodiscard]] const Tensor& output() const { return z.back(); }
    [[nodiscard]] std::size_t batch_size() const { return s.front().shape().front(); }
};

}  // namespace trnn
