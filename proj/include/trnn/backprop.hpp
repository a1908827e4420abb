#pragma once

#include <stdexcept>
#include <vector>

#include "trnn/layers.hpp"
#include "trnn/model.hpp"
#include "trnn/tensor.hpp"

namespace trnn {

/// Cache does not belong to the model it is paired with.
class StaleCacheError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Loss gradients with the same layout as the model parameters.
struct GradientSet {
    std::vector<std::vector<Matrix>> encoder;
    Tensor core;
    std::vector<std::vector<Matrix>> decoder;

    /// Same block order as TrnnModel::parameters().
    [[nodiscard]] GradViews views() const;
};

/// (1 / N) * (y_hat - y).
Tensor loss_grad(const Tensor& y_hat, const Tensor& y);

struct TuckerGrads {
    Tensor input;                 // gradient w.r.t. the layer's pre-activation input
    std::vector<Matrix> factors;  // one per factor, same shapes
};

struct ContractionGrads {
    Tensor input;
    Tensor core;
};

/// Backward through z_n = a_{n-1} x_2 W_2 ... x_d W_d and the ReLU that
/// produced a_{n-1}. `z_prev` is that ReLU's input; pass nullptr when no
/// activation precedes the layer (identity network) to skip the mask.
TuckerGrads expand_tucker_backward(const Tensor& g_out, const TuckerLayer& layer,
                                   const Tensor* z_prev, const Tensor& a_prev);

/// dE/ds = sum_q g * C and dE/dC = sum_i g * s, per sample.
ContractionGrads contraction_backward(const Tensor& g_out, const ContractionLayer& layer,
                                      const Tensor& s_last);

/// Encoder mirror of expand_tucker_backward; for the first layer `r_prev` is
/// nullptr and the input gradient may be skipped with need_input = false.
TuckerGrads shrink_tucker_backward(const Tensor& g_out, const TuckerLayer& layer,
                                   const Tensor* r_prev, const Tensor& s_prev,
                                   bool need_input = true);

/// Chains the layer rules from the loss back to the first encoder layer.
GradientSet full_backward(const TrnnModel& model, const ForwardCache& cache, const Tensor& y);

}  // namespace trnn
