#include "trnn/layers.hpp"

#include <algorithm>

namespace trnn {

TuckerLayer::TuckerLayer(TuckerKind kind, std::vector<Matrix> factors)
    : kind_(kind), factors_(std::move(factors)) {
    if (factors_.empty()) throw ShapeError("Tucker layer needs at least one factor");
    for (std::size_t j = 0; j < factors_.size(); ++j) {
        const auto& f = factors_[j];
        if (f.rows() == 0 || f.cols() == 0) {
            throw ShapeError("Tucker factor for mode " + std::to_string(j + 2) + " is empty");
        }
        if (kind_ == TuckerKind::shrink && f.rows() > f.cols()) {
            throw ShapeError("shrinking factor for mode " + std::to_string(j + 2) + " is " +
                             std::to_string(f.rows()) + "x" + std::to_string(f.cols()));
        }
        if (kind_ == TuckerKind::expand && f.rows() < f.cols()) {
            throw ShapeError("expanding factor for mode " + std::to_string(j + 2) + " is " +
                             std::to_string(f.rows()) + "x" + std::to_string(f.cols()));
        }
    }
}

Shape TuckerLayer::input_extents() const {
    Shape s;
    for (const auto& f : factors_) s.push_back(static_cast<std::size_t>(f.cols()));
    return s;
}

Shape TuckerLayer::output_extents() const {
    Shape s;
    for (const auto& f : factors_) s.push_back(static_cast<std::size_t>(f.rows()));
    return s;
}

Tensor TuckerLayer::forward(const Tensor& in) const {
    if (in.order() != factors_.size() + 1) {
        throw ShapeError("Tucker layer with " + std::to_string(factors_.size()) +
                         " factors applied to order-" + std::to_string(in.order()) + " input " +
                         shape_string(in.shape()));
    }
    Tensor out = in;
    for (std::size_t j = 0; j < factors_.size(); ++j) {
        out = mode_n_product(out, factors_[j], j + 2);
    }
    return out;
}

Shape ContractionLayer::input_extents() const {
    return Shape(core.shape().begin(), core.shape().begin() + static_cast<std::ptrdiff_t>(input_modes));
}

Shape ContractionLayer::output_extents() const {
    return Shape(core.shape().begin() + static_cast<std::ptrdiff_t>(input_modes), core.shape().end());
}

Tensor shrink_tucker_forward(const TuckerLayer& layer, const Tensor& s_prev) {
    if (layer.kind() != TuckerKind::shrink) throw ShapeError("expected a shrinking Tucker layer");
    return layer.forward(s_prev);
}

Tensor expand_tucker_forward(const TuckerLayer& layer, const Tensor& a_prev) {
    if (layer.kind() != TuckerKind::expand) throw ShapeError("expected an expanding Tucker layer");
    return layer.forward(a_prev);
}

Tensor contraction_forward(const ContractionLayer& layer, const Tensor& s_last) {
    const Shape in = layer.input_extents();
    if (s_last.sample_shape() != in) {
        throw ShapeError("contraction layer expects samples of shape " + shape_string(in) +
                         ", got " + shape_string(s_last.sample_shape()));
    }
    const std::size_t n = s_last.shape().front();
    const Shape out_ext = layer.output_extents();
    Shape out_shape{n};
    out_shape.insert(out_shape.end(), out_ext.begin(), out_ext.end());
    Tensor out(out_shape);

    using ConstMap = Eigen::Map<const RowMatrix>;
    const auto p = static_cast<Eigen::Index>(shape_size(in));
    const auto q = static_cast<Eigen::Index>(shape_size(out_ext));
    const auto rows = static_cast<Eigen::Index>(n);
    Eigen::Map<RowMatrix>(out.data().data(), rows, q).noalias() =
        ConstMap(s_last.data().data(), rows, p) * ConstMap(layer.core.data().data(), p, q);
    return out;
}

Tensor relu_forward(const Tensor& t) {
    Tensor out = t;
    for (auto& v : out.data()) v = std::max(v, 0.0);
    return out;
}

Tensor relu_backward(const Tensor& g, const Tensor& pre) {
    if (g.shape() != pre.shape()) {
        throw ShapeError("relu_backward: gradient " + shape_string(g.shape()) +
                         " vs pre-activation " + shape_string(pre.shape()));
    }
    Tensor out = g;
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (!(pre[i] >= 0.0)) out[i] = 0.0;
    }
    return out;
}

Tensor apply_activation(Activation act, const Tensor& t) {
    return act == Activation::relu ? relu_forward(t) : t;
}

double mse_loss(const Tensor& y_hat, const Tensor& y) {
    if (y_hat.shape() != y.shape()) {
        throw ShapeError("mse_loss: prediction " + shape_string(y_hat.shape()) + " vs target " +
                         shape_string(y.shape()));
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double d = y_hat[i] - y[i];
        sum += d * d;
    }
    return sum / (2.0 * static_cast<double>(y.shape().front()));
}

}  // namespace trnn
