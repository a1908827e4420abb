#include "trnn/backprop.hpp"

namespace trnn {

namespace {

Shape batch_shape(std::size_t n, const Shape& extents) {
    Shape s{n};
    s.insert(s.end(), extents.begin(), extents.end());
    return s;
}

TuckerGrads tucker_backward(const Tensor& g_out, const TuckerLayer& layer, const Tensor* pre,
                            const Tensor& input, bool need_input) {
    const std::size_t n = input.shape().front();
    if (input.shape() != batch_shape(n, layer.input_extents())) {
        throw ShapeError("Tucker backward: cached input " + shape_string(input.shape()) +
                         " does not match layer input extents " +
                         shape_string(layer.input_extents()));
    }
    if (g_out.shape() != batch_shape(n, layer.output_extents())) {
        throw ShapeError("Tucker backward: output gradient " + shape_string(g_out.shape()) +
                         " does not match layer output extents " +
                         shape_string(layer.output_extents()));
    }
    const auto& factors = layer.factors();
    TuckerGrads grads;
    grads.factors.reserve(factors.size());
    // dF_k = G_(k) * (input x_{j != k} F_j)_(k)^T
    //      = (G x_{j != k} F_j^T)_(k) * input_(k)^T; the cheaper side is
    // pushed through the other factors.
    const bool project_grad = g_out.size() > input.size();
    for (std::size_t k = 0; k < factors.size(); ++k) {
        Tensor partial = project_grad ? g_out : input;
        for (std::size_t j = 0; j < factors.size(); ++j) {
            if (j == k) continue;
            partial = project_grad ? mode_n_product(partial, factors[j].transpose(), j + 2)
                                   : mode_n_product(partial, factors[j], j + 2);
        }
        grads.factors.push_back(project_grad ? mode_gram(partial, input, k + 2)
                                             : mode_gram(g_out, partial, k + 2));
    }
    if (need_input) {
        Tensor g = g_out;
        for (std::size_t j = 0; j < factors.size(); ++j) {
            g = mode_n_product(g, factors[j].transpose(), j + 2);
        }
        grads.input = pre ? relu_backward(g, *pre) : std::move(g);
    }
    return grads;
}

}  // namespace

GradViews GradientSet::views() const {
    GradViews v;
    for (const auto& layer : encoder) {
        for (const auto& f : layer) v.emplace_back(f.data(), static_cast<std::size_t>(f.size()));
    }
    v.emplace_back(core.data());
    for (const auto& layer : decoder) {
        for (const auto& f : layer) v.emplace_back(f.data(), static_cast<std::size_t>(f.size()));
    }
    return v;
}

Tensor loss_grad(const Tensor& y_hat, const Tensor& y) {
    if (y_hat.shape() != y.shape()) {
        throw ShapeError("loss_grad: prediction " + shape_string(y_hat.shape()) + " vs target " +
                         shape_string(y.shape()));
    }
    return (1.0 / static_cast<double>(y.shape().front())) * (y_hat - y);
}

TuckerGrads expand_tucker_backward(const Tensor& g_out, const TuckerLayer& layer,
                                   const Tensor* z_prev, const Tensor& a_prev) {
    return tucker_backward(g_out, layer, z_prev, a_prev, true);
}

TuckerGrads shrink_tucker_backward(const Tensor& g_out, const TuckerLayer& layer,
                                   const Tensor* r_prev, const Tensor& s_prev, bool need_input) {
    return tucker_backward(g_out, layer, r_prev, s_prev, need_input);
}

ContractionGrads contraction_backward(const Tensor& g_out, const ContractionLayer& layer,
                                      const Tensor& s_last) {
    const std::size_t n = s_last.shape().front();
    if (s_last.shape() != batch_shape(n, layer.input_extents())) {
        throw ShapeError("contraction backward: cached input " + shape_string(s_last.shape()) +
                         " does not match core " + shape_string(layer.core.shape()));
    }
    if (g_out.shape() != batch_shape(n, layer.output_extents())) {
        throw ShapeError("contraction backward: output gradient " + shape_string(g_out.shape()) +
                         " does not match core " + shape_string(layer.core.shape()));
    }
    using ConstMap = Eigen::Map<const RowMatrix>;
    using Map = Eigen::Map<RowMatrix>;
    const auto rows = static_cast<Eigen::Index>(n);
    const auto p = static_cast<Eigen::Index>(s_last.sample_size());
    const auto q = static_cast<Eigen::Index>(g_out.sample_size());
    ConstMap g(g_out.data().data(), rows, q);
    ConstMap s(s_last.data().data(), rows, p);
    ConstMap c(layer.core.data().data(), p, q);

    ContractionGrads grads{Tensor(s_last.shape()), Tensor(layer.core.shape())};
    Map(grads.input.data().data(), rows, p).noalias() = g * c.transpose();
    Map(grads.core.data().data(), p, q).noalias() = s.transpose() * g;
    return grads;
}

GradientSet full_backward(const TrnnModel& model, const ForwardCache& cache, const Tensor& y) {
    const std::size_t n1 = model.encoder.size();
    const std::size_t n2 = model.decoder.size();
    if (cache.s.size() != n1 + 1 || cache.r.size() != n1 + 1 || cache.z.size() != n2 + 1 ||
        cache.a.size() != n2) {
        throw StaleCacheError("forward cache layout does not match the model's layer counts");
    }
    const CacheShapes expected = infer_cache_shapes(model.spec, cache.batch_size());
    for (std::size_t i = 0; i <= n1; ++i) {
        if (cache.s[i].shape() != expected.s[i] || (i > 0 && cache.r[i].shape() != expected.r[i])) {
            throw StaleCacheError("encoder cache entry " + std::to_string(i) +
                                  " has the wrong shape");
        }
    }
    for (std::size_t i = 0; i <= n2; ++i) {
        if (cache.z[i].shape() != expected.z[i] || (i < n2 && cache.a[i].shape() != expected.a[i])) {
            throw StaleCacheError("decoder cache entry " + std::to_string(i) +
                                  " has the wrong shape");
        }
    }
    const bool relu = cache.activation == Activation::relu;

    GradientSet grads;
    grads.encoder.resize(n1);
    grads.decoder.resize(n2);

    Tensor g = loss_grad(cache.output(), y);
    for (std::size_t n = n2; n >= 1; --n) {
        const Tensor* pre = relu ? &cache.z[n - 1] : nullptr;
        auto step = expand_tucker_backward(g, model.decoder[n - 1], pre, cache.a[n - 1]);
        grads.decoder[n - 1] = std::move(step.factors);
        g = std::move(step.input);
    }

    auto core_step = contraction_backward(g, model.contraction, cache.s[n1]);
    grads.core = std::move(core_step.core);
    g = std::move(core_step.input);
    if (n1 > 0 && relu) g = relu_backward(g, cache.r[n1]);

    for (std::size_t n = n1; n >= 1; --n) {
        const Tensor* pre = (relu && n > 1) ? &cache.r[n - 1] : nullptr;
        auto step = shrink_tucker_backward(g, model.encoder[n - 1], pre, cache.s[n - 1], n > 1);
        grads.encoder[n - 1] = std::move(step.factors);
        g = std::move(step.input);
    }
    return grads;
}

}  // namespace trnn
