#include "trnn/network.hpp"

#include <algorithm>
#include <cmath>

namespace trnn {

std::string to_string(Activation a) {
    return a == Activation::relu ? "relu" : "identity";
}

Activation activation_from_string(const std::string& name) {
    if (name == "relu") return Activation::relu;
    if (name == "identity") return Activation::identity;
    throw std::invalid_argument("unknown activation '" + name + "'");
}

namespace {

void check_positive(const Shape& s, const std::string& what) {
    for (auto e : s) {
        if (e == 0) throw ShapeError(what + " has a zero extent: " + shape_string(s));
    }
}

Shape with_sample(std::size_t n, const Shape& s) {
    Shape out{n};
    out.insert(out.end(), s.begin(), s.end());
    return out;
}

std::size_t geometric_step(std::size_t from, std::size_t to, std::size_t step, std::size_t steps) {
    if (step == steps) return to;
    const double ratio = static_cast<double>(to) / static_cast<double>(from);
    const double v = static_cast<double>(from) *
                     std::pow(ratio, static_cast<double>(step) / static_cast<double>(steps));
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(v)));
}

}  // namespace

void NetworkSpec::validate() const {
    if (input_shape.empty()) throw ShapeError("input shape needs at least one non-sample mode");
    if (output_shape.empty()) throw ShapeError("output shape needs at least one non-sample mode");
    check_positive(input_shape, "input shape");
    check_positive(output_shape, "output shape");

    Shape prev = input_shape;
    for (std::size_t n = 0; n < encoder.size(); ++n) {
        const auto& cur = encoder[n];
        const std::string name = "encoder layer " + std::to_string(n + 1);
        if (cur.size() != input_shape.size()) {
            throw ShapeError(name + " has " + std::to_string(cur.size()) + " extents, expected " +
                             std::to_string(input_shape.size()));
        }
        check_positive(cur, name);
        for (std::size_t k = 0; k < cur.size(); ++k) {
            if (cur[k] > prev[k]) {
                throw ShapeError(name + " grows mode " + std::to_string(k + 2) + " from " +
                                 std::to_string(prev[k]) + " to " + std::to_string(cur[k]));
            }
        }
        prev = cur;
    }

    if (bottleneck_out.size() != output_shape.size()) {
        throw ShapeError("bottleneck output has " + std::to_string(bottleneck_out.size()) +
                         " extents, expected " + std::to_string(output_shape.size()));
    }
    check_positive(bottleneck_out, "bottleneck output");
    prev = bottleneck_out;
    for (std::size_t n = 0; n < decoder.size(); ++n) {
        const auto& cur = decoder[n];
        const std::string name = "decoder layer " + std::to_string(n + 1);
        if (cur.size() != output_shape.size()) {
            throw ShapeError(name + " has " + std::to_string(cur.size()) + " extents, expected " +
                             std::to_string(output_shape.size()));
        }
        check_positive(cur, name);
        for (std::size_t k = 0; k < cur.size(); ++k) {
            if (cur[k] < prev[k]) {
                throw ShapeError(name + " shrinks mode " + std::to_string(k + 2) + " from " +
                                 std::to_string(prev[k]) + " to " + std::to_string(cur[k]));
            }
        }
        prev = cur;
    }
    if (prev != output_shape) {
        throw ShapeError("decoder ends at " + shape_string(prev) + " but output shape is " +
                         shape_string(output_shape));
    }
}

Shape NetworkSpec::core_shape() const {
    Shape core = bottleneck_in();
    core.insert(core.end(), bottleneck_out.begin(), bottleneck_out.end());
    return core;
}

std::size_t NetworkSpec::parameter_count() const {
    std::size_t count = 0;
    Shape prev = input_shape;
    for (const auto& cur : encoder) {
        for (std::size_t k = 0; k < cur.size(); ++k) count += cur[k] * prev[k];
        prev = cur;
    }
    count += shape_size(core_shape());
    prev = bottleneck_out;
    for (const auto& cur : decoder) {
        for (std::size_t k = 0; k < cur.size(); ++k) count += cur[k] * prev[k];
        prev = cur;
    }
    return count;
}

NetworkSpec default_network_spec(const Shape& input_shape, const Shape& output_shape,
                                 std::size_t encoder_layers, std::size_t decoder_layers,
                                 Activation activation) {
    auto bottleneck = [](std::size_t e) {
        const std::size_t b = std::max<std::size_t>(2, (e + 7) / 8);
        return std::min(b, e);
    };
    NetworkSpec spec;
    spec.input_shape = input_shape;
    spec.output_shape = output_shape;
    spec.activation = activation;

    Shape in_b(input_shape.size());
    std::transform(input_shape.begin(), input_shape.end(), in_b.begin(), bottleneck);
    for (std::size_t n = 1; n <= encoder_layers; ++n) {
        Shape layer(input_shape.size());
        for (std::size_t k = 0; k < layer.size(); ++k) {
            layer[k] = geometric_step(input_shape[k], in_b[k], n, encoder_layers);
        }
        spec.encoder.push_back(layer);
    }

    spec.bottleneck_out.resize(output_shape.size());
    std::transform(output_shape.begin(), output_shape.end(), spec.bottleneck_out.begin(),
                   bottleneck);
    if (decoder_layers == 0) spec.bottleneck_out = output_shape;
    for (std::size_t n = 1; n <= decoder_layers; ++n) {
        Shape layer(output_shape.size());
        for (std::size_t k = 0; k < layer.size(); ++k) {
            layer[k] = geometric_step(spec.bottleneck_out[k], output_shape[k], n, decoder_layers);
        }
        spec.decoder.push_back(layer);
    }
    spec.validate();
    return spec;
}

CacheShapes infer_cache_shapes(const NetworkSpec& spec, std::size_t n) {
    spec.validate();
    CacheShapes c;
    c.s.push_back(with_sample(n, spec.input_shape));
    c.r.emplace_back();
    for (const auto& layer : spec.encoder) {
        c.r.push_back(with_sample(n, layer));
        c.s.push_back(with_sample(n, layer));
    }
    c.z.push_back(with_sample(n, spec.bottleneck_out));
    for (const auto& layer : spec.decoder) {
        c.a.push_back(c.z.back());
        c.z.push_back(with_sample(n, layer));
    }
    return c;
}

}  // namespace trnn
