#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "trnn/tensor.hpp"

namespace trnn {

enum class Activation { relu, identity };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& name);

/// Declarative layer layout of a tensor-on-tensor network.
///
/// Extents exclude the sample mode. `encoder[n]` holds P^(n+1) for every
/// input mode, `decoder[n]` holds Q^(n+1) for every output mode and
/// `bottleneck_out` is Q^(0), the contraction layer's output extents.
/// Encoder extents never grow from one layer to the next, decoder extents
/// never shrink, and the last decoder entry equals `output_shape`.
struct NetworkSpec {
    Shape input_shape;
    Shape output_shape;
    std::vector<Shape> encoder;
    Shape bottleneck_out;
    std::vector<Shape> decoder;
    Activation activation = Activation::relu;

    /// Throws ShapeError describing the first violated rule.
    void validate() const;

    [[nodiscard]] Shape bottleneck_in() const {
        return encoder.empty() ? input_shape : encoder.back();
    }
    /// Contraction core extents: bottleneck_in followed by bottleneck_out.
    [[nodiscard]] Shape core_shape() const;
    [[nodiscard]] std::size_t parameter_count() const;

    friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

/// Geometric per-mode schedule between each extent and its bottleneck
/// max(2, ceil(extent / 8)) (capped at the extent itself).
NetworkSpec default_network_spec(const Shape& input_shape, const Shape& output_shape,
                                 std::size_t encoder_layers = 2,
                                 std::size_t decoder_layers = 2,
                                 Activation activation = Activation::relu);

/// Shapes of every cached forward tensor for a batch of n samples.
/// r[0] is unused (no pre-activation precedes the input).
struct CacheShapes {
    std::vector<Shape> s;  // s_0 .. s_n1
    std::vector<Shape> r;  // r_0 (empty) .. r_n1
    std::vector<Shape> z;  // z_0 .. z_n2
    std::vector<Shape> a;  // a_0 .. a_{n2-1}
};

CacheShapes infer_cache_shapes(const NetworkSpec& spec, std::size_t n);

}  // namespace trnn
