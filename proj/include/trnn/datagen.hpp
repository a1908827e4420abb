#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "trnn/json_io.hpp"
#include "trnn/tensor.hpp"

namespace trnn {

/// Water-drop surface controls. Grid: phi_i = -pi + 2 pi i / I and
/// z_j = j / J for i = 1..I, j = 1..J.
struct WaterDropParams {
    double a = 1.0;
    double b = 1.0;
    double c = 1.0;
    double d = 1.0;
    std::size_t grid_i = 50;
    std::size_t grid_j = 50;
    double sigma = 0.0;

    void validate() const;
};

/// Helicoid surface controls. Grid: r_i = i / I and z_j = j / J.
struct HelicoidParams {
    double c1 = 5.0;
    double c2 = 2.0;
    double alpha = 3.0;
    double beta = 4.0;
    std::size_t grid_i = 50;
    std::size_t grid_j = 50;
    double sigma = 0.0;

    void validate() const;
};

/// Clean surface, shape (I, J, 2); channel 0 holds x, channel 1 holds y.
Tensor waterdrop_surface(const WaterDropParams& p);
/// Clean surface, shape (2, I, J); slice 0 holds x, slice 1 holds y.
Tensor helicoid_surface(const HelicoidParams& p);

enum class Generator { waterdrop, helicoid };

std::string to_string(Generator g);
Generator generator_from_string(const std::string& name);

struct GenerateOptions {
    std::size_t n = 100;
    double sigma = 0.0;
    std::size_t grid_i = 50;
    std::size_t grid_j = 50;
    std::uint64_t seed = 0;
    bool noise_on_x = false;

    void validate() const;
};

/// X and Y plus everything needed to regenerate them bit-exactly.
/// `controls` is N x 4: (a, b, c, d) or (c1, c2, alpha, beta) per sample.
struct Dataset {
    Tensor x;
    Tensor y;
    Generator generator = Generator::waterdrop;
    GenerateOptions options;
    Matrix controls;
};

/// Per-sample draws come from counter-based substreams keyed by the sample
/// index, so sample i never depends on N or on generation order.
/// Gaussian noise is Box-Muller over the same family of streams.
Dataset gen_waterdrop_dataset(const GenerateOptions& options);
Dataset gen_helicoid_dataset(const GenerateOptions& options);
Dataset generate_dataset(Generator g, const GenerateOptions& options);

/// Bundle layout: `X.dtf`, `Y.dtf` and a JSON `meta` file.
void save_dataset(const Dataset& data, const std::string& dir);

/// Metadata of a generated dataset (generator, options, control table).
Json dataset_meta(const Dataset& data);
/// Rebuilds a dataset from its metadata alone.
Dataset regenerate_dataset(const Json& meta);

/// Tensors of a dataset directory. `meta` is optional so hand-made
/// datasets only need X.dtf and Y.dtf.
struct TensorPair {
    Tensor x;
    Tensor y;
};

TensorPair load_tensors(const std::string& dir);

}  // namespace trnn
