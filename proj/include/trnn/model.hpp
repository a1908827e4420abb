#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "trnn/layers.hpp"
#include "trnn/network.hpp"
#include "trnn/optimizer.hpp"
#include "trnn/standardize.hpp"
#include "trnn/tensor.hpp"

namespace trnn {

/// Training loss became NaN or infinite.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(std::size_t epoch, double loss);
    [[nodiscard]] std::size_t epoch() const { return epoch_; }

private:
    std::size_t epoch_;
};

/// Instantiated tensor-on-tensor network: shrinking Tucker encoder,
/// contraction core, expanding Tucker decoder. Optional standardizers map
/// raw data to the network's working scale and back.
struct TrnnModel {
    NetworkSpec spec;
    std::vector<TuckerLayer> encoder;
    ContractionLayer contraction;
    std::vector<TuckerLayer> decoder;
    std::uint64_t init_seed = 0;
    std::optional<Standardizer> x_scaler;
    std::optional<Standardizer> y_scaler;

    /// Canonical order: encoder factors (layer, mode), core, decoder factors.
    [[nodiscard]] ParamViews parameters();
    [[nodiscard]] GradViews parameters() const;
    [[nodiscard]] std::size_t parameter_count() const { return spec.parameter_count(); }

    friend bool operator==(const TrnnModel&, const TrnnModel&) = default;
};

/// Every factor and the core drawn i.i.d. uniform on (-b, b),
/// b = sqrt(6 / (fan_in + fan_out)). Deterministic in seed.
TrnnModel init_model(const NetworkSpec& spec, std::uint64_t seed);

/// Forward pass on data already at network scale, keeping every activation.
ForwardCache forward(const TrnnModel& model, const Tensor& x);
/// Forward pass at network scale without a cache.
Tensor forward_output(const TrnnModel& model, const Tensor& x);
/// Raw-scale prediction: standardize, forward, de-standardize.
Tensor predict(const TrnnModel& model, const Tensor& x);

struct TrainConfig {
    OptimizerConfig optimizer;
    std::size_t batch_size = 32;  // clamped to the sample count
    std::size_t max_epochs = 1000;
    double tol = 1e-8;
    std::size_t patience = 20;  // 0 disables early stopping
    std::uint64_t seed = 0;     // minibatch shuffles
    bool standardize = true;

    void validate() const;
};

struct TrainReport {
    double initial_loss = 0.0;
    std::vector<double> losses;  // full-data loss after each epoch
    std::vector<double> validation_rmse;
    double seconds = 0.0;
    std::size_t epochs_run = 0;
    bool stopped_early = false;

    [[nodiscard]] double final_loss() const { return losses.empty() ? initial_loss : losses.back(); }
};

struct ValidationData {
    const Tensor& x;
    const Tensor& y;
};

/// Minibatch training loop. Losses are measured at network scale. When
/// config.standardize is set the scalers are (re)fitted on x and y first.
TrainReport train(TrnnModel& model, const Tensor& x, const Tensor& y, const TrainConfig& config,
                  std::optional<ValidationData> validation = std::nullopt);

/// Writes a "trnn" bundle (see bundle.hpp); load(save(m)) == m bit-exactly.
void save_model(const TrnnModel& model, const std::string& dir);
TrnnModel load_model(const std::string& dir);

}  // namespace trnn
