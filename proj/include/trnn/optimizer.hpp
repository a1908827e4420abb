#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace trnn {

enum class OptimizerMethod { sgd, adam };

std::string to_string(OptimizerMethod m);
OptimizerMethod optimizer_from_string(const std::string& name);

struct OptimizerConfig {
    OptimizerMethod method = OptimizerMethod::adam;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    /// L2 term added to the gradient: g + weight_decay * theta. Off by default.
    double weight_decay = 0.0;
    /// Schedule hook: the rate used in epoch e is learning_rate * lr_decay^e.
    double lr_decay = 1.0;

    /// Throws std::invalid_argument on a negative or non-finite rate, bad betas...
    void validate() const;
    [[nodiscard]] double rate_at_epoch(std::size_t epoch) const;
};

using ParamViews = std::vector<std::span<double>>;
using GradViews = std::vector<std::span<const double>>;

/// Optimizer state for one training run. Moments are allocated lazily on the
/// first step and must keep the parameter layout from then on.
class OptimizerState {
public:
    explicit OptimizerState(OptimizerConfig config);

    [[nodiscard]] const OptimizerConfig& config() const { return config_; }
    [[nodiscard]] std::uint64_t steps() const { return steps_; }
    [[nodiscard]] double learning_rate() const { return learning_rate_; }
    void set_learning_rate(double lr);

    /// Dispatches to sgd_step or adam_step.
    void apply(const ParamViews& params, const GradViews& grads);

    [[nodiscard]] const std::vector<std::vector<double>>& first_moments() const { return m_; }
    [[nodiscard]] const std::vector<std::vector<double>>& second_moments() const { return v_; }

private:
    friend void sgd_step(const ParamViews&, const GradViews&, OptimizerState&);
    friend void adam_step(const ParamViews&, const GradViews&, OptimizerState&);
    void check_layout(const ParamViews& params, const GradViews& grads);

    OptimizerConfig config_;
    double learning_rate_;
    std::uint64_t steps_ = 0;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
};

/// theta <- theta - lr * (g + weight_decay * theta)
void sgd_step(const ParamViews& params, const GradViews& grads, OptimizerState& state);
/// Bias-corrected Adam on g + weight_decay * theta.
void adam_step(const ParamViews& params, const GradViews& grads, OptimizerState& state);

/// One epoch of index batches: a seeded Fisher-Yates shuffle of 0..n-1 cut
/// into ceil(n / batch_size) batches, the last one possibly short.
std::vector<std::vector<std::size_t>> minibatch_iterate(std::size_t n, std::size_t batch_size,
                                                        std::uint64_t seed, std::uint64_t epoch);

}  // namespace trnn
