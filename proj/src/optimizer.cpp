#include "trnn/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "trnn/random.hpp"
#include "trnn/tensor.hpp"

namespace trnn {

std::string to_string(OptimizerMethod m) {
    return m == OptimizerMethod::adam ? "adam" : "sgd";
}

OptimizerMethod optimizer_from_string(const std::string& name) {
    if (name == "adam") return OptimizerMethod::adam;
    if (name == "sgd") return OptimizerMethod::sgd;
    throw std::invalid_argument("unknown optimizer '" + name + "'");
}

void OptimizerConfig::validate() const {
    if (!std::isfinite(learning_rate) || learning_rate < 0.0) {
        throw std::invalid_argument("learning rate must be finite and non-negative");
    }
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
        throw std::invalid_argument("Adam betas must lie in [0, 1)");
    }
    if (!(epsilon > 0.0)) throw std::invalid_argument("Adam epsilon must be positive");
    if (!std::isfinite(weight_decay) || weight_decay < 0.0) {
        throw std::invalid_argument("weight decay must be finite and non-negative");
    }
    if (!(lr_decay > 0.0 && lr_decay <= 1.0)) {
        throw std::invalid_argument("lr_decay must lie in (0, 1]");
    }
}

double OptimizerConfig::rate_at_epoch(std::size_t epoch) const {
    return learning_rate * std::pow(lr_decay, static_cast<double>(epoch));
}

OptimizerState::OptimizerState(OptimizerConfig config)
    : config_(config), learning_rate_(config.learning_rate) {
    config_.validate();
}

void OptimizerState::set_learning_rate(double lr) {
    if (!std::isfinite(lr) || lr < 0.0) {
        throw std::invalid_argument("learning rate must be finite and non-negative");
    }
    learning_rate_ = lr;
}

void OptimizerState::apply(const ParamViews& params, const GradViews& grads) {
    if (config_.method == OptimizerMethod::adam) {
        adam_step(params, grads, *this);
    } else {
        sgd_step(params, grads, *this);
    }
}

void OptimizerState::check_layout(const ParamViews& params, const GradViews& grads) {
    if (params.size() != grads.size()) {
        throw ShapeError("optimizer: " + std::to_string(params.size()) + " parameter blocks but " +
                         std::to_string(grads.size()) + " gradient blocks");
    }
    for (std::size_t b = 0; b < params.size(); ++b) {
        if (params[b].size() != grads[b].size()) {
            throw ShapeError("optimizer: block " + std::to_string(b) + " has " +
                             std::to_string(params[b].size()) + " parameters but " +
                             std::to_string(grads[b].size()) + " gradients");
        }
    }
    if (m_.empty()) {
        for (const auto& p : params) {
            m_.emplace_back(p.size(), 0.0);
            v_.emplace_back(p.size(), 0.0);
        }
        return;
    }
    if (m_.size() != params.size()) throw ShapeError("optimizer: parameter layout changed");
    for (std::size_t b = 0; b < params.size(); ++b) {
        if (m_[b].size() != params[b].size()) {
            throw ShapeError("optimizer: parameter layout changed");
        }
    }
}

void sgd_step(const ParamViews& params, const GradViews& grads, OptimizerState& state) {
    state.check_layout(params, grads);
    const double lr = state.learning_rate_;
    const double wd = state.config_.weight_decay;
    for (std::size_t b = 0; b < params.size(); ++b) {
        auto p = params[b];
        auto g = grads[b];
        for (std::size_t i = 0; i < p.size(); ++i) p[i] -= lr * (g[i] + wd * p[i]);
    }
    ++state.steps_;
}

void adam_step(const ParamViews& params, const GradViews& grads, OptimizerState& state) {
    state.check_layout(params, grads);
    const auto& c = state.config_;
    ++state.steps_;
    const double t = static_cast<double>(state.steps_);
    const double bc1 = 1.0 - std::pow(c.beta1, t);
    const double bc2 = 1.0 - std::pow(c.beta2, t);
    const double lr = state.learning_rate_;
    for (std::size_t b = 0; b < params.size(); ++b) {
        auto p = params[b];
        auto g = grads[b];
        auto& m = state.m_[b];
        auto& v = state.v_[b];
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double gi = g[i] + c.weight_decay * p[i];
            m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * gi;
            v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * gi * gi;
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            p[i] -= lr * mhat / (std::sqrt(vhat) + c.epsilon);
        }
    }
}

std::vector<std::vector<std::size_t>> minibatch_iterate(std::size_t n, std::size_t batch_size,
                                                        std::uint64_t seed, std::uint64_t epoch) {
    if (n == 0) throw std::invalid_argument("minibatch_iterate: empty dataset");
    if (batch_size == 0 || batch_size > n) {
        throw std::invalid_argument("batch size must lie in [1, " + std::to_string(n) + "]");
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    CounterRng rng(seed, hash_combine(hash_string("minibatch"), epoch));
    for (std::size_t i = n - 1; i > 0; --i) {
        const auto j = static_cast<std::size_t>(rng.below(i + 1));
        std::swap(order[i], order[j]);
    }
    std::vector<std::vector<std::size_t>> batches;
    for (std::size_t start = 0; start < n; start += batch_size) {
        const std::size_t stop = std::min(n, start + batch_size);
        batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                             order.begin() + static_cast<std::ptrdiff_t>(stop));
    }
    return batches;
}

}  // namespace trnn
