#include "trnn/model.hpp"

#include <chrono>
#include <cmath>

#include "trnn/backprop.hpp"
#include "trnn/bundle.hpp"
#include "trnn/random.hpp"

namespace trnn {

DivergenceError::DivergenceError(std::size_t epoch, double loss)
    : std::runtime_error("training diverged at epoch " + std::to_string(epoch) + " (loss " +
                         std::to_string(loss) + ")"),
      epoch_(epoch) {}

namespace {

Matrix uniform_matrix(CounterRng& rng, std::size_t rows, std::size_t cols) {
    const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                rng.uniform(-bound, bound);
        }
    }
    return m;
}

std::vector<TuckerLayer> init_tucker(CounterRng& rng, TuckerKind kind, Shape prev,
                                     const std::vector<Shape>& schedule) {
    std::vector<TuckerLayer> layers;
    for (const auto& cur : schedule) {
        std::vector<Matrix> factors;
        for (std::size_t k = 0; k < cur.size(); ++k) {
            factors.push_back(uniform_matrix(rng, cur[k], prev[k]));
        }
        layers.emplace_back(kind, std::move(factors));
        prev = cur;
    }
    return layers;
}

void check_input(const TrnnModel& model, const Tensor& x) {
    if (x.empty()) throw ShapeError("empty batch: at least one sample is required");
    if (x.sample_shape() != model.spec.input_shape) {
        throw ShapeError("model expects samples of shape " + shape_string(model.spec.input_shape) +
                         ", got " + shape_string(x.sample_shape()));
    }
}

std::string factor_name(const char* side, std::size_t layer, std::size_t mode) {
    return std::string(side) + "_" + std::to_string(layer) + "_mode_" + std::to_string(mode);
}

}  // namespace

ParamViews TrnnModel::parameters() {
    ParamViews v;
    for (auto& layer : encoder) {
        for (auto& f : layer.factors()) v.emplace_back(f.data(), static_cast<std::size_t>(f.size()));
    }
    v.emplace_back(contraction.core.data());
    for (auto& layer : decoder) {
        for (auto& f : layer.factors()) v.emplace_back(f.data(), static_cast<std::size_t>(f.size()));
    }
    return v;
}

GradViews TrnnModel::parameters() const {
    GradViews v;
    for (const auto& layer : encoder) {
        for (const auto& f : layer.factors()) {
            v.emplace_back(f.data(), static_cast<std::size_t>(f.size()));
        }
    }
    v.emplace_back(contraction.core.data());
    for (const auto& layer : decoder) {
        for (const auto& f : layer.factors()) {
            v.emplace_back(f.data(), static_cast<std::size_t>(f.size()));
        }
    }
    return v;
}

TrnnModel init_model(const NetworkSpec& spec, std::uint64_t seed) {
    spec.validate();
    CounterRng rng(seed, hash_string("trnn-init"));
    TrnnModel model;
    model.spec = spec;
    model.init_seed = seed;
    model.encoder = init_tucker(rng, TuckerKind::shrink, spec.input_shape, spec.encoder);

    const Shape core_shape = spec.core_shape();
    const std::size_t fan_in = shape_size(spec.bottleneck_in());
    const std::size_t fan_out = shape_size(spec.bottleneck_out);
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    model.contraction.core = Tensor(core_shape);
    for (auto& v : model.contraction.core.data()) v = rng.uniform(-bound, bound);
    model.contraction.input_modes = spec.bottleneck_in().size();

    model.decoder = init_tucker(rng, TuckerKind::expand, spec.bottleneck_out, spec.decoder);
    return model;
}

ForwardCache forward(const TrnnModel& model, const Tensor& x) {
    check_input(model, x);
    const Activation act = model.spec.activation;
    ForwardCache cache;
    cache.activation = act;
    cache.s.push_back(x);
    cache.r.emplace_back();
    for (const auto& layer : model.encoder) {
        cache.r.push_back(shrink_tucker_forward(layer, cache.s.back()));
        cache.s.push_back(apply_activation(act, cache.r.back()));
    }
    cache.z.push_back(contraction_forward(model.contraction, cache.s.back()));
    for (const auto& layer : model.decoder) {
        cache.a.push_back(apply_activation(act, cache.z.back()));
        cache.z.push_back(expand_tucker_forward(layer, cache.a.back()));
    }
    return cache;
}

Tensor forward_output(const TrnnModel& model, const Tensor& x) {
    check_input(model, x);
    const Activation act = model.spec.activation;
    Tensor t = x;
    for (const auto& layer : model.encoder) t = apply_activation(act, layer.forward(t));
    t = contraction_forward(model.contraction, t);
    for (const auto& layer : model.decoder) t = layer.forward(apply_activation(act, t));
    return t;
}

Tensor predict(const TrnnModel& model, const Tensor& x) {
    check_input(model, x);
    Tensor xs = model.x_scaler ? model.x_scaler->apply(x) : x;
    Tensor y = forward_output(model, xs);
    return model.y_scaler ? model.y_scaler->invert(y) : y;
}

void TrainConfig::validate() const {
    optimizer.validate();
    if (batch_size == 0) throw std::invalid_argument("batch_size must be at least 1");
    if (max_epochs == 0) throw std::invalid_argument("max_epochs must be at least 1");
    if (!(tol >= 0.0)) throw std::invalid_argument("tol must be non-negative");
}

TrainReport train(TrnnModel& model, const Tensor& x, const Tensor& y, const TrainConfig& config,
                  std::optional<ValidationData> validation) {
    config.validate();
    check_input(model, x);
    if (y.empty() || y.shape().front() != x.shape().front()) {
        throw ShapeError("X and Y must share the leading sample extent");
    }
    if (y.sample_shape() != model.spec.output_shape) {
        throw ShapeError("model produces samples of shape " +
                         shape_string(model.spec.output_shape) + ", targets have " +
                         shape_string(y.sample_shape()));
    }
    const auto start = std::chrono::steady_clock::now();

    if (config.standardize) {
        model.x_scaler = Standardizer::fit(x);
        model.y_scaler = Standardizer::fit(y);
    } else {
        model.x_scaler.reset();
        model.y_scaler.reset();
    }
    const Tensor xs = model.x_scaler ? model.x_scaler->apply(x) : x;
    const Tensor ys = model.y_scaler ? model.y_scaler->apply(y) : y;
    const std::size_t n = x.shape().front();
    const std::size_t batch = std::min(config.batch_size, n);

    TrainReport report;
    report.initial_loss = mse_loss(forward_output(model, xs), ys);
    if (!std::isfinite(report.initial_loss)) throw DivergenceError(0, report.initial_loss);

    OptimizerState opt(config.optimizer);
    double prev = report.initial_loss;
    std::size_t stall = 0;
    for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
        opt.set_learning_rate(config.optimizer.rate_at_epoch(epoch));
        if (batch == n) {
            const ForwardCache cache = forward(model, xs);
            const GradientSet grads = full_backward(model, cache, ys);
            opt.apply(model.parameters(), grads.views());
        } else {
            for (const auto& rows : minibatch_iterate(n, batch, config.seed, epoch)) {
                const Tensor yb = ys.gather(rows);
                const ForwardCache cache = forward(model, xs.gather(rows));
                const GradientSet grads = full_backward(model, cache, yb);
                opt.apply(model.parameters(), grads.views());
            }
        }
        const double loss = mse_loss(forward_output(model, xs), ys);
        if (!std::isfinite(loss)) throw DivergenceError(epoch + 1, loss);
        report.losses.push_back(loss);
        report.epochs_run = epoch + 1;
        if (validation) {
            report.validation_rmse.push_back(
                rmse(predict(model, validation->x), validation->y));
        }

        const double improvement = prev > 0.0 ? (prev - loss) / prev : 0.0;
        stall = improvement < config.tol ? stall + 1 : 0;
        prev = loss;
        if (config.patience > 0 && stall >= config.patience) {
            report.stopped_early = true;
            break;
        }
    }
    report.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

void save_model(const TrnnModel& model, const std::string& dir) {
    BundleWriter w(dir, "trnn");
    w.fields()["spec"] = to_json(model.spec);
    w.fields()["init_seed"] = model.init_seed;
    w.fields()["standardize"] = model.x_scaler.has_value();
    for (std::size_t n = 0; n < model.encoder.size(); ++n) {
        const auto& f = model.encoder[n].factors();
        for (std::size_t k = 0; k < f.size(); ++k) w.add(factor_name("encoder", n + 1, k + 2), f[k]);
    }
    w.add("core", model.contraction.core);
    for (std::size_t n = 0; n < model.decoder.size(); ++n) {
        const auto& f = model.decoder[n].factors();
        for (std::size_t k = 0; k < f.size(); ++k) w.add(factor_name("decoder", n + 1, k + 2), f[k]);
    }
    if (model.x_scaler) {
        w.add("x_mean", model.x_scaler->mean);
        w.add("x_scale", model.x_scaler->scale);
        w.add("y_mean", model.y_scaler->mean);
        w.add("y_scale", model.y_scaler->scale);
    }
    w.finish();
}

TrnnModel load_model(const std::string& dir) {
    BundleReader r(dir, "trnn");
    NetworkSpec spec;
    try {
        spec = network_spec_from_json(r.fields().at("spec"));
    } catch (const std::exception& e) {
        throw FormatError("bundle '" + dir + "': invalid network spec: " + e.what());
    }
    TrnnModel model;
    model.spec = spec;
    model.init_seed = r.fields().at("init_seed").get<std::uint64_t>();

    auto load_layers = [&](const char* side, TuckerKind kind, Shape prev,
                           const std::vector<Shape>& schedule) {
        std::vector<TuckerLayer> layers;
        for (std::size_t n = 0; n < schedule.size(); ++n) {
            std::vector<Matrix> factors;
            for (std::size_t k = 0; k < schedule[n].size(); ++k) {
                factors.push_back(r.matrix(factor_name(side, n + 1, k + 2), schedule[n][k], prev[k]));
            }
            layers.emplace_back(kind, std::move(factors));
            prev = schedule[n];
        }
        return layers;
    };
    model.encoder = load_layers("encoder", TuckerKind::shrink, spec.input_shape, spec.encoder);
    model.contraction.core = r.tensor("core", spec.core_shape());
    model.contraction.input_modes = spec.bottleneck_in().size();
    model.decoder = load_layers("decoder", TuckerKind::expand, spec.bottleneck_out, spec.decoder);

    if (r.fields().value("standardize", false)) {
        model.x_scaler = Standardizer{r.tensor("x_mean", spec.input_shape),
                                      r.tensor("x_scale", spec.input_shape)};
        model.y_scaler = Standardizer{r.tensor("y_mean", spec.output_shape),
                                      r.tensor("y_scale", spec.output_shape)};
    }
    return model;
}

}  // namespace trnn
