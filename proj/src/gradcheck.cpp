#include "trnn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "trnn/backprop.hpp"
#include "trnn/model.hpp"
#include "trnn/random.hpp"

namespace trnn {

namespace {

Tensor normal_tensor(const Shape& shape, CounterRng& rng) {
    Tensor t(shape);
    for (double& v : t.data()) v = rng.normal();
    return t;
}

/// Pre-activation tensors of every ReLU in the network.
std::vector<const Tensor*> relu_inputs(const ForwardCache& c) {
    std::vector<const Tensor*> out;
    if (c.activation != Activation::relu) return out;
    for (std::size_t n = 1; n < c.r.size(); ++n) out.push_back(&c.r[n]);
    for (std::size_t n = 0; n < c.a.size(); ++n) out.push_back(&c.z[n]);
    return out;
}

bool same_masks(const ForwardCache& a, const ForwardCache& b) {
    const auto pa = relu_inputs(a);
    const auto pb = relu_inputs(b);
    for (std::size_t t = 0; t < pa.size(); ++t) {
        const auto da = pa[t]->data();
        const auto db = pb[t]->data();
        for (std::size_t i = 0; i < da.size(); ++i) {
            if ((da[i] >= 0.0) != (db[i] >= 0.0)) return false;
        }
    }
    return true;
}

std::vector<std::string> group_names(const NetworkSpec& spec) {
    std::vector<std::string> names;
    for (std::size_t n = 0; n < spec.encoder.size(); ++n) {
        for (std::size_t k = 0; k < spec.input_shape.size(); ++k) {
            names.push_back("encoder[" + std::to_string(n + 1) + "].U" + std::to_string(k + 2));
        }
    }
    names.emplace_back("core");
    for (std::size_t n = 0; n < spec.decoder.size(); ++n) {
        for (std::size_t k = 0; k < spec.output_shape.size(); ++k) {
            names.push_back("decoder[" + std::to_string(n + 1) + "].W" + std::to_string(k + 2));
        }
    }
    return names;
}

std::size_t uniform_extent(CounterRng& rng, std::size_t lo, std::size_t hi) {
    return lo + static_cast<std::size_t>(rng.below(hi - lo + 1));
}

}  // namespace

GradcheckReport gradcheck(const NetworkSpec& spec, std::uint64_t seed,
                          const GradcheckOptions& options) {
    spec.validate();
    if (spec.parameter_count() > kGradcheckMaxParameters) {
        throw std::invalid_argument("gradcheck is limited to " +
                                    std::to_string(kGradcheckMaxParameters) +
                                    " parameters; spec has " +
                                    std::to_string(spec.parameter_count()));
    }
    if (!(options.step > 0.0) || options.batch == 0 || options.max_attempts == 0) {
        throw std::invalid_argument("gradcheck needs a positive step, batch and attempt count");
    }
    const double h = options.step;
    const auto names = group_names(spec);

    for (std::size_t attempt = 0; attempt < options.max_attempts; ++attempt) {
        CounterRng rng(seed, hash_combine(hash_string("gradcheck-data"), attempt));
        TrnnModel model = init_model(spec, hash_combine(seed, attempt));
        Shape xs{options.batch};
        xs.insert(xs.end(), spec.input_shape.begin(), spec.input_shape.end());
        Shape ys{options.batch};
        ys.insert(ys.end(), spec.output_shape.begin(), spec.output_shape.end());
        const Tensor x = normal_tensor(xs, rng);
        const Tensor y = normal_tensor(ys, rng);

        const ForwardCache base = forward(model, x);
        const GradientSet grads = full_backward(model, base, y);
        std::vector<std::vector<double>> analytic;
        for (const auto& view : grads.views()) analytic.emplace_back(view.begin(), view.end());
        if (options.corrupt_gradient) {
            auto& core = analytic[spec.encoder.size() * spec.input_shape.size()];
            double norm = 0.0;
            for (double v : core) norm += v * v;
            core.front() += 0.1 * std::sqrt(norm) + 1e-3;
        }

        ParamViews params = model.parameters();
        std::vector<std::vector<double>> numeric(params.size());
        bool kink = false;
        for (std::size_t g = 0; g < params.size() && !kink; ++g) {
            numeric[g].resize(params[g].size());
            for (std::size_t i = 0; i < params[g].size() && !kink; ++i) {
                double& p = params[g][i];
                const double saved = p;
                p = saved + h;
                const ForwardCache plus = forward(model, x);
                p = saved - h;
                const ForwardCache minus = forward(model, x);
                p = saved;
                if (!same_masks(base, plus) || !same_masks(base, minus)) {
                    kink = true;
                    break;
                }
                numeric[g][i] =
                    (mse_loss(plus.output(), y) - mse_loss(minus.output(), y)) / (2.0 * h);
            }
        }
        if (kink) continue;
        // A group whose gradient vanishes (every path through it is dead)
        // checks nothing; draw another instance.
        const bool dead = std::any_of(analytic.begin(), analytic.end(), [](const auto& g) {
            return std::all_of(g.begin(), g.end(), [](double v) { return v == 0.0; });
        });
        if (dead && attempt + 1 < options.max_attempts) continue;

        GradcheckReport report;
        report.attempts = attempt + 1;
        for (std::size_t g = 0; g < params.size(); ++g) {
            double diff = 0.0;
            double na = 0.0;
            double nn = 0.0;
            for (std::size_t i = 0; i < analytic[g].size(); ++i) {
                const double d = analytic[g][i] - numeric[g][i];
                diff += d * d;
                na += analytic[g][i] * analytic[g][i];
                nn += numeric[g][i] * numeric[g][i];
                report.worst.push_back({names[g], i, analytic[g][i], numeric[g][i]});
            }
            const double scale = std::sqrt(std::max(na, nn));
            GroupError ge;
            ge.name = names[g];
            ge.size = analytic[g].size();
            ge.analytic_norm = std::sqrt(na);
            // Both sides vanish (dead units): nothing to compare beyond roundoff.
            ge.rel_error = scale <= 1e-10 ? std::sqrt(diff) : std::sqrt(diff) / scale;
            report.max_rel_error = std::max(report.max_rel_error, ge.rel_error);
            report.groups.push_back(ge);
        }
        const auto by_gap = [](const EntryError& a, const EntryError& b) {
            return std::abs(a.analytic - a.numeric) > std::abs(b.analytic - b.numeric);
        };
        const std::size_t keep = std::min(options.worst_entries, report.worst.size());
        std::partial_sort(report.worst.begin(), report.worst.begin() + keep, report.worst.end(),
                          by_gap);
        report.worst.resize(keep);
        report.passed = report.max_rel_error <= options.tolerance;
        return report;
    }
    throw std::runtime_error("gradcheck: every one of " + std::to_string(options.max_attempts) +
                             " random instances sat within one step of a ReLU kink");
}

NetworkSpec default_gradcheck_spec(Activation activation) {
    NetworkSpec spec;
    spec.input_shape = {3, 4};
    spec.output_shape = {4, 3};
    spec.encoder = {{3, 3}, {2, 2}};
    spec.bottleneck_out = {2, 2};
    spec.decoder = {{3, 2}, {4, 3}};
    spec.activation = activation;
    spec.validate();
    return spec;
}

NetworkSpec random_gradcheck_spec(std::uint64_t seed, Activation activation) {
    CounterRng rng(seed, hash_string("gradcheck-spec"));
    NetworkSpec spec;
    spec.activation = activation;
    const std::size_t in_order = uniform_extent(rng, 2, 4);
    const std::size_t out_order = uniform_extent(rng, 2, 4);
    for (std::size_t k = 0; k < in_order; ++k) spec.input_shape.push_back(uniform_extent(rng, 2, 5));
    for (std::size_t k = 0; k < out_order; ++k) {
        spec.output_shape.push_back(uniform_extent(rng, 2, 5));
    }
    // Bottleneck extents are capped at 3 so the core stays well inside
    // kGradcheckMaxParameters even for two order-4 sides.
    Shape e1, e2;
    for (auto p : spec.input_shape) {
        e1.push_back(uniform_extent(rng, 1, p));
        e2.push_back(uniform_extent(rng, 1, std::min<std::size_t>(e1.back(), 3)));
    }
    spec.encoder = {e1, e2};
    Shape d1;
    for (auto q : spec.output_shape) {
        spec.bottleneck_out.push_back(uniform_extent(rng, 1, std::min<std::size_t>(q, 3)));
        d1.push_back(uniform_extent(rng, spec.bottleneck_out.back(), q));
    }
    spec.decoder = {d1, spec.output_shape};
    spec.validate();
    return spec;
}

}  // namespace trnn
