#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "trnn/backprop.hpp"
#include "trnn/optimizer.hpp"

using namespace trnn;

namespace {

OptimizerConfig make(OptimizerMethod m, double lr) {
    OptimizerConfig c;
    c.method = m;
    c.learning_rate = lr;
    return c;
}

/// Runs `steps` updates on 0.5 * ||theta - target||^2 and returns theta.
std::vector<double> descend(OptimizerConfig config, std::vector<double> theta,
                            const std::vector<double>& target, std::size_t steps) {
    OptimizerState state(config);
    std::vector<double> g(theta.size());
    for (std::size_t s = 0; s < steps; ++s) {
        for (std::size_t i = 0; i < theta.size(); ++i) g[i] = theta[i] - target[i];
        state.apply({std::span<double>(theta)}, {std::span<const double>(g)});
    }
    return theta;
}

double max_gap(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST_CASE("sgd arithmetic") {
    std::vector<double> theta{1.0};
    std::vector<double> g{2.0};
    OptimizerState state(make(OptimizerMethod::sgd, 0.1));
    sgd_step({std::span<double>(theta)}, {std::span<const double>(g)}, state);
    CHECK(theta[0] == doctest::Approx(0.8));
    CHECK(state.steps() == 1);

    std::vector<double> zero{0.0};
    sgd_step({std::span<double>(theta)}, {std::span<const double>(zero)}, state);
    CHECK(theta[0] == doctest::Approx(0.8));

    OptimizerConfig decay = make(OptimizerMethod::sgd, 0.1);
    decay.weight_decay = 0.5;
    OptimizerState ds(decay);
    std::vector<double> t2{2.0};
    sgd_step({std::span<double>(t2)}, {std::span<const double>(g)}, ds);
    CHECK(t2[0] == doctest::Approx(2.0 - 0.1 * (2.0 + 0.5 * 2.0)));
}

TEST_CASE("sgd converges on a quadratic below the curvature bound") {
    const std::vector<double> target{1.5, -2.0, 0.25};
    const auto theta = descend(make(OptimizerMethod::sgd, 0.5), {0, 0, 0}, target, 200);
    CHECK(max_gap(theta, target) <= 1e-8);
}

TEST_CASE("adam first step has magnitude lr regardless of gradient scale") {
    for (double scale : {1e-6, 1.0, 1e6}) {
        std::vector<double> theta{0.0, 0.0};
        std::vector<double> g{scale, -scale};
        OptimizerState state(make(OptimizerMethod::adam, 0.01));
        adam_step({std::span<double>(theta)}, {std::span<const double>(g)}, state);
        CHECK(theta[0] == doctest::Approx(-0.01).epsilon(1e-4));
        CHECK(theta[1] == doctest::Approx(0.01).epsilon(1e-4));
    }
}

TEST_CASE("adam leaves parameters alone under zero gradients") {
    std::vector<double> theta{0.3, -0.7};
    const std::vector<double> before = theta;
    std::vector<double> g{0.0, 0.0};
    OptimizerState state(make(OptimizerMethod::adam, 0.01));
    for (int i = 0; i < 5; ++i) {
        adam_step({std::span<double>(theta)}, {std::span<const double>(g)}, state);
    }
    CHECK(theta == before);
    CHECK(state.steps() == 5);
    CHECK(state.first_moments().front().size() == 2);
}

TEST_CASE("adam converges on a quadratic bowl") {
    const std::vector<double> target{1.5, -2.0, 0.25, 3.0};
    const auto theta = descend(make(OptimizerMethod::adam, 1e-2), {0, 0, 0, 0}, target, 5000);
    CHECK(max_gap(theta, target) <= 1e-6);
}

TEST_CASE("layout and configuration errors") {
    std::vector<double> a{1.0, 2.0};
    std::vector<double> b{1.0};
    OptimizerState state(make(OptimizerMethod::sgd, 0.1));
    CHECK_THROWS_AS(state.apply({std::span<double>(a)}, {std::span<const double>(b)}),
                    ShapeError);
    CHECK_THROWS_AS(make(OptimizerMethod::adam, -1.0).validate(), std::invalid_argument);
    CHECK_THROWS_AS(make(OptimizerMethod::adam, std::nan("")).validate(), std::invalid_argument);
    OptimizerConfig betas = make(OptimizerMethod::adam, 0.1);
    betas.beta1 = 1.0;
    CHECK_THROWS_AS(betas.validate(), std::invalid_argument);
    CHECK_NOTHROW(make(OptimizerMethod::sgd, 0.0).validate());
    CHECK(optimizer_from_string(to_string(OptimizerMethod::adam)) == OptimizerMethod::adam);
    CHECK_THROWS_AS(optimizer_from_string("rmsprop"), std::invalid_argument);
}

TEST_CASE("learning-rate schedule hook") {
    OptimizerConfig c = make(OptimizerMethod::sgd, 0.1);
    CHECK(c.rate_at_epoch(5) == 0.1);
    c.lr_decay = 0.5;
    CHECK(c.rate_at_epoch(0) == 0.1);
    CHECK(c.rate_at_epoch(3) == doctest::Approx(0.0125));
}

TEST_CASE("minibatches") {
    const auto full = minibatch_iterate(7, 7, 1, 0);
    REQUIRE(full.size() == 1);
    std::vector<std::size_t> sorted = full.front();
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6});

    const auto parts = minibatch_iterate(5, 2, 9, 3);
    REQUIRE(parts.size() == 3);
    CHECK(parts[0].size() == 2);
    CHECK(parts[1].size() == 2);
    CHECK(parts[2].size() == 1);
    std::multiset<std::size_t> seen;
    for (const auto& p : parts) seen.insert(p.begin(), p.end());
    CHECK(seen == std::multiset<std::size_t>{0, 1, 2, 3, 4});

    CHECK(minibatch_iterate(50, 8, 4, 2) == minibatch_iterate(50, 8, 4, 2));
    CHECK(minibatch_iterate(50, 8, 4, 2) != minibatch_iterate(50, 8, 4, 3));
    CHECK(minibatch_iterate(50, 8, 4, 2) != minibatch_iterate(50, 8, 5, 2));
    CHECK_THROWS_AS(minibatch_iterate(0, 1, 0, 0), std::invalid_argument);
    CHECK_THROWS_AS(minibatch_iterate(5, 0, 0, 0), std::invalid_argument);
}

TEST_CASE("every epoch is a permutation and shuffles are roughly uniform") {
    // Position of sample 0 in the first batch slot over many epochs.
    std::vector<int> first(10, 0);
    for (std::uint64_t e = 0; e < 2000; ++e) {
        const auto b = minibatch_iterate(10, 10, 17, e);
        std::vector<std::size_t> s = b.front();
        std::sort(s.begin(), s.end());
        for (std::size_t i = 0; i < 10; ++i) REQUIRE(s[i] == i);
        ++first[b.front().front()];
    }
    for (int c : first) CHECK(std::abs(c - 200) < 60);
}

TEST_CASE("a small full-batch sgd step decreases the loss") {
    NetworkSpec spec;
    spec.input_shape = {3, 2};
    spec.output_shape = {2, 3};
    spec.encoder = {{2, 2}};
    spec.bottleneck_out = {2, 2};
    spec.decoder = {{2, 3}};
    spec.validate();
    int decreased = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        TrnnModel m = init_model(spec, seed);
        const Tensor x = oracle::random_tensor({6, 3, 2}, seed + 50);
        const Tensor y = oracle::random_tensor({6, 2, 3}, seed + 90);
        const ForwardCache cache = forward(m, x);
        const double before = mse_loss(cache.output(), y);
        const GradientSet g = full_backward(m, cache, y);
        OptimizerState state(make(OptimizerMethod::sgd, 1e-4));
        state.apply(m.parameters(), g.views());
        if (mse_loss(forward_output(m, x), y) < before) ++decreased;
    }
    CHECK(decreased == 20);
}
