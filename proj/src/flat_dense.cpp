#include <chrono>
#include <cmath>

#include "trnn/baselines.hpp"
#include "trnn/random.hpp"

namespace trnn {

namespace {

struct DenseCache {
    std::vector<Matrix> pre;   // pre[i] = input to layer i's activation, i >= 1
    std::vector<Matrix> post;  // post[0] = X
};

DenseCache dense_forward(const FlatDenseBaseline& net, const Matrix& x) {
    DenseCache c;
    c.post.push_back(x);
    c.pre.emplace_back();
    const std::size_t layers = net.weights.size();
    for (std::size_t i = 0; i < layers; ++i) {
        Matrix a = c.post.back() * net.weights[i].transpose();
        a.rowwise() += net.biases[i].transpose();
        c.pre.push_back(a);
        c.post.push_back(i + 1 < layers ? Matrix(a.cwiseMax(0.0)) : a);
    }
    return c;
}

struct DenseGrads {
    std::vector<Matrix> weights;
    std::vector<Eigen::VectorXd> biases;

    [[nodiscard]] GradViews views() const {
        GradViews v;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            v.emplace_back(weights[i].data(), static_cast<std::size_t>(weights[i].size()));
            v.emplace_back(biases[i].data(), static_cast<std::size_t>(biases[i].size()));
        }
        return v;
    }
};

DenseGrads dense_backward(const FlatDenseBaseline& net, const DenseCache& c, const Matrix& y) {
    const std::size_t layers = net.weights.size();
    DenseGrads g;
    g.weights.resize(layers);
    g.biases.resize(layers);
    Matrix delta = (c.post.back() - y) / static_cast<double>(y.rows());
    for (std::size_t i = layers; i-- > 0;) {
        g.weights[i] = delta.transpose() * c.post[i];
        g.biases[i] = delta.colwise().sum().transpose();
        if (i == 0) break;
        delta = delta * net.weights[i];
        delta = delta.cwiseProduct((c.pre[i].array() >= 0.0).cast<double>().matrix());
    }
    return g;
}

double dense_loss(const FlatDenseBaseline& net, const Matrix& x, const Matrix& y) {
    return (net.predict(x) - y).squaredNorm() / (2.0 * static_cast<double>(y.rows()));
}

Matrix gather_rows(const Matrix& m, const std::vector<std::size_t>& rows) {
    Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(rows[i]));
    }
    return out;
}

}  // namespace

Matrix FlatDenseBaseline::predict(const Matrix& x) const {
    if (static_cast<std::size_t>(x.cols()) != widths.front()) {
        throw ShapeError("dense network expects " + std::to_string(widths.front()) +
                         " input columns, got " + std::to_string(x.cols()));
    }
    Matrix h = x;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        Matrix a = h * weights[i].transpose();
        a.rowwise() += biases[i].transpose();
        h = i + 1 < weights.size() ? Matrix(a.cwiseMax(0.0)) : a;
    }
    return h;
}

ParamViews FlatDenseBaseline::parameters() {
    ParamViews v;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        v.emplace_back(weights[i].data(), static_cast<std::size_t>(weights[i].size()));
        v.emplace_back(biases[i].data(), static_cast<std::size_t>(biases[i].size()));
    }
    return v;
}

std::size_t FlatDenseBaseline::parameter_count() const {
    return flat_dense_parameter_count(widths);
}

std::size_t flat_dense_parameter_count(const std::vector<std::size_t>& widths) {
    std::size_t count = 0;
    for (std::size_t i = 0; i + 1 < widths.size(); ++i) count += (widths[i] + 1) * widths[i + 1];
    return count;
}

FlatDenseBaseline init_flat_dense(const std::vector<std::size_t>& widths, std::uint64_t seed) {
    if (widths.size() < 2) throw std::invalid_argument("dense network needs input and output widths");
    for (auto w : widths) {
        if (w == 0) throw std::invalid_argument("dense layer widths must be positive");
    }
    CounterRng rng(seed, hash_string("flat-dense-init"));
    FlatDenseBaseline net;
    net.widths = widths;
    for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
        const auto rows = static_cast<Eigen::Index>(widths[i + 1]);
        const auto cols = static_cast<Eigen::Index>(widths[i]);
        const double bound = std::sqrt(6.0 / static_cast<double>(widths[i] + widths[i + 1]));
        Matrix w(rows, cols);
        for (Eigen::Index r = 0; r < rows; ++r) {
            for (Eigen::Index c = 0; c < cols; ++c) w(r, c) = rng.uniform(-bound, bound);
        }
        net.weights.push_back(std::move(w));
        net.biases.push_back(Eigen::VectorXd::Zero(rows));
    }
    return net;
}

FlatDenseBaseline fit_flat_dense(const Matrix& x, const Matrix& y,
                                 const std::vector<std::size_t>& hidden, const TrainConfig& config,
                                 std::uint64_t seed, TrainReport* report_out) {
    config.validate();
    if (x.rows() != y.rows() || x.rows() == 0) {
        throw ShapeError("X and Y must have the same, non-zero number of rows");
    }
    const auto start = std::chrono::steady_clock::now();
    std::vector<std::size_t> widths{static_cast<std::size_t>(x.cols())};
    widths.insert(widths.end(), hidden.begin(), hidden.end());
    widths.push_back(static_cast<std::size_t>(y.cols()));
    FlatDenseBaseline net = init_flat_dense(widths, seed);

    const auto n = static_cast<std::size_t>(x.rows());
    const std::size_t batch = std::min(config.batch_size, n);
    TrainReport report;
    report.initial_loss = dense_loss(net, x, y);
    if (!std::isfinite(report.initial_loss)) throw DivergenceError(0, report.initial_loss);

    OptimizerState opt(config.optimizer);
    double prev = report.initial_loss;
    std::size_t stall = 0;
    for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
        opt.set_learning_rate(config.optimizer.rate_at_epoch(epoch));
        if (batch == n) {
            const DenseGrads g = dense_backward(net, dense_forward(net, x), y);
            opt.apply(net.parameters(), g.views());
        } else {
            for (const auto& rows : minibatch_iterate(n, batch, config.seed, epoch)) {
                const Matrix yb = gather_rows(y, rows);
                const DenseGrads g = dense_backward(net, dense_forward(net, gather_rows(x, rows)), yb);
                opt.apply(net.parameters(), g.views());
            }
        }
        const double loss = dense_loss(net, x, y);
        if (!std::isfinite(loss)) throw DivergenceError(epoch + 1, loss);
        report.losses.push_back(loss);
        report.epochs_run = epoch + 1;
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
    if (report_out) *report_out = std::move(report);
    return net;
}

}  // namespace trnn
