#include <algorithm>
#include <limits>

#include "trnn/baselines.hpp"

namespace trnn {

double sl_objective(const Matrix& x, const Matrix& y, const Matrix& w, const Matrix& b,
                    const Matrix& v) {
    return (y - x * w * b * v.transpose()).squaredNorm();
}

NetworkSpec sl_trnn_spec(std::size_t p, std::size_t q, std::size_t k) {
    NetworkSpec spec;
    spec.input_shape = {p};
    spec.output_shape = {q};
    spec.encoder = {{k}};
    spec.bottleneck_out = {k};
    spec.decoder = {{q}};
    spec.activation = Activation::identity;
    spec.validate();
    return spec;
}

SlTrnnModel sl_trnn_from_network(const TrnnModel& model) {
    if (model.encoder.size() != 1 || model.decoder.size() != 1 ||
        model.spec.input_shape.size() != 1 || model.spec.output_shape.size() != 1) {
        throw ShapeError("not a single-layer matrix network");
    }
    SlTrnnModel out;
    out.w = model.encoder[0].factors()[0].transpose();
    out.b = model.contraction.core.to_matrix();
    out.v = model.decoder[0].factors()[0];
    return out;
}

TrainConfig default_sl_trnn_train_config() {
    TrainConfig c;
    c.optimizer.method = OptimizerMethod::adam;
    c.optimizer.learning_rate = 1e-2;
    c.optimizer.lr_decay = 0.9995;
    c.batch_size = std::numeric_limits<std::size_t>::max();
    c.max_epochs = 10000;
    c.tol = 1e-12;
    c.patience = 500;
    c.standardize = false;
    return c;
}

SlTrnnModel fit_sl_trnn(const Matrix& x, const Matrix& y, std::size_t k, const TrainConfig& config,
                        std::uint64_t seed) {
    const auto n = static_cast<std::size_t>(x.rows());
    const auto p = static_cast<std::size_t>(x.cols());
    const auto q = static_cast<std::size_t>(y.cols());
    if (static_cast<std::size_t>(y.rows()) != n) {
        throw ShapeError("X and Y must have the same number of rows");
    }
    if (k == 0 || k > std::min({p, q, n})) {
        throw std::invalid_argument("SL-TRNN rank k=" + std::to_string(k) +
                                    " must lie in [1, min(P, Q, N)] = [1, " +
                                    std::to_string(std::min({p, q, n})) + "]");
    }
    TrnnModel model = init_model(sl_trnn_spec(p, q, k), seed);
    TrainConfig c = config;
    c.standardize = false;
    TrainReport report = train(model, Tensor::from_matrix(x), Tensor::from_matrix(y), c);
    SlTrnnModel out = sl_trnn_from_network(model);
    out.report = std::move(report);
    return out;
}

EquivalenceReport pls_equivalence_check(const Matrix& x, const Matrix& y, std::size_t k,
                                        const std::vector<std::uint64_t>& seeds,
                                        const TrainConfig& config, double rel_tol,
                                        double abs_fraction) {
    EquivalenceReport report;
    report.rel_tol = rel_tol;
    report.abs_tol = abs_fraction * y.squaredNorm();
    const PlsModel pls = fit_pls(x, y, k);
    report.pls_objective = sl_objective(x, y, pls.w, pls.b, pls.v);
    report.holds = true;
    for (auto seed : seeds) {
        const SlTrnnModel sl = fit_sl_trnn(x, y, k, config, seed);
        const double obj = sl_objective(x, y, sl.w, sl.b, sl.v);
        report.sl_objectives.push_back(obj);
        if (!(obj <= report.pls_objective * (1.0 + rel_tol) + report.abs_tol)) report.holds = false;
    }
    return report;
}

}  // namespace trnn
