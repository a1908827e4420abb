#include "trnn/baselines.hpp"
#include "trnn/bundle.hpp"

namespace trnn {

namespace {

Tensor unflatten(const Matrix& m, const Shape& sample) {
    Shape shape{static_cast<std::size_t>(m.rows())};
    shape.insert(shape.end(), sample.begin(), sample.end());
    Tensor t(shape);
    Eigen::Map<RowMatrix>(t.data().data(), m.rows(), m.cols()) = m;
    return t;
}

Tensor vector_tensor(const Eigen::VectorXd& v) {
    return Tensor({static_cast<std::size_t>(v.size())},
                  std::vector<double>(v.data(), v.data() + v.size()));
}

}  // namespace

std::string to_string(BaselineKind k) {
    switch (k) {
        case BaselineKind::sl_trnn: return "sl_trnn";
        case BaselineKind::pls: return "pls";
        case BaselineKind::flat_dense: return "flat_dense";
    }
    return "unknown";
}

BaselineKind baseline_from_string(const std::string& name) {
    if (name == "sl_trnn") return BaselineKind::sl_trnn;
    if (name == "pls") return BaselineKind::pls;
    if (name == "flat_dense") return BaselineKind::flat_dense;
    throw std::invalid_argument("unknown baseline '" + name + "'");
}

Matrix flatten_samples(const Tensor& t) {
    return t.unfold_leading();
}

Tensor FlattenedBaseline::predict(const Tensor& x) const {
    if (x.empty()) throw ShapeError("empty batch: at least one sample is required");
    if (x.sample_shape() != x_sample) {
        throw ShapeError("baseline expects samples of shape " + shape_string(x_sample) + ", got " +
                         shape_string(x.sample_shape()));
    }
    const Matrix xm = flatten_samples(x_scaler ? x_scaler->apply(x) : x);
    const Matrix ym = std::visit([&](const auto& m) { return Matrix(m.predict(xm)); }, model);
    Tensor y = unflatten(ym, y_sample);
    return y_scaler ? y_scaler->invert(y) : y;
}

FlattenedBaseline fit_baseline(const Tensor& x, const Tensor& y, const BaselineConfig& config) {
    if (x.empty() || y.empty() || x.shape().front() != y.shape().front()) {
        throw ShapeError("X and Y must share a non-empty leading sample extent");
    }
    FlattenedBaseline out;
    out.kind = config.kind;
    out.x_sample = x.sample_shape();
    out.y_sample = y.sample_shape();
    if (config.standardize) {
        out.x_scaler = Standardizer::fit(x);
        out.y_scaler = Standardizer::fit(y);
    }
    const Matrix xm = flatten_samples(out.x_scaler ? out.x_scaler->apply(x) : x);
    const Matrix ym = flatten_samples(out.y_scaler ? out.y_scaler->apply(y) : y);
    switch (config.kind) {
        case BaselineKind::sl_trnn:
            out.model = fit_sl_trnn(xm, ym, config.components, config.train, config.seed);
            out.report = std::get<SlTrnnModel>(out.model).report;
            break;
        case BaselineKind::pls:
            out.model = fit_pls(xm, ym, config.components);
            break;
        case BaselineKind::flat_dense: {
            TrainReport report;
            out.model = fit_flat_dense(xm, ym, config.hidden, config.train, config.seed, &report);
            out.report = std::move(report);
            break;
        }
    }
    return out;
}

void save_baseline(const FlattenedBaseline& model, const std::string& dir) {
    BundleWriter w(dir, to_string(model.kind));
    w.fields()["x_sample"] = model.x_sample;
    w.fields()["y_sample"] = model.y_sample;
    w.fields()["standardize"] = model.x_scaler.has_value();
    if (const auto* sl = std::get_if<SlTrnnModel>(&model.model)) {
        w.fields()["components"] = sl->b.rows();
        w.add("w", sl->w);
        w.add("b", sl->b);
        w.add("v", sl->v);
    } else if (const auto* pls = std::get_if<PlsModel>(&model.model)) {
        w.fields()["components"] = pls->components;
        w.add("w", pls->w);
        w.add("b", pls->b);
        w.add("v", pls->v);
    } else {
        const auto& net = std::get<FlatDenseBaseline>(model.model);
        w.fields()["widths"] = net.widths;
        for (std::size_t i = 0; i < net.weights.size(); ++i) {
            w.add("weight_" + std::to_string(i), net.weights[i]);
            w.add("bias_" + std::to_string(i), vector_tensor(net.biases[i]));
        }
    }
    if (model.x_scaler) {
        w.add("x_mean", model.x_scaler->mean);
        w.add("x_scale", model.x_scaler->scale);
        w.add("y_mean", model.y_scaler->mean);
        w.add("y_scale", model.y_scaler->scale);
    }
    w.finish();
}

FlattenedBaseline load_baseline(const std::string& dir) {
    const std::string kind = read_bundle_kind(dir);
    FlattenedBaseline out;
    try {
        out.kind = baseline_from_string(kind);
    } catch (const std::invalid_argument&) {
        throw FormatError("bundle '" + dir + "' holds a '" + kind + "' model, not a baseline");
    }
    BundleReader r(dir, kind);
    out.x_sample = r.fields().at("x_sample").get<Shape>();
    out.y_sample = r.fields().at("y_sample").get<Shape>();
    const std::size_t p = shape_size(out.x_sample);
    const std::size_t q = shape_size(out.y_sample);
    if (out.kind == BaselineKind::flat_dense) {
        FlatDenseBaseline net;
        net.widths = r.fields().at("widths").get<std::vector<std::size_t>>();
        if (net.widths.size() < 2 || net.widths.front() != p || net.widths.back() != q) {
            throw FormatError("bundle '" + dir + "': dense widths do not match sample shapes");
        }
        for (std::size_t i = 0; i + 1 < net.widths.size(); ++i) {
            net.weights.push_back(r.matrix("weight_" + std::to_string(i), net.widths[i + 1],
                                           net.widths[i]));
            const Tensor b = r.tensor("bias_" + std::to_string(i), {net.widths[i + 1]});
            net.biases.push_back(Eigen::Map<const Eigen::VectorXd>(
                b.data().data(), static_cast<Eigen::Index>(b.size())));
        }
        out.model = std::move(net);
    } else {
        const auto k = r.fields().at("components").get<std::size_t>();
        Matrix w = r.matrix("w", p, k);
        Matrix b = r.matrix("b", k, k);
        Matrix v = r.matrix("v", q, k);
        if (out.kind == BaselineKind::sl_trnn) {
            out.model = SlTrnnModel{std::move(w), std::move(b), std::move(v), {}};
        } else {
            PlsModel pls;
            pls.w = std::move(w);
            pls.b = std::move(b);
            pls.v = std::move(v);
            pls.components = k;
            out.model = std::move(pls);
        }
    }
    if (r.fields().value("standardize", false)) {
        out.x_scaler = Standardizer{r.tensor("x_mean", out.x_sample), r.tensor("x_scale", out.x_sample)};
        out.y_scaler = Standardizer{r.tensor("y_mean", out.y_sample), r.tensor("y_scale", out.y_sample)};
    }
    return out;
}

}  // namespace trnn
