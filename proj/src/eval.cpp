#include "trnn/eval.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <charconv>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "trnn/random.hpp"

namespace trnn {

namespace {

std::string shortest(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

BaselineKind baseline_kind(Method m) {
    switch (m) {
        case Method::sl_trnn: return BaselineKind::sl_trnn;
        case Method::pls: return BaselineKind::pls;
        case Method::flat_dense: return BaselineKind::flat_dense;
        case Method::trnn: break;
    }
    throw std::logic_error("trnn is not a flattened baseline");
}

Json stats_json(const Stats& s) {
    return Json{{"count", s.count}, {"median", s.median}, {"q1", s.q1}, {"q3", s.q3},
                {"std", s.std}};
}

}  // namespace

std::string to_string(Method m) {
    switch (m) {
        case Method::trnn: return "trnn";
        case Method::sl_trnn: return "sl_trnn";
        case Method::pls: return "pls";
        case Method::flat_dense: return "flat_dense";
    }
    return "unknown";
}

Method method_from_string(const std::string& name) {
    if (name == "trnn") return Method::trnn;
    if (name == "sl_trnn") return Method::sl_trnn;
    if (name == "pls") return Method::pls;
    if (name == "flat_dense") return Method::flat_dense;
    throw std::invalid_argument("unknown method '" + name +
                                "' (expected trnn, sl_trnn, pls or flat_dense)");
}

MethodConfig default_method_config(Method m) {
    MethodConfig c;
    c.method = m;
    switch (m) {
        case Method::trnn:
            c.train.optimizer.learning_rate = 1e-2;
            c.train.batch_size = 32;
            c.train.max_epochs = 500;
            c.train.tol = 1e-6;
            c.train.patience = 30;
            break;
        case Method::sl_trnn:
            c.train = default_sl_trnn_train_config();
            c.train.standardize = true;
            c.components = 4;
            break;
        case Method::pls:
            c.components = 4;
            break;
        case Method::flat_dense:
            c.train.optimizer.learning_rate = 1e-3;
            c.train.batch_size = 32;
            c.train.max_epochs = 300;
            c.train.tol = 1e-6;
            c.train.patience = 20;
            break;
    }
    return c;
}

std::string method_label(const MethodConfig& c) {
    return c.label.empty() ? to_string(c.method) : c.label;
}

Json to_json(const MethodConfig& c) {
    Json j{{"method", to_string(c.method)}};
    if (!c.label.empty()) j["label"] = c.label;
    if (c.method != Method::pls) j["train"] = to_json(c.train);
    switch (c.method) {
        case Method::trnn:
            if (c.network) j["network"] = to_json(*c.network);
            j["encoder_layers"] = c.encoder_layers;
            j["decoder_layers"] = c.decoder_layers;
            j["activation"] = to_string(c.activation);
            break;
        case Method::sl_trnn:
        case Method::pls:
            j["components"] = c.components;
            if (c.method == Method::pls) j["standardize"] = c.train.standardize;
            break;
        case Method::flat_dense:
            j["hidden"] = c.hidden;
            break;
    }
    return j;
}

MethodConfig method_config_from_json(const Json& j) {
    reject_unknown_keys(j,
                        {"method", "label", "train", "network", "encoder_layers", "decoder_layers",
                         "activation", "components", "hidden", "standardize"},
                        "method config");
    MethodConfig c = default_method_config(method_from_string(j.at("method").get<std::string>()));
    c.label = j.value("label", c.label);
    if (j.contains("train")) c.train = train_config_from_json(j.at("train"), c.train);
    if (j.contains("network")) c.network = network_spec_from_json(j.at("network"));
    c.encoder_layers = j.value("encoder_layers", c.encoder_layers);
    c.decoder_layers = j.value("decoder_layers", c.decoder_layers);
    if (j.contains("activation")) c.activation = activation_from_string(j.at("activation"));
    c.components = j.value("components", c.components);
    c.hidden = j.value("hidden", c.hidden);
    c.train.standardize = j.value("standardize", c.train.standardize);
    return c;
}

FittedMethod fit_method(const MethodConfig& config, const Tensor& x, const Tensor& y,
                        std::uint64_t seed) {
    const auto start = std::chrono::steady_clock::now();
    FittedMethod out;
    if (config.method == Method::trnn) {
        const NetworkSpec spec =
            config.network ? *config.network
                           : default_network_spec(x.sample_shape(), y.sample_shape(),
                                                  config.encoder_layers, config.decoder_layers,
                                                  config.activation);
        auto model = std::make_shared<TrnnModel>(init_model(spec, seed));
        TrainConfig tc = config.train;
        tc.seed = hash_combine(seed, hash_string("minibatch"));
        train(*model, x, y, tc);
        out.parameter_count = model->parameter_count();
        out.predict = [model](const Tensor& xs) { return predict(*model, xs); };
    } else {
        BaselineConfig bc;
        bc.kind = baseline_kind(config.method);
        bc.components = config.components;
        bc.hidden = config.hidden;
        bc.train = config.train;
        bc.train.seed = hash_combine(seed, hash_string("minibatch"));
        bc.standardize = config.train.standardize;
        bc.seed = seed;
        auto model = std::make_shared<FlattenedBaseline>(fit_baseline(x, y, bc));
        out.parameter_count = std::visit(
            [](const auto& m) -> std::size_t {
                using T = std::decay_t<decltype(m)>;
                if constexpr (std::is_same_v<T, FlatDenseBaseline>) {
                    return m.parameter_count();
                } else {
                    return static_cast<std::size_t>(m.w.size() + m.b.size() + m.v.size());
                }
            },
            model->model);
        out.predict = [model](const Tensor& xs) { return model->predict(xs); };
    }
    out.seconds = seconds_since(start);
    return out;
}

void BenchmarkPlan::validate() const {
    if (methods.empty()) throw std::invalid_argument("benchmark plan lists no methods");
    if (n_grid.empty() || sigma_grid.empty()) {
        throw std::invalid_argument("benchmark N and sigma grids must be non-empty");
    }
    if (replications == 0) throw std::invalid_argument("replications must be at least 1");
    if (test_size == 0) throw std::invalid_argument("test_size must be at least 1");
    for (auto n : n_grid) {
        if (n == 0) throw std::invalid_argument("N grid entries must be at least 1");
    }
    for (auto s : sigma_grid) {
        if (!(s >= 0.0) || !std::isfinite(s)) {
            throw std::invalid_argument("sigma grid entries must be finite and >= 0");
        }
    }
    if (grid_i < 2 || grid_j < 2) throw std::invalid_argument("grid extents must be at least 2");
    for (const auto& m : methods) m.train.validate();
}

MethodConfig desk_method_config(Method m, Generator g) {
    MethodConfig c = default_method_config(m);
    switch (m) {
        case Method::trnn: {
            // No encoder layers: the contraction reads the standardized
            // controls directly, and the decoder grows an (8, 8) core grid.
            NetworkSpec s;
            if (g == Generator::waterdrop) {
                s.input_shape = {4};
                s.output_shape = {20, 20, 2};
                s.bottleneck_out = {8, 8, 2};
                s.decoder = {{12, 12, 2}, {20, 20, 2}};
            } else {
                s.input_shape = {4, 20};
                s.output_shape = {2, 20, 20};
                s.bottleneck_out = {2, 8, 8};
                s.decoder = {{2, 12, 12}, {2, 20, 20}};
            }
            c.network = s;
            c.train.optimizer.learning_rate = 3e-3;
            c.train.batch_size = 16;
            c.train.max_epochs = g == Generator::waterdrop ? 1000 : 150;
            c.train.patience = g == Generator::waterdrop ? 100 : 0;
            break;
        }
        case Method::sl_trnn:
            c.train.optimizer.learning_rate = 1e-2;
            c.train.optimizer.lr_decay = 0.9995;
            c.train.batch_size = 32;
            c.train.max_epochs = 400;
            c.train.patience = 0;
            break;
        case Method::pls:
        case Method::flat_dense:
            break;
    }
    return c;
}

BenchmarkPlan desk_plan(Generator g) {
    BenchmarkPlan p;
    p.generator = g;
    for (auto m : {Method::trnn, Method::sl_trnn, Method::pls, Method::flat_dense}) {
        p.methods.push_back(desk_method_config(m, g));
    }
    p.n_grid = {100, 1000};
    p.sigma_grid = {0.01, 0.1};
    return p;
}

BenchmarkPlan full_plan(Generator g) {
    BenchmarkPlan p = desk_plan(g);
    p.n_grid = {100, 1000, 10000};
    p.sigma_grid = {0.01, 0.1, 1.0};
    p.replications = 100;
    p.test_size = 1000;
    p.grid_i = 50;
    p.grid_j = 50;
    return p;
}

Json to_json(const BenchmarkPlan& plan) {
    Json methods = Json::array();
    for (const auto& m : plan.methods) methods.push_back(to_json(m));
    return Json{{"generator", to_string(plan.generator)},
                {"methods", std::move(methods)},
                {"n_grid", plan.n_grid},
                {"sigma_grid", plan.sigma_grid},
                {"replications", plan.replications},
                {"test_size", plan.test_size},
                {"grid_i", plan.grid_i},
                {"grid_j", plan.grid_j},
                {"base_seed", plan.base_seed}};
}

BenchmarkPlan benchmark_plan_from_json(const Json& j) {
    reject_unknown_keys(j,
                        {"generator", "methods", "n_grid", "sigma_grid", "replications",
                         "test_size", "grid_i", "grid_j", "grid", "base_seed", "scale"},
                        "benchmark plan");
    const Generator g = generator_from_string(j.at("generator").get<std::string>());
    const std::string scale = j.value("scale", std::string("desk"));
    if (scale != "desk" && scale != "full") {
        throw std::invalid_argument("plan scale must be 'desk' or 'full'");
    }
    BenchmarkPlan p = scale == "full" ? full_plan(g) : desk_plan(g);
    if (j.contains("methods")) {
        p.methods.clear();
        for (const auto& m : j.at("methods")) {
            p.methods.push_back(m.is_string() ? desk_method_config(method_from_string(m), g)
                                              : method_config_from_json(m));
        }
    }
    p.n_grid = j.value("n_grid", p.n_grid);
    p.sigma_grid = j.value("sigma_grid", p.sigma_grid);
    p.replications = j.value("replications", p.replications);
    p.test_size = j.value("test_size", p.test_size);
    if (j.contains("grid")) p.grid_i = p.grid_j = j.at("grid").get<std::size_t>();
    p.grid_i = j.value("grid_i", p.grid_i);
    p.grid_j = j.value("grid_j", p.grid_j);
    p.base_seed = j.value("base_seed", p.base_seed);
    p.validate();
    return p;
}

std::uint64_t replication_seed(std::uint64_t base_seed, Generator g, std::size_t n, double sigma,
                               std::size_t rep) {
    std::uint64_t h = hash_combine(base_seed, hash_string(to_string(g)));
    h = hash_combine(h, static_cast<std::uint64_t>(n));
    h = hash_combine(h, std::bit_cast<std::uint64_t>(sigma));
    return hash_combine(h, rep);
}

std::uint64_t train_data_seed(std::uint64_t rep_seed) {
    return hash_combine(rep_seed, hash_string("train"));
}

std::uint64_t test_data_seed(std::uint64_t rep_seed) {
    return hash_combine(rep_seed, hash_string("test"));
}

std::uint64_t fit_seed(std::uint64_t rep_seed) {
    return hash_combine(rep_seed, hash_string("fit"));
}

BenchmarkResult run_benchmark(const BenchmarkPlan& plan, std::size_t jobs,
                              const std::function<void(const std::string&)>& progress) {
    plan.validate();
    struct Task {
        std::size_t n;
        double sigma;
        std::size_t rep;
    };
    std::vector<Task> tasks;
    for (auto n : plan.n_grid) {
        for (auto sigma : plan.sigma_grid) {
            for (std::size_t r = 0; r < plan.replications; ++r) tasks.push_back({n, sigma, r});
        }
    }
    struct Slot {
        std::vector<MetricsRecord> records;
        std::vector<BenchmarkFailure> failures;
    };
    std::vector<Slot> slots(tasks.size());
    std::atomic<std::size_t> next{0};
    std::mutex progress_mutex;
    const std::string gen_name = to_string(plan.generator);

    auto worker = [&] {
        for (std::size_t t = next++; t < tasks.size(); t = next++) {
            const Task& task = tasks[t];
            const std::uint64_t seed =
                replication_seed(plan.base_seed, plan.generator, task.n, task.sigma, task.rep);
            GenerateOptions opts;
            opts.sigma = task.sigma;
            opts.grid_i = plan.grid_i;
            opts.grid_j = plan.grid_j;
            opts.n = task.n;
            opts.seed = train_data_seed(seed);
            const Dataset train_set = generate_dataset(plan.generator, opts);
            opts.n = plan.test_size;
            opts.seed = test_data_seed(seed);
            const Dataset test_set = generate_dataset(plan.generator, opts);
            for (const auto& m : plan.methods) {
                const std::string name = method_label(m);
                try {
                    const FittedMethod fitted = fit_method(m, train_set.x, train_set.y, fit_seed(seed));
                    const double err = rmse(fitted.predict(test_set.x), test_set.y);
                    if (!std::isfinite(err)) throw std::runtime_error("non-finite rmse");
                    slots[t].records.push_back(
                        {name, gen_name, task.n, task.sigma, task.rep, seed, err, fitted.seconds});
                } catch (const std::exception& e) {
                    slots[t].failures.push_back({name, task.n, task.sigma, task.rep, e.what()});
                }
            }
            if (progress) {
                std::ostringstream msg;
                msg << gen_name << " N=" << task.n << " sigma=" << task.sigma << " rep=" << task.rep;
                for (const auto& r : slots[t].records) msg << ' ' << r.method << '=' << r.rmse;
                for (const auto& f : slots[t].failures) msg << ' ' << f.method << "=FAILED";
                std::lock_guard lock(progress_mutex);
                progress(msg.str());
            }
        }
    };

    const std::size_t workers = std::max<std::size_t>(1, std::min(jobs, tasks.size()));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    }

    BenchmarkResult out;
    for (auto& s : slots) {
        out.records.insert(out.records.end(), s.records.begin(), s.records.end());
        out.failures.insert(out.failures.end(), s.failures.begin(), s.failures.end());
    }
    return out;
}

double quantile(std::vector<double> values, double p) {
    if (values.empty()) throw std::invalid_argument("quantile of an empty sample");
    std::sort(values.begin(), values.end());
    const double pos = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

Stats describe(const std::vector<double>& values) {
    Stats s;
    s.count = values.size();
    if (values.empty()) return s;
    s.median = quantile(values, 0.5);
    s.q1 = quantile(values, 0.25);
    s.q3 = quantile(values, 0.75);
    if (values.size() > 1) {
        double mean = 0.0;
        for (double v : values) mean += v;
        mean /= static_cast<double>(values.size());
        double ss = 0.0;
        for (double v : values) ss += (v - mean) * (v - mean);
        s.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return s;
}

const CellSummary* BenchmarkSummary::find(const std::string& method, std::size_t n,
                                          double sigma) const {
    for (const auto& c : cells) {
        if (c.method == method && c.n == n && c.sigma == sigma) return &c;
    }
    return nullptr;
}

BenchmarkSummary summarize(const BenchmarkResult& result) {
    if (result.records.empty()) throw std::invalid_argument("no benchmark records to summarize");
    BenchmarkSummary out;
    out.records = result.records;
    out.failures = result.failures;
    std::vector<std::pair<std::vector<double>, std::vector<double>>> samples;
    for (const auto& r : result.records) {
        std::size_t idx = 0;
        while (idx < out.cells.size() &&
               !(out.cells[idx].method == r.method && out.cells[idx].n == r.n &&
                 out.cells[idx].sigma == r.sigma)) {
            ++idx;
        }
        if (idx == out.cells.size()) {
            out.cells.push_back({r.method, r.generator, r.n, r.sigma, {}, {}});
            samples.emplace_back();
        }
        samples[idx].first.push_back(r.rmse);
        samples[idx].second.push_back(r.train_seconds);
    }
    for (std::size_t i = 0; i < out.cells.size(); ++i) {
        out.cells[i].rmse = describe(samples[i].first);
        out.cells[i].seconds = describe(samples[i].second);
    }
    return out;
}

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRecord>& records) {
    out << kMetricsCsvHeader << '\n';
    for (const auto& r : records) {
        out << r.method << ',' << r.generator << ',' << r.n << ',' << shortest(r.sigma) << ','
            << r.rep << ',' << r.seed << ',' << shortest(r.rmse) << ','
            << shortest(r.train_seconds) << '\n';
    }
}

Json to_json(const BenchmarkSummary& summary) {
    Json cells = Json::array();
    for (const auto& c : summary.cells) {
        cells.push_back(Json{{"method", c.method},
                             {"generator", c.generator},
                             {"N", c.n},
                             {"sigma", c.sigma},
                             {"rmse", stats_json(c.rmse)},
                             {"train_seconds", stats_json(c.seconds)}});
    }
    Json failures = Json::array();
    for (const auto& f : summary.failures) {
        failures.push_back(Json{{"method", f.method},
                                {"N", f.n},
                                {"sigma", f.sigma},
                                {"rep", f.rep},
                                {"error", f.error}});
    }
    return Json{{"quantile_convention", "linear interpolation at p*(n-1)"},
                {"cells", std::move(cells)},
                {"failures", std::move(failures)},
                {"record_count", summary.records.size()}};
}

std::string median_table(const BenchmarkSummary& summary) {
    std::vector<std::string> methods;
    std::vector<std::pair<std::size_t, double>> columns;
    for (const auto& c : summary.cells) {
        if (std::find(methods.begin(), methods.end(), c.method) == methods.end()) {
            methods.push_back(c.method);
        }
        const std::pair<std::size_t, double> key{c.n, c.sigma};
        if (std::find(columns.begin(), columns.end(), key) == columns.end()) columns.push_back(key);
    }
    std::size_t width = 8;
    for (const auto& m : methods) width = std::max(width, m.size() + 2);
    const int label = static_cast<int>(width);
    std::ostringstream out;
    out << std::left << std::setw(label) << "method";
    for (const auto& [n, sigma] : columns) {
        std::ostringstream head;
        head << "N=" << n << ",s=" << sigma;
        out << std::setw(26) << head.str();
    }
    out << '\n';
    for (const auto& m : methods) {
        out << std::setw(label) << m;
        for (const auto& [n, sigma] : columns) {
            std::ostringstream cell;
            if (const auto* c = summary.find(m, n, sigma)) {
                cell << std::setprecision(4) << c->rmse.median << " (" << std::setprecision(3)
                     << c->seconds.median << "s)";
            } else {
                cell << "-";
            }
            out << std::setw(26) << cell.str();
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace trnn
