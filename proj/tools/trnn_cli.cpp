// trnn: generate datasets, train and apply tensor-on-tensor networks, check
// gradients and run benchmark sweeps.
//
// Exit codes: 0 success, 2 configuration error, 3 data error,
// 4 numerical failure (divergence or a failed gradient check).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "trnn/backprop.hpp"
#include "trnn/baselines.hpp"
#include "trnn/bundle.hpp"
#include "trnn/datagen.hpp"
#include "trnn/eval.hpp"
#include "trnn/gradcheck.hpp"
#include "trnn/json_io.hpp"
#include "trnn/model.hpp"

namespace fs = std::filesystem;
using namespace trnn;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class NumericFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

Json load_config(const std::string& path) {
    if (path.empty()) return Json::object();
    try {
        return read_json_file(path);
    } catch (const FormatError& e) {
        throw ConfigError(e.what());
    }
}

template <class T>
T pick(const CLI::App* app, const char* flag, const T& flag_value, const Json& config,
       const char* key, const T& fallback) {
    if (app->count(flag) > 0) return flag_value;
    if (config.contains(key)) return config.at(key).get<T>();
    return fallback;
}

std::uint64_t require_seed(const CLI::App* app, std::uint64_t flag_value, const Json& config) {
    if (app->count("--seed") > 0) return flag_value;
    if (config.contains("seed")) return config.at("seed").get<std::uint64_t>();
    throw ConfigError("--seed is required (flag or 'seed' config key)");
}

Tensor load_input(const std::string& path) {
    return fs::is_directory(path) ? load_dtf((fs::path(path) / "X.dtf").string()) : load_dtf(path);
}

void write_loss_report(const std::string& path, const TrainReport& report) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write '" + path + "'");
    out << "epoch,loss\n";
    out.precision(17);
    out << 0 << ',' << report.initial_loss << '\n';
    for (std::size_t e = 0; e < report.losses.size(); ++e) {
        out << e + 1 << ',' << report.losses[e] << '\n';
    }
}

Tensor predict_bundle(const std::string& dir, const Tensor& x) {
    const std::string kind = read_bundle_kind(dir);
    if (kind == "trnn") return predict(load_model(dir), x);
    return load_baseline(dir).predict(x);
}

// ---------------------------------------------------------------------------

struct GenerateArgs {
    std::string config;
    std::string generator;
    std::size_t n = 100;
    double sigma = 0.0;
    std::size_t grid = 50;
    std::size_t grid_i = 50;
    std::size_t grid_j = 50;
    std::uint64_t seed = 0;
    std::string out;
    bool noise_on_x = false;
};

int cmd_generate(const CLI::App* app, const GenerateArgs& a) {
    const Json cfg = load_config(a.config);
    reject_unknown_keys(cfg,
                        {"generator", "n", "sigma", "grid", "grid_i", "grid_j", "seed", "out",
                         "noise_on_x"},
                        "generate config");
    std::string gen = a.generator;
    if (gen.empty()) gen = cfg.value("generator", std::string());
    if (gen.empty()) throw ConfigError("generator is required (waterdrop or helicoid)");
    const Generator g = generator_from_string(gen);

    GenerateOptions o;
    o.n = pick(app, "--n", a.n, cfg, "n", o.n);
    o.sigma = pick(app, "--sigma", a.sigma, cfg, "sigma", o.sigma);
    const std::size_t grid = pick(app, "--grid", a.grid, cfg, "grid", std::size_t{50});
    o.grid_i = pick(app, "--grid-i", a.grid_i, cfg, "grid_i", grid);
    o.grid_j = pick(app, "--grid-j", a.grid_j, cfg, "grid_j", grid);
    o.seed = require_seed(app, a.seed, cfg);
    o.noise_on_x = pick(app, "--noise-on-x", a.noise_on_x, cfg, "noise_on_x", false);
    const std::string out = pick(app, "--out", a.out, cfg, "out", "data_" + gen);
    o.validate();

    const Dataset d = generate_dataset(g, o);
    save_dataset(d, out);
    std::cout << gen << ": X " << shape_string(d.x.shape()) << ", Y " << shape_string(d.y.shape())
              << " -> " << out << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
    std::string config;
    std::string data;
    std::string out;
    std::string validation;
    std::uint64_t seed = 0;
    std::string method;
    std::string activation;
    std::string optimizer;
    double lr = 0.0;
    std::size_t epochs = 0;
    std::size_t batch = 0;
    std::size_t components = 0;
    bool no_standardize = false;
};

int cmd_train(const CLI::App* app, const TrainArgs& a) {
    const Json cfg = load_config(a.config);
    reject_unknown_keys(cfg,
                        {"data", "out", "validation", "seed", "method", "train", "network",
                         "encoder_layers", "decoder_layers", "activation", "components",
                         "hidden", "standardize"},
                        "train config");
    Json method_json = Json::object();
    for (const char* key : {"method", "train", "network", "encoder_layers", "decoder_layers",
                            "activation", "components", "hidden", "standardize"}) {
        if (cfg.contains(key)) method_json[key] = cfg.at(key);
    }
    if (!a.method.empty()) method_json["method"] = a.method;
    if (!method_json.contains("method")) method_json["method"] = "trnn";
    MethodConfig mc = method_config_from_json(method_json);
    if (!a.activation.empty()) mc.activation = activation_from_string(a.activation);
    if (!a.optimizer.empty()) mc.train.optimizer.method = optimizer_from_string(a.optimizer);
    if (app->count("--lr")) mc.train.optimizer.learning_rate = a.lr;
    if (app->count("--epochs")) mc.train.max_epochs = a.epochs;
    if (app->count("--batch")) mc.train.batch_size = a.batch;
    if (app->count("--components")) mc.components = a.components;
    if (a.no_standardize) mc.train.standardize = false;
    mc.train.validate();

    const std::string data = pick(app, "--data", a.data, cfg, "data", std::string());
    if (data.empty()) throw ConfigError("--data is required");
    const std::string out = pick(app, "--out", a.out, cfg, "out", std::string("model"));
    const std::string validation =
        pick(app, "--validation", a.validation, cfg, "validation", std::string());
    const std::uint64_t seed = require_seed(app, a.seed, cfg);
    mc.train.seed = seed;

    const TensorPair train_set = load_tensors(data);
    std::optional<TensorPair> val;
    if (!validation.empty()) val = load_tensors(validation);

    TrainReport report;
    std::size_t parameters = 0;
    if (mc.method == Method::trnn) {
        const NetworkSpec spec =
            mc.network ? *mc.network
                       : default_network_spec(train_set.x.sample_shape(),
                                              train_set.y.sample_shape(), mc.encoder_layers,
                                              mc.decoder_layers, mc.activation);
        TrnnModel model = init_model(spec, seed);
        std::optional<ValidationData> vd;
        if (val) vd.emplace(ValidationData{val->x, val->y});
        report = train(model, train_set.x, train_set.y, mc.train, vd);
        parameters = model.parameter_count();
        save_model(model, out);
    } else {
        BaselineConfig bc;
        bc.kind = baseline_from_string(to_string(mc.method));
        bc.components = mc.components;
        bc.hidden = mc.hidden;
        bc.train = mc.train;
        bc.standardize = mc.train.standardize;
        bc.seed = seed;
        const FlattenedBaseline model = fit_baseline(train_set.x, train_set.y, bc);
        if (model.report) report = *model.report;
        save_baseline(model, out);
        if (val) report.validation_rmse.push_back(rmse(model.predict(val->x), val->y));
    }
    write_loss_report((fs::path(out) / "report.csv").string(), report);
    Json summary{{"method", to_string(mc.method)},
                 {"parameters", parameters},
                 {"initial_loss", report.initial_loss},
                 {"final_loss", report.final_loss()},
                 {"epochs_run", report.epochs_run},
                 {"stopped_early", report.stopped_early},
                 {"config", to_json(mc)}};
    if (!report.validation_rmse.empty()) summary["validation_rmse"] = report.validation_rmse.back();
    write_json_file((fs::path(out) / "summary.json").string(), summary);
    std::cout << to_string(mc.method) << ": " << report.epochs_run << " epochs, loss "
              << report.initial_loss << " -> " << report.final_loss() << " in " << report.seconds
              << " s -> " << out << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------------------

int cmd_predict(const std::string& model, const std::string& input, const std::string& out) {
    const Tensor y = predict_bundle(model, load_input(input));
    save_dtf(out, y);
    std::cout << "prediction " << shape_string(y.shape()) << " -> " << out << '\n';
    return kExitOk;
}

int cmd_eval(const std::string& model, const std::string& data, const std::string& out) {
    const TensorPair d = load_tensors(data);
    const double err = rmse(predict_bundle(model, d.x), d.y);
    MetricsRecord rec;
    rec.method = read_bundle_kind(model);
    rec.generator = "custom";
    rec.n = d.x.shape().front();
    const fs::path meta = fs::path(data) / "meta";
    if (fs::exists(meta)) {
        const Json m = read_json_file(meta.string());
        rec.generator = m.value("generator", rec.generator);
        rec.sigma = m.value("sigma", 0.0);
        rec.seed = m.value("seed", std::uint64_t{0});
    }
    rec.rmse = err;
    std::ofstream csv(out);
    if (!csv) throw FormatError("cannot write '" + out + "'");
    write_metrics_csv(csv, {rec});
    std::printf("rmse %.10g\n", err);
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct GradcheckArgs {
    std::string spec;
    std::string activation = "relu";
    std::uint64_t seed = 0;
    std::optional<std::uint64_t> random_spec;
    double tolerance = -1.0;
    std::size_t batch = 4;
    bool corrupt = false;
};

int cmd_gradcheck(const CLI::App* app, const GradcheckArgs& a) {
    if (app->count("--seed") == 0) throw ConfigError("--seed is required");
    const Activation act = activation_from_string(a.activation);
    NetworkSpec spec;
    if (!a.spec.empty()) {
        spec = network_spec_from_json(load_config(a.spec));
    } else if (a.random_spec) {
        spec = random_gradcheck_spec(*a.random_spec, act);
    } else {
        spec = default_gradcheck_spec(act);
    }
    GradcheckOptions opts;
    opts.tolerance = a.tolerance > 0.0 ? a.tolerance
                                       : (spec.activation == Activation::identity ? 1e-6 : 1e-4);
    opts.batch = a.batch;
    opts.corrupt_gradient = a.corrupt;
    const GradcheckReport r = gradcheck(spec, a.seed, opts);
    std::cout << "spec " << to_json(spec).dump() << '\n';
    for (const auto& g : r.groups) {
        std::printf("  %-18s %6zu params  rel_error %.3e\n", g.name.c_str(), g.size, g.rel_error);
    }
    std::printf("max relative error %.3e (tolerance %.1e, %zu instance(s)) %s\n", r.max_rel_error,
                opts.tolerance, r.attempts, r.passed ? "PASS" : "FAIL");
    if (!r.passed) {
        std::cout << "worst entries:\n";
        for (const auto& e : r.worst) {
            std::printf("  %s[%zu] analytic %.10e numeric %.10e\n", e.group.c_str(), e.index,
                        e.analytic, e.numeric);
        }
        throw NumericFailure("gradient check failed");
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct BenchmarkArgs {
    std::string plan;
    std::string generator;
    std::string out = "benchmark";
    std::uint64_t seed = 0;
    std::size_t jobs = 1;
    std::size_t replications = 0;
    bool full = false;
    bool quiet = false;
};

int cmd_benchmark(const CLI::App* app, const BenchmarkArgs& a) {
    Json plan_json = load_config(a.plan);
    if (!a.generator.empty()) plan_json["generator"] = a.generator;
    if (!plan_json.contains("generator")) throw ConfigError("plan needs a generator");
    if (a.full) plan_json["scale"] = "full";
    if (app->count("--seed")) plan_json["base_seed"] = a.seed;
    if (!plan_json.contains("base_seed")) {
        throw ConfigError("--seed is required (flag or 'base_seed' plan key)");
    }
    if (app->count("--replications")) plan_json["replications"] = a.replications;
    const BenchmarkPlan plan = benchmark_plan_from_json(plan_json);

    const auto progress = [&](const std::string& line) {
        if (!a.quiet) std::cerr << line << '\n';
    };
    const BenchmarkResult result = run_benchmark(plan, a.jobs, progress);
    fs::create_directories(a.out);
    {
        std::ofstream csv(fs::path(a.out) / "metrics.csv");
        write_metrics_csv(csv, result.records);
    }
    write_json_file((fs::path(a.out) / "plan.json").string(), to_json(plan));
    if (result.records.empty()) {
        std::cerr << "every replication failed; first error: " << result.failures.front().error
                  << '\n';
        throw NumericFailure("benchmark produced no records");
    }
    const BenchmarkSummary summary = summarize(result);
    write_json_file((fs::path(a.out) / "summary.json").string(), to_json(summary));
    std::cout << "median rmse (median fit seconds)\n" << median_table(summary);
    if (!result.failures.empty()) {
        std::cout << result.failures.size() << " failed fit(s):\n";
        for (const auto& f : result.failures) {
            std::cout << "  " << f.method << " N=" << f.n << " sigma=" << f.sigma << " rep=" << f.rep
                      << ": " << f.error << '\n';
        }
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tensor-on-tensor regression networks"};
    app.require_subcommand(1);

    GenerateArgs gen;
    auto* g = app.add_subcommand("generate", "Write a synthetic dataset bundle");
    g->add_option("generator", gen.generator, "waterdrop or helicoid");
    g->add_option("--config", gen.config, "JSON config file");
    g->add_option("--n", gen.n, "sample count");
    g->add_option("--sigma", gen.sigma, "Gaussian noise std on Y");
    g->add_option("--grid", gen.grid, "grid extent used for both I and J");
    g->add_option("--grid-i", gen.grid_i, "first grid extent");
    g->add_option("--grid-j", gen.grid_j, "second grid extent");
    g->add_option("--seed", gen.seed, "random seed");
    g->add_option("--out", gen.out, "output directory");
    g->add_flag("--noise-on-x", gen.noise_on_x, "also perturb X");

    TrainArgs tr;
    auto* t = app.add_subcommand("train", "Fit a model on a dataset bundle");
    t->add_option("--config", tr.config, "JSON config file");
    t->add_option("--data", tr.data, "dataset directory (X.dtf, Y.dtf)");
    t->add_option("--out", tr.out, "model output directory");
    t->add_option("--validation", tr.validation, "validation dataset directory");
    t->add_option("--seed", tr.seed, "initialization and shuffling seed");
    t->add_option("--method", tr.method, "trnn, sl_trnn, pls or flat_dense");
    t->add_option("--activation", tr.activation, "relu or identity");
    t->add_option("--optimizer", tr.optimizer, "adam or sgd");
    t->add_option("--lr", tr.lr, "learning rate");
    t->add_option("--epochs", tr.epochs, "maximum epochs");
    t->add_option("--batch", tr.batch, "minibatch size");
    t->add_option("--components", tr.components, "rank k for sl_trnn and pls");
    t->add_flag("--no-standardize", tr.no_standardize, "train on raw data");

    std::string p_model, p_input, p_out = "prediction.dtf";
    auto* p = app.add_subcommand("predict", "Apply a saved model");
    p->add_option("--model", p_model, "model bundle directory")->required();
    p->add_option("--input", p_input, "X tensor (.dtf) or dataset directory")->required();
    p->add_option("--out", p_out, "output tensor path");

    std::string e_model, e_data, e_out = "metrics.csv";
    auto* e = app.add_subcommand("eval", "Relative squared error of a model on a dataset");
    e->add_option("--model", e_model, "model bundle directory")->required();
    e->add_option("--data", e_data, "dataset directory")->required();
    e->add_option("--out", e_out, "metrics CSV path");

    GradcheckArgs gc;
    auto* c = app.add_subcommand("gradcheck", "Compare backprop with finite differences");
    c->add_option("--spec", gc.spec, "network spec JSON file");
    c->add_option("--random-spec", gc.random_spec, "draw a small random spec from this seed");
    c->add_option("--activation", gc.activation, "relu or identity (built-in specs)");
    c->add_option("--seed", gc.seed, "weights and data seed");
    c->add_option("--tolerance", gc.tolerance, "max relative error");
    c->add_option("--batch", gc.batch, "samples in the check");
    c->add_flag("--corrupt-gradient", gc.corrupt, "perturb one analytic entry (negative control)");

    BenchmarkArgs bm;
    auto* b = app.add_subcommand("benchmark", "Replicated sweep over (N, sigma)");
    b->add_option("--plan", bm.plan, "plan JSON file");
    b->add_option("--generator", bm.generator, "waterdrop or helicoid");
    b->add_option("--out", bm.out, "output directory");
    b->add_option("--seed", bm.seed, "base seed");
    b->add_option("--jobs", bm.jobs, "worker threads");
    b->add_option("--replications", bm.replications, "replications per cell");
    b->add_flag("--full", bm.full, "full-scale protocol instead of desk scale");
    b->add_flag("--quiet", bm.quiet, "no per-replication progress");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int code = app.exit(err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (g->parsed()) return cmd_generate(g, gen);
        if (t->parsed()) return cmd_train(t, tr);
        if (p->parsed()) return cmd_predict(p_model, p_input, p_out);
        if (e->parsed()) return cmd_eval(e_model, e_data, e_out);
        if (c->parsed()) return cmd_gradcheck(c, gc);
        if (b->parsed()) return cmd_benchmark(b, bm);
    } catch (const NumericFailure& err) {
        std::cerr << "error: " << err.what() << '\n';
        return kExitNumeric;
    } catch (const DivergenceError& err) {
        std::cerr << "error: " << err.what() << '\n';
        return kExitNumeric;
    } catch (const ShapeError& err) {
        std::cerr << "data error: " << err.what() << '\n';
        return kExitData;
    } catch (const FormatError& err) {
        std::cerr << "data error: " << err.what() << '\n';
        return kExitData;
    } catch (const fs::filesystem_error& err) {
        std::cerr << "data error: " << err.what() << '\n';
        return kExitData;
    } catch (const Json::exception& err) {
        std::cerr << "config error: " << err.what() << '\n';
        return kExitConfig;
    } catch (const std::invalid_argument& err) {
        std::cerr << "config error: " << err.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 1;
    }
    return kExitConfig;
}
