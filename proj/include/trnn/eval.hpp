#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "trnn/baselines.hpp"
#include "trnn/datagen.hpp"
#include "trnn/json_io.hpp"
#include "trnn/model.hpp"

namespace trnn {

enum class Method { trnn, sl_trnn, pls, flat_dense };

std::string to_string(Method m);
Method method_from_string(const std::string& name);

/// Fitting recipe for one benchmarked method. Only the fields relevant to
/// `method` are read.
struct MethodConfig {
    Method method = Method::trnn;
    /// Name used in records; empty means to_string(method).
    std::string label;
    TrainConfig train;
    // trnn: explicit layout, or the default schedule with these depths.
    std::optional<NetworkSpec> network;
    std::size_t encoder_layers = 2;
    std::size_t decoder_layers = 2;
    Activation activation = Activation::relu;
    // sl_trnn, pls
    std::size_t components = 2;
    // flat_dense
    std::vector<std::size_t> hidden{256};
};

MethodConfig default_method_config(Method m);
std::string method_label(const MethodConfig& c);
Json to_json(const MethodConfig& c);
/// Starts from default_method_config(method) and applies the given keys.
MethodConfig method_config_from_json(const Json& j);

/// A fitted model behind a uniform raw-scale predict call.
struct FittedMethod {
    std::function<Tensor(const Tensor&)> predict;
    double seconds = 0.0;
    std::size_t parameter_count = 0;
};

/// Fits on raw-scale data. `seed` drives initialization and minibatch order.
FittedMethod fit_method(const MethodConfig& config, const Tensor& x, const Tensor& y,
                        std::uint64_t seed);

struct BenchmarkPlan {
    Generator generator = Generator::waterdrop;
    std::vector<MethodConfig> methods;
    std::vector<std::size_t> n_grid;
    std::vector<double> sigma_grid;
    std::size_t replications = 20;
    std::size_t test_size = 200;
    std::size_t grid_i = 20;
    std::size_t grid_j = 20;
    std::uint64_t base_seed = 0;

    void validate() const;
};

/// Benchmark recipe sized for the desk grid: the TRNN layout and epoch
/// budgets depend on the generator, the baselines do not.
MethodConfig desk_method_config(Method m, Generator g);

/// I = J = 20, R = 20, 200 test samples, N in {100, 1000}, sigma in {0.01, 0.1},
/// every method with its desk_method_config.
BenchmarkPlan desk_plan(Generator g);
/// I = J = 50, R = 100, 1000 test samples, N in {100, 1000, 10000},
/// sigma in {0.01, 0.1, 1}.
BenchmarkPlan full_plan(Generator g);

Json to_json(const BenchmarkPlan& plan);
/// Keys absent from j keep the desk_plan defaults of j's generator.
BenchmarkPlan benchmark_plan_from_json(const Json& j);

/// seed = hash_combine over (base_seed, generator name, N, bits of sigma, rep).
std::uint64_t replication_seed(std::uint64_t base_seed, Generator g, std::size_t n, double sigma,
                               std::size_t rep);

/// Seeds derived from a replication seed for the training set, the test set
/// and model fitting.
std::uint64_t train_data_seed(std::uint64_t rep_seed);
std::uint64_t test_data_seed(std::uint64_t rep_seed);
std::uint64_t fit_seed(std::uint64_t rep_seed);

struct MetricsRecord {
    std::string method;
    std::string generator;
    std::size_t n = 0;
    double sigma = 0.0;
    std::size_t rep = 0;
    std::uint64_t seed = 0;
    double rmse = 0.0;
    double train_seconds = 0.0;
};

struct BenchmarkFailure {
    std::string method;
    std::size_t n = 0;
    double sigma = 0.0;
    std::size_t rep = 0;
    std::string error;
};

struct BenchmarkResult {
    std::vector<MetricsRecord> records;
    std::vector<BenchmarkFailure> failures;
};

/// Records are ordered by (N, sigma, rep, method) in plan order no matter
/// how many workers run. A failed fit is listed in `failures` instead.
BenchmarkResult run_benchmark(const BenchmarkPlan& plan, std::size_t jobs = 1,
                              const std::function<void(const std::string&)>& progress = {});

struct Stats {
    std::size_t count = 0;
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
    double std = 0.0;  // sample standard deviation, 0 for one value
};

/// Quantiles by linear interpolation between order statistics
/// (position p * (n - 1)).
double quantile(std::vector<double> values, double p);
Stats describe(const std::vector<double>& values);

struct CellSummary {
    std::string method;
    std::string generator;
    std::size_t n = 0;
    double sigma = 0.0;
    Stats rmse;
    Stats seconds;
};

struct BenchmarkSummary {
    std::vector<CellSummary> cells;  // first-appearance order of (method, N, sigma)
    std::vector<MetricsRecord> records;
    std::vector<BenchmarkFailure> failures;

    [[nodiscard]] const CellSummary* find(const std::string& method, std::size_t n,
                                          double sigma) const;
};

/// Throws std::invalid_argument on an empty record list.
BenchmarkSummary summarize(const BenchmarkResult& result);

inline constexpr const char* kMetricsCsvHeader =
    "method,generator,N,sigma,rep,seed,rmse,train_seconds";

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRecord>& records);
Json to_json(const BenchmarkSummary& summary);
/// Methods as rows, (N, sigma) cells as columns, median rmse and seconds.
std::string median_table(const BenchmarkSummary& summary);

}  // namespace trnn
