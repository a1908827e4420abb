#include <algorithm>
#include <map>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "trnn/eval.hpp"

using namespace trnn;

namespace {

/// Splits one CSV line on commas (the metrics file never quotes fields).
std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(field);
    return out;
}

/// Median by sorting and averaging the middle pair, independent of quantile().
double sheet_median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

BenchmarkPlan tiny_plan() {
    BenchmarkPlan p;
    p.generator = Generator::waterdrop;
    MethodConfig pls = default_method_config(Method::pls);
    pls.components = 2;
    MethodConfig sl = default_method_config(Method::sl_trnn);
    sl.components = 2;
    sl.train.max_epochs = 40;
    p.methods = {pls, sl};
    p.n_grid = {20, 40};
    p.sigma_grid = {0.05};
    p.replications = 3;
    p.test_size = 10;
    p.grid_i = 5;
    p.grid_j = 5;
    p.base_seed = 5;
    return p;
}

}  // namespace

TEST_CASE("quantiles use linear interpolation") {
    CHECK(quantile({1, 2, 3}, 0.5) == 2.0);
    CHECK(quantile({1, 2, 3}, 0.25) == 1.5);
    CHECK(quantile({3, 1, 2}, 0.75) == 2.5);
    CHECK(quantile({7}, 0.3) == 7.0);
    CHECK(quantile({1, 2, 3, 4}, 0.5) == 2.5);
    CHECK_THROWS_AS(quantile({}, 0.5), std::invalid_argument);

    const Stats s = describe({1, 2, 3});
    CHECK(s.count == 3);
    CHECK(s.median == 2.0);
    CHECK(s.q1 == 1.5);
    CHECK(s.q3 == 2.5);
    CHECK(s.std == doctest::Approx(1.0));
    CHECK(describe({4.5}).median == 4.5);
    CHECK(describe({4.5}).std == 0.0);
}

TEST_CASE("replication seeds separate every coordinate") {
    const auto s = replication_seed(1, Generator::waterdrop, 100, 0.1, 0);
    CHECK(s == replication_seed(1, Generator::waterdrop, 100, 0.1, 0));
    CHECK(s != replication_seed(2, Generator::waterdrop, 100, 0.1, 0));
    CHECK(s != replication_seed(1, Generator::helicoid, 100, 0.1, 0));
    CHECK(s != replication_seed(1, Generator::waterdrop, 1000, 0.1, 0));
    CHECK(s != replication_seed(1, Generator::waterdrop, 100, 0.01, 0));
    CHECK(s != replication_seed(1, Generator::waterdrop, 100, 0.1, 1));
    CHECK(train_data_seed(s) != test_data_seed(s));
    CHECK(fit_seed(s) != train_data_seed(s));
}

TEST_CASE("plans validate and round-trip through JSON") {
    BenchmarkPlan p = tiny_plan();
    CHECK_NOTHROW(p.validate());
    const BenchmarkPlan back = benchmark_plan_from_json(to_json(p));
    CHECK(to_json(back) == to_json(p));

    BenchmarkPlan empty = p;
    empty.n_grid.clear();
    CHECK_THROWS_AS(empty.validate(), std::invalid_argument);
    BenchmarkPlan zero = p;
    zero.replications = 0;
    CHECK_THROWS_AS(zero.validate(), std::invalid_argument);
    CHECK_THROWS(benchmark_plan_from_json(Json{{"generator", "waterdrop"}, {"bogus", 1}}));

    const BenchmarkPlan desk = desk_plan(Generator::helicoid);
    CHECK(desk.grid_i == 20);
    CHECK(desk.replications == 20);
    CHECK(desk.test_size == 200);
    CHECK(desk.n_grid == std::vector<std::size_t>{100, 1000});
    const BenchmarkPlan full = full_plan(Generator::waterdrop);
    CHECK(full.replications == 100);
    CHECK(full.test_size == 1000);
    CHECK(full.grid_i == 50);
}

TEST_CASE("method configs round-trip through JSON") {
    for (auto m : {Method::trnn, Method::sl_trnn, Method::pls, Method::flat_dense}) {
        const MethodConfig c = default_method_config(m);
        CHECK(to_json(method_config_from_json(to_json(c))) == to_json(c));
        CHECK(method_from_string(to_string(m)) == m);
    }
    CHECK_THROWS_AS(method_from_string("mtot"), std::invalid_argument);
}

TEST_CASE("a linear baseline recovers a noiseless linear map") {
    const Tensor x = oracle::random_tensor({60, 5}, 1);
    const Matrix c = oracle::random_matrix(6, 5, 2);
    const Tensor y = oracle::mode_product(x, c, 2);
    for (auto m : {Method::sl_trnn, Method::pls}) {
        MethodConfig cfg = default_method_config(m);
        cfg.components = 5;
        const FittedMethod f = fit_method(cfg, x, y, 3);
        CHECK(rmse(f.predict(x), y) < 1e-4);
        CHECK(f.parameter_count > 0);
    }
}

TEST_CASE("benchmark records are ordered, complete and deterministic") {
    const BenchmarkPlan p = tiny_plan();
    const BenchmarkResult a = run_benchmark(p, 1);
    const BenchmarkResult b = run_benchmark(p, 3);
    REQUIRE(a.failures.empty());
    REQUIRE(a.records.size() == 2 * 1 * 3 * 2);
    REQUIRE(b.records.size() == a.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        CHECK(a.records[i].method == b.records[i].method);
        CHECK(a.records[i].seed == b.records[i].seed);
        CHECK(a.records[i].rmse == b.records[i].rmse);
    }
    CHECK(a.records[0].method == "pls");
    CHECK(a.records[1].method == "sl_trnn");
    CHECK(a.records[0].n == 20);
    CHECK(a.records.back().n == 40);
    CHECK(a.records.back().rep == 2);
    for (const auto& r : a.records) {
        CHECK(std::isfinite(r.rmse));
        CHECK(r.rmse >= 0.0);
        CHECK(r.train_seconds >= 0.0);
        CHECK(r.seed == replication_seed(p.base_seed, p.generator, r.n, r.sigma, r.rep));
    }
}

TEST_CASE("summary medians match a recomputation from the CSV") {
    const BenchmarkResult result = run_benchmark(tiny_plan(), 2);
    const BenchmarkSummary summary = summarize(result);
    std::ostringstream csv;
    write_metrics_csv(csv, result.records);

    std::istringstream in(csv.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == kMetricsCsvHeader);
    std::map<std::string, std::vector<double>> groups;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        const auto f = split(line);
        REQUIRE(f.size() == 8);
        groups[f[0] + "|" + f[2] + "|" + f[3]].push_back(std::stod(f[6]));
        ++rows;
    }
    CHECK(rows == result.records.size());
    CHECK(summary.cells.size() == groups.size());
    for (const auto& cell : summary.cells) {
        std::ostringstream sigma;
        sigma << cell.sigma;
        const auto& values = groups.at(cell.method + "|" + std::to_string(cell.n) + "|" + sigma.str());
        CHECK(cell.rmse.count == values.size());
        CHECK(cell.rmse.median == sheet_median(values));
    }
    CHECK(summary.find("pls", 20, 0.05) != nullptr);
    CHECK(summary.find("pls", 30, 0.05) == nullptr);
    CHECK_THROWS_AS(summarize(BenchmarkResult{}), std::invalid_argument);

    const Json j = to_json(summary);
    CHECK(j.at("record_count") == result.records.size());
    CHECK(j.at("cells").size() == summary.cells.size());
    const std::string table = median_table(summary);
    CHECK(table.find("sl_trnn") != std::string::npos);
    CHECK(table.find("N=40") != std::string::npos);
}

TEST_CASE("failed fits are recorded, not fatal") {
    BenchmarkPlan p = tiny_plan();
    MethodConfig bad = default_method_config(Method::pls);
    bad.label = "pls-too-wide";
    bad.components = 10000;
    p.methods.push_back(bad);
    p.replications = 1;
    const BenchmarkResult r = run_benchmark(p, 1);
    CHECK(r.failures.size() == 2);
    CHECK(r.records.size() == 4);
    CHECK(r.failures.front().method == "pls-too-wide");
    CHECK_FALSE(r.failures.front().error.empty());
    const BenchmarkSummary s = summarize(r);
    CHECK(s.failures.size() == 2);
}
