#include <filesystem>

#include "doctest.h"
#include "oracles.hpp"
#include "trnn/baselines.hpp"

using namespace trnn;
namespace fs = std::filesystem;

namespace {

Matrix gaussian(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    CounterRng rng(seed, 5);
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rng.normal();
    }
    return m;
}

/// Rank-k X (N x P) and Y = X C: exactly representable by k components.
std::pair<Matrix, Matrix> low_rank_data(std::size_t n, std::size_t p, std::size_t q, std::size_t k,
                                        std::uint64_t seed) {
    const Matrix x = gaussian(n, k, seed) * gaussian(k, p, seed + 1);
    return {x, x * gaussian(p, q, seed + 2)};
}

Matrix ols_predict(const Matrix& x, const Matrix& y) {
    return x * x.colPivHouseholderQr().solve(y);
}

double rel_error(const Matrix& a, const Matrix& b) { return (a - b).norm() / b.norm(); }

}  // namespace

TEST_CASE("PLS recovers an exactly low-rank relation") {
    for (std::size_t k = 1; k <= 3; ++k) {
        const auto [x, y] = low_rank_data(40, 8, 5, k, 10 * k);
        const PlsModel m = fit_pls(x, y, k);
        CHECK(rel_error(m.predict(x), y) <= 1e-8);
        CHECK((m.v.transpose() * m.v - Matrix::Identity(Eigen::Index(k), Eigen::Index(k))).norm() <=
              1e-10);
    }
}

TEST_CASE("PLS with a single response column has a unit loading") {
    const Matrix x = gaussian(30, 4, 1);
    const Matrix y = x * gaussian(4, 1, 2) + 0.1 * gaussian(30, 1, 3);
    const PlsModel m = fit_pls(x, y, 1);
    CHECK(std::abs(m.v(0, 0)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("full-rank PLS equals ordinary least squares") {
    const Matrix x = gaussian(30, 4, 4);
    const Matrix y = gaussian(30, 6, 5);
    const PlsModel m = fit_pls(x, y, 4);
    CHECK(rel_error(m.predict(x), ols_predict(x, y)) <= 1e-8);
}

TEST_CASE("PLS argument checks and degenerate columns") {
    const Matrix x = gaussian(10, 3, 1);
    const Matrix y = gaussian(10, 2, 2);
    CHECK_THROWS_AS(fit_pls(x, y, 0), std::invalid_argument);
    CHECK_THROWS_AS(fit_pls(x, y, 3), std::invalid_argument);
    CHECK_THROWS_AS(fit_pls(x, gaussian(9, 2, 2), 1), ShapeError);
    Matrix xc = x;
    xc.col(1).setConstant(2.5);
    const PlsModel m = fit_pls(xc, y, 2);
    CHECK(m.degenerate_x_columns == std::vector<std::size_t>{1});
    CHECK(m.degenerate_y_columns.empty());
}

TEST_CASE("SL-TRNN is the three-factor linear model") {
    const Matrix x = gaussian(20, 5, 1);
    const Matrix y = gaussian(20, 4, 2);
    TrainConfig cfg = default_sl_trnn_train_config();
    cfg.max_epochs = 50;
    const SlTrnnModel m = fit_sl_trnn(x, y, 2, cfg, 3);
    CHECK(m.w.rows() == 5);
    CHECK(m.w.cols() == 2);
    CHECK(m.b.rows() == 2);
    CHECK(m.v.rows() == 4);
    const Matrix direct = x * m.w * m.b * m.v.transpose();
    CHECK((m.predict(x) - direct).norm() <= 1e-12 * direct.norm());
    CHECK(sl_objective(x, y, m.w, m.b, m.v) == doctest::Approx((y - direct).squaredNorm()));
    CHECK_THROWS_AS(fit_sl_trnn(x, y, 0), std::invalid_argument);
    CHECK_THROWS_AS(fit_sl_trnn(x, y, 5), std::invalid_argument);
}

TEST_CASE("SL-TRNN fits exactly representable targets") {
    const Matrix x = gaussian(30, 3, 7);
    const SlTrnnModel id = fit_sl_trnn(x, x, 3, default_sl_trnn_train_config(), 1);
    CHECK(sl_objective(x, x, id.w, id.b, id.v) < 1e-6);

    const Matrix x2 = gaussian(30, 5, 8);
    const Matrix y1 = x2 * gaussian(5, 1, 9) * gaussian(1, 4, 10);
    const SlTrnnModel r1 = fit_sl_trnn(x2, y1, 1, default_sl_trnn_train_config(), 2);
    CHECK(sl_objective(x2, y1, r1.w, r1.b, r1.v) < 1e-6 * y1.squaredNorm());
}

TEST_CASE("SL-TRNN never does worse than PLS") {
    const Matrix x = gaussian(20, 6, 11);
    const Matrix y = gaussian(20, 4, 12);
    const EquivalenceReport r = pls_equivalence_check(x, y, 2, {1, 2, 3, 4, 5});
    CHECK(r.holds);
    CHECK(r.sl_objectives.size() == 5);
    for (double o : r.sl_objectives) CHECK(o <= r.pls_objective * (1.0 + 1e-3));
}

TEST_CASE("flat dense parameter count and determinism") {
    CHECK(flat_dense_parameter_count({4, 256, 800}) == 5 * 256 + 257 * 800);
    CHECK(flat_dense_parameter_count({3, 2}) == 8);
    FlatDenseBaseline a = init_flat_dense({3, 5, 2}, 4);
    FlatDenseBaseline b = init_flat_dense({3, 5, 2}, 4);
    CHECK(a.parameter_count() == flat_dense_parameter_count({3, 5, 2}));
    const Matrix x = gaussian(6, 3, 1);
    CHECK(a.predict(x) == b.predict(x));

    const Matrix y = gaussian(6, 2, 2);
    TrainConfig cfg;
    cfg.max_epochs = 20;
    cfg.batch_size = 4;
    const auto fa = fit_flat_dense(x, y, {5}, cfg, 9);
    const auto fb = fit_flat_dense(x, y, {5}, cfg, 9);
    CHECK(fa.predict(x) == fb.predict(x));
}

TEST_CASE("flat dense without hidden layers is least squares") {
    const Matrix x = gaussian(60, 4, 3);
    const Matrix y = x * gaussian(4, 3, 4) + 0.05 * gaussian(60, 3, 5);
    TrainConfig cfg;
    cfg.optimizer.learning_rate = 1e-2;
    cfg.batch_size = 60;
    cfg.max_epochs = 20000;
    cfg.tol = 1e-14;
    cfg.patience = 200;
    const FlatDenseBaseline m = fit_flat_dense(x, y, {}, cfg, 1);
    // The affine model's least-squares fit includes an intercept column.
    Matrix xa(60, 5);
    xa << x, Matrix::Ones(60, 1);
    CHECK(rel_error(m.predict(x), ols_predict(xa, y)) <= 1e-4);
}

TEST_CASE("flattening is a row-major reshape") {
    const Tensor t = oracle::random_tensor({3, 2, 4}, 1);
    const Matrix m = flatten_samples(t);
    CHECK(m.rows() == 3);
    CHECK(m.cols() == 8);
    CHECK(m(2, 5) == oracle::get(t, {2, 1, 1}));
}

TEST_CASE("tensor baselines round trip through bundles") {
    const fs::path root = fs::temp_directory_path() / "trnn_test_baselines";
    fs::remove_all(root);
    const Tensor x = oracle::random_tensor({25, 3, 2}, 1);
    const Tensor y = oracle::random_tensor({25, 2, 2, 2}, 2);
    for (auto kind : {BaselineKind::sl_trnn, BaselineKind::pls, BaselineKind::flat_dense}) {
        BaselineConfig cfg;
        cfg.kind = kind;
        cfg.components = 2;
        cfg.hidden = {6};
        cfg.train.max_epochs = 30;
        cfg.train.batch_size = 8;
        cfg.seed = 3;
        const FlattenedBaseline m = fit_baseline(x, y, cfg);
        CHECK(m.report.has_value() == (kind != BaselineKind::pls));
        const Tensor pred = m.predict(x);
        CHECK(pred.shape() == y.shape());
        const std::string dir = (root / to_string(kind)).string();
        save_baseline(m, dir);
        const FlattenedBaseline back = load_baseline(dir);
        CHECK(back.kind == kind);
        CHECK(back.predict(x) == pred);
        CHECK_THROWS_AS((void)back.predict(oracle::random_tensor({2, 2, 3}, 4)), ShapeError);
    }
    CHECK(baseline_from_string("flat_dense") == BaselineKind::flat_dense);
    CHECK_THROWS_AS(baseline_from_string("mtot"), std::invalid_argument);
    fs::remove_all(root);
}

TEST_CASE("property: SL-TRNN objective bounded by PLS on random data") {
    // Smaller sibling of the acceptance sweep, fast enough for every build.
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        const std::size_t k = 1 + seed % 3;
        const Matrix x = gaussian(50, 8, 100 + seed);
        const Matrix y = x * gaussian(8, 5, 200 + seed) + gaussian(50, 5, 300 + seed);
        const EquivalenceReport r = pls_equivalence_check(x, y, k, {seed});
        CHECK_MESSAGE(r.holds, "seed " << seed << " pls " << r.pls_objective << " sl "
                                       << r.sl_objectives.front());
    }
}
