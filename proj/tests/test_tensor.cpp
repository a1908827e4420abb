#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "trnn/tensor.hpp"

using namespace trnn;

TEST_CASE("construction enforces order and extents") {
    CHECK_THROWS_AS(Tensor(Shape{}), ShapeError);
    CHECK_THROWS_AS(Tensor(Shape{2, 0, 3}), ShapeError);
    CHECK_THROWS_AS(Tensor({2, 2}, std::vector<double>{1, 2, 3}), ShapeError);
    const Tensor t({2, 3}, 1.5);
    CHECK(t.size() == 6);
    CHECK(t.order() == 2);
    CHECK(t.extent(2) == 3);
    CHECK_THROWS_AS((void)t.extent(3), ShapeError);
    CHECK(t.sample_shape() == Shape{3});
}

TEST_CASE("row-major layout puts the last index fastest") {
    const Tensor t({2, 3}, {0, 1, 2, 3, 4, 5});
    const std::size_t idx[] = {1, 2};
    CHECK(t.at(idx) == 5.0);
    const RowMatrix m = t.unfold_leading();
    CHECK(m(0, 2) == 2.0);
    CHECK(m(1, 0) == 3.0);
    CHECK(Tensor::from_matrix(t.to_matrix()) == t);
}

TEST_CASE("frobenius norm") {
    CHECK(frobenius_norm(Tensor({3, 2, 2})) == 0.0);
    CHECK(frobenius_norm(Tensor({2, 2}, 1.0)) == 2.0);
    CHECK(frobenius_norm(Tensor({2, 3}, {1, 2, 3, 4, 5, 6})) == doctest::Approx(std::sqrt(91.0)));
}

TEST_CASE("squared norm equals self-contraction") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Tensor t = oracle::random_tensor({2, 3, 4}, seed);
        Shape cs = t.shape();
        cs.push_back(1);
        const double self = contraction(t, t.reshaped(cs))[0];
        CHECK(self == doctest::Approx(squared_norm(t)).epsilon(1e-12));
    }
}

TEST_CASE("mode-n product worked example") {
    const Tensor t({2, 2}, {1, 2, 3, 4});
    Matrix m(1, 2);
    m << 1, 1;
    const Tensor r = mode_n_product(t, m, 1);
    CHECK(r.shape() == Shape{1, 2});
    CHECK(r.values() == std::vector<double>{4, 6});
}

TEST_CASE("mode-n product shape rule and identity") {
    const Tensor t = oracle::random_tensor({2, 3, 4}, 3);
    CHECK(mode_n_product(t, oracle::random_matrix(5, 3, 1), 2).shape() == Shape{2, 5, 4});
    for (std::size_t mode = 1; mode <= 3; ++mode) {
        const auto e = static_cast<Eigen::Index>(t.extent(mode));
        CHECK(mode_n_product(t, Matrix::Identity(e, e), mode) == t);
    }
}

TEST_CASE("mode-n product rejects mismatched extents") {
    const Tensor t({2, 3, 4});
    CHECK_THROWS_AS(mode_n_product(t, Matrix::Zero(2, 2), 2), ShapeError);
    CHECK_THROWS_AS(mode_n_product(t, Matrix::Zero(2, 4), 4), ShapeError);
    CHECK_THROWS_AS(mode_n_product(t, Matrix::Zero(2, 4), 0), ShapeError);
    try {
        (void)mode_n_product(t, Matrix::Zero(2, 5), 3);
        FAIL("expected a shape error");
    } catch (const ShapeError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("mode-3") != std::string::npos);
        CHECK(msg.find('4') != std::string::npos);
        CHECK(msg.find('5') != std::string::npos);
    }
}

TEST_CASE("mode products along distinct modes commute") {
    const Tensor t = oracle::random_tensor({3, 4, 2}, 11);
    const Matrix a = oracle::random_matrix(5, 3, 12);
    const Matrix b = oracle::random_matrix(2, 2, 13);
    const Tensor ab = mode_n_product(mode_n_product(t, a, 1), b, 3);
    const Tensor ba = mode_n_product(mode_n_product(t, b, 3), a, 1);
    CHECK(oracle::rel_diff(ab, ba) <= 1e-12);
}

TEST_CASE("contraction worked examples") {
    const Tensor x({2, 2}, {1, 2, 3, 4});
    const Tensor c({2, 2, 1}, {1, 0, 0, 1});
    const Tensor r = contraction(x, c);
    CHECK(r.shape() == Shape{1});
    CHECK(r[0] == 5.0);
    CHECK(contraction(Tensor({2, 3}), Tensor({2, 3, 4, 5})).shape() == Shape{4, 5});
}

TEST_CASE("contraction with a one-hot core selects one entry") {
    const Tensor x = oracle::random_tensor({4}, 5);
    Tensor c({4, 3});
    c[2 * 3 + 1] = 1.0;
    const Tensor r = contraction(x, c);
    CHECK(r.values() == std::vector<double>{0.0, x[2], 0.0});
}

TEST_CASE("contraction errors") {
    CHECK_THROWS_AS(contraction(Tensor({2, 3}), Tensor({2, 3})), ShapeError);
    CHECK_THROWS_AS(contraction(Tensor({2, 3}), Tensor({3, 2, 4})), ShapeError);
}

TEST_CASE("contraction is bilinear") {
    const Tensor x = oracle::random_tensor({2, 3}, 1);
    const Tensor c = oracle::random_tensor({2, 3, 4}, 2);
    const Tensor c2 = oracle::random_tensor({2, 3, 4}, 3);
    CHECK(oracle::rel_diff(contraction(2.5 * x, c), 2.5 * contraction(x, c)) <= 1e-12);
    CHECK(oracle::rel_diff(contraction(x, -1.5 * c), -1.5 * contraction(x, c)) <= 1e-12);
    CHECK(oracle::rel_diff(contraction(x, c + c2), contraction(x, c) + contraction(x, c2)) <= 1e-12);
}

TEST_CASE("tucker reconstruction worked example") {
    const Tensor core({1, 1}, {2});
    Matrix u1(2, 1);
    u1 << 1, 2;
    Matrix u2(2, 1);
    u2 << 1, 1;
    const std::vector<Matrix> f{u1, u2};
    const Tensor r = tucker_reconstruct(core, f);
    CHECK(r.shape() == Shape{2, 2});
    CHECK(r.values() == std::vector<double>{2, 2, 4, 4});
}

TEST_CASE("tucker reconstruction is order independent") {
    const Tensor core = oracle::random_tensor({2, 2, 2}, 7);
    const std::vector<Matrix> f{oracle::random_matrix(3, 2, 1), oracle::random_matrix(4, 2, 2),
                                oracle::random_matrix(2, 2, 3)};
    const Tensor fold = tucker_reconstruct(core, f);
    const Tensor reversed =
        mode_n_product(mode_n_product(mode_n_product(core, f[2], 3), f[1], 2), f[0], 1);
    CHECK(oracle::rel_diff(fold, reversed) <= 1e-12);
    CHECK(oracle::rel_diff(fold, oracle::tucker(core, f)) <= 1e-12);

    const std::vector<Matrix> eye{Matrix::Identity(2, 2), Matrix::Identity(2, 2),
                                  Matrix::Identity(2, 2)};
    CHECK(tucker_reconstruct(core, eye) == core);
    CHECK_THROWS_AS(tucker_reconstruct(core, std::span(f.data(), 2)), ShapeError);
}

TEST_CASE("mode_gram matches the unfolding product") {
    const Tensor a = oracle::random_tensor({3, 2, 4}, 1);
    const Tensor b = oracle::random_tensor({3, 5, 4}, 2);
    const Matrix g = mode_gram(a, b, 2);
    REQUIRE(g.rows() == 2);
    REQUIRE(g.cols() == 5);
    for (std::size_t p = 0; p < 2; ++p) {
        for (std::size_t q = 0; q < 5; ++q) {
            double acc = 0.0;
            for (std::size_t i = 0; i < 3; ++i) {
                for (std::size_t k = 0; k < 4; ++k) {
                    acc += oracle::get(a, {i, p, k}) * oracle::get(b, {i, q, k});
                }
            }
            CHECK(g(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) ==
                  doctest::Approx(acc).epsilon(1e-12));
        }
    }
    CHECK_THROWS_AS(mode_gram(a, Tensor({3, 2, 5}), 2), ShapeError);
}

TEST_CASE("rmse is the relative squared error") {
    const Tensor y = oracle::random_tensor({4, 3}, 9);
    CHECK(rmse(y, y) == 0.0);
    CHECK(rmse(Tensor(y.shape()), y) == doctest::Approx(1.0));
    CHECK(rmse(2.0 * y, y) == doctest::Approx(1.0));
    const Tensor y_hat = oracle::random_tensor({4, 3}, 10);
    CHECK(rmse(-3.0 * y_hat, -3.0 * y) == doctest::Approx(rmse(y_hat, y)).epsilon(1e-12));
    CHECK_THROWS_AS(rmse(y, Tensor(y.shape())), std::domain_error);
    CHECK_THROWS_AS(rmse(y, Tensor({3, 4})), ShapeError);
}

TEST_CASE("dtf round trip is bit exact") {
    Tensor t = oracle::random_tensor({2, 3, 1, 2}, 4);
    t[0] = -0.0;
    t[1] = 1e-310;
    std::stringstream buf;
    write_dtf(buf, t);
    std::string header;
    std::getline(buf, header);
    CHECK(header == "DTF1 4 2 3 1 2");
    buf.seekg(0);
    const Tensor back = read_dtf(buf);
    CHECK(back.shape() == t.shape());
    CHECK(std::memcmp(back.data().data(), t.data().data(), t.size() * sizeof(double)) == 0);
}

TEST_CASE("dtf reader rejects malformed input") {
    const Tensor t({2, 2}, {1, 2, 3, 4});
    std::stringstream good;
    write_dtf(good, t);
    const std::string bytes = good.str();

    std::stringstream short_payload(bytes.substr(0, bytes.size() - 3));
    CHECK_THROWS_AS(read_dtf(short_payload), FormatError);
    std::stringstream long_payload(bytes + std::string(8, '\0'));
    CHECK_THROWS_AS(read_dtf(long_payload), FormatError);
    std::stringstream bad_magic("DTF2 1 1\n" + std::string(8, '\0'));
    CHECK_THROWS_AS(read_dtf(bad_magic), FormatError);
    std::stringstream zero_extent("DTF1 2 2 0\n");
    CHECK_THROWS_AS(read_dtf(zero_extent), FormatError);
    std::stringstream arity("DTF1 3 2 2\n" + std::string(32, '\0'));
    CHECK_THROWS_AS(read_dtf(arity), FormatError);
    CHECK_THROWS_AS(load_dtf("/nonexistent/file.dtf"), FormatError);
}
