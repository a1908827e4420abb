#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace trnn {

using Shape = std::vector<std::size_t>;
using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Raised when operand extents do not line up.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised on malformed tensor files, manifests and bundles.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

/// Dense N-order real tensor. Row-major flat storage (last index fastest).
///
/// Mode indices in the public API are 1-based: mode 1 is the leading
/// extent, which in network code is always the sample mode.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape);
    Tensor(Shape shape, std::vector<double> data);
    Tensor(Shape shape, double fill);

    static Tensor from_matrix(const Matrix& m);

    [[nodiscard]] const Shape& shape() const { return shape_; }
    [[nodiscard]] std::size_t order() const { return shape_.size(); }
    /// Extent of a 1-based mode.
    [[nodiscard]] std::size_t extent(std::size_t mode) const;
    [[nodiscard]] std::size_t size() const { return data_.size(); }
    [[nodiscard]] bool empty() const { return shape_.empty(); }

    [[nodiscard]] std::span<const double> data() const { return data_; }
    [[nodiscard]] std::span<double> data() { return data_; }
    [[nodiscard]] const std::vector<double>& values() const { return data_; }

    double& operator[](std::size_t flat) { return data_[flat]; }
    double operator[](std::size_t flat) const { return data_[flat]; }

    /// Multi-index access, zero-based indices.
    [[nodiscard]] double at(std::span<const std::size_t> index) const;
    double& at(std::span<const std::size_t> index);

    /// Same data under a new shape with identical element count.
    [[nodiscard]] Tensor reshaped(Shape shape) const&;
    [[nodiscard]] Tensor reshaped(Shape shape) &&;

    /// Order-2 view as an Eigen matrix: rows = leading extent, cols = the rest.
    [[nodiscard]] RowMatrix unfold_leading() const;
    [[nodiscard]] Matrix to_matrix() const;

    /// Shape with the leading (sample) extent removed.
    [[nodiscard]] Shape sample_shape() const;
    [[nodiscard]] std::size_t sample_size() const;
    /// Copies the listed leading-mode slices into a new tensor.
    [[nodiscard]] Tensor gather(std::span<const std::size_t> rows) const;

    friend bool operator==(const Tensor& a, const Tensor& b) = default;

private:
    Shape shape_;
    std::vector<double> data_;
};

Tensor operator+(const Tensor& a, const Tensor& b);
Tensor operator-(const Tensor& a, const Tensor& b);
Tensor operator*(double s, const Tensor& t);

double frobenius_norm(const Tensor& t);
double squared_norm(const Tensor& t);
/// ||y_hat - y||_F^2 / ||y||_F^2 (relative squared error, not a root).
/// Throws ShapeError on a shape mismatch and std::domain_error when ||y|| = 0.
double rmse(const Tensor& y_hat, const Tensor& y);

/// Product along a 1-based mode: result[.., j, ..] = sum_i t[.., i, ..] * m(j, i).
Tensor mode_n_product(const Tensor& t, const Matrix& m, std::size_t mode);

/// Full contraction of x against the leading modes of c. The result carries
/// the trailing extents of c.
Tensor contraction(const Tensor& x, const Tensor& c);

/// core x_1 U_1 x_2 U_2 ... x_N U_N with U_k of shape I_k x r_k.
Tensor tucker_reconstruct(const Tensor& core, std::span<const Matrix> factors);

/// Unfolding product A_(k) B_(k)^T over a 1-based mode: sums over every index
/// except mode k. The two tensors may differ only in that mode's extent.
Matrix mode_gram(const Tensor& a, const Tensor& b, std::size_t mode);

// dtf: "DTF1 <order> <e1> ... <eN>\n" followed by little-endian float64 payload.
void write_dtf(std::ostream& out, const Tensor& t);
Tensor read_dtf(std::istream& in);
void save_dtf(const std::string& path, const Tensor& t);
Tensor load_dtf(const std::string& path);

}  // namespace trnn
