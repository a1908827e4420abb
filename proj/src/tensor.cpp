#include "trnn/tensor.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

namespace trnn {

namespace {

void validate_shape(const Shape& shape) {
    if (shape.empty()) {
        throw ShapeError("tensor order must be at least 1");
    }
    for (std::size_t k = 0; k < shape.size(); ++k) {
        if (shape[k] == 0) {
            throw ShapeError("extent of mode " + std::to_string(k + 1) + " is zero in " +
                             shape_string(shape));
        }
    }
}

// left / mid / right block sizes around a zero-based axis.
struct Blocks {
    std::size_t left = 1;
    std::size_t mid = 1;
    std::size_t right = 1;
};

Blocks blocks_around(const Shape& shape, std::size_t axis) {
    Blocks b;
    for (std::size_t k = 0; k < axis; ++k) b.left *= shape[k];
    b.mid = shape[axis];
    for (std::size_t k = axis + 1; k < shape.size(); ++k) b.right *= shape[k];
    return b;
}

std::size_t checked_axis(const Tensor& t, std::size_t mode) {
    if (mode == 0 || mode > t.order()) {
        throw ShapeError("mode " + std::to_string(mode) + " out of range for order-" +
                         std::to_string(t.order()) + " tensor");
    }
    return mode - 1;
}

using ConstRowMap = Eigen::Map<const RowMatrix>;
using RowMap = Eigen::Map<RowMatrix>;

// Below this trailing block size a per-slice GEMM loop is dominated by call
// overhead, so middle-mode products go through an explicit unfolding.
constexpr std::size_t kSliceGemmMinRight = 32;

// Mode unfolding: column l * right + r holds t[l, :, r].
RowMatrix unfold_axis(const double* src, const Blocks& b) {
    RowMatrix u(static_cast<Eigen::Index>(b.mid), static_cast<Eigen::Index>(b.left * b.right));
    for (std::size_t l = 0; l < b.left; ++l) {
        for (std::size_t i = 0; i < b.mid; ++i) {
            const double* from = src + (l * b.mid + i) * b.right;
            double* to = u.data() + i * b.left * b.right + l * b.right;
            std::copy(from, from + b.right, to);
        }
    }
    return u;
}

void fold_axis(const RowMatrix& u, const Blocks& b, double* dst) {
    const std::size_t mid = static_cast<std::size_t>(u.rows());
    for (std::size_t l = 0; l < b.left; ++l) {
        for (std::size_t i = 0; i < mid; ++i) {
            const double* from = u.data() + i * b.left * b.right + l * b.right;
            std::copy(from, from + b.right, dst + (l * mid + i) * b.right);
        }
    }
}

}  // namespace

std::size_t shape_size(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
    std::ostringstream os;
    os << '(';
    for (std::size_t k = 0; k < shape.size(); ++k) {
        if (k) os << ',';
        os << shape[k];
    }
    os << ')';
    return os.str();
}

Tensor::Tensor(Shape shape) : Tensor(std::move(shape), 0.0) {}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
    validate_shape(shape_);
    data_.assign(shape_size(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    validate_shape(shape_);
    if (data_.size() != shape_size(shape_)) {
        throw ShapeError("data length " + std::to_string(data_.size()) +
                         " does not match shape " + shape_string(shape_));
    }
}

Tensor Tensor::from_matrix(const Matrix& m) {
    Tensor t({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())});
    RowMap(t.data_.data(), m.rows(), m.cols()) = m;
    return t;
}

std::size_t Tensor::extent(std::size_t mode) const {
    return shape_[checked_axis(*this, mode)];
}

double Tensor::at(std::span<const std::size_t> index) const {
    return const_cast<Tensor&>(*this).at(index);
}

double& Tensor::at(std::span<const std::size_t> index) {
    if (index.size() != shape_.size()) {
        throw ShapeError("index arity does not match tensor order");
    }
    std::size_t flat = 0;
    for (std::size_t k = 0; k < shape_.size(); ++k) {
        if (index[k] >= shape_[k]) {
            throw std::out_of_range("index out of range at mode " + std::to_string(k + 1));
        }
        flat = flat * shape_[k] + index[k];
    }
    return data_[flat];
}

Tensor Tensor::reshaped(Shape shape) const& {
    return Tensor(*this).reshaped(std::move(shape));
}

Tensor Tensor::reshaped(Shape shape) && {
    validate_shape(shape);
    if (shape_size(shape) != data_.size()) {
        throw ShapeError("cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
    }
    shape_ = std::move(shape);
    return std::move(*this);
}

RowMatrix Tensor::unfold_leading() const {
    const auto rows = static_cast<Eigen::Index>(shape_.at(0));
    const auto cols = static_cast<Eigen::Index>(data_.size() / shape_[0]);
    return ConstRowMap(data_.data(), rows, cols);
}

Matrix Tensor::to_matrix() const {
    if (order() != 2) {
        throw ShapeError("expected an order-2 tensor, got " + shape_string(shape_));
    }
    return unfold_leading();
}

Shape Tensor::sample_shape() const {
    return Shape(shape_.begin() + 1, shape_.end());
}

std::size_t Tensor::sample_size() const {
    return data_.size() / shape_.at(0);
}

Tensor Tensor::gather(std::span<const std::size_t> rows) const {
    Shape shape = shape_;
    shape.at(0) = rows.size();
    const std::size_t stride = sample_size();
    std::vector<double> out(rows.size() * stride);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i] >= shape_[0]) throw std::out_of_range("gather row out of range");
        std::memcpy(out.data() + i * stride, data_.data() + rows[i] * stride,
                    stride * sizeof(double));
    }
    return Tensor(std::move(shape), std::move(out));
}

Tensor operator+(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) {
        throw ShapeError("cannot add " + shape_string(a.shape()) + " and " + shape_string(b.shape()));
    }
    Tensor out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
    return out;
}

Tensor operator-(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) {
        throw ShapeError("cannot subtract " + shape_string(b.shape()) + " from " +
                         shape_string(a.shape()));
    }
    Tensor out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b[i];
    return out;
}

Tensor operator*(double s, const Tensor& t) {
    Tensor out = t;
    for (auto& v : out.data()) v *= s;
    return out;
}

double squared_norm(const Tensor& t) {
    double sum = 0.0;
    for (double v : t.data()) sum += v * v;
    return sum;
}

double rmse(const Tensor& y_hat, const Tensor& y) {
    if (y_hat.shape() != y.shape()) {
        throw ShapeError("rmse: shapes " + shape_string(y_hat.shape()) + " and " +
                         shape_string(y.shape()) + " differ");
    }
    const double denom = squared_norm(y);
    if (denom == 0.0) throw std::domain_error("rmse: reference tensor has zero norm");
    double num = 0.0;
    const auto a = y_hat.data();
    const auto b = y.data();
    for (std::size_t i = 0; i < a.size(); ++i) num += (a[i] - b[i]) * (a[i] - b[i]);
    return num / denom;
}

double frobenius_norm(const Tensor& t) {
    return std::sqrt(squared_norm(t));
}

Tensor mode_n_product(const Tensor& t, const Matrix& m, std::size_t mode) {
    const std::size_t axis = checked_axis(t, mode);
    const Blocks b = blocks_around(t.shape(), axis);
    if (static_cast<std::size_t>(m.cols()) != b.mid) {
        throw ShapeError("mode-" + std::to_string(mode) + " product: tensor extent " +
                         std::to_string(b.mid) + " does not match matrix column count " +
                         std::to_string(m.cols()));
    }
    Shape shape = t.shape();
    shape[axis] = static_cast<std::size_t>(m.rows());
    Tensor out(shape);
    const auto rows = m.rows();
    const auto mid = static_cast<Eigen::Index>(b.mid);
    const auto right = static_cast<Eigen::Index>(b.right);
    const double* src = t.data().data();
    double* dst = out.data().data();
    if (b.right == 1) {
        // Last mode: one GEMM over the (left x mid) unfolding.
        ConstRowMap in(src, static_cast<Eigen::Index>(b.left), mid);
        RowMap res(dst, static_cast<Eigen::Index>(b.left), rows);
        res.noalias() = in * m.transpose();
        return out;
    }
    if (b.right < kSliceGemmMinRight) {
        const RowMatrix prod = m * unfold_axis(src, b);
        fold_axis(prod, b, dst);
        return out;
    }
    for (std::size_t l = 0; l < b.left; ++l) {
        ConstRowMap in(src + l * b.mid * b.right, mid, right);
        RowMap res(dst + l * static_cast<std::size_t>(rows) * b.right, rows, right);
        res.noalias() = m * in;
    }
    return out;
}

Tensor contraction(const Tensor& x, const Tensor& c) {
    if (c.order() <= x.order()) {
        throw ShapeError("contraction core order " + std::to_string(c.order()) +
                         " must exceed operand order " + std::to_string(x.order()));
    }
    for (std::size_t k = 0; k < x.order(); ++k) {
        if (x.shape()[k] != c.shape()[k]) {
            throw ShapeError("contraction: mode " + std::to_string(k + 1) + " extent " +
                             std::to_string(x.shape()[k]) + " does not match core extent " +
                             std::to_string(c.shape()[k]));
        }
    }
    Shape out_shape(c.shape().begin() + static_cast<std::ptrdiff_t>(x.order()), c.shape().end());
    const auto p = static_cast<Eigen::Index>(x.size());
    const auto q = static_cast<Eigen::Index>(shape_size(out_shape));
    Tensor out(out_shape);
    Eigen::Map<const Eigen::RowVectorXd> xv(x.data().data(), p);
    Eigen::Map<Eigen::RowVectorXd> res(out.data().data(), q);
    res.noalias() = xv * ConstRowMap(c.data().data(), p, q);
    return out;
}

Tensor tucker_reconstruct(const Tensor& core, std::span<const Matrix> factors) {
    if (factors.size() != core.order()) {
        throw ShapeError("tucker_reconstruct: " + std::to_string(factors.size()) +
                         " factors for an order-" + std::to_string(core.order()) + " core");
    }
    Tensor out = core;
    for (std::size_t k = 0; k < factors.size(); ++k) {
        out = mode_n_product(out, factors[k], k + 1);
    }
    return out;
}

Matrix mode_gram(const Tensor& a, const Tensor& b, std::size_t mode) {
    const std::size_t axis = checked_axis(a, mode);
    if (a.order() != b.order()) throw ShapeError("mode_gram: order mismatch");
    for (std::size_t k = 0; k < a.order(); ++k) {
        if (k != axis && a.shape()[k] != b.shape()[k]) {
            throw ShapeError("mode_gram: extents differ at mode " + std::to_string(k + 1));
        }
    }
    const Blocks ba = blocks_around(a.shape(), axis);
    const Blocks bb = blocks_around(b.shape(), axis);
    const auto ma = static_cast<Eigen::Index>(ba.mid);
    const auto mb = static_cast<Eigen::Index>(bb.mid);
    const auto right = static_cast<Eigen::Index>(ba.right);
    Matrix g = Matrix::Zero(ma, mb);
    if (ba.right == 1) {
        ConstRowMap am(a.data().data(), static_cast<Eigen::Index>(ba.left), ma);
        ConstRowMap bm(b.data().data(), static_cast<Eigen::Index>(bb.left), mb);
        g.noalias() = am.transpose() * bm;
        return g;
    }
    if (ba.right < kSliceGemmMinRight) {
        g.noalias() = unfold_axis(a.data().data(), ba) * unfold_axis(b.data().data(), bb).transpose();
        return g;
    }
    for (std::size_t l = 0; l < ba.left; ++l) {
        ConstRowMap am(a.data().data() + l * ba.mid * ba.right, ma, right);
        ConstRowMap bm(b.data().data() + l * bb.mid * bb.right, mb, right);
        g.noalias() += am * bm.transpose();
    }
    return g;
}

// ---------------------------------------------------------------------------
// dtf I/O

namespace {

std::uint64_t to_little_endian(std::uint64_t v) {
    if constexpr (std::endian::native == std::endian::big) {
        std::uint64_t r = 0;
        for (int i = 0; i < 8; ++i) {
            r = (r << 8) | (v & 0xffu);
            v >>= 8;
        }
        return r;
    }
    return v;
}

}  // namespace

void write_dtf(std::ostream& out, const Tensor& t) {
    if (t.empty()) throw FormatError("cannot write an empty tensor");
    out << "DTF1 " << t.order();
    for (auto e : t.shape()) out << ' ' << e;
    out << '\n';
    for (double v : t.data()) {
        const std::uint64_t bits = to_little_endian(std::bit_cast<std::uint64_t>(v));
        out.write(reinterpret_cast<const char*>(&bits), sizeof(bits));
    }
    if (!out) throw FormatError("failed writing dtf payload");
}

Tensor read_dtf(std::istream& in) {
    std::string header;
    if (!std::getline(in, header)) throw FormatError("missing dtf header");
    std::istringstream hs(header);
    std::string magic;
    long long order = -1;
    hs >> magic >> order;
    if (magic != "DTF1") throw FormatError("bad dtf magic '" + magic + "'");
    if (!hs || order < 1) throw FormatError("bad dtf order in header '" + header + "'");
    Shape shape;
    for (long long k = 0; k < order; ++k) {
        long long e = 0;
        if (!(hs >> e) || e < 1) throw FormatError("bad dtf extent in header '" + header + "'");
        shape.push_back(static_cast<std::size_t>(e));
    }
    std::string trailing;
    if (hs >> trailing) throw FormatError("unexpected token in dtf header '" + trailing + "'");

    const std::size_t count = shape_size(shape);
    std::vector<double> data(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::uint64_t bits = 0;
        if (!in.read(reinterpret_cast<char*>(&bits), sizeof(bits))) {
            throw FormatError("dtf payload too short: expected " + std::to_string(count) +
                              " values, got " + std::to_string(i));
        }
        data[i] = std::bit_cast<double>(to_little_endian(bits));
    }
    if (in.peek() != std::char_traits<char>::eof()) {
        throw FormatError("dtf payload longer than " + std::to_string(count) + " values");
    }
    return Tensor(std::move(shape), std::move(data));
}

void save_dtf(const std::string& path, const Tensor& t) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot open '" + path + "' for writing");
    write_dtf(out, t);
}

Tensor load_dtf(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open '" + path + "'");
    try {
        return read_dtf(in);
    } catch (const FormatError& e) {
        throw FormatError(path + ": " + e.what());
    }
}

}  // namespace trnn
