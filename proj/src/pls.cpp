#include <algorithm>
#include <cmath>

#include "trnn/baselines.hpp"

namespace trnn {

namespace {

std::vector<std::size_t> constant_columns(const Matrix& m) {
    std::vector<std::size_t> out;
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        const auto col = m.col(j);
        const double mean = col.mean();
        const double spread = (col.array() - mean).abs().maxCoeff();
        if (spread <= 1e-12 * (1.0 + std::abs(mean))) out.push_back(static_cast<std::size_t>(j));
    }
    return out;
}

}  // namespace

PlsModel fit_pls(const Matrix& x, const Matrix& y, std::size_t k) {
    const auto n = static_cast<std::size_t>(x.rows());
    const auto p = static_cast<std::size_t>(x.cols());
    const auto q = static_cast<std::size_t>(y.cols());
    if (static_cast<std::size_t>(y.rows()) != n) {
        throw ShapeError("X and Y must have the same number of rows");
    }
    if (k == 0 || k > std::min({p, q, n})) {
        throw std::invalid_argument("PLS component count k=" + std::to_string(k) +
                                    " must lie in [1, min(P, Q, N)] = [1, " +
                                    std::to_string(std::min({p, q, n})) + "]");
    }
    PlsModel model;
    model.components = k;
    model.degenerate_x_columns = constant_columns(x);
    model.degenerate_y_columns = constant_columns(y);

    Matrix e = x;
    Matrix f = y;
    Matrix weights(p, k);
    Matrix loadings(p, k);
    Matrix y_loadings(q, k);
    const double x_scale = std::max(x.squaredNorm(), 1e-300);

    for (std::size_t a = 0; a < k; ++a) {
        Eigen::Index best = 0;
        f.colwise().squaredNorm().maxCoeff(&best);
        Eigen::VectorXd u = f.col(best);
        Eigen::VectorXd w, t, c;
        for (int iter = 0; iter < 1000; ++iter) {
            w = e.transpose() * u;
            const double wn = w.norm();
            if (wn == 0.0) break;
            w /= wn;
            t = e * w;
            c = f.transpose() * t / t.squaredNorm();
            const double cn2 = c.squaredNorm();
            if (cn2 == 0.0) break;
            Eigen::VectorXd u_next = f * c / cn2;
            const double change = (u_next - u).norm();
            u = std::move(u_next);
            if (change <= 1e-13 * u.norm()) break;
        }
        if (w.size() == 0 || t.size() == 0 || t.squaredNorm() <= 1e-24 * x_scale ||
            !w.allFinite()) {
            throw std::invalid_argument("PLS: X is exhausted after " + std::to_string(a) +
                                        " components; k exceeds the usable rank");
        }
        const double tt = t.squaredNorm();
        const Eigen::VectorXd pl = e.transpose() * t / tt;
        c = f.transpose() * t / tt;
        e -= t * pl.transpose();
        f -= t * c.transpose();
        weights.col(static_cast<Eigen::Index>(a)) = w;
        loadings.col(static_cast<Eigen::Index>(a)) = pl;
        y_loadings.col(static_cast<Eigen::Index>(a)) = c;
    }

    // Scores of the undeflated X: T = X W (P^T W)^-1.
    model.w = weights * (loadings.transpose() * weights).inverse();

    // Orthonormal basis of the Y-loading span, then refit B against it.
    Eigen::HouseholderQR<Matrix> qr(y_loadings);
    model.v = qr.householderQ() * Matrix::Identity(static_cast<Eigen::Index>(q),
                                                   static_cast<Eigen::Index>(k));
    const Matrix scores = x * model.w;
    model.b = scores.colPivHouseholderQr().solve(y * model.v);
    return model;
}

}  // namespace trnn
