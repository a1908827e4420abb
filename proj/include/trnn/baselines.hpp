#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "trnn/model.hpp"
#include "trnn/standardize.hpp"
#include "trnn/tensor.hpp"

namespace trnn {

// ---------------------------------------------------------------------------
// Single-layer linear network: Y ~ X W B V^T

/// W is P x k (left linear layer), B is k x k (contraction core), V is Q x k
/// (right linear layer).
struct SlTrnnModel {
    Matrix w;
    Matrix b;
    Matrix v;
    TrainReport report;

    [[nodiscard]] Matrix predict(const Matrix& x) const { return x * w * b * v.transpose(); }
};

/// ||Y - X W B V^T||_F^2
double sl_objective(const Matrix& x, const Matrix& y, const Matrix& w, const Matrix& b,
                    const Matrix& v);

/// One shrinking layer P -> k, a k x k core and one expanding layer k -> Q,
/// identity activation.
NetworkSpec sl_trnn_spec(std::size_t p, std::size_t q, std::size_t k);
/// Reads W, B, V off a network built from sl_trnn_spec.
SlTrnnModel sl_trnn_from_network(const TrnnModel& model);

/// Full-batch training settings that drive the three-factor objective to
/// convergence on small problems.
TrainConfig default_sl_trnn_train_config();

/// Trains the linear network by gradient descent through the TRNN training
/// loop. Data is used as given (config.standardize is ignored).
SlTrnnModel fit_sl_trnn(const Matrix& x, const Matrix& y, std::size_t k,
                        const TrainConfig& config = default_sl_trnn_train_config(),
                        std::uint64_t seed = 0);

// ---------------------------------------------------------------------------
// Partial least squares

/// NIPALS PLS2 with deflation. W maps X to the scores (T = X W), V holds
/// orthonormal Y-loadings and B = argmin ||Y V - X W B||_F.
struct PlsModel {
    Matrix w;
    Matrix v;
    Matrix b;
    std::size_t components = 0;
    std::vector<std::size_t> degenerate_x_columns;
    std::vector<std::size_t> degenerate_y_columns;

    [[nodiscard]] Matrix predict(const Matrix& x) const { return x * w * b * v.transpose(); }
};

/// Requires 1 <= k <= min(P, Q, N) and k no larger than the rank of X.
/// Constant columns are listed in the model, not rejected.
PlsModel fit_pls(const Matrix& x, const Matrix& y, std::size_t k);

struct EquivalenceReport {
    double pls_objective = 0.0;
    std::vector<double> sl_objectives;  // one per seed
    double rel_tol = 1e-3;
    double abs_tol = 0.0;  // abs_fraction * ||Y||_F^2
    /// every SL objective <= pls_objective * (1 + rel_tol) + abs_tol
    bool holds = false;
};

/// The PLS factors are a feasible point of the SL-TRNN program, so every
/// converged SL-TRNN fit must reach an objective no worse than PLS.
EquivalenceReport pls_equivalence_check(const Matrix& x, const Matrix& y, std::size_t k,
                                        const std::vector<std::uint64_t>& seeds,
                                        const TrainConfig& config = default_sl_trnn_train_config(),
                                        double rel_tol = 1e-3, double abs_fraction = 1e-6);

// ---------------------------------------------------------------------------
// Flattened fully connected network

/// widths = {input, hidden..., output}; ReLU after every hidden layer.
struct FlatDenseBaseline {
    std::vector<std::size_t> widths;
    std::vector<Matrix> weights;  // weights[i] is widths[i+1] x widths[i]
    std::vector<Eigen::VectorXd> biases;

    [[nodiscard]] Matrix predict(const Matrix& x) const;
    [[nodiscard]] ParamViews parameters();
    [[nodiscard]] std::size_t parameter_count() const;
};

/// sum_i (w_i + 1) * w_{i+1}
std::size_t flat_dense_parameter_count(const std::vector<std::size_t>& widths);

FlatDenseBaseline init_flat_dense(const std::vector<std::size_t>& widths, std::uint64_t seed);

/// MSE training with the shared optimizer module. Data is used as given.
FlatDenseBaseline fit_flat_dense(const Matrix& x, const Matrix& y,
                                 const std::vector<std::size_t>& hidden, const TrainConfig& config,
                                 std::uint64_t seed, TrainReport* report = nullptr);

// ---------------------------------------------------------------------------
// Tensor-in / tensor-out wrapper: flatten non-sample modes row-major,
// standardize, fit one of the matrix baselines.

enum class BaselineKind { sl_trnn, pls, flat_dense };

std::string to_string(BaselineKind k);
BaselineKind baseline_from_string(const std::string& name);

struct BaselineConfig {
    BaselineKind kind = BaselineKind::pls;
    std::size_t components = 2;        // k for sl_trnn and pls
    std::vector<std::size_t> hidden;   // flat_dense hidden widths
    TrainConfig train = default_sl_trnn_train_config();
    bool standardize = true;
    std::uint64_t seed = 0;
};

struct FlattenedBaseline {
    BaselineKind kind = BaselineKind::pls;
    Shape x_sample;
    Shape y_sample;
    std::optional<Standardizer> x_scaler;
    std::optional<Standardizer> y_scaler;
    std::variant<SlTrnnModel, PlsModel, FlatDenseBaseline> model;
    /// Training history of the iterative fitters; empty for PLS and after loading.
    std::optional<TrainReport> report;

    [[nodiscard]] Tensor predict(const Tensor& x) const;
};

/// Row-major reshape of every non-sample mode into one column block.
Matrix flatten_samples(const Tensor& t);

FlattenedBaseline fit_baseline(const Tensor& x, const Tensor& y, const BaselineConfig& config);

void save_baseline(const FlattenedBaseline& model, const std::string& dir);
/// Reads bundles of kind "sl_trnn", "pls" or "flat_dense".
FlattenedBaseline load_baseline(const std::string& dir);

}  // namespace trnn
