#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "trnn/network.hpp"

namespace trnn {

inline constexpr std::size_t kGradcheckMaxParameters = 10000;

struct GradcheckOptions {
    double step = 1e-5;        // central-difference step
    double tolerance = 1e-4;   // max relative error per parameter group
    std::size_t batch = 4;     // samples in the random instance
    std::size_t max_attempts = 50;
    std::size_t worst_entries = 5;
    /// Test hook: perturbs one analytic entry so the check must fail.
    bool corrupt_gradient = false;
};

struct GroupError {
    std::string name;
    std::size_t size = 0;
    double analytic_norm = 0.0;
    double rel_error = 0.0;  // ||a - n|| / max(||a||, ||n||)
};

struct EntryError {
    std::string group;
    std::size_t index = 0;
    double analytic = 0.0;
    double numeric = 0.0;
};

struct GradcheckReport {
    std::vector<GroupError> groups;
    std::vector<EntryError> worst;  // largest absolute differences
    double max_rel_error = 0.0;
    std::size_t attempts = 0;  // instances drawn until one was usable
    bool passed = false;
};

/// Compares full_backward against central differences of the loss on a
/// random instance (weights, X and Y drawn from `seed`). Instances where
/// any ReLU mask flips within +-step, or where a whole parameter group has
/// zero gradient, are redrawn. Throws
/// std::invalid_argument when the spec has more than
/// kGradcheckMaxParameters parameters, std::runtime_error when every
/// attempt hit a kink.
GradcheckReport gradcheck(const NetworkSpec& spec, std::uint64_t seed,
                          const GradcheckOptions& options = {});

/// (3, 4) -> (4, 3) with two layers on each side.
NetworkSpec default_gradcheck_spec(Activation activation = Activation::relu);

/// Sample orders 2..4 on both sides, extents in [2, 5], two encoder and two
/// decoder layers, bottleneck extents at most 3.
NetworkSpec random_gradcheck_spec(std::uint64_t seed, Activation activation = Activation::relu);

}  // namespace trnn
