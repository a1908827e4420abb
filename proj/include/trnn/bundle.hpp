#pragma once

#include <optional>
#include <string>

#include "trnn/json_io.hpp"
#include "trnn/tensor.hpp"

namespace trnn {

inline constexpr int kBundleVersion = 1;

/// Writes a bundle directory: one `<name>.dtf` per tensor plus a JSON
/// `manifest` listing each tensor's file and shape.
class BundleWriter {
public:
    BundleWriter(std::string dir, std::string kind);

    void add(const std::string& name, const Tensor& t);
    void add(const std::string& name, const Matrix& m);
    /// Free-form manifest fields (spec, seeds, ...).
    Json& fields() { return fields_; }
    void finish();

private:
    std::string dir_;
    std::string kind_;
    Json fields_ = Json::object();
    Json tensors_ = Json::array();
};

/// Reads and validates a bundle written by BundleWriter.
class BundleReader {
public:
    /// Throws FormatError on a missing manifest, a format or version mismatch,
    /// or a kind other than `kind`.
    BundleReader(std::string dir, const std::string& kind);

    [[nodiscard]] const Json& fields() const { return manifest_.at("fields"); }
    [[nodiscard]] bool has(const std::string& name) const;
    /// Loads a tensor; the manifest entry and the file must both carry `expected`.
    [[nodiscard]] Tensor tensor(const std::string& name, const Shape& expected) const;
    [[nodiscard]] Matrix matrix(const std::string& name, std::size_t rows, std::size_t cols) const;

private:
    [[nodiscard]] const Json* entry(const std::string& name) const;

    std::string dir_;
    Json manifest_;
};

std::string read_bundle_kind(const std::string& dir);

}  // namespace trnn
