#include "trnn/bundle.hpp"

#include <filesystem>

namespace trnn {

namespace fs = std::filesystem;

namespace {

constexpr const char* kFormat = "trnn-bundle";

Json load_manifest(const std::string& dir) {
    const fs::path path = fs::path(dir) / "manifest";
    if (!fs::exists(path)) throw FormatError("no manifest in bundle '" + dir + "'");
    Json m = read_json_file(path.string());
    if (m.value("format", std::string()) != kFormat) {
        throw FormatError("'" + path.string() + "' is not a " + kFormat + " manifest");
    }
    if (!m.contains("version") || m.at("version") != kBundleVersion) {
        throw FormatError("bundle version mismatch in '" + path.string() + "': expected " +
                          std::to_string(kBundleVersion));
    }
    return m;
}

}  // namespace

BundleWriter::BundleWriter(std::string dir, std::string kind)
    : dir_(std::move(dir)), kind_(std::move(kind)) {
    fs::create_directories(dir_);
}

void BundleWriter::add(const std::string& name, const Tensor& t) {
    const std::string file = name + ".dtf";
    save_dtf((fs::path(dir_) / file).string(), t);
    tensors_.push_back(Json{{"name", name}, {"file", file}, {"shape", t.shape()}});
}

void BundleWriter::add(const std::string& name, const Matrix& m) {
    add(name, Tensor::from_matrix(m));
}

void BundleWriter::finish() {
    Json manifest{{"format", kFormat},
                  {"version", kBundleVersion},
                  {"kind", kind_},
                  {"fields", fields_},
                  {"tensors", tensors_}};
    write_json_file((fs::path(dir_) / "manifest").string(), manifest);
}

BundleReader::BundleReader(std::string dir, const std::string& kind)
    : dir_(std::move(dir)), manifest_(load_manifest(dir_)) {
    const std::string found = manifest_.value("kind", std::string());
    if (found != kind) {
        throw FormatError("bundle '" + dir_ + "' holds a '" + found + "' model, expected '" +
                          kind + "'");
    }
    if (!manifest_.contains("fields") || !manifest_.contains("tensors")) {
        throw FormatError("bundle '" + dir_ + "' manifest is incomplete");
    }
}

const Json* BundleReader::entry(const std::string& name) const {
    for (const auto& e : manifest_.at("tensors")) {
        if (e.value("name", std::string()) == name) return &e;
    }
    return nullptr;
}

bool BundleReader::has(const std::string& name) const {
    return entry(name) != nullptr;
}

Tensor BundleReader::tensor(const std::string& name, const Shape& expected) const {
    const Json* e = entry(name);
    if (!e) throw FormatError("bundle '" + dir_ + "' has no tensor '" + name + "'");
    const Shape declared = e->at("shape").get<Shape>();
    if (declared != expected) {
        throw FormatError("bundle tensor '" + name + "' declared as " + shape_string(declared) +
                          ", expected " + shape_string(expected));
    }
    Tensor t = load_dtf((fs::path(dir_) / e->at("file").get<std::string>()).string());
    if (t.shape() != expected) {
        throw FormatError("bundle tensor '" + name + "' file holds " + shape_string(t.shape()) +
                          ", expected " + shape_string(expected));
    }
    return t;
}

Matrix BundleReader::matrix(const std::string& name, std::size_t rows, std::size_t cols) const {
    return tensor(name, {rows, cols}).to_matrix();
}

std::string read_bundle_kind(const std::string& dir) {
    return load_manifest(dir).value("kind", std::string());
}

}  // namespace trnn
