#include "trnn/datagen.hpp"

#include <cmath>
#include <filesystem>
#include <numbers>

#include "trnn/random.hpp"

namespace trnn {

namespace {

namespace fs = std::filesystem;

void check_grid(std::size_t i, std::size_t j, double sigma, const char* what) {
    if (i < 2 || j < 2) {
        throw std::invalid_argument(std::string(what) + ": grid extents must be at least 2");
    }
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
        throw std::invalid_argument(std::string(what) + ": sigma must be finite and >= 0");
    }
}

CounterRng sample_stream(const GenerateOptions& o, Generator g, const char* purpose,
                         std::size_t sample) {
    const std::uint64_t id =
        hash_combine(hash_string(to_string(g) + "/" + purpose), static_cast<std::uint64_t>(sample));
    return CounterRng(o.seed, id);
}

/// Adds N(0, sigma^2) to every entry of sample s, in row-major order.
void add_noise(Tensor& t, double sigma, CounterRng rng, std::size_t s) {
    if (sigma == 0.0) return;
    const std::size_t block = t.sample_size();
    auto data = t.data().subspan(s * block, block);
    for (double& v : data) v += sigma * rng.normal();
}

}  // namespace

void WaterDropParams::validate() const {
    check_grid(grid_i, grid_j, sigma, "water-drop");
    if (!(a > 0.0 && b >= 0.0 && c >= 0.0 && d >= 0.0)) {
        throw std::invalid_argument("water-drop: need a > 0 and b, c, d >= 0");
    }
}

void HelicoidParams::validate() const {
    check_grid(grid_i, grid_j, sigma, "helicoid");
    if (!(0.0 <= c2 && c2 < c1)) throw std::invalid_argument("helicoid: need 0 <= c2 < c1");
}

Tensor waterdrop_surface(const WaterDropParams& p) {
    p.validate();
    const std::size_t ni = p.grid_i;
    const std::size_t nj = p.grid_j;
    Tensor out({ni, nj, 2});
    auto v = out.data();
    for (std::size_t i = 1; i <= ni; ++i) {
        const double phi = -std::numbers::pi + 2.0 * std::numbers::pi * static_cast<double>(i) /
                                                   static_cast<double>(ni);
        const double ring = p.a * (1.0 + std::cos(p.b * phi));
        for (std::size_t j = 1; j <= nj; ++j) {
            const double z = static_cast<double>(j) / static_cast<double>(nj);
            const double radius =
                ring * (1.0 + std::sin(p.c * std::numbers::pi * z)) + p.d * (-z * z + z);
            const std::size_t at = ((i - 1) * nj + (j - 1)) * 2;
            v[at] = radius * std::cos(phi);
            v[at + 1] = radius * std::sin(phi);
        }
    }
    return out;
}

Tensor helicoid_surface(const HelicoidParams& p) {
    p.validate();
    const std::size_t ni = p.grid_i;
    const std::size_t nj = p.grid_j;
    Tensor out({2, ni, nj});
    auto v = out.data();
    for (std::size_t i = 1; i <= ni; ++i) {
        const double r = static_cast<double>(i) / static_cast<double>(ni);
        for (std::size_t j = 1; j <= nj; ++j) {
            const double z = static_cast<double>(j) / static_cast<double>(nj);
            const double arm = (p.c1 + p.c2 * std::cos(p.beta * z)) * r;
            const std::size_t at = (i - 1) * nj + (j - 1);
            v[at] = arm * std::cos(p.alpha * z);
            v[ni * nj + at] = arm * std::sin(p.alpha * z);
        }
    }
    return out;
}

std::string to_string(Generator g) {
    return g == Generator::waterdrop ? "waterdrop" : "helicoid";
}

Generator generator_from_string(const std::string& name) {
    if (name == "waterdrop") return Generator::waterdrop;
    if (name == "helicoid") return Generator::helicoid;
    throw std::invalid_argument("unknown generator '" + name + "' (expected waterdrop or helicoid)");
}

void GenerateOptions::validate() const {
    if (n == 0) throw std::invalid_argument("sample count must be at least 1");
    check_grid(grid_i, grid_j, sigma, "dataset");
}

Dataset gen_waterdrop_dataset(const GenerateOptions& o) {
    o.validate();
    Dataset out;
    out.generator = Generator::waterdrop;
    out.options = o;
    out.controls.resize(static_cast<Eigen::Index>(o.n), 4);
    out.x = Tensor({o.n, 4});
    out.y = Tensor({o.n, o.grid_i, o.grid_j, 2});
    const std::size_t block = out.y.sample_size();
    for (std::size_t s = 0; s < o.n; ++s) {
        CounterRng rng = sample_stream(o, out.generator, "controls", s);
        WaterDropParams p;
        p.a = rng.uniform(1.0, 2.0);
        p.b = 0.5 * rng.uniform(1.0, 2.0);
        p.c = rng.uniform(1.0, 2.0);
        p.d = rng.uniform(1.0, 2.0);
        p.grid_i = o.grid_i;
        p.grid_j = o.grid_j;
        const double row[4] = {p.a, p.b, p.c, p.d};
        for (std::size_t k = 0; k < 4; ++k) {
            out.controls(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(k)) = row[k];
            out.x.data()[s * 4 + k] = row[k];
        }
        const Tensor surface = waterdrop_surface(p);
        std::copy(surface.data().begin(), surface.data().end(), out.y.data().begin() + s * block);
        add_noise(out.y, o.sigma, sample_stream(o, out.generator, "noise-y", s), s);
        if (o.noise_on_x) add_noise(out.x, o.sigma, sample_stream(o, out.generator, "noise-x", s), s);
    }
    return out;
}

Dataset gen_helicoid_dataset(const GenerateOptions& o) {
    o.validate();
    Dataset out;
    out.generator = Generator::helicoid;
    out.options = o;
    out.controls.resize(static_cast<Eigen::Index>(o.n), 4);
    const std::size_t nj = o.grid_j;
    out.x = Tensor({o.n, 4, nj});
    out.y = Tensor({o.n, 2, o.grid_i, nj});
    const std::size_t block = out.y.sample_size();
    for (std::size_t s = 0; s < o.n; ++s) {
        CounterRng rng = sample_stream(o, out.generator, "controls", s);
        HelicoidParams p;
        // The i.i.d. ranges overlap, so (c1, c2) is redrawn until c2 < c1.
        do {
            p.c1 = 5.0 * rng.uniform(0.5, 1.5);
            p.c2 = 2.0 * rng.uniform(0.5, 1.5);
        } while (!(p.c2 < p.c1));
        p.alpha = 3.0 * rng.uniform(0.5, 1.5);
        p.beta = 4.0 * rng.uniform(0.5, 1.5);
        p.grid_i = o.grid_i;
        p.grid_j = nj;
        const double row[4] = {p.c1, p.c2, p.alpha, p.beta};
        for (std::size_t k = 0; k < 4; ++k) {
            out.controls(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(k)) = row[k];
        }
        auto x = out.x.data().subspan(s * 4 * nj, 4 * nj);
        for (std::size_t j = 1; j <= nj; ++j) {
            const double z = static_cast<double>(j) / static_cast<double>(nj);
            x[j - 1] = p.c1;
            x[nj + j - 1] = p.c2;
            x[2 * nj + j - 1] = std::cos(p.alpha * z);
            x[3 * nj + j - 1] = std::cos(p.beta * z);
        }
        const Tensor surface = helicoid_surface(p);
        std::copy(surface.data().begin(), surface.data().end(), out.y.data().begin() + s * block);
        add_noise(out.y, o.sigma, sample_stream(o, out.generator, "noise-y", s), s);
        if (o.noise_on_x) add_noise(out.x, o.sigma, sample_stream(o, out.generator, "noise-x", s), s);
    }
    return out;
}

Dataset generate_dataset(Generator g, const GenerateOptions& options) {
    return g == Generator::waterdrop ? gen_waterdrop_dataset(options) : gen_helicoid_dataset(options);
}

Json dataset_meta(const Dataset& data) {
    const GenerateOptions& o = data.options;
    Json controls = Json::array();
    for (Eigen::Index s = 0; s < data.controls.rows(); ++s) {
        controls.push_back({data.controls(s, 0), data.controls(s, 1), data.controls(s, 2),
                            data.controls(s, 3)});
    }
    return Json{{"generator", to_string(data.generator)},
                {"n", o.n},
                {"sigma", o.sigma},
                {"grid_i", o.grid_i},
                {"grid_j", o.grid_j},
                {"seed", o.seed},
                {"noise_on_x", o.noise_on_x},
                {"x_shape", data.x.shape()},
                {"y_shape", data.y.shape()},
                {"control_names", data.generator == Generator::waterdrop
                                      ? Json{"a", "b", "c", "d"}
                                      : Json{"c1", "c2", "alpha", "beta"}},
                {"controls", std::move(controls)}};
}

Dataset regenerate_dataset(const Json& meta) {
    try {
        GenerateOptions o;
        o.n = meta.at("n").get<std::size_t>();
        o.sigma = meta.at("sigma").get<double>();
        o.grid_i = meta.at("grid_i").get<std::size_t>();
        o.grid_j = meta.at("grid_j").get<std::size_t>();
        o.seed = meta.at("seed").get<std::uint64_t>();
        o.noise_on_x = meta.value("noise_on_x", false);
        Dataset out = generate_dataset(generator_from_string(meta.at("generator")), o);
        if (meta.contains("controls") && dataset_meta(out).at("controls") != meta.at("controls")) {
            throw FormatError("regenerated controls differ from the recorded table");
        }
        return out;
    } catch (const Json::exception& e) {
        throw FormatError(std::string("malformed dataset metadata: ") + e.what());
    }
}

void save_dataset(const Dataset& data, const std::string& dir) {
    fs::create_directories(dir);
    save_dtf((fs::path(dir) / "X.dtf").string(), data.x);
    save_dtf((fs::path(dir) / "Y.dtf").string(), data.y);
    write_json_file((fs::path(dir) / "meta").string(), dataset_meta(data));
}

TensorPair load_tensors(const std::string& dir) {
    const fs::path root(dir);
    TensorPair out{load_dtf((root / "X.dtf").string()), load_dtf((root / "Y.dtf").string())};
    if (out.x.shape().front() != out.y.shape().front()) {
        throw FormatError("dataset '" + dir + "': X has " + std::to_string(out.x.shape().front()) +
                          " samples but Y has " + std::to_string(out.y.shape().front()));
    }
    if (fs::exists(root / "meta")) {
        const Json meta = read_json_file((root / "meta").string());
        if (meta.contains("x_shape") && meta["x_shape"].get<Shape>() != out.x.shape()) {
            throw FormatError("dataset '" + dir + "': X.dtf does not match the shape in meta");
        }
        if (meta.contains("y_shape") && meta["y_shape"].get<Shape>() != out.y.shape()) {
            throw FormatError("dataset '" + dir + "': Y.dtf does not match the shape in meta");
        }
    }
    return out;
}

}  // namespace trnn
