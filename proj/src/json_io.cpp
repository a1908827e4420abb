#include "trnn/json_io.hpp"

#include <algorithm>
#include <fstream>

#include "trnn/tensor.hpp"

namespace trnn {

namespace {

Shape shape_from_json(const Json& j, const std::string& what) {
    if (!j.is_array()) throw std::invalid_argument(what + " must be an array of extents");
    Shape s;
    for (const auto& e : j) {
        if (!e.is_number_unsigned() || e.get<std::size_t>() == 0) {
            throw std::invalid_argument(what + " must hold positive integers");
        }
        s.push_back(e.get<std::size_t>());
    }
    return s;
}

std::vector<Shape> schedule_from_json(const Json& j, const std::string& what) {
    if (!j.is_array()) throw std::invalid_argument(what + " must be an array of extent lists");
    std::vector<Shape> out;
    for (const auto& layer : j) out.push_back(shape_from_json(layer, what));
    return out;
}

}  // namespace

Json to_json(const NetworkSpec& spec) {
    return Json{{"input_shape", spec.input_shape},
                {"output_shape", spec.output_shape},
                {"encoder", spec.encoder},
                {"bottleneck_out", spec.bottleneck_out},
                {"decoder", spec.decoder},
                {"activation", to_string(spec.activation)}};
}

NetworkSpec network_spec_from_json(const Json& j) {
    reject_unknown_keys(j,
                        {"input_shape", "output_shape", "encoder", "bottleneck_out", "decoder",
                         "activation"},
                        "network spec");
    NetworkSpec spec;
    spec.input_shape = shape_from_json(j.at("input_shape"), "input_shape");
    spec.output_shape = shape_from_json(j.at("output_shape"), "output_shape");
    spec.encoder = schedule_from_json(j.at("encoder"), "encoder");
    spec.bottleneck_out = shape_from_json(j.at("bottleneck_out"), "bottleneck_out");
    spec.decoder = schedule_from_json(j.at("decoder"), "decoder");
    spec.activation = activation_from_string(j.value("activation", std::string("relu")));
    spec.validate();
    return spec;
}

Json to_json(const OptimizerConfig& c) {
    return Json{{"method", to_string(c.method)},   {"lr", c.learning_rate},
                {"beta1", c.beta1},                {"beta2", c.beta2},
                {"eps", c.epsilon},                {"weight_decay", c.weight_decay},
                {"lr_decay", c.lr_decay}};
}

OptimizerConfig optimizer_config_from_json(const Json& j, OptimizerConfig c) {
    reject_unknown_keys(j, {"method", "lr", "beta1", "beta2", "eps", "weight_decay", "lr_decay"},
                        "optimizer");
    if (j.contains("method")) c.method = optimizer_from_string(j.at("method").get<std::string>());
    c.learning_rate = j.value("lr", c.learning_rate);
    c.beta1 = j.value("beta1", c.beta1);
    c.beta2 = j.value("beta2", c.beta2);
    c.epsilon = j.value("eps", c.epsilon);
    c.weight_decay = j.value("weight_decay", c.weight_decay);
    c.lr_decay = j.value("lr_decay", c.lr_decay);
    c.validate();
    return c;
}

Json to_json(const TrainConfig& c) {
    return Json{{"optimizer", to_json(c.optimizer)}, {"batch_size", c.batch_size},
                {"max_epochs", c.max_epochs},       {"tol", c.tol},
                {"patience", c.patience},           {"seed", c.seed},
                {"standardize", c.standardize}};
}

TrainConfig train_config_from_json(const Json& j, TrainConfig c) {
    reject_unknown_keys(j, {"optimizer", "batch_size", "max_epochs", "tol", "patience", "seed",
                            "standardize"},
                        "train");
    if (j.contains("optimizer")) c.optimizer = optimizer_config_from_json(j.at("optimizer"), c.optimizer);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.max_epochs = j.value("max_epochs", c.max_epochs);
    c.tol = j.value("tol", c.tol);
    c.patience = j.value("patience", c.patience);
    c.seed = j.value("seed", c.seed);
    c.standardize = j.value("standardize", c.standardize);
    c.validate();
    return c;
}

void reject_unknown_keys(const Json& j, std::initializer_list<const char*> allowed,
                         const std::string& where) {
    if (!j.is_object()) throw std::invalid_argument(where + " must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        const bool known = std::any_of(allowed.begin(), allowed.end(),
                                       [&](const char* a) { return key == a; });
        if (!known) throw std::invalid_argument("unknown key '" + key + "' in " + where);
    }
}

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open '" + path + "'");
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw FormatError(path + ": " + e.what());
    }
}

void write_json_file(const std::string& path, const Json& j) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot open '" + path + "' for writing");
    out << j.dump(2) << '\n';
}

}  // namespace trnn
