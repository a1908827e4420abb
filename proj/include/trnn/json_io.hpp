#pragma once

#include <string>

#include "json.hpp"
#include "trnn/model.hpp"
#include "trnn/network.hpp"
#include "trnn/optimizer.hpp"

namespace trnn {

using Json = nlohmann::json;

Json to_json(const NetworkSpec& spec);
NetworkSpec network_spec_from_json(const Json& j);

Json to_json(const OptimizerConfig& c);
/// Fields absent from j keep the values already in `base`.
OptimizerConfig optimizer_config_from_json(const Json& j, OptimizerConfig base = {});

/// Keys: optimizer (object), batch_size, max_epochs, tol, patience, seed,
/// standardize. Absent keys keep the values in `base`.
Json to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const Json& j, TrainConfig base = {});

/// Throws std::invalid_argument naming the first key not in `allowed`.
void reject_unknown_keys(const Json& j, std::initializer_list<const char*> allowed,
                         const std::string& where);

Json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);

}  // namespace trnn
