#pragma once

#include <json.hpp>

#include "causalbait/trainer.hpp"

namespace causalbait::detail {

nlohmann::ordered_json train_config_json(const TrainConfig& cfg);
// Strict: unknown keys throw ConfigError. `where` prefixes error messages.
void read_train_config(const nlohmann::ordered_json& j, TrainConfig& cfg, const std::string& where);

}  // namespace causalbait::detail
