#pragma once

#include <nlohmann/json.hpp>

#include "stmado/models.hpp"

namespace stmado {

/// {"family": "B2", "params": {"s11": 1, ...}}. Missing parameters are an
/// InvalidArgs error; the result is validated.
ModelSpec model_from_json(const nlohmann::json& j);
nlohmann::json model_to_json(const ModelSpec& m);

}  // namespace stmado
