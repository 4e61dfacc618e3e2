#pragma once

// Long-format CSV (x,y,t,value; 1-based coordinates, NA for missing) and the
// JSON metadata sidecar.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "stmado/field.hpp"
#include "stmado/models.hpp"

namespace stmado {

void write_field_csv(std::ostream& os, const SpaceTimeField& field);
void write_field_csv(const std::string& path, const SpaceTimeField& field);

/// Reads x,y,t,value rows in any order. n is the largest x or y, T the largest
/// t; cells without a row are missing. Duplicate cells and coordinates below 1
/// are IoError.
SpaceTimeField read_field_csv(std::istream& is, Margins margins = Margins::Raw);
SpaceTimeField read_field_csv(const std::string& path, Margins margins = Margins::Raw);

struct FieldMetadata {
  int n = 0;
  int T = 0;
  Margins margins = Margins::Raw;
  std::optional<ModelSpec> model;
  std::optional<std::uint64_t> seed;
};

nlohmann::json metadata_to_json(const FieldMetadata& m);
FieldMetadata metadata_from_json(const nlohmann::json& j);

}  // namespace stmado
