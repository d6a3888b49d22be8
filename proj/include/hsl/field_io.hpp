#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hsl/grid.hpp"

namespace hsl {

struct NamedField {
  std::string name;
  double time = 0.0;
  Field field;
};

/// CSV with one row per cell: coordinates (x or x,y) then one column per field.
/// All fields must share one grid.
void write_fields_csv(const std::filesystem::path& path, std::span<const NamedField> fields);

/// Writes the fields as one raw little-endian float64 block plus a JSON
/// manifest recording the grid, the field names/times and byte offsets.
void write_field_bundle(const std::filesystem::path& binary_path, const std::filesystem::path& manifest_path,
                        std::span<const NamedField> fields);

/// Reads a bundle written by write_field_bundle. The binary path in the
/// manifest is resolved relative to the manifest's directory.
std::vector<NamedField> read_field_bundle(const std::filesystem::path& manifest_path);

}  // namespace hsl
