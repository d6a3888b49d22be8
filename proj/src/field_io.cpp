#include "hsl/field_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <stdexcept>

#include <json.hpp>

namespace hsl {

namespace {

std::uint64_t to_little_endian(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    std::uint64_t out = 0;
    for (int i = 0; i < 8; ++i) out |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
    return out;
  }
}

void require_common_grid(std::span<const NamedField> fields) {
  if (fields.empty()) throw std::invalid_argument("no fields to write");
  for (const auto& f : fields) {
    if (!(f.field.grid() == fields.front().field.grid())) {
      throw std::invalid_argument("field '" + f.name + "' lives on a different grid");
    }
  }
}

}  // namespace

void write_fields_csv(const std::filesystem::path& path, std::span<const NamedField> fields) {
  require_common_grid(fields);
  const Grid& g = fields.front().field.grid();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << std::setprecision(17);
  out << "x";
  if (g.dimension == 2) out << ",y";
  for (const auto& f : fields) out << ',' << f.name;
  out << '\n';
  for (Eigen::Index k = 0; k < g.size(); ++k) {
    auto x = g.position(k);
    out << x[0];
    if (g.dimension == 2) out << ',' << x[1];
    for (const auto& f : fields) out << ',' << f.field[k];
    out << '\n';
  }
}

void write_field_bundle(const std::filesystem::path& binary_path, const std::filesystem::path& manifest_path,
                        std::span<const NamedField> fields) {
  require_common_grid(fields);
  const Grid& g = fields.front().field.grid();

  std::ofstream bin(binary_path, std::ios::binary);
  if (!bin) throw std::runtime_error("cannot open " + binary_path.string());

  nlohmann::json manifest;
  manifest["format"] = "hsl-fields";
  manifest["dtype"] = "float64";
  manifest["byte_order"] = "little";
  manifest["binary"] = binary_path.filename().string();
  manifest["grid"] = {{"dimension", g.dimension},
                      {"half_width", g.half_width},
                      {"cells", g.cells},
                      {"spacing", g.spacing()}};
  manifest["fields"] = nlohmann::json::array();

  std::uint64_t offset = 0;
  for (const auto& f : fields) {
    for (Eigen::Index k = 0; k < f.field.size(); ++k) {
      std::uint64_t word = to_little_endian(std::bit_cast<std::uint64_t>(f.field[k]));
      bin.write(reinterpret_cast<const char*>(&word), sizeof word);
    }
    manifest["fields"].push_back(
        {{"name", f.name}, {"time", f.time}, {"offset", offset}, {"count", f.field.size()}});
    offset += std::uint64_t(f.field.size()) * 8u;
  }
  if (!bin) throw std::runtime_error("write failed: " + binary_path.string());

  std::ofstream out(manifest_path);
  if (!out) throw std::runtime_error("cannot open " + manifest_path.string());
  out << manifest.dump(2) << '\n';
}

std::vector<NamedField> read_field_bundle(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw std::runtime_error("cannot open " + manifest_path.string());
  nlohmann::json manifest = nlohmann::json::parse(in);
  if (manifest.value("format", "") != "hsl-fields") throw std::runtime_error("not a field manifest: " + manifest_path.string());
  if (manifest.value("byte_order", "") != "little" || manifest.value("dtype", "") != "float64") {
    throw std::runtime_error("unsupported field encoding in " + manifest_path.string());
  }
  const auto& jg = manifest.at("grid");
  Grid grid(jg.at("dimension").get<int>(), jg.at("half_width").get<double>(), jg.at("cells").get<int>());

  auto binary_path = manifest_path.parent_path() / manifest.at("binary").get<std::string>();
  std::ifstream bin(binary_path, std::ios::binary);
  if (!bin) throw std::runtime_error("cannot open " + binary_path.string());

  std::vector<NamedField> out;
  for (const auto& jf : manifest.at("fields")) {
    auto count = jf.at("count").get<Eigen::Index>();
    if (count != grid.size()) throw std::runtime_error("field size does not match grid in " + manifest_path.string());
    bin.seekg(std::streamoff(jf.at("offset").get<std::uint64_t>()));
    Field f(grid);
    for (Eigen::Index k = 0; k < count; ++k) {
      std::uint64_t word = 0;
      bin.read(reinterpret_cast<char*>(&word), sizeof word);
      f[k] = std::bit_cast<double>(to_little_endian(word));
    }
    if (!bin) throw std::runtime_error("truncated field block in " + binary_path.string());
    out.push_back({jf.at("name").get<std::string>(), jf.at("time").get<double>(), std::move(f)});
  }
  return out;
}

}  // namespace hsl
