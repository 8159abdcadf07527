#include "nonllrtv/cube_io.hpp"

#include "nonllrtv/error.hpp"

#include <json.hpp>

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

namespace nonllrtv {

namespace fs = std::filesystem;

namespace {

static_assert(sizeof(float) == 4);

std::uint32_t to_little_endian(std::uint32_t v)
{
  if constexpr (std::endian::native == std::endian::big) {
    return ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) | (v >> 24);
  }
  return v;
}

} // namespace

fs::path cube_header_path(const fs::path &path)
{
  fs::path p = path;
  return p.replace_extension(".json");
}

fs::path cube_data_path(const fs::path &path)
{
  fs::path p = path;
  return p.replace_extension(".bin");
}

HsiCube load_cube(const fs::path &path)
{
  const fs::path header_path = cube_header_path(path);
  std::ifstream header_file(header_path);
  if (!header_file) {
    throw ConfigError("cannot open cube header " + header_path.string());
  }
  nlohmann::json header;
  try {
    header_file >> header;
  } catch (const nlohmann::json::exception &e) {
    throw ConfigError("malformed cube header " + header_path.string() + ": " + e.what());
  }

  const auto dims = header.value("dims", nlohmann::json::array());
  if (!dims.is_array() || dims.size() != 3) {
    throw ConfigError(header_path.string() + ": \"dims\" must be [rows, cols, bands]");
  }
  if (header.value("dtype", "") != "f32") {
    throw ConfigError(header_path.string() + ": only dtype \"f32\" is supported");
  }
  if (header.value("order", "") != "bsq") {
    throw ConfigError(header_path.string() + ": only order \"bsq\" is supported");
  }
  for (const auto &d : dims) {
    if (!d.is_number_integer() || d.get<long long>() <= 0) {
      throw ConfigError(header_path.string() + ": dims must be positive integers");
    }
  }
  HsiCube cube(dims[0].get<Index>(), dims[1].get<Index>(), dims[2].get<Index>());

  const fs::path data_path = cube_data_path(path);
  std::ifstream data_file(data_path, std::ios::binary);
  if (!data_file) {
    throw ConfigError("cannot open cube data " + data_path.string());
  }
  const auto expected = static_cast<std::uintmax_t>(cube.size()) * 4u;
  if (fs::file_size(data_path) != expected) {
    throw ConfigError(data_path.string() + ": expected " + std::to_string(expected) + " bytes, found " +
                      std::to_string(fs::file_size(data_path)));
  }
  std::vector<std::uint32_t> raw(static_cast<std::size_t>(cube.size()));
  data_file.read(reinterpret_cast<char *>(raw.data()), static_cast<std::streamsize>(expected));
  if (!data_file) {
    throw ConfigError("short read on " + data_path.string());
  }

  auto out = cube.data();
  for (std::size_t idx = 0; idx < raw.size(); ++idx) {
    const std::uint32_t bits = to_little_endian(raw[idx]);
    float value;
    std::memcpy(&value, &bits, 4);
    out[idx] = static_cast<double>(value);
  }
  if (!cube.all_finite()) {
    throw ConfigError(data_path.string() + " contains NaN or Inf values");
  }
  return cube;
}

void save_cube(const HsiCube &cube, const fs::path &path)
{
  const nlohmann::json header = {
    {"dims", {cube.rows(), cube.cols(), cube.bands()}},
    {"dtype", "f32"},
    {"order", "bsq"},
  };
  const fs::path header_path = cube_header_path(path);
  std::ofstream header_file(header_path);
  if (!header_file) {
    throw ConfigError("cannot write " + header_path.string());
  }
  header_file << header.dump() << '\n';

  std::vector<std::uint32_t> raw(static_cast<std::size_t>(cube.size()));
  const auto in = cube.data();
  for (std::size_t idx = 0; idx < raw.size(); ++idx) {
    const float value = static_cast<float>(in[idx]);
    std::uint32_t bits;
    std::memcpy(&bits, &value, 4);
    raw[idx] = to_little_endian(bits);
  }
  const fs::path data_path = cube_data_path(path);
  std::ofstream data_file(data_path, std::ios::binary);
  if (!data_file) {
    throw ConfigError("cannot write " + data_path.string());
  }
  data_file.write(reinterpret_cast<const char *>(raw.data()), static_cast<std::streamsize>(raw.size() * 4));
  if (!data_file) {
    throw ConfigError("write failed on " + data_path.string());
  }
}

} // namespace nonllrtv
