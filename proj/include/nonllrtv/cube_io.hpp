#pragma once

#include "nonllrtv/cube.hpp"

#include <filesystem>

namespace nonllrtv {

// A cube on disk is a pair of files sharing a stem:
//   <stem>.json  {"dims":[m,n,p],"dtype":"f32","order":"bsq"}
//   <stem>.bin   m*n*p little-endian float32 values, band-sequential
// Either path of the pair may be passed to the loader.

std::filesystem::path cube_header_path(const std::filesystem::path &path);
std::filesystem::path cube_data_path(const std::filesystem::path &path);

HsiCube load_cube(const std::filesystem::path &path);

/// Writes both files. Values are narrowed to float32.
void save_cube(const HsiCube &cube, const std::filesystem::path &path);

} // namespace nonllrtv
