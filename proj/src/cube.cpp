#include "nonllrtv/cube.hpp"

#include "nonllrtv/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace nonllrtv {

HsiCube::HsiCube(Index rows, Index cols, Index bands, double fill)
  : HsiCube(CubeDims{rows, cols, bands}, fill)
{
}

HsiCube::HsiCube(CubeDims dims, double fill)
  : dims_{dims}
{
  if (dims.rows <= 0 || dims.cols <= 0 || dims.bands <= 0) {
    throw ConfigError("cube dimensions must be positive, got " + std::to_string(dims.rows) + "x" +
                      std::to_string(dims.cols) + "x" + std::to_string(dims.bands));
  }
  data_.assign(static_cast<std::size_t>(dims.size()), fill);
}

std::span<double> HsiCube::band(Index k)
{
  const auto n = static_cast<std::size_t>(dims_.pixels());
  return std::span<double>(data_).subspan(static_cast<std::size_t>(k) * n, n);
}

std::span<const double> HsiCube::band(Index k) const
{
  const auto n = static_cast<std::size_t>(dims_.pixels());
  return std::span<const double>(data_).subspan(static_cast<std::size_t>(k) * n, n);
}

bool HsiCube::all_finite() const
{
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void HsiCube::fill(double value)
{
  std::fill(data_.begin(), data_.end(), value);
}

Eigen::MatrixXd casorati(const HsiCube &cube)
{
  // Band-sequential storage is exactly the column-major layout of the Casorati matrix.
  return Eigen::Map<const Eigen::MatrixXd>(cube.data().data(), cube.rows() * cube.cols(), cube.bands());
}

HsiCube inverse_casorati(const Eigen::MatrixXd &matrix, Index rows, Index cols)
{
  if (rows <= 0 || cols <= 0 || matrix.rows() != rows * cols) {
    throw UsageError("inverse_casorati: matrix has " + std::to_string(matrix.rows()) + " rows, expected " +
                     std::to_string(rows) + "*" + std::to_string(cols));
  }
  HsiCube cube(rows, cols, matrix.cols());
  Eigen::Map<Eigen::MatrixXd>(cube.data().data(), matrix.rows(), matrix.cols()) = matrix;
  return cube;
}

double max_abs(const HsiCube &cube)
{
  return cube.empty() ? 0.0 : cube.array().abs().maxCoeff();
}

} // namespace nonllrtv
