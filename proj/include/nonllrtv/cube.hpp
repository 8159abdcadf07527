#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace nonllrtv {

using Index = Eigen::Index;

struct CubeDims {
  Index rows = 0;
  Index cols = 0;
  Index bands = 0;

  Index pixels() const { return rows * cols; }
  Index size() const { return rows * cols * bands; }
  bool operator==(const CubeDims &) const = default;
};

/// Dense rows x cols x bands cube of doubles.
///
/// Storage is band-sequential: each band is a contiguous row-major image, so
/// voxel (i, j, k) lives at k*rows*cols + i*cols + j. The column index varies
/// fastest. Every matricization in this library uses this scan order.
class HsiCube {
public:
  HsiCube() = default;
  HsiCube(Index rows, Index cols, Index bands, double fill = 0.0);
  explicit HsiCube(CubeDims dims, double fill = 0.0);

  Index rows() const { return dims_.rows; }
  Index cols() const { return dims_.cols; }
  Index bands() const { return dims_.bands; }
  Index size() const { return dims_.size(); }
  CubeDims dims() const { return dims_; }
  bool empty() const { return data_.empty(); }

  Index offset(Index i, Index j, Index k) const { return (k * dims_.rows + i) * dims_.cols + j; }

  double &operator()(Index i, Index j, Index k) { return data_[static_cast<std::size_t>(offset(i, j, k))]; }
  const double &operator()(Index i, Index j, Index k) const { return data_[static_cast<std::size_t>(offset(i, j, k))]; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  std::span<double> band(Index k);
  std::span<const double> band(Index k) const;

  /// Flat elementwise view for Eigen array expressions.
  Eigen::Map<Eigen::ArrayXd> array() { return {data_.data(), dims_.size()}; }
  Eigen::Map<const Eigen::ArrayXd> array() const { return {data_.data(), dims_.size()}; }

  bool all_finite() const;
  bool same_shape(const HsiCube &other) const { return dims_ == other.dims_; }

  void fill(double value);

private:
  CubeDims dims_;
  std::vector<double> data_;
};

/// Casorati matrix: (rows*cols) x bands, column k is band k in scan order.
Eigen::MatrixXd casorati(const HsiCube &cube);

/// Inverse of casorati(); `matrix` must have rows*cols rows.
HsiCube inverse_casorati(const Eigen::MatrixXd &matrix, Index rows, Index cols);

/// Largest absolute entry, 0 for an empty cube.
double max_abs(const HsiCube &cube);

} // namespace nonllrtv
