#pragma once

#include "nonllrtv/cube.hpp"

#include <memory>

namespace nonllrtv {

/// Weights of the three difference directions of the spatial-spectral TV.
struct DiffWeights {
  double spectral = 1.0; ///< k - (k-1)
  double column = 1.0;   ///< j - (j-1)
  double row = 0.5;      ///< i - (i-1)

  void validate() const;
};

/// One cube per difference direction, all with the source cube's dims.
struct GradientField {
  HsiCube spectral;
  HsiCube column;
  HsiCube row;

  GradientField() = default;
  explicit GradientField(CubeDims dims)
    : spectral(dims)
    , column(dims)
    , row(dims)
  {
  }

  CubeDims dims() const { return spectral.dims(); }
  bool all_finite() const { return spectral.all_finite() && column.all_finite() && row.all_finite(); }
};

// All differences wrap periodically, so the operator is circulant along every
// axis and diagonalized by the 3-D DFT.

/// Weighted forward differences D x.
GradientField forward_diff(const HsiCube &x, const DiffWeights &w);

/// Adjoint D^T u: weighted negative backward differences.
HsiCube adjoint_diff(const GradientField &u, const DiffWeights &w);

/// Anisotropic spatial-spectral TV, i.e. the L1 norm of forward_diff(x).
double sstv_value(const HsiCube &x, const DiffWeights &w);

/// Spectrum of I + D^T D:
///   1 + sum_t w_t^2 |1 - exp(-2 pi i xi_t / N_t)|^2
/// indexed like a cube, (xi_row, xi_col, xi_band). Every entry is >= 1.
HsiCube build_fft_denominator(CubeDims dims, const DiffWeights &w);

/// Solves (I + D^T D) x = rhs with periodic boundaries by FFT.
///
/// Holds FFTW plans and work buffers for one cube shape. A solver instance is
/// not reentrant: use one per thread. Construction is serialized internally
/// because FFTW's planner is not thread-safe. Plans use FFTW_ESTIMATE, which
/// keeps results bit-identical from run to run.
class PeriodicSolver {
public:
  PeriodicSolver(CubeDims dims, const DiffWeights &w);
  /// Uses a caller-supplied spectrum, e.g. from build_fft_denominator().
  explicit PeriodicSolver(HsiCube denominator);
  ~PeriodicSolver();
  PeriodicSolver(const PeriodicSolver &) = delete;
  PeriodicSolver &operator=(const PeriodicSolver &) = delete;
  PeriodicSolver(PeriodicSolver &&) noexcept;
  PeriodicSolver &operator=(PeriodicSolver &&) noexcept;

  CubeDims dims() const;
  const HsiCube &denominator() const;

  HsiCube solve(const HsiCube &rhs) const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// One-shot form of PeriodicSolver::solve with a prebuilt denominator.
HsiCube solve_x_subproblem(const HsiCube &rhs, const HsiCube &denominator);

} // namespace nonllrtv
