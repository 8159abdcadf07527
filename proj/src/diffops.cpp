#include "nonllrtv/diffops.hpp"

#include "nonllrtv/error.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>

namespace nonllrtv {

namespace {

std::mutex &planner_mutex()
{
  static std::mutex m;
  return m;
}

// Periodic predecessor index.
inline Index prev(Index x, Index n) { return x == 0 ? n - 1 : x - 1; }
inline Index next(Index x, Index n) { return x + 1 == n ? 0 : x + 1; }

void check_same_dims(const GradientField &u)
{
  if (!u.spectral.same_shape(u.column) || !u.spectral.same_shape(u.row)) {
    throw UsageError("gradient field components have mismatched dims");
  }
}

} // namespace

void DiffWeights::validate() const
{
  const bool finite = std::isfinite(spectral) && std::isfinite(column) && std::isfinite(row);
  if (!finite || spectral < 0.0 || column < 0.0 || row < 0.0) {
    throw ConfigError("difference weights must be finite and non-negative");
  }
  if (spectral == 0.0 && column == 0.0 && row == 0.0) {
    throw ConfigError("at least one difference weight must be positive");
  }
}

GradientField forward_diff(const HsiCube &x, const DiffWeights &w)
{
  const Index m = x.rows(), n = x.cols(), p = x.bands();
  GradientField g(x.dims());
  for (Index k = 0; k < p; ++k) {
    const Index kp = prev(k, p);
    for (Index i = 0; i < m; ++i) {
      const Index ip = prev(i, m);
      for (Index j = 0; j < n; ++j) {
        const double v = x(i, j, k);
        g.spectral(i, j, k) = w.spectral * (v - x(i, j, kp));
        g.column(i, j, k) = w.column * (v - x(i, prev(j, n), k));
        g.row(i, j, k) = w.row * (v - x(ip, j, k));
      }
    }
  }
  return g;
}

HsiCube adjoint_diff(const GradientField &u, const DiffWeights &w)
{
  check_same_dims(u);
  const CubeDims d = u.dims();
  const Index m = d.rows, n = d.cols, p = d.bands;
  HsiCube out(d);
  for (Index k = 0; k < p; ++k) {
    const Index kn = next(k, p);
    for (Index i = 0; i < m; ++i) {
      const Index in = next(i, m);
      for (Index j = 0; j < n; ++j) {
        out(i, j, k) = w.spectral * (u.spectral(i, j, k) - u.spectral(i, j, kn)) +
                       w.column * (u.column(i, j, k) - u.column(i, next(j, n), k)) +
                       w.row * (u.row(i, j, k) - u.row(in, j, k));
      }
    }
  }
  return out;
}

double sstv_value(const HsiCube &x, const DiffWeights &w)
{
  const GradientField g = forward_diff(x, w);
  return g.spectral.array().abs().sum() + g.column.array().abs().sum() + g.row.array().abs().sum();
}

HsiCube build_fft_denominator(CubeDims dims, const DiffWeights &w)
{
  // All-zero weights are allowed here (the field is then identically 1).
  if (!std::isfinite(w.spectral) || !std::isfinite(w.column) || !std::isfinite(w.row)) {
    throw ConfigError("difference weights must be finite");
  }
  // |1 - exp(-2 pi i f / N)|^2 = 4 sin^2(pi f / N)
  auto symbol = [](Index f, Index size) {
    const double s = std::sin(std::numbers::pi * static_cast<double>(f) / static_cast<double>(size));
    return 4.0 * s * s;
  };
  HsiCube out(dims);
  for (Index k = 0; k < dims.bands; ++k) {
    const double sk = w.spectral * w.spectral * symbol(k, dims.bands);
    for (Index i = 0; i < dims.rows; ++i) {
      const double si = w.row * w.row * symbol(i, dims.rows);
      for (Index j = 0; j < dims.cols; ++j) {
        out(i, j, k) = 1.0 + sk + si + w.column * w.column * symbol(j, dims.cols);
      }
    }
  }
  return out;
}

struct PeriodicSolver::Impl {
  CubeDims dims;
  HsiCube denominator;
  Index half_cols = 0;
  double *real = nullptr;
  fftw_complex *spectrum = nullptr;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;

  ~Impl()
  {
    std::lock_guard lock(planner_mutex());
    if (forward) {
      fftw_destroy_plan(forward);
    }
    if (backward) {
      fftw_destroy_plan(backward);
    }
    fftw_free(real);
    fftw_free(spectrum);
  }
};

PeriodicSolver::PeriodicSolver(CubeDims dims, const DiffWeights &w)
  : PeriodicSolver(build_fft_denominator(dims, w))
{
}

PeriodicSolver::PeriodicSolver(HsiCube denominator)
  : impl_(std::make_unique<Impl>())
{
  if (denominator.empty() || !denominator.all_finite() || denominator.array().minCoeff() < 1.0) {
    throw UsageError("FFT denominator must be finite and >= 1 everywhere");
  }
  const CubeDims dims = denominator.dims();
  impl_->dims = dims;
  impl_->denominator = std::move(denominator);
  impl_->half_cols = dims.cols / 2 + 1;

  const auto real_count = static_cast<std::size_t>(dims.size());
  const auto complex_count = static_cast<std::size_t>(dims.bands * dims.rows * impl_->half_cols);

  std::lock_guard lock(planner_mutex());
  impl_->real = fftw_alloc_real(real_count);
  impl_->spectrum = fftw_alloc_complex(complex_count);
  if (!impl_->real || !impl_->spectrum) {
    throw NumericalError("FFT buffer allocation failed");
  }
  // Band-sequential storage is a row-major (bands, rows, cols) array.
  const int nb = static_cast<int>(dims.bands), nr = static_cast<int>(dims.rows), nc = static_cast<int>(dims.cols);
  impl_->forward = fftw_plan_dft_r2c_3d(nb, nr, nc, impl_->real, impl_->spectrum, FFTW_ESTIMATE);
  impl_->backward = fftw_plan_dft_c2r_3d(nb, nr, nc, impl_->spectrum, impl_->real, FFTW_ESTIMATE);
  if (!impl_->forward || !impl_->backward) {
    throw NumericalError("FFTW planning failed");
  }
}

PeriodicSolver::~PeriodicSolver() = default;
PeriodicSolver::PeriodicSolver(PeriodicSolver &&) noexcept = default;
PeriodicSolver &PeriodicSolver::operator=(PeriodicSolver &&) noexcept = default;

CubeDims PeriodicSolver::dims() const { return impl_->dims; }
const HsiCube &PeriodicSolver::denominator() const { return impl_->denominator; }

HsiCube PeriodicSolver::solve(const HsiCube &rhs) const
{
  const Impl &s = *impl_;
  if (rhs.dims() != s.dims) {
    throw UsageError("right-hand side dims do not match the solver");
  }
  std::copy(rhs.data().begin(), rhs.data().end(), s.real);
  fftw_execute(s.forward);

  const double scale = 1.0 / static_cast<double>(s.dims.size());
  for (Index k = 0; k < s.dims.bands; ++k) {
    for (Index i = 0; i < s.dims.rows; ++i) {
      fftw_complex *line = s.spectrum + (k * s.dims.rows + i) * s.half_cols;
      for (Index j = 0; j < s.half_cols; ++j) {
        const double f = scale / s.denominator(i, j, k);
        line[j][0] *= f;
        line[j][1] *= f;
      }
    }
  }
  fftw_execute(s.backward);

  HsiCube x(s.dims);
  std::copy(s.real, s.real + s.dims.size(), x.data().begin());
  return x;
}

HsiCube solve_x_subproblem(const HsiCube &rhs, const HsiCube &denominator)
{
  if (!rhs.same_shape(denominator)) {
    throw UsageError("denominator dims do not match the right-hand side");
  }
  return PeriodicSolver(denominator).solve(rhs);
}

} // namespace nonllrtv
