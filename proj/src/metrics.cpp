#include "nonllrtv/metrics.hpp"

#include "nonllrtv/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <numeric>
#include <string>

namespace nonllrtv {

namespace {

std::vector<double> gaussian_kernel_1d(Index size, double sigma)
{
  std::vector<double> k(static_cast<std::size_t>(size));
  const double c = static_cast<double>(size - 1) / 2.0;
  double total = 0.0;
  for (Index t = 0; t < size; ++t) {
    const double d = static_cast<double>(t) - c;
    k[t] = std::exp(-d * d / (2.0 * sigma * sigma));
    total += k[t];
  }
  for (double &v : k) {
    v /= total;
  }
  return k;
}

// Separable 'valid' filtering: output is (rows-w+1) x (cols-w+1).
std::vector<double> filter_valid(const std::vector<double> &img, Index rows, Index cols, const std::vector<double> &k)
{
  const auto w = static_cast<Index>(k.size());
  const Index out_rows = rows - w + 1, out_cols = cols - w + 1;
  std::vector<double> tmp(static_cast<std::size_t>(rows * out_cols));
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < out_cols; ++j) {
      double acc = 0.0;
      for (Index t = 0; t < w; ++t) {
        acc += k[t] * img[i * cols + j + t];
      }
      tmp[i * out_cols + j] = acc;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(out_rows * out_cols));
  for (Index i = 0; i < out_rows; ++i) {
    for (Index j = 0; j < out_cols; ++j) {
      double acc = 0.0;
      for (Index t = 0; t < w; ++t) {
        acc += k[t] * tmp[(i + t) * out_cols + j];
      }
      out[i * out_cols + j] = acc;
    }
  }
  return out;
}

void check_same_size(std::size_t a, std::size_t b)
{
  if (a != b) {
    throw UsageError("bands differ in size: " + std::to_string(a) + " vs " + std::to_string(b));
  }
}

} // namespace

double mean_squared_error(std::span<const double> reference, std::span<const double> test)
{
  check_same_size(reference.size(), test.size());
  if (reference.empty()) {
    throw UsageError("cannot compare empty bands");
  }
  double acc = 0.0;
  for (std::size_t t = 0; t < reference.size(); ++t) {
    const double d = reference[t] - test[t];
    acc += d * d;
  }
  return acc / static_cast<double>(reference.size());
}

double psnr(std::span<const double> reference, std::span<const double> test, double peak)
{
  if (!(peak > 0.0)) {
    throw UsageError("peak must be positive");
  }
  const double mse = mean_squared_error(reference, test);
  if (mse == 0.0) {
    return kPsnrSentinel;
  }
  return 10.0 * std::log10(peak * peak / mse);
}

double ssim(const BandView &reference, const BandView &test, double peak)
{
  if (reference.rows != test.rows || reference.cols != test.cols) {
    throw UsageError("ssim: band shapes differ");
  }
  check_same_size(reference.values.size(), test.values.size());
  if (reference.rows < kSsimWindow || reference.cols < kSsimWindow) {
    throw UsageError("ssim: bands must be at least 11x11");
  }
  const Index rows = reference.rows, cols = reference.cols;
  const auto kernel = gaussian_kernel_1d(kSsimWindow, 1.5);
  const double c1 = (0.01 * peak) * (0.01 * peak);
  const double c2 = (0.03 * peak) * (0.03 * peak);

  const std::vector<double> x(reference.values.begin(), reference.values.end());
  const std::vector<double> y(test.values.begin(), test.values.end());
  std::vector<double> xx(x.size()), yy(x.size()), xy(x.size());
  for (std::size_t t = 0; t < x.size(); ++t) {
    xx[t] = x[t] * x[t];
    yy[t] = y[t] * y[t];
    xy[t] = x[t] * y[t];
  }
  const auto mx = filter_valid(x, rows, cols, kernel);
  const auto my = filter_valid(y, rows, cols, kernel);
  const auto sxx = filter_valid(xx, rows, cols, kernel);
  const auto syy = filter_valid(yy, rows, cols, kernel);
  const auto sxy = filter_valid(xy, rows, cols, kernel);

  double total = 0.0;
  for (std::size_t t = 0; t < mx.size(); ++t) {
    const double vx = sxx[t] - mx[t] * mx[t];
    const double vy = syy[t] - my[t] * my[t];
    const double cov = sxy[t] - mx[t] * my[t];
    total += ((2.0 * mx[t] * my[t] + c1) * (2.0 * cov + c2)) /
             ((mx[t] * mx[t] + my[t] * my[t] + c1) * (vx + vy + c2));
  }
  return total / static_cast<double>(mx.size());
}

QualityReport evaluate_quality(const HsiCube &reference, const HsiCube &test, double peak)
{
  if (!reference.same_shape(test)) {
    throw UsageError("cubes differ in dims");
  }
  QualityReport r;
  for (Index k = 0; k < reference.bands(); ++k) {
    const double p = psnr(reference.band(k), test.band(k), peak);
    r.per_band_psnr.push_back(p);
    r.identical_band.push_back(p == kPsnrSentinel);
    r.per_band_ssim.push_back(ssim(BandView::of(reference, k), BandView::of(test, k), peak));
  }
  const auto count = static_cast<double>(reference.bands());
  // Identical bands carry the sentinel and would swamp the mean.
  double sum = 0.0;
  int finite = 0;
  for (std::size_t k = 0; k < r.per_band_psnr.size(); ++k) {
    if (!r.identical_band[k]) {
      sum += r.per_band_psnr[k];
      ++finite;
    }
  }
  r.mpsnr = finite > 0 ? sum / finite : kPsnrSentinel;
  r.mssim = std::accumulate(r.per_band_ssim.begin(), r.per_band_ssim.end(), 0.0) / count;
  return r;
}

std::vector<double> spectrum_at(const HsiCube &cube, Index i, Index j)
{
  if (i < 0 || j < 0 || i >= cube.rows() || j >= cube.cols()) {
    throw UsageError("pixel (" + std::to_string(i) + ", " + std::to_string(j) + ") is outside the " +
                     std::to_string(cube.rows()) + "x" + std::to_string(cube.cols()) + " image");
  }
  std::vector<double> out(static_cast<std::size_t>(cube.bands()));
  for (Index k = 0; k < cube.bands(); ++k) {
    out[k] = cube(i, j, k);
  }
  return out;
}

void write_quality_csv(std::ostream &out, const QualityReport &report)
{
  out << "band,psnr,ssim\n" << std::setprecision(17);
  for (std::size_t k = 0; k < report.per_band_psnr.size(); ++k) {
    out << k << ',' << report.per_band_psnr[k] << ',' << report.per_band_ssim[k] << '\n';
  }
  out << "mean," << report.mpsnr << ',' << report.mssim << '\n';
}

nlohmann::json quality_json(const QualityReport &report)
{
  return {
    {"mpsnr", report.mpsnr},
    {"mssim", report.mssim},
    {"per_band_psnr", report.per_band_psnr},
    {"per_band_ssim", report.per_band_ssim},
    {"identical_bands", std::count(report.identical_band.begin(), report.identical_band.end(), true)},
    {"runtime_seconds", report.runtime_seconds},
  };
}

void write_spectrum_csv(std::ostream &out, std::span<const double> spectrum)
{
  out << "band_index,value\n" << std::setprecision(17);
  for (std::size_t k = 0; k < spectrum.size(); ++k) {
    out << k << ',' << spectrum[k] << '\n';
  }
}

void write_band_pgm(std::ostream &out, const HsiCube &cube, Index band, double peak)
{
  if (band < 0 || band >= cube.bands()) {
    throw UsageError("band " + std::to_string(band) + " out of range");
  }
  out << "P5\n" << cube.cols() << ' ' << cube.rows() << "\n255\n";
  for (double v : cube.band(band)) {
    const double scaled = std::clamp(v / peak, 0.0, 1.0) * 255.0;
    out.put(static_cast<char>(static_cast<std::uint8_t>(std::lround(scaled))));
  }
}

} // namespace nonllrtv
