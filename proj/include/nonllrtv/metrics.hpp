#pragma once

#include "nonllrtv/cube.hpp"

#include <json.hpp>

#include <ostream>
#include <span>
#include <vector>

namespace nonllrtv {

/// Reported instead of +inf when two bands are identical.
inline constexpr double kPsnrSentinel = 999.0;

/// Read-only view of one rows x cols band, row-major.
struct BandView {
  std::span<const double> values;
  Index rows = 0;
  Index cols = 0;

  static BandView of(const HsiCube &cube, Index band) { return {cube.band(band), cube.rows(), cube.cols()}; }
};

double mean_squared_error(std::span<const double> reference, std::span<const double> test);

/// 10 log10(peak^2 / MSE); kPsnrSentinel when MSE is zero.
double psnr(std::span<const double> reference, std::span<const double> test, double peak = 1.0);

/// Mean SSIM over all 11x11 windows lying inside the band, Gaussian-weighted
/// (sigma 1.5), with C1 = (0.01 peak)^2 and C2 = (0.03 peak)^2.
double ssim(const BandView &reference, const BandView &test, double peak = 1.0);

inline constexpr Index kSsimWindow = 11;

struct QualityReport {
  std::vector<double> per_band_psnr;
  std::vector<double> per_band_ssim;
  std::vector<bool> identical_band; ///< psnr holds the sentinel
  double mpsnr = 0.0; ///< over non-identical bands; kPsnrSentinel if every band is identical
  double mssim = 0.0;
  double runtime_seconds = 0.0;
};

QualityReport evaluate_quality(const HsiCube &reference, const HsiCube &test, double peak = 1.0);

/// Spectral profile of pixel (i, j).
std::vector<double> spectrum_at(const HsiCube &cube, Index i, Index j);

/// band,psnr,ssim rows then a final "mean" row. Runtime is not written so the
/// file depends only on the two cubes.
void write_quality_csv(std::ostream &out, const QualityReport &report);
nlohmann::json quality_json(const QualityReport &report);

/// band_index,value rows.
void write_spectrum_csv(std::ostream &out, std::span<const double> spectrum);

/// Binary 8-bit PGM of one band, values clipped to [0, peak].
void write_band_pgm(std::ostream &out, const HsiCube &cube, Index band, double peak = 1.0);

} // namespace nonllrtv
