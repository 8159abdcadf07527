#pragma once

#include "nonllrtv/cube.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <vector>

namespace nonllrtv {

/// Closed interval [lo, hi]. lo == hi is a fixed value; otherwise a value is
/// drawn uniformly per band.
struct ValueRange {
  double lo = 0.0;
  double hi = 0.0;
};

/// Zero-based inclusive band interval.
struct BandInterval {
  Index first = 0;
  Index last = 0;
};

/// How the Gaussian level numbers are read.
enum class GaussianLevel {
  variance, ///< numbers are sigma^2
  sigma,    ///< numbers are sigma
};

/// Dead columns: per affected band, `count` columns of random width in
/// [min_width, max_width] are set to zero.
struct DeadlineSpec {
  BandInterval bands;
  int count = 10;
  int min_width = 1;
  int max_width = 3;
};

/// Stripes: per affected band, `count` random rows get a constant offset
/// drawn uniformly from [-max_offset, max_offset].
struct StripeSpec {
  BandInterval bands;
  int count = 20;
  double max_offset = 0.25;
};

struct NoiseSpec {
  int case_id = 0; ///< 1..6, or 0 for a custom mix
  ValueRange gaussian;
  GaussianLevel gaussian_level = GaussianLevel::variance;
  ValueRange impulse; ///< salt-and-pepper fraction per band
  std::optional<DeadlineSpec> deadlines;
  std::optional<StripeSpec> stripes;
  std::uint64_t seed = 0;

  /// Range checks independent of the cube.
  void validate() const;
  /// Also checks band intervals against a cube with `bands` bands.
  void validate(Index bands) const;
};

/// The six degradation scenarios of the benchmark protocol.
NoiseSpec case_spec(int case_id, std::uint64_t seed);

/// A degraded cube plus what was drawn to make it.
struct NoiseRealization {
  HsiCube noisy;
  std::vector<std::uint8_t> impulse_mask; ///< 1 where the impulse stage hit, cube-indexed
  std::vector<double> band_sigma;         ///< Gaussian standard deviation per band
  std::vector<double> band_impulse;       ///< impulse fraction per band
};

/// Gaussian, then impulse, then deadlines, then stripes; one final clip to [0, 1].
NoiseRealization simulate_noise(const HsiCube &clean, const NoiseSpec &spec);

HsiCube apply_noise(const HsiCube &clean, const NoiseSpec &spec);

void to_json(nlohmann::json &j, const NoiseSpec &spec);
void from_json(const nlohmann::json &j, NoiseSpec &spec);

/// Synthetic test scene: `rank` smooth endmember spectra mixed by piecewise
/// constant abundance maps (sum to one per pixel), values within [0, 1].
HsiCube make_mixture_cube(Index rows, Index cols, Index bands, int rank, std::uint64_t seed);

} // namespace nonllrtv
