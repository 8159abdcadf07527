#include "nonllrtv/simnoise.hpp"

#include "nonllrtv/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

namespace nonllrtv {

namespace {

// std::mt19937_64 output is fixed by the standard but the library
// distributions are not, so the conversions below are done by hand to keep
// realizations identical across toolchains.
class Stream {
public:
  Stream(std::uint64_t seed, std::uint64_t stage, std::uint64_t band)
    : engine_(mix(seed ^ mix(stage * 0x9e3779b97f4a7c15ULL + band + 1)))
  {
  }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  Index index(Index n) { return static_cast<Index>(engine_() % static_cast<std::uint64_t>(n)); }

  /// Standard normal via Box-Muller.
  double normal()
  {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

private:
  static std::uint64_t mix(std::uint64_t z)
  {
    // splitmix64 finalizer
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

enum Stage : std::uint64_t { kLevels = 1, kGaussian, kImpulse, kDeadline, kStripe, kScene };

void check_range(const ValueRange &r, const char *name, double max)
{
  if (!std::isfinite(r.lo) || !std::isfinite(r.hi) || r.lo < 0.0 || r.hi < r.lo || r.hi > max) {
    throw ConfigError(std::string(name) + " range must satisfy 0 <= lo <= hi <= " + std::to_string(max));
  }
}

void check_bands(const BandInterval &b, Index bands, const char *name)
{
  if (b.first < 0 || b.last < b.first || b.last >= bands) {
    throw ConfigError(std::string(name) + " bands [" + std::to_string(b.first) + ", " + std::to_string(b.last) +
                      "] fall outside a cube with " + std::to_string(bands) + " bands");
  }
}

double draw(const ValueRange &r, Stream &s)
{
  return r.lo == r.hi ? r.lo : s.uniform(r.lo, r.hi);
}

} // namespace

void NoiseSpec::validate() const
{
  if (case_id < 0 || case_id > 6) {
    throw ConfigError("case_id must be 0 (custom) or 1..6");
  }
  check_range(gaussian, "gaussian", std::numeric_limits<double>::max());
  check_range(impulse, "impulse", 1.0);
  if (deadlines) {
    if (deadlines->count < 0 || deadlines->min_width < 1 || deadlines->max_width < deadlines->min_width) {
      throw ConfigError("deadline count must be >= 0 and 1 <= min_width <= max_width");
    }
    check_bands(deadlines->bands, std::numeric_limits<Index>::max(), "deadline");
  }
  if (stripes) {
    if (stripes->count < 0 || !std::isfinite(stripes->max_offset) || stripes->max_offset < 0.0) {
      throw ConfigError("stripe count and max_offset must be non-negative");
    }
    check_bands(stripes->bands, std::numeric_limits<Index>::max(), "stripe");
  }
}

void NoiseSpec::validate(Index bands) const
{
  validate();
  if (deadlines) {
    check_bands(deadlines->bands, bands, "deadline");
  }
  if (stripes) {
    check_bands(stripes->bands, bands, "stripe");
  }
}

NoiseSpec case_spec(int case_id, std::uint64_t seed)
{
  NoiseSpec s;
  s.case_id = case_id;
  s.seed = seed;
  switch (case_id) {
  case 1:
    s.gaussian = {0.05, 0.05};
    s.impulse = {0.1, 0.1};
    break;
  case 2:
  case 4:
  case 5:
  case 6:
    s.gaussian = {0.0, 0.2};
    s.impulse = {0.0, 0.2};
    break;
  case 3:
    s.gaussian = {0.0, 0.2};
    break;
  default:
    throw UsageError("unknown noise case " + std::to_string(case_id) + " (expected 1..6)");
  }
  // Bands 131-160 and 111-140 counted from one.
  if (case_id == 4 || case_id == 6) {
    s.deadlines = DeadlineSpec{{130, 159}};
  }
  if (case_id == 5 || case_id == 6) {
    s.stripes = StripeSpec{{110, 139}};
  }
  return s;
}

NoiseRealization simulate_noise(const HsiCube &clean, const NoiseSpec &spec)
{
  spec.validate(clean.bands());
  const Index m = clean.rows(), n = clean.cols(), p = clean.bands();
  NoiseRealization out;
  out.noisy = clean;
  out.impulse_mask.assign(static_cast<std::size_t>(clean.size()), 0);
  out.band_sigma.resize(static_cast<std::size_t>(p));
  out.band_impulse.resize(static_cast<std::size_t>(p));

  for (Index k = 0; k < p; ++k) {
    Stream levels(spec.seed, kLevels, static_cast<std::uint64_t>(k));
    const double g = draw(spec.gaussian, levels);
    out.band_sigma[k] = spec.gaussian_level == GaussianLevel::variance ? std::sqrt(g) : g;
    out.band_impulse[k] = draw(spec.impulse, levels);
  }

  for (Index k = 0; k < p; ++k) {
    auto band = out.noisy.band(k);
    const double sigma = out.band_sigma[k];
    if (sigma > 0.0) {
      Stream s(spec.seed, kGaussian, static_cast<std::uint64_t>(k));
      for (double &v : band) {
        v += sigma * s.normal();
      }
    }
    const double fraction = out.band_impulse[k];
    if (fraction > 0.0) {
      Stream s(spec.seed, kImpulse, static_cast<std::uint64_t>(k));
      const auto base = static_cast<std::size_t>(k * m * n);
      for (std::size_t idx = 0; idx < band.size(); ++idx) {
        const bool hit = s.uniform() < fraction;
        const bool salt = s.uniform() < 0.5;
        if (hit) {
          band[idx] = salt ? 1.0 : 0.0;
          out.impulse_mask[base + idx] = 1;
        }
      }
    }
  }

  if (spec.deadlines) {
    const DeadlineSpec &d = *spec.deadlines;
    for (Index k = d.bands.first; k <= d.bands.last; ++k) {
      Stream s(spec.seed, kDeadline, static_cast<std::uint64_t>(k));
      for (int c = 0; c < d.count; ++c) {
        const Index col = s.index(n);
        const Index width = d.min_width + s.index(d.max_width - d.min_width + 1);
        for (Index j = col; j < std::min(n, col + width); ++j) {
          for (Index i = 0; i < m; ++i) {
            out.noisy(i, j, k) = 0.0;
          }
        }
      }
    }
  }

  if (spec.stripes) {
    const StripeSpec &st = *spec.stripes;
    for (Index k = st.bands.first; k <= st.bands.last; ++k) {
      Stream s(spec.seed, kStripe, static_cast<std::uint64_t>(k));
      for (int c = 0; c < st.count; ++c) {
        const Index row = s.index(m);
        const double offset = s.uniform(-st.max_offset, st.max_offset);
        for (Index j = 0; j < n; ++j) {
          out.noisy(row, j, k) += offset;
        }
      }
    }
  }

  out.noisy.array() = out.noisy.array().min(1.0).max(0.0);
  return out;
}

HsiCube apply_noise(const HsiCube &clean, const NoiseSpec &spec)
{
  return simulate_noise(clean, spec).noisy;
}

void to_json(nlohmann::json &j, const NoiseSpec &spec)
{
  j = {
    {"case", spec.case_id},
    {"gaussian", {spec.gaussian.lo, spec.gaussian.hi}},
    {"gaussian_level", spec.gaussian_level == GaussianLevel::variance ? "variance" : "sigma"},
    {"impulse", {spec.impulse.lo, spec.impulse.hi}},
    {"seed", spec.seed},
  };
  if (spec.deadlines) {
    const auto &d = *spec.deadlines;
    j["deadlines"] = {{"bands", {d.bands.first, d.bands.last}},
                      {"count", d.count},
                      {"min_width", d.min_width},
                      {"max_width", d.max_width}};
  }
  if (spec.stripes) {
    const auto &s = *spec.stripes;
    j["stripes"] = {{"bands", {s.bands.first, s.bands.last}}, {"count", s.count}, {"max_offset", s.max_offset}};
  }
}

void from_json(const nlohmann::json &j, NoiseSpec &spec)
{
  auto range = [&](const char *key) {
    ValueRange r;
    if (!j.contains(key)) {
      return r;
    }
    const auto &v = j.at(key);
    if (v.is_number()) {
      r.lo = r.hi = v.get<double>();
    } else {
      r.lo = v.at(0).get<double>();
      r.hi = v.at(1).get<double>();
    }
    return r;
  };
  auto interval = [](const nlohmann::json &v) { return BandInterval{v.at(0).get<Index>(), v.at(1).get<Index>()}; };

  try {
    spec = NoiseSpec{};
    spec.case_id = j.value("case", 0);
    spec.gaussian = range("gaussian");
    const std::string level = j.value("gaussian_level", "variance");
    if (level != "variance" && level != "sigma") {
      throw ConfigError("gaussian_level must be \"variance\" or \"sigma\"");
    }
    spec.gaussian_level = level == "variance" ? GaussianLevel::variance : GaussianLevel::sigma;
    spec.impulse = range("impulse");
    spec.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("deadlines")) {
      const auto &d = j.at("deadlines");
      DeadlineSpec dl{interval(d.at("bands"))};
      dl.count = d.value("count", dl.count);
      dl.min_width = d.value("min_width", dl.min_width);
      dl.max_width = d.value("max_width", dl.max_width);
      spec.deadlines = dl;
    }
    if (j.contains("stripes")) {
      const auto &s = j.at("stripes");
      StripeSpec st{interval(s.at("bands"))};
      st.count = s.value("count", st.count);
      st.max_offset = s.value("max_offset", st.max_offset);
      spec.stripes = st;
    }
  } catch (const nlohmann::json::exception &e) {
    throw ConfigError(std::string("malformed noise spec: ") + e.what());
  }
  spec.validate();
}

HsiCube make_mixture_cube(Index rows, Index cols, Index bands, int rank, std::uint64_t seed)
{
  if (rank < 1) {
    throw ConfigError("mixture rank must be at least 1");
  }
  HsiCube cube(rows, cols, bands);
  Stream s(seed, kScene, 0);

  // Smooth endmember spectra in [0.1, 0.9].
  Eigen::MatrixXd spectra(rank, bands);
  for (int r = 0; r < rank; ++r) {
    const double phase = s.uniform(0.0, 2.0 * std::numbers::pi);
    const double freq = s.uniform(0.5, 2.0);
    const double level = s.uniform(0.3, 0.7);
    for (Index k = 0; k < bands; ++k) {
      const double t = static_cast<double>(k) / static_cast<double>(std::max<Index>(bands - 1, 1));
      spectra(r, k) = std::clamp(level + 0.2 * std::sin(2.0 * std::numbers::pi * freq * t + phase), 0.1, 0.9);
    }
  }

  // Abundances constant on a coarse random partition into rectangular blocks.
  const Index block = std::max<Index>(4, std::min(rows, cols) / 4);
  const Index block_rows = (rows + block - 1) / block;
  const Index block_cols = (cols + block - 1) / block;
  Eigen::MatrixXd abundance(block_rows * block_cols, rank);
  for (Index b = 0; b < abundance.rows(); ++b) {
    double total = 0.0;
    for (int r = 0; r < rank; ++r) {
      abundance(b, r) = s.uniform(0.05, 1.0);
      total += abundance(b, r);
    }
    abundance.row(b) /= total;
  }

  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      const Index b = (i / block) * block_cols + j / block;
      for (Index k = 0; k < bands; ++k) {
        cube(i, j, k) = abundance.row(b).dot(spectra.col(k));
      }
    }
  }
  return cube;
}

} // namespace nonllrtv
