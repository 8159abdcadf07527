#include "nonllrtv/error.hpp"
#include "nonllrtv/simnoise.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <cstring>

using namespace nonllrtv;

namespace {

bool bit_equal(const HsiCube &a, const HsiCube &b)
{
  return a.same_shape(b) && std::memcmp(a.data().data(), b.data().data(), sizeof(double) * a.size()) == 0;
}

struct Stats {
  double impulse_fraction = 0.0;
  std::vector<double> band_std; // over voxels the impulse stage left alone
};

Stats measure(const HsiCube &clean, const NoiseRealization &r)
{
  Stats s;
  std::size_t hits = 0;
  for (auto v : r.impulse_mask) {
    hits += v;
  }
  s.impulse_fraction = static_cast<double>(hits) / static_cast<double>(r.impulse_mask.size());
  const auto per_band = static_cast<std::size_t>(clean.rows() * clean.cols());
  for (Index k = 0; k < clean.bands(); ++k) {
    double sum = 0.0, sq = 0.0;
    std::size_t n = 0;
    for (std::size_t t = 0; t < per_band; ++t) {
      const std::size_t idx = static_cast<std::size_t>(k) * per_band + t;
      if (r.impulse_mask[idx]) {
        continue;
      }
      const double e = r.noisy.data()[idx] - clean.data()[idx];
      sum += e;
      sq += e * e;
      ++n;
    }
    const double mean = sum / static_cast<double>(n);
    s.band_std.push_back(std::sqrt(sq / static_cast<double>(n) - mean * mean));
  }
  return s;
}

} // namespace

TEST_CASE("all-zero spec is the identity")
{
  const HsiCube clean = testsupport::random_cube({9, 8, 5}, 1, 0.0, 1.0);
  NoiseSpec spec;
  spec.seed = 42;
  CHECK(bit_equal(apply_noise(clean, spec), clean));
  spec.stripes = StripeSpec{{0, 4}, 3, 0.0};
  CHECK(bit_equal(apply_noise(clean, spec), clean));
}

TEST_CASE("determinism")
{
  const HsiCube clean = testsupport::random_cube({16, 12, 6}, 2, 0.0, 1.0);
  for (int c = 1; c <= 3; ++c) {
    const NoiseSpec spec = case_spec(c, 7);
    CHECK(bit_equal(apply_noise(clean, spec), apply_noise(clean, spec)));
    CHECK_FALSE(bit_equal(apply_noise(clean, spec), apply_noise(clean, case_spec(c, 8))));
  }
}

TEST_CASE("case_spec")
{
  const NoiseSpec c1 = case_spec(1, 3);
  CHECK(c1.case_id == 1);
  CHECK(c1.seed == 3);
  CHECK(c1.gaussian.lo == 0.05);
  CHECK(c1.gaussian.hi == 0.05);
  CHECK(c1.gaussian_level == GaussianLevel::variance);
  CHECK(c1.impulse.lo == 0.1);
  CHECK(c1.impulse.hi == 0.1);
  CHECK_FALSE(c1.deadlines);
  CHECK_FALSE(c1.stripes);

  const NoiseSpec c2 = case_spec(2, 3);
  CHECK(c2.gaussian.lo == 0.0);
  CHECK(c2.gaussian.hi == 0.2);
  CHECK(c2.impulse.hi == 0.2);

  const NoiseSpec c3 = case_spec(3, 3);
  CHECK(c3.impulse.hi == 0.0);
  CHECK(c3.gaussian.hi == 0.2);
  CHECK_FALSE(c3.deadlines);

  const NoiseSpec c4 = case_spec(4, 3);
  REQUIRE(c4.deadlines);
  CHECK(c4.deadlines->bands.first == 130);
  CHECK(c4.deadlines->bands.last == 159);
  CHECK_FALSE(c4.stripes);

  const NoiseSpec c5 = case_spec(5, 3);
  REQUIRE(c5.stripes);
  CHECK(c5.stripes->bands.first == 110);
  CHECK(c5.stripes->bands.last == 139);
  CHECK_FALSE(c5.deadlines);

  const NoiseSpec c6 = case_spec(6, 3);
  CHECK(c6.deadlines);
  CHECK(c6.stripes);

  CHECK_THROWS_AS(case_spec(0, 1), UsageError);
  CHECK_THROWS_AS(case_spec(7, 1), UsageError);
}

TEST_CASE("per-band draws stay inside the case ranges")
{
  const HsiCube clean(8, 8, 40, 0.5);
  const NoiseRealization r = simulate_noise(clean, case_spec(2, 11));
  double lo = 1.0, hi = 0.0;
  for (Index k = 0; k < 40; ++k) {
    CHECK(r.band_sigma[k] >= 0.0);
    CHECK(r.band_sigma[k] <= std::sqrt(0.2));
    CHECK(r.band_impulse[k] >= 0.0);
    CHECK(r.band_impulse[k] <= 0.2);
    lo = std::min(lo, r.band_impulse[k]);
    hi = std::max(hi, r.band_impulse[k]);
  }
  CHECK(hi - lo > 0.05); // actually drawn per band

  const NoiseRealization r3 = simulate_noise(clean, case_spec(3, 11));
  for (auto m : r3.impulse_mask) {
    CHECK(m == 0);
  }
}

TEST_CASE("output range and impulse values")
{
  const HsiCube clean = testsupport::random_cube({20, 20, 6}, 4, 0.0, 1.0);
  NoiseSpec spec;
  spec.impulse = {0.3, 0.3};
  spec.seed = 5;
  const NoiseRealization r = simulate_noise(clean, spec);
  for (std::size_t t = 0; t < r.impulse_mask.size(); ++t) {
    const double v = r.noisy.data()[t];
    if (r.impulse_mask[t]) {
      CHECK((v == 0.0 || v == 1.0));
    } else {
      CHECK(v == clean.data()[t]);
    }
  }

  const HsiCube heavy = apply_noise(clean, case_spec(1, 6));
  CHECK(heavy.array().minCoeff() >= 0.0);
  CHECK(heavy.array().maxCoeff() <= 1.0);
}

TEST_CASE("sigma interpretation switch")
{
  NoiseSpec spec;
  spec.gaussian = {0.04, 0.04};
  const HsiCube clean(4, 4, 2, 0.5);
  CHECK(simulate_noise(clean, spec).band_sigma[0] == doctest::Approx(0.2));
  spec.gaussian_level = GaussianLevel::sigma;
  CHECK(simulate_noise(clean, spec).band_sigma[0] == 0.04);
}

TEST_CASE("case 1 statistics")
{
  const HsiCube clean(64, 64, 32, 0.5);
  const NoiseRealization r = simulate_noise(clean, case_spec(1, 2024));
  const Stats s = measure(clean, r);
  CHECK(std::abs(s.impulse_fraction - 0.10) <= 0.01);
  for (double sd : s.band_std) {
    CHECK(std::abs(sd - std::sqrt(0.05)) <= 0.1 * std::sqrt(0.05));
  }
}

TEST_CASE("deadlines")
{
  const HsiCube clean(12, 40, 6, 0.5);
  NoiseSpec spec;
  spec.deadlines = DeadlineSpec{{2, 4}, 4, 1, 3};
  spec.seed = 9;
  const HsiCube out = apply_noise(clean, spec);
  for (Index k = 0; k < 6; ++k) {
    int dead = 0;
    for (Index j = 0; j < 40; ++j) {
      bool all_zero = true, untouched = true;
      for (Index i = 0; i < 12; ++i) {
        all_zero = all_zero && out(i, j, k) == 0.0;
        untouched = untouched && out(i, j, k) == 0.5;
      }
      CHECK((all_zero || untouched));
      dead += all_zero ? 1 : 0;
    }
    if (k >= 2 && k <= 4) {
      CHECK(dead >= 1);
      CHECK(dead <= 12);
    } else {
      CHECK(dead == 0);
    }
  }
}

TEST_CASE("stripes")
{
  const HsiCube clean(30, 10, 5, 0.5);
  NoiseSpec spec;
  spec.stripes = StripeSpec{{1, 2}, 6, 0.25};
  spec.seed = 10;
  const HsiCube out = apply_noise(clean, spec);
  for (Index k = 0; k < 5; ++k) {
    int shifted = 0;
    for (Index i = 0; i < 30; ++i) {
      const double first = out(i, 0, k);
      for (Index j = 1; j < 10; ++j) {
        CHECK(out(i, j, k) == first);
      }
      CHECK(std::abs(first - 0.5) <= 0.5);
      shifted += first != 0.5 ? 1 : 0;
    }
    if (k == 1 || k == 2) {
      CHECK(shifted >= 1);
      CHECK(shifted <= 6);
    } else {
      CHECK(shifted == 0);
    }
  }
}

TEST_CASE("validation")
{
  const HsiCube clean(4, 4, 10, 0.5);
  NoiseSpec spec;
  spec.impulse = {0.0, 1.5};
  CHECK_THROWS_AS(apply_noise(clean, spec), ConfigError);
  spec = NoiseSpec{};
  spec.gaussian = {0.2, 0.1};
  CHECK_THROWS_AS(apply_noise(clean, spec), ConfigError);
  spec = NoiseSpec{};
  spec.deadlines = DeadlineSpec{{5, 10}, 1, 1, 1};
  CHECK_THROWS_AS(apply_noise(clean, spec), ConfigError);
  spec = NoiseSpec{};
  spec.stripes = StripeSpec{{3, 2}, 1, 0.1};
  CHECK_THROWS_AS(apply_noise(clean, spec), ConfigError);
  // Case 4 needs at least 160 bands.
  CHECK_THROWS_AS(apply_noise(clean, case_spec(4, 1)), ConfigError);
}

TEST_CASE("json round trip")
{
  NoiseSpec spec = case_spec(6, 77);
  spec.gaussian_level = GaussianLevel::sigma;
  const nlohmann::json j = spec;
  const NoiseSpec back = j.get<NoiseSpec>();
  CHECK(back.case_id == 6);
  CHECK(back.seed == 77);
  CHECK(back.gaussian_level == GaussianLevel::sigma);
  CHECK(back.gaussian.hi == 0.2);
  REQUIRE(back.deadlines);
  CHECK(back.deadlines->bands.first == 130);
  CHECK(back.deadlines->count == spec.deadlines->count);
  REQUIRE(back.stripes);
  CHECK(back.stripes->max_offset == spec.stripes->max_offset);
  CHECK(nlohmann::json(back) == j);

  CHECK_THROWS_AS(nlohmann::json::parse(R"({"gaussian": "x"})").get<NoiseSpec>(), ConfigError);
}

TEST_CASE("mixture cube")
{
  const HsiCube a = make_mixture_cube(24, 20, 16, 3, 1);
  CHECK(a.array().minCoeff() >= 0.0);
  CHECK(a.array().maxCoeff() <= 1.0);
  CHECK(bit_equal(a, make_mixture_cube(24, 20, 16, 3, 1)));
  const Eigen::VectorXd s = Eigen::JacobiSVD<Eigen::MatrixXd>(casorati(a)).singularValues();
  CHECK(s(2) > 1e-6 * s(0));
  CHECK(s(3) <= 1e-10 * s(0));
  CHECK_THROWS_AS(make_mixture_cube(4, 4, 4, 0, 1), ConfigError);
}
