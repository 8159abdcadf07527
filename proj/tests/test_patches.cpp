#include "nonllrtv/error.hpp"
#include "nonllrtv/patches.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <random>

using namespace nonllrtv;
using testsupport::random_cube;

namespace {

std::vector<Index> offsets(const std::vector<Anchor> &anchors, bool rows)
{
  std::vector<Index> out;
  for (const Anchor &a : anchors) {
    const Index v = rows ? a.row : a.col;
    if (std::find(out.begin(), out.end(), v) == out.end()) {
      out.push_back(v);
    }
  }
  return out;
}

// Coverage counted window by window.
std::vector<int> brute_coverage(const PatchGrid &g)
{
  std::vector<int> cov(static_cast<std::size_t>(g.image_rows * g.image_cols), 0);
  for (const Anchor &a : g.anchors) {
    for (Index i = a.row; i < a.row + g.patch_rows; ++i) {
      for (Index j = a.col; j < a.col + g.patch_cols; ++j) {
        ++cov[static_cast<std::size_t>(i * g.image_cols + j)];
      }
    }
  }
  return cov;
}

} // namespace

TEST_CASE("grid examples")
{
  SUBCASE("single patch")
  {
    const PatchGrid g = build_patch_grid(4, 4, 4, 4, 4);
    REQUIRE(g.anchors.size() == 1);
    CHECK(g.anchors[0] == Anchor{0, 0});
    for (int c : g.coverage) {
      CHECK(c == 1);
    }
  }
  SUBCASE("6x6, patch 4, stride 2")
  {
    const PatchGrid g = build_patch_grid(6, 6, 4, 4, 2);
    CHECK(g.row_offsets == std::vector<Index>{0, 2});
    CHECK(g.col_offsets == std::vector<Index>{0, 2});
    CHECK(g.anchors.size() == 4);
    CHECK(g.coverage_at(2, 2) == 4);
    CHECK(g.coverage_at(3, 3) == 4);
    CHECK(g.coverage_at(0, 0) == 1);
    CHECK(g.coverage_at(0, 2) == 2);
  }
  SUBCASE("border clamping")
  {
    const PatchGrid g = build_patch_grid(5, 5, 4, 4, 4);
    CHECK(g.row_offsets == std::vector<Index>{0, 1});
    CHECK(g.col_offsets == std::vector<Index>{0, 1});
    CHECK(g.anchors == std::vector<Anchor>{{0, 0}, {0, 1}, {1, 0}, {1, 1}});
  }
  SUBCASE("anchors are row-major")
  {
    const PatchGrid g = build_patch_grid(7, 9, 3, 4, 2, 3);
    CHECK(offsets(g.anchors, true) == g.row_offsets);
    CHECK(offsets(g.anchors, false) == g.col_offsets);
    CHECK(std::is_sorted(g.anchors.begin(), g.anchors.end()));
    CHECK(g.contains({g.row_offsets.back(), g.col_offsets.back()}));
    CHECK_FALSE(g.contains({1, 0}));
  }
}

TEST_CASE("grid properties over many configurations")
{
  for (Index m = 1; m <= 9; ++m) {
    for (Index pr = 1; pr <= m; ++pr) {
      const Index n = 10 - m + 1;
      const Index pc = std::min(n, pr + 1);
      for (Index s = 1; s <= std::min(pr, pc); ++s) {
        const PatchGrid g = build_patch_grid(m, n, pr, pc, s);
        CAPTURE(m);
        CAPTURE(pr);
        CAPTURE(s);
        // Every anchor keeps its window inside the image.
        for (const Anchor &a : g.anchors) {
          CHECK(a.row + g.patch_rows <= m);
          CHECK(a.col + g.patch_cols <= n);
        }
        CHECK(g.row_offsets.back() == m - pr);
        CHECK(g.col_offsets.back() == n - pc);
        CHECK(g.coverage == brute_coverage(g));
        // Full tiling.
        CHECK(*std::min_element(g.coverage.begin(), g.coverage.end()) >= 1);
      }
    }
  }
}

TEST_CASE("grid errors")
{
  CHECK_THROWS_AS(build_patch_grid(4, 4, 5, 2, 1), ConfigError);
  CHECK_THROWS_AS(build_patch_grid(4, 4, 2, 5, 1), ConfigError);
  CHECK_THROWS_AS(build_patch_grid(4, 4, 0, 2, 1), ConfigError);
  CHECK_THROWS_AS(build_patch_grid(4, 4, 2, 2, 0), ConfigError);
  CHECK_THROWS_AS(build_patch_grid(0, 4, 1, 1, 1), ConfigError);
  CHECK_THROWS_AS(build_patch_grid(8, 8, 3, 3, 4), ConfigError);
}

TEST_CASE("extract_patch")
{
  const PatchGrid g = build_patch_grid(6, 7, 3, 4, 2);

  SUBCASE("constant cube")
  {
    const HsiCube c(6, 7, 3, 0.7);
    const PatchMatrix p = extract_patch(c, g, g.anchors[1]);
    CHECK(p.values.rows() == 12);
    CHECK(p.values.cols() == 3);
    CHECK((p.values.array() == 0.7).all());
  }
  SUBCASE("matches direct indexing")
  {
    const HsiCube c = random_cube({6, 7, 3}, 5);
    for (const Anchor &a : g.anchors) {
      const PatchMatrix p = extract_patch(c, g, a);
      CHECK(p.anchor == a);
      for (Index di = 0; di < 3; ++di) {
        for (Index dj = 0; dj < 4; ++dj) {
          for (Index k = 0; k < 3; ++k) {
            CHECK(p.values(di * 4 + dj, k) == c(a.row + di, a.col + dj, k));
          }
        }
      }
    }
  }
  SUBCASE("P P^T P = P")
  {
    const HsiCube c = random_cube({6, 7, 3}, 6);
    const PatchMatrix p = extract_patch(c, g, g.anchors[2]);
    HsiCube z(6, 7, 3);
    embed_accumulate(z, g, p);
    CHECK(extract_patch(z, g, g.anchors[2]).values == p.values);
  }
  SUBCASE("bad anchors")
  {
    const HsiCube c(6, 7, 3);
    CHECK_THROWS_AS(extract_patch(c, g, {1, 0}), UsageError);
    CHECK_THROWS_AS(extract_patch(HsiCube(5, 7, 3), g, g.anchors[0]), UsageError);
  }
}

TEST_CASE("embed_accumulate")
{
  const PatchGrid g = build_patch_grid(6, 6, 4, 4, 2);
  const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(16, 2);

  SUBCASE("single window")
  {
    HsiCube z(6, 6, 2);
    embed_accumulate(z, g, g.anchors[0], ones);
    for (Index k = 0; k < 2; ++k) {
      for (Index i = 0; i < 6; ++i) {
        for (Index j = 0; j < 6; ++j) {
          CHECK(z(i, j, k) == ((i < 4 && j < 4) ? 1.0 : 0.0));
        }
      }
    }
  }
  SUBCASE("two overlapping windows add")
  {
    HsiCube z(6, 6, 2);
    embed_accumulate(z, g, g.anchors[0], ones);
    embed_accumulate(z, g, g.anchors[3], ones);
    CHECK(z(2, 2, 1) == 2.0);
    CHECK(z(3, 3, 0) == 2.0);
    CHECK(z(0, 0, 0) == 1.0);
    CHECK(z(5, 5, 0) == 1.0);
    CHECK(z(0, 5, 0) == 0.0);
  }
  SUBCASE("coverage equals embedding ones everywhere")
  {
    HsiCube z(6, 6, 2);
    for (const Anchor &a : g.anchors) {
      embed_accumulate(z, g, a, ones);
    }
    const HsiCube cov = coverage_cube(g, 2);
    CHECK((z.array() == cov.array()).all());
    for (Index i = 0; i < 6; ++i) {
      for (Index j = 0; j < 6; ++j) {
        CHECK(cov(i, j, 1) == g.coverage_at(i, j));
      }
    }
  }
  SUBCASE("shape mismatch")
  {
    HsiCube z(6, 6, 2);
    CHECK_THROWS_AS(embed_accumulate(z, g, g.anchors[0], Eigen::MatrixXd::Ones(15, 2)), UsageError);
    CHECK_THROWS_AS(embed_accumulate(z, g, g.anchors[0], Eigen::MatrixXd::Ones(16, 3)), UsageError);
  }
}

TEST_CASE("extraction and embedding are adjoint")
{
  const PatchGrid g = build_patch_grid(9, 8, 4, 3, 3, 2);
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const HsiCube x = random_cube({9, 8, 4}, 100 + trial);
    const Anchor a = g.anchors[rng() % g.anchors.size()];
    const Eigen::MatrixXd y = testsupport::random_matrix(g.patch_pixels(), 4, 200 + trial);
    const double lhs = (extract_patch(x, g, a).values.array() * y.array()).sum();
    HsiCube z(9, 8, 4);
    embed_accumulate(z, g, a, y);
    const double rhs = testsupport::dot(x, z);
    CHECK(testsupport::rel_diff(lhs, rhs) <= 1e-12);
  }
}
