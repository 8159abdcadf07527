#include "nonllrtv/patches.hpp"

#include "nonllrtv/error.hpp"

#include <algorithm>
#include <string>

namespace nonllrtv {

namespace {

std::vector<Index> axis_offsets(Index extent, Index patch, Index stride)
{
  std::vector<Index> offsets;
  const Index last = extent - patch;
  for (Index o = 0; o <= last; o += stride) {
    offsets.push_back(o);
  }
  if (offsets.back() != last) {
    offsets.push_back(last);
  }
  return offsets;
}

void check_anchor(const HsiCube &cube, const PatchGrid &grid, Anchor anchor)
{
  if (cube.rows() != grid.image_rows || cube.cols() != grid.image_cols) {
    throw UsageError("patch grid was built for a different image size");
  }
  if (!grid.contains(anchor)) {
    throw UsageError("anchor (" + std::to_string(anchor.row) + ", " + std::to_string(anchor.col) +
                     ") is not part of the patch grid");
  }
}

} // namespace

bool PatchGrid::contains(Anchor a) const
{
  return std::binary_search(row_offsets.begin(), row_offsets.end(), a.row) &&
         std::binary_search(col_offsets.begin(), col_offsets.end(), a.col);
}

PatchGrid build_patch_grid(Index rows, Index cols, Index patch_rows, Index patch_cols, Index stride_rows,
                           Index stride_cols)
{
  if (rows <= 0 || cols <= 0) {
    throw ConfigError("image size must be positive");
  }
  if (patch_rows <= 0 || patch_cols <= 0 || patch_rows > rows || patch_cols > cols) {
    throw ConfigError("patch " + std::to_string(patch_rows) + "x" + std::to_string(patch_cols) +
                      " does not fit image " + std::to_string(rows) + "x" + std::to_string(cols));
  }
  if (stride_rows < 1 || stride_cols < 1) {
    throw ConfigError("patch stride must be at least 1");
  }
  if (stride_rows > patch_rows || stride_cols > patch_cols) {
    throw ConfigError("patch stride larger than the patch would leave pixels uncovered");
  }

  PatchGrid grid;
  grid.image_rows = rows;
  grid.image_cols = cols;
  grid.patch_rows = patch_rows;
  grid.patch_cols = patch_cols;
  grid.stride_rows = stride_rows;
  grid.stride_cols = stride_cols;
  grid.row_offsets = axis_offsets(rows, patch_rows, stride_rows);
  grid.col_offsets = axis_offsets(cols, patch_cols, stride_cols);

  grid.anchors.reserve(grid.row_offsets.size() * grid.col_offsets.size());
  for (Index r : grid.row_offsets) {
    for (Index c : grid.col_offsets) {
      grid.anchors.push_back({r, c});
    }
  }

  grid.coverage.assign(static_cast<std::size_t>(rows * cols), 0);
  for (const Anchor &a : grid.anchors) {
    for (Index di = 0; di < patch_rows; ++di) {
      for (Index dj = 0; dj < patch_cols; ++dj) {
        ++grid.coverage[static_cast<std::size_t>((a.row + di) * cols + a.col + dj)];
      }
    }
  }
  return grid;
}

PatchMatrix extract_patch(const HsiCube &cube, const PatchGrid &grid, Anchor anchor)
{
  PatchMatrix patch;
  patch.anchor = anchor;
  extract_patch_into(cube, grid, anchor, patch.values);
  return patch;
}

void extract_patch_into(const HsiCube &cube, const PatchGrid &grid, Anchor anchor, Eigen::MatrixXd &out)
{
  check_anchor(cube, grid, anchor);
  out.resize(grid.patch_pixels(), cube.bands());
  for (Index k = 0; k < cube.bands(); ++k) {
    for (Index di = 0; di < grid.patch_rows; ++di) {
      const double *src = &cube(anchor.row + di, anchor.col, k);
      for (Index dj = 0; dj < grid.patch_cols; ++dj) {
        out(di * grid.patch_cols + dj, k) = src[dj];
      }
    }
  }
}

void embed_accumulate(HsiCube &target, const PatchGrid &grid, Anchor anchor, const Eigen::MatrixXd &values)
{
  check_anchor(target, grid, anchor);
  if (values.rows() != grid.patch_pixels() || values.cols() != target.bands()) {
    throw UsageError("patch matrix is " + std::to_string(values.rows()) + "x" + std::to_string(values.cols()) +
                     ", expected " + std::to_string(grid.patch_pixels()) + "x" + std::to_string(target.bands()));
  }
  for (Index k = 0; k < target.bands(); ++k) {
    for (Index di = 0; di < grid.patch_rows; ++di) {
      double *dst = &target(anchor.row + di, anchor.col, k);
      for (Index dj = 0; dj < grid.patch_cols; ++dj) {
        dst[dj] += values(di * grid.patch_cols + dj, k);
      }
    }
  }
}

HsiCube coverage_cube(const PatchGrid &grid, Index bands)
{
  HsiCube out(grid.image_rows, grid.image_cols, bands);
  for (Index k = 0; k < bands; ++k) {
    auto band = out.band(k);
    std::copy(grid.coverage.begin(), grid.coverage.end(), band.begin());
  }
  return out;
}

} // namespace nonllrtv
