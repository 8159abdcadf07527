#pragma once

#include "nonllrtv/cube.hpp"

#include <compare>
#include <vector>

namespace nonllrtv {

/// Top-left corner of a spatial patch window.
struct Anchor {
  Index row = 0;
  Index col = 0;
  auto operator<=>(const Anchor &) const = default;
};

/// Overlapping patch layout over an image of image_rows x image_cols pixels.
///
/// Anchors are the Cartesian product of row_offsets x col_offsets, row-major.
/// Along each axis offsets step by the stride from 0, and one extra offset
/// flush with the far border is appended when the stride does not land there,
/// so edge patches shift inward instead of shrinking.
struct PatchGrid {
  Index image_rows = 0;
  Index image_cols = 0;
  Index patch_rows = 0;
  Index patch_cols = 0;
  Index stride_rows = 0;
  Index stride_cols = 0;
  std::vector<Index> row_offsets;
  std::vector<Index> col_offsets;
  std::vector<Anchor> anchors;
  /// Number of patches containing each pixel, image_rows x image_cols row-major.
  std::vector<int> coverage;

  Index patch_pixels() const { return patch_rows * patch_cols; }
  int coverage_at(Index i, Index j) const { return coverage[static_cast<std::size_t>(i * image_cols + j)]; }
  bool contains(Anchor a) const;
};

PatchGrid build_patch_grid(Index rows, Index cols, Index patch_rows, Index patch_cols, Index stride_rows,
                           Index stride_cols);

inline PatchGrid build_patch_grid(Index rows, Index cols, Index patch_rows, Index patch_cols, Index stride)
{
  return build_patch_grid(rows, cols, patch_rows, patch_cols, stride, stride);
}

/// One patch as a (patch_rows*patch_cols) x bands matrix. Row di*patch_cols+dj
/// holds pixel (anchor.row+di, anchor.col+dj), i.e. cube scan order restricted
/// to the window.
struct PatchMatrix {
  Eigen::MatrixXd values;
  Anchor anchor;
};

PatchMatrix extract_patch(const HsiCube &cube, const PatchGrid &grid, Anchor anchor);

/// Same as extract_patch, writing into a preallocated matrix.
void extract_patch_into(const HsiCube &cube, const PatchGrid &grid, Anchor anchor, Eigen::MatrixXd &out);

/// Adds `values` into the window of `target` at `anchor` (the adjoint of extraction).
///
/// Not safe to call concurrently on the same target. Parallel callers should
/// accumulate into per-worker cubes and sum them afterwards, or serialize the
/// calls in a fixed anchor order when bitwise reproducibility is needed.
void embed_accumulate(HsiCube &target, const PatchGrid &grid, Anchor anchor, const Eigen::MatrixXd &values);

inline void embed_accumulate(HsiCube &target, const PatchGrid &grid, const PatchMatrix &patch)
{
  embed_accumulate(target, grid, patch.anchor, patch.values);
}

/// Coverage broadcast over `bands`, as a cube.
HsiCube coverage_cube(const PatchGrid &grid, Index bands);

} // namespace nonllrtv
