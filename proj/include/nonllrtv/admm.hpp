#pragma once

#include "nonllrtv/cube.hpp"
#include "nonllrtv/diffops.hpp"
#include "nonllrtv/patches.hpp"
#include "nonllrtv/penalty.hpp"

#include <functional>
#include <vector>

namespace nonllrtv {

/// Every scalar of the restoration solver. Defaults reproduce the published
/// parameter set on data scaled to [0, 1].
struct SolverConfig {
  double lambda = 0.14; ///< weight of the sparse (L1) term
  double tau = 0.03;    ///< weight of the spatial-spectral TV term; 0 disables it
  double gamma = 1e-2;  ///< scale of the non-convex rank surrogate
  /// Hard cap on the rank of every low-rank patch; 0 removes the cap.
  Index rank_cap = 4;
  DiffWeights weights;

  double mu0 = 1e-2;
  double mu_max = 1e6;
  double rho = 1.5;
  double epsilon = 1e-5;
  int max_iters = 60;

  /// 0 selects the automatic size (see resolve_patch_geometry).
  Index patch_rows = 0;
  Index patch_cols = 0;
  /// 0 tiles without overlap (stride equal to the patch side).
  Index stride = 0;
  /// One patch spanning the whole image; overrides patch_rows/cols.
  bool full_image_patch = false;

  ShrinkageMode penalty_mode = ShrinkageMode::nonconvex_gamma;
  double threshold_factor = 1.0;
  /// Constant weight used by the nuclear-norm mode.
  double nuclear_weight = 1.0;

  int threads = 1;

  void validate() const;
  ShrinkageSpec shrinkage() const;
};

struct PatchGeometry {
  Index patch_rows;
  Index patch_cols;
  Index stride_rows;
  Index stride_cols;
};

/// Concrete patch size and stride for an image. The automatic side is the
/// integer nearest sqrt(bands), capped by the image, so that a patch matrix is
/// roughly square (15x15 pixels for 224 bands).
PatchGeometry resolve_patch_geometry(const SolverConfig &config, CubeDims dims);

struct ResidualRecord {
  int iteration = 0;       ///< 1-based
  double fit = 0.0;        ///< max over patches of |O - L - S|_inf
  double split = 0.0;      ///< |J - X|_inf
  double mu = 0.0;         ///< penalty used during this iteration
};

using ProgressCallback = std::function<void(const ResidualRecord &)>;

/// Iterates and multipliers of the split problem.
///
/// Per-patch quantities are indexed like grid.anchors. The constraints and
/// their multipliers are
///   O_a - L_a - S_a = 0   dual_fit[a]
///   L_a - J_a       = 0   dual_patch[a]
///   J - X           = 0   dual_consensus
///   U - D X         = 0   dual_gradient
/// each entering the augmented Lagrangian as <Y, c> + mu/2 |c|^2.
struct AdmmState {
  PatchGrid grid;
  std::vector<Eigen::MatrixXd> observed;
  std::vector<Eigen::MatrixXd> low_rank;
  std::vector<Eigen::MatrixXd> sparse;
  std::vector<Eigen::MatrixXd> dual_fit;
  std::vector<Eigen::MatrixXd> dual_patch;

  HsiCube consensus; ///< J
  HsiCube restored;  ///< X
  GradientField gradient; ///< U
  HsiCube dual_consensus;
  GradientField dual_gradient;

  double mu = 0.0;
  int iteration = 0; ///< completed iterations
  std::vector<ResidualRecord> history;
};

/// All-zero iterates for observation `observed`.
AdmmState init_state(const HsiCube &observed, const SolverConfig &config);

struct PatchUpdate {
  Eigen::MatrixXd low_rank;
  Eigen::MatrixXd sparse;
};

/// Low-rank step by WSVT, then sparse step by soft thresholding, for one patch.
PatchUpdate update_patch(const Eigen::MatrixXd &observed, const Eigen::MatrixXd &consensus,
                         const Eigen::MatrixXd &sparse, const Eigen::MatrixXd &dual_fit,
                         const Eigen::MatrixXd &dual_patch, double mu, const SolverConfig &config);

/// Closed-form J: (X - Y_X/mu + sum_a P_a^T (L_a + Y_a/mu)) ./ (1 + coverage).
HsiCube update_j(const HsiCube &restored, const HsiCube &dual_consensus, const std::vector<Eigen::MatrixXd> &low_rank,
                 const std::vector<Eigen::MatrixXd> &dual_patch, const PatchGrid &grid, double mu);

/// X from (I + D^T D) X = J + Y_X/mu + D^T (U + Y_U/mu).
HsiCube update_x(const HsiCube &consensus, const HsiCube &dual_consensus, const GradientField &gradient,
                 const GradientField &dual_gradient, double mu, const PeriodicSolver &solver, const DiffWeights &w);

/// U = Soft(D X - Y_U/mu, tau/mu), componentwise.
GradientField update_u(const HsiCube &restored, const GradientField &dual_gradient, double mu, double tau,
                       const DiffWeights &w);

/// Dual ascent on all four constraint families, then mu <- min(mu0 rho^k, mu_max).
void update_multipliers(AdmmState &state, const SolverConfig &config);

/// Current (fit, split) residuals; iteration and mu are left as in state.
ResidualRecord measure_residuals(const AdmmState &state);

bool check_convergence(double fit_residual, double split_residual, double epsilon);

/// Runs one full iteration and returns its residual record.
ResidualRecord iterate(AdmmState &state, const SolverConfig &config, const PeriodicSolver &solver);

struct DenoiseReport {
  int iterations = 0;
  bool converged = false;
  double fit_residual = 0.0;
  double split_residual = 0.0;
  double final_mu = 0.0;
  double seconds = 0.0;
  PatchGeometry geometry{};
  std::vector<ResidualRecord> history;
};

struct DenoiseResult {
  HsiCube restored;  ///< X, the solver output
  HsiCube sparse;    ///< per-patch S averaged by coverage
  HsiCube low_rank;  ///< per-patch L averaged by coverage
  HsiCube consensus; ///< J
  DenoiseReport report;
};

/// Average of per-patch matrices: sum_a P_a^T M_a ./ coverage.
HsiCube aggregate_patches(const std::vector<Eigen::MatrixXd> &patches, const PatchGrid &grid, Index bands);

DenoiseResult denoise(const HsiCube &observed, const SolverConfig &config, const ProgressCallback &progress = {});

} // namespace nonllrtv
