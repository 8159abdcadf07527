#include "nonllrtv/admm.hpp"

#include "nonllrtv/error.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <string>
#include <thread>

namespace nonllrtv {

namespace {

void require(bool ok, const char *what)
{
  if (!ok) {
    throw ConfigError(what);
  }
}

double schedule_mu(const SolverConfig &config, int completed)
{
  return std::min(config.mu0 * std::pow(config.rho, completed), config.mu_max);
}

template <typename Fn>
void for_each_anchor(std::size_t count, int threads, Fn &&fn)
{
  const auto workers = static_cast<std::size_t>(std::clamp<int>(threads, 1, static_cast<int>(std::max<std::size_t>(count, 1))));
  if (workers == 1) {
    for (std::size_t a = 0; a < count; ++a) {
      fn(a);
    }
    return;
  }
  // Each worker owns a contiguous block of anchors and writes only its own slots.
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      const std::size_t begin = count * w / workers;
      const std::size_t end = count * (w + 1) / workers;
      try {
        for (std::size_t a = begin; a < end; ++a) {
          fn(a);
        }
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto &t : pool) {
    t.join();
  }
  for (auto &e : errors) {
    if (e) {
      std::rethrow_exception(e);
    }
  }
}

bool finite(const std::vector<Eigen::MatrixXd> &ms)
{
  return std::all_of(ms.begin(), ms.end(), [](const Eigen::MatrixXd &m) { return m.allFinite(); });
}

void check_finite(const AdmmState &s)
{
  auto fail = [&](const char *name) {
    throw NumericalError(std::string("non-finite values in ") + name + " at iteration " +
                         std::to_string(s.iteration + 1));
  };
  if (!finite(s.low_rank)) fail("L (low-rank patches)");
  if (!finite(s.sparse)) fail("S (sparse patches)");
  if (!s.consensus.all_finite()) fail("J");
  if (!s.restored.all_finite()) fail("X");
  if (!s.gradient.all_finite()) fail("U");
  if (!finite(s.dual_fit)) fail("fit multiplier");
  if (!finite(s.dual_patch)) fail("patch multiplier");
  if (!s.dual_consensus.all_finite()) fail("J-X multiplier");
  if (!s.dual_gradient.all_finite()) fail("gradient multiplier");
}

} // namespace

void SolverConfig::validate() const
{
  auto pos = [](double v) { return std::isfinite(v) && v > 0.0; };
  require(pos(lambda), "lambda must be positive");
  require(std::isfinite(tau) && tau >= 0.0, "tau must be non-negative");
  require(pos(gamma), "gamma must be positive");
  require(pos(mu0), "mu0 must be positive");
  require(std::isfinite(rho) && rho > 1.0, "rho must be greater than 1");
  require(std::isfinite(mu_max) && mu_max >= mu0, "mu_max must be at least mu0");
  require(pos(epsilon), "epsilon must be positive");
  require(max_iters >= 1, "max_iters must be at least 1");
  require(patch_rows >= 0 && patch_cols >= 0, "patch size must be non-negative");
  require(stride >= 0, "stride must be non-negative");
  require(pos(threshold_factor), "threshold_factor must be positive");
  require(pos(nuclear_weight), "nuclear_weight must be positive");
  require(rank_cap >= 0, "rank cap must be non-negative");
  require(threads >= 1, "threads must be at least 1");
  weights.validate();
}

ShrinkageSpec SolverConfig::shrinkage() const
{
  ShrinkageSpec spec{penalty_mode, threshold_factor, nuclear_weight, std::nullopt};
  if (rank_cap > 0) {
    spec.rank_cap = rank_cap;
  }
  return spec;
}

PatchGeometry resolve_patch_geometry(const SolverConfig &config, CubeDims dims)
{
  if (config.full_image_patch) {
    return {dims.rows, dims.cols, dims.rows, dims.cols};
  }
  const auto automatic = std::max<Index>(1, std::llround(std::sqrt(static_cast<double>(dims.bands))));
  const Index pr = config.patch_rows > 0 ? config.patch_rows : std::min(automatic, dims.rows);
  const Index pc = config.patch_cols > 0 ? config.patch_cols : std::min(automatic, dims.cols);
  const Index sr = config.stride > 0 ? config.stride : pr;
  const Index sc = config.stride > 0 ? config.stride : pc;
  return {pr, pc, sr, sc};
}

AdmmState init_state(const HsiCube &observed, const SolverConfig &config)
{
  const PatchGeometry g = resolve_patch_geometry(config, observed.dims());
  AdmmState s;
  s.grid = build_patch_grid(observed.rows(), observed.cols(), g.patch_rows, g.patch_cols, g.stride_rows,
                            g.stride_cols);
  const std::size_t count = s.grid.anchors.size();
  s.observed.resize(count);
  for (std::size_t a = 0; a < count; ++a) {
    extract_patch_into(observed, s.grid, s.grid.anchors[a], s.observed[a]);
  }
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(s.grid.patch_pixels(), observed.bands());
  s.low_rank.assign(count, zero);
  s.sparse.assign(count, zero);
  s.dual_fit.assign(count, zero);
  s.dual_patch.assign(count, zero);

  s.consensus = HsiCube(observed.dims());
  s.restored = HsiCube(observed.dims());
  s.gradient = GradientField(observed.dims());
  s.dual_consensus = HsiCube(observed.dims());
  s.dual_gradient = GradientField(observed.dims());
  s.mu = schedule_mu(config, 0);
  return s;
}

PatchUpdate update_patch(const Eigen::MatrixXd &observed, const Eigen::MatrixXd &consensus,
                         const Eigen::MatrixXd &sparse, const Eigen::MatrixXd &dual_fit,
                         const Eigen::MatrixXd &dual_patch, double mu, const SolverConfig &config)
{
  if (!(mu > 0.0)) {
    throw ConfigError("mu must be positive");
  }
  if (consensus.rows() != observed.rows() || consensus.cols() != observed.cols() ||
      sparse.rows() != observed.rows() || sparse.cols() != observed.cols() ||
      dual_fit.rows() != observed.rows() || dual_fit.cols() != observed.cols() ||
      dual_patch.rows() != observed.rows() || dual_patch.cols() != observed.cols()) {
    throw UsageError("update_patch: patch matrices differ in shape");
  }
  // L minimizes penalty(L) + mu/2 |L - (O - S + Y_fit/mu)|^2 + mu/2 |L - (J - Y_patch/mu)|^2,
  // whose quadratic part is centred on T.
  const Eigen::MatrixXd t = 0.5 * (observed + consensus - sparse + (dual_fit - dual_patch) / mu);

  PatchUpdate out;
  out.low_rank = wsvt(t, config.shrinkage(), config.gamma, mu);
  out.sparse = soft_threshold(observed - out.low_rank + dual_fit / mu, config.lambda / mu);
  return out;
}

HsiCube aggregate_patches(const std::vector<Eigen::MatrixXd> &patches, const PatchGrid &grid, Index bands)
{
  HsiCube sum(grid.image_rows, grid.image_cols, bands);
  for (std::size_t a = 0; a < grid.anchors.size(); ++a) {
    embed_accumulate(sum, grid, grid.anchors[a], patches[a]);
  }
  sum.array() /= coverage_cube(grid, bands).array();
  return sum;
}

HsiCube update_j(const HsiCube &restored, const HsiCube &dual_consensus, const std::vector<Eigen::MatrixXd> &low_rank,
                 const std::vector<Eigen::MatrixXd> &dual_patch, const PatchGrid &grid, double mu)
{
  if (low_rank.size() != grid.anchors.size() || dual_patch.size() != grid.anchors.size()) {
    throw UsageError("update_j: one patch per anchor expected");
  }
  HsiCube j(restored.dims());
  j.array() = restored.array() - dual_consensus.array() / mu;
  // Fixed anchor order keeps the sum bitwise reproducible.
  for (std::size_t a = 0; a < grid.anchors.size(); ++a) {
    embed_accumulate(j, grid, grid.anchors[a], low_rank[a] + dual_patch[a] / mu);
  }
  j.array() /= 1.0 + coverage_cube(grid, restored.bands()).array();
  return j;
}

HsiCube update_x(const HsiCube &consensus, const HsiCube &dual_consensus, const GradientField &gradient,
                 const GradientField &dual_gradient, double mu, const PeriodicSolver &solver, const DiffWeights &w)
{
  GradientField shifted(gradient.dims());
  shifted.spectral.array() = gradient.spectral.array() + dual_gradient.spectral.array() / mu;
  shifted.column.array() = gradient.column.array() + dual_gradient.column.array() / mu;
  shifted.row.array() = gradient.row.array() + dual_gradient.row.array() / mu;

  HsiCube rhs = adjoint_diff(shifted, w);
  rhs.array() += consensus.array() + dual_consensus.array() / mu;
  return solver.solve(rhs);
}

GradientField update_u(const HsiCube &restored, const GradientField &dual_gradient, double mu, double tau,
                       const DiffWeights &w)
{
  GradientField u = forward_diff(restored, w);
  const double cut = tau / mu;
  u.spectral.array() = soft_threshold(u.spectral.array() - dual_gradient.spectral.array() / mu, cut);
  u.column.array() = soft_threshold(u.column.array() - dual_gradient.column.array() / mu, cut);
  u.row.array() = soft_threshold(u.row.array() - dual_gradient.row.array() / mu, cut);
  return u;
}

void update_multipliers(AdmmState &state, const SolverConfig &config)
{
  const double mu = state.mu;
  Eigen::MatrixXd consensus_patch;
  for (std::size_t a = 0; a < state.grid.anchors.size(); ++a) {
    state.dual_fit[a] += mu * (state.observed[a] - state.low_rank[a] - state.sparse[a]);
    extract_patch_into(state.consensus, state.grid, state.grid.anchors[a], consensus_patch);
    state.dual_patch[a] += mu * (state.low_rank[a] - consensus_patch);
  }
  state.dual_consensus.array() += mu * (state.consensus.array() - state.restored.array());

  const GradientField dx = forward_diff(state.restored, config.weights);
  state.dual_gradient.spectral.array() += mu * (state.gradient.spectral.array() - dx.spectral.array());
  state.dual_gradient.column.array() += mu * (state.gradient.column.array() - dx.column.array());
  state.dual_gradient.row.array() += mu * (state.gradient.row.array() - dx.row.array());

  ++state.iteration;
  state.mu = schedule_mu(config, state.iteration);
}

ResidualRecord measure_residuals(const AdmmState &state)
{
  ResidualRecord r;
  r.iteration = state.iteration;
  r.mu = state.mu;
  for (std::size_t a = 0; a < state.grid.anchors.size(); ++a) {
    const double v = (state.observed[a] - state.low_rank[a] - state.sparse[a]).cwiseAbs().maxCoeff();
    r.fit = std::max(r.fit, v);
  }
  r.split = (state.consensus.array() - state.restored.array()).abs().maxCoeff();
  return r;
}

bool check_convergence(double fit_residual, double split_residual, double epsilon)
{
  return std::max(fit_residual, split_residual) <= epsilon;
}

ResidualRecord iterate(AdmmState &state, const SolverConfig &config, const PeriodicSolver &solver)
{
  const double mu = state.mu;

  // Patches are independent given the previous J.
  for_each_anchor(state.grid.anchors.size(), config.threads, [&](std::size_t a) {
    Eigen::MatrixXd consensus_patch;
    extract_patch_into(state.consensus, state.grid, state.grid.anchors[a], consensus_patch);
    PatchUpdate up = update_patch(state.observed[a], consensus_patch, state.sparse[a], state.dual_fit[a],
                                  state.dual_patch[a], mu, config);
    state.low_rank[a] = std::move(up.low_rank);
    state.sparse[a] = std::move(up.sparse);
  });

  state.consensus = update_j(state.restored, state.dual_consensus, state.low_rank, state.dual_patch, state.grid, mu);
  state.restored = update_x(state.consensus, state.dual_consensus, state.gradient, state.dual_gradient, mu, solver,
                            config.weights);
  state.gradient = update_u(state.restored, state.dual_gradient, mu, config.tau, config.weights);

  ResidualRecord record = measure_residuals(state);
  record.iteration = state.iteration + 1;
  record.mu = mu;

  update_multipliers(state, config);
  check_finite(state);
  state.history.push_back(record);
  return record;
}

DenoiseResult denoise(const HsiCube &observed, const SolverConfig &config, const ProgressCallback &progress)
{
  config.validate();
  if (observed.empty()) {
    throw UsageError("denoise: empty input cube");
  }
  if (!observed.all_finite()) {
    throw UsageError("denoise: input cube contains NaN or Inf");
  }
  const auto start = std::chrono::steady_clock::now();

  AdmmState state = init_state(observed, config);
  const PeriodicSolver solver(observed.dims(), config.weights);

  DenoiseResult result;
  ResidualRecord last;
  while (state.iteration < config.max_iters) {
    last = iterate(state, config, solver);
    if (progress) {
      progress(last);
    }
    if (check_convergence(last.fit, last.split, config.epsilon)) {
      result.report.converged = true;
      break;
    }
  }

  const PatchGrid &grid = state.grid;
  result.report.iterations = state.iteration;
  result.report.fit_residual = last.fit;
  result.report.split_residual = last.split;
  result.report.final_mu = state.mu;
  result.report.geometry = {grid.patch_rows, grid.patch_cols, grid.stride_rows, grid.stride_cols};
  result.report.history = std::move(state.history);
  result.sparse = aggregate_patches(state.sparse, grid, observed.bands());
  result.low_rank = aggregate_patches(state.low_rank, grid, observed.bands());
  result.restored = std::move(state.restored);
  result.consensus = std::move(state.consensus);
  result.report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

} // namespace nonllrtv
