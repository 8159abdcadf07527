#pragma once

#include "nonllrtv/cube.hpp"

#include <optional>

namespace nonllrtv {

/// Non-convex rank surrogate  sum_t (1 - exp(-sigma_t / gamma)).
struct GammaPenalty {
  double gamma;

  explicit GammaPenalty(double g);

  double value(double sigma) const;
  /// Derivative of value(); strictly positive and decreasing in sigma.
  double weight(double sigma) const;
};

enum class ShrinkageMode {
  nonconvex_gamma,
  nuclear,
};

/// How wsvt() shrinks singular values.
///
/// gamma mode:   sigma -> max(sigma - factor * weight(sigma) / mu, 0)
/// nuclear mode: sigma -> max(sigma - factor * nuclear_weight / mu, 0)
/// With rank_cap set, only the rank_cap largest shrunken values are kept.
struct ShrinkageSpec {
  ShrinkageMode mode = ShrinkageMode::nonconvex_gamma;
  double threshold_factor = 1.0;
  double nuclear_weight = 1.0;
  std::optional<Index> rank_cap;
};

double gamma_norm(const Eigen::MatrixXd &m, double gamma);

double phi_weight(double sigma, double gamma);

inline double soft_threshold(double x, double tau)
{
  if (x > tau) {
    return x - tau;
  }
  if (x < -tau) {
    return x + tau;
  }
  return 0.0;
}

/// Elementwise soft_threshold over an Eigen array or matrix expression.
template <typename Derived>
auto soft_threshold(const Eigen::DenseBase<Derived> &x, double tau)
{
  return x.derived().unaryExpr([tau](double v) { return soft_threshold(v, tau); });
}

/// Shrinks a descending singular-value vector per `spec`; exposed for tests.
Eigen::VectorXd shrink_singular_values(const Eigen::VectorXd &sigma, const ShrinkageSpec &spec, double gamma,
                                       double mu);

/// Weighted singular value thresholding of T.
Eigen::MatrixXd wsvt(const Eigen::MatrixXd &t, const ShrinkageSpec &spec, double gamma, double mu);

/// Singular values of m, descending. Throws NumericalError on failure.
Eigen::VectorXd singular_values(const Eigen::MatrixXd &m);

} // namespace nonllrtv
