#include "nonllrtv/penalty.hpp"

#include "nonllrtv/error.hpp"

#include <algorithm>
#include <cmath>

namespace nonllrtv {

namespace {

void check_gamma(double gamma)
{
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw ConfigError("gamma must be positive and finite");
  }
}

template <typename Svd>
void check_svd(const Svd &svd)
{
  if (svd.info() != Eigen::Success) {
    throw NumericalError("SVD did not converge");
  }
}

} // namespace

GammaPenalty::GammaPenalty(double g)
  : gamma{g}
{
  check_gamma(g);
}

double GammaPenalty::value(double sigma) const
{
  return -std::expm1(-sigma / gamma);
}

double GammaPenalty::weight(double sigma) const
{
  return std::exp(-sigma / gamma) / gamma;
}

double phi_weight(double sigma, double gamma)
{
  return GammaPenalty(gamma).weight(sigma);
}

Eigen::VectorXd singular_values(const Eigen::MatrixXd &m)
{
  if (m.size() == 0) {
    return {};
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
  check_svd(svd);
  return svd.singularValues();
}

double gamma_norm(const Eigen::MatrixXd &m, double gamma)
{
  const GammaPenalty penalty(gamma);
  double total = 0.0;
  for (double s : singular_values(m)) {
    total += penalty.value(s);
  }
  return total;
}

Eigen::VectorXd shrink_singular_values(const Eigen::VectorXd &sigma, const ShrinkageSpec &spec, double gamma,
                                       double mu)
{
  if (!(mu > 0.0)) {
    throw ConfigError("mu must be positive");
  }
  Eigen::VectorXd out(sigma.size());
  if (spec.mode == ShrinkageMode::nuclear) {
    const double cut = spec.threshold_factor * spec.nuclear_weight / mu;
    for (Index t = 0; t < sigma.size(); ++t) {
      out[t] = std::max(sigma[t] - cut, 0.0);
    }
  } else {
    const GammaPenalty penalty(gamma);
    for (Index t = 0; t < sigma.size(); ++t) {
      out[t] = std::max(sigma[t] - spec.threshold_factor * penalty.weight(sigma[t]) / mu, 0.0);
    }
  }
  // Shrinkage is monotone, so the input order is preserved and the first
  // rank_cap entries are the largest.
  if (spec.rank_cap && *spec.rank_cap < out.size()) {
    out.tail(out.size() - std::max<Index>(*spec.rank_cap, 0)).setZero();
  }
  return out;
}

Eigen::MatrixXd wsvt(const Eigen::MatrixXd &t, const ShrinkageSpec &spec, double gamma, double mu)
{
  if (t.size() == 0) {
    return t;
  }
  if (!t.allFinite()) {
    throw NumericalError("wsvt: input contains NaN or Inf");
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(t, Eigen::ComputeThinU | Eigen::ComputeThinV);
  check_svd(svd);
  const Eigen::VectorXd shrunk = shrink_singular_values(svd.singularValues(), spec, gamma, mu);

  Index kept = 0;
  while (kept < shrunk.size() && shrunk[kept] > 0.0) {
    ++kept;
  }
  if (kept == 0) {
    return Eigen::MatrixXd::Zero(t.rows(), t.cols());
  }
  return svd.matrixU().leftCols(kept) * shrunk.head(kept).asDiagonal() * svd.matrixV().leftCols(kept).transpose();
}

} // namespace nonllrtv
