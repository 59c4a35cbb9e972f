#include "rdsgls/diagnostics.hpp"

#include <cmath>

#include "rdsgls/error.hpp"

namespace rdsgls {

const char* to_string(RseVariant variant) {
  return variant == RseVariant::kAsPrinted ? "as_printed" : "mean_variance";
}

RseVariant rse_variant_from_string(const std::string& text) {
  if (text == "as_printed") return RseVariant::kAsPrinted;
  if (text == "mean_variance") return RseVariant::kMeanVariance;
  throw Error(ErrorCode::kInvalidArgument, "unknown RSE variant '" + text + "'");
}

double rse_from_forms(double one_inv_one, double one_sigma_one, int n,
                      RseVariant variant) {
  const double nn = n;
  const double denom = variant == RseVariant::kAsPrinted ? one_sigma_one / nn
                                                         : one_sigma_one / (nn * nn);
  return std::sqrt((1.0 / one_inv_one) / denom);
}

double rse(const CovarianceMatrix& sigma, RseVariant variant) {
  const int n = sigma.size();
  Eigen::LLT<Eigen::MatrixXd> llt(sigma.values);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::kFactorization, "Sigma is not positive definite");
  }
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  const double inv = ones.dot(llt.solve(ones));
  return rse_from_forms(inv, sigma.values.sum(), n, variant);
}

double ranktwo_rse(const DistanceDistribution& dist, double lambda, RseVariant variant) {
  return rse_from_forms(one_sigma_inv_one_ranktwo(dist.n, 1.0, lambda),
                        ones_quadratic_form(dist, lambda), dist.n, variant);
}

std::vector<double> ranktwo_rse_curve(const ReferralTree& tree,
                                      std::span<const double> lambda_grid,
                                      RseVariant variant) {
  const auto dist = tree_distance_distribution(tree);
  std::vector<double> out;
  out.reserve(lambda_grid.size());
  for (double lambda : lambda_grid) out.push_back(ranktwo_rse(dist, lambda, variant));
  return out;
}

std::vector<double> default_lambda_grid() {
  std::vector<double> grid(181);
  for (int k = 0; k < 181; ++k) grid[k] = (k - 90) / 100.0;
  return grid;
}

JensenResult jensen_check(const AutoCovariance& gamma, const ReferralTree& tree) {
  std::vector<AutoCovariance::Term> terms = gamma.terms;
  if (gamma.nugget != 0.0) terms.push_back({gamma.nugget, 0.0});
  double g0 = 0.0, g1 = 0.0;
  JensenResult out;
  bool nonnegative = true;
  for (const auto& t : terms) {
    g0 += t.beta2;
    g1 += t.beta2 * t.lambda;
    out.lambda2 = std::max(out.lambda2, std::abs(t.lambda));
    if (t.lambda < 0.0) nonnegative = false;
  }
  if (!(g0 > 0.0)) throw Error(ErrorCode::kInvalidArgument, "gamma(0) must be positive");
  out.lambda_auto = g1 / g0;
  out.lambda_bound_holds = std::abs(out.lambda_auto) <= out.lambda2 * (1.0 + 1e-12);
  if (!nonnegative) return out;

  const auto dist = tree_distance_distribution(tree);
  for (const auto& t : terms) out.lhs += t.beta2 * ones_quadratic_form(dist, t.lambda);
  out.rhs = g0 * ones_quadratic_form(dist, out.lambda_auto);
  // Equality is exact for rank-two input; allow rounding.
  out.bound_holds = out.lhs >= out.rhs * (1.0 - 1e-12);
  return out;
}

}  // namespace rdsgls
