#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rdsgls/covariance.hpp"
#include "rdsgls/referral.hpp"

namespace rdsgls {

/// kAsPrinted divides 1'Sigma 1 by n; kMeanVariance by n^2, which makes
/// the ratio exactly 1 for Sigma = I.
enum class RseVariant { kAsPrinted, kMeanVariance };

const char* to_string(RseVariant variant);
RseVariant rse_variant_from_string(const std::string& text);

/// sqrt[(1'Sigma^{-1}1)^{-1} / (c * 1'Sigma 1)] with c = 1/n or 1/n^2.
double rse_from_forms(double one_inv_one, double one_sigma_one, int n,
                      RseVariant variant);

/// Throws kFactorization when Sigma is not positive definite.
double rse(const CovarianceMatrix& sigma, RseVariant variant = RseVariant::kAsPrinted);

/// RSE of the rank-two model at lambda on a tree with the given distance
/// law; beta2 cancels.
double ranktwo_rse(const DistanceDistribution& dist, double lambda,
                   RseVariant variant = RseVariant::kAsPrinted);

std::vector<double> ranktwo_rse_curve(const ReferralTree& tree,
                                      std::span<const double> lambda_grid,
                                      RseVariant variant = RseVariant::kAsPrinted);

/// 181 points, -0.9 to 0.9 in steps of 0.01.
std::vector<double> default_lambda_grid();

struct JensenResult {
  double lambda_auto = 0.0;  // gamma(1) / gamma(0)
  double lambda2 = 0.0;      // largest |lambda_l|
  bool lambda_bound_holds = false;
  /// Empty when some lambda_l < 0 and the inequality does not apply.
  std::optional<bool> bound_holds;
  double lhs = 0.0;  // 1' Sigma 1
  double rhs = 0.0;  // 1' Sigma_auto 1
};

/// Compares 1'Sigma 1 with 1'Sigma_auto 1 where Sigma_auto = gamma(0)
/// lambda_auto^d. A nugget counts as a term with lambda = 0.
JensenResult jensen_check(const AutoCovariance& gamma, const ReferralTree& tree);

struct DiagnosticPoint {
  std::string estimator;
  double lambda_hat = 0.0;
  double rse = 0.0;
  int n = 0;
  RseVariant variant = RseVariant::kAsPrinted;
};

}  // namespace rdsgls
