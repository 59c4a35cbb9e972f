#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "rdsgls/kernels.hpp"
#include "rdsgls/netmodel.hpp"
#include "rdsgls/referral.hpp"

namespace rdsgls {

/// gamma(d) = sum_l beta2_l lambda_l^d, plus `nugget` at lag 0 only.
struct AutoCovariance {
  struct Term {
    double beta2 = 0.0;
    double lambda = 0.0;
  };
  std::vector<Term> terms;
  double nugget = 0.0;

  /// Rank-two autocovariance beta2 * lambda^d.
  static AutoCovariance rank_two(double beta2, double lambda) {
    return {{{beta2, lambda}}, 0.0};
  }
  /// Terms l >= 2 of a spectral decomposition (the constant mode carries
  /// the mean, not covariance).
  static AutoCovariance from_spectrum(const Eigen::VectorXd& beta,
                                      const Eigen::VectorXd& eigenvalues);
};

/// Uses 0^0 = 1.
double gamma_eval(const AutoCovariance& ac, int d);
/// gamma(0..max_d) without the nugget.
std::vector<double> gamma_table(const AutoCovariance& ac, int max_d);

struct CovarianceMatrix {
  Eigen::MatrixXd values;
  double nugget = 0.0;
  int size() const { return static_cast<int>(values.rows()); }
};

/// Dense Sigma_{st} = gamma(d(s, t)); n must not exceed max_n.
CovarianceMatrix build_sigma(const ReferralTree& tree, const AutoCovariance& ac,
                             int max_n = kMaxDenseTree);
CovarianceMatrix build_sigma(const DistanceMatrix& dist, const AutoCovariance& ac);

/// Sigma^{-1} v for Sigma = beta2 [lambda^{d(s,t)}], in O(n) through the
/// sparse tridiagonal-on-tree stencil. Throws kSingular for |lambda| >= 1.
std::vector<double> ranktwo_inverse_apply(const ReferralTree& tree, double beta2,
                                          double lambda, std::span<const double> v);

/// Closed-form Sigma^{-1} 1 for the rank-two model:
/// (1 - lambda (deg(s) - 1)) / (beta2 (1 + lambda)).
std::vector<double> ranktwo_inverse_ones(const ReferralTree& tree, double beta2,
                                         double lambda);

/// 1' Sigma^{-1} 1 = n (1 - lambda (1 - 2/n)) / (beta2 (1 + lambda)); the
/// same on every tree with n nodes.
double one_sigma_inv_one_ranktwo(int n, double beta2, double lambda);

struct GlsResult {
  double estimate = 0.0;
  std::vector<double> weights;  // sum to one
  double variance = 0.0;        // (1' Sigma^{-1} 1)^{-1}
};

/// Cholesky solve of Sigma x = 1; g = x / 1'x; estimate = g'Y. Throws
/// kFactorization when Sigma is not positive definite.
GlsResult gls_solve(const CovarianceMatrix& sigma, std::span<const double> y);

/// GLS under the rank-two model via the closed form (no factorization).
GlsResult gls_ranktwo(const ReferralTree& tree, double beta2, double lambda,
                      std::span<const double> y);

/// Limit of n Var(GLS) under the rank-two model: beta2 (1+lambda)/(1-lambda).
double theorem2_limit(double lambda, double beta2);

/// gamma_a solving sum_a gamma_a lambda_l^{a-1} = [l == 1]. The first
/// eigenvalue must be 1 and all must be distinct (else
/// kReducedSystemUnsupported).
std::vector<double> vandermonde_weights(std::span<const double> eigenvalues);

/// Average over disjoint downward runs of length K (one per node at depth
/// height-K+1 that has such a run, following first children) of
/// sum_a gamma_a Y_{run[a]}. Throws kInsufficientDepth when no run exists.
double vandermonde_estimator(const ReferralTree& tree, std::span<const double> y,
                             std::span<const double> eigenvalues);

/// Eigenvalues whose coefficient |beta_l| exceeds tol; lambda_1 always kept.
std::vector<double> active_eigenvalues(const Eigen::VectorXd& beta,
                                       const Eigen::VectorXd& eigenvalues,
                                       double tol = 1e-10);

/// 1 / lambda2^2, or +infinity when lambda2 = 0.
double critical_threshold(double lambda2);

}  // namespace rdsgls
