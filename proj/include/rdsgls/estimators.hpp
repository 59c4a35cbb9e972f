#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "rdsgls/covariance.hpp"
#include "rdsgls/diagnostics.hpp"
#include "rdsgls/netmodel.hpp"
#include "rdsgls/sampler.hpp"

namespace rdsgls {

struct EstimateReport {
  std::string estimator;
  double mu_hat = 0.0;
  std::vector<double> eigenvalues;  // non-leading, after clamping
  std::vector<double> beta2;        // paired with `eigenvalues`
  double nugget = 0.0;
  double rse = std::numeric_limits<double>::quiet_NaN();  // NaN: not defined
  RseVariant rse_variant = RseVariant::kAsPrinted;
  std::vector<double> weights;  // empty, or sums to one
  int n = 0;
  int K = 0;
  std::uint64_t seed = 0;
  int restarts = 0;
  std::vector<std::string> warnings;
};

/// Lag-k moments over ordered pairs: D_0 is the diagonal, D_1 the tree
/// edges in both directions, D_2 grandparent pairs in both directions plus
/// ordered sibling pairs.
struct LagStatistics {
  long long count0 = 0;
  long long count1 = 0;
  long long count2 = 0;
  double gamma0 = 0.0;  // centered at m
  double gamma1 = 0.0;
  double delta1 = 0.0;  // mean squared difference, no centering
  double delta2 = 0.0;
};

/// Throws kInsufficientDepth when D_1 is empty. delta2 is left at zero
/// when D_2 is empty; callers needing it check count2.
LagStatistics lag_statistics(const ReferralTree& tree, std::span<const double> y, double m);

inline constexpr double kEigenClamp = 0.999;
inline constexpr int kAutoGridPoints = 401;

EstimateReport mean_estimator(std::span<const double> y);
EstimateReport mean_estimator(const RdsSample& sample);

/// Throws kInvalidArgument for a nonpositive degree.
EstimateReport vh_estimator(std::span<const double> y, std::span<const double> degree);
EstimateReport vh_estimator(const RdsSample& sample);

/// Rank-two fixed point: lambda(m) = gamma_m(1)/gamma_m(0) on a 401-point
/// grid over [min Y, max Y]; returns the GLS estimate closest to its m.
EstimateReport auto_fgls(const ReferralTree& tree, std::span<const double> y);
EstimateReport auto_fgls(const RdsSample& sample);

/// lambda = (Delta(2) - Delta(1)) / (Delta(1) + n^{-1/2}), then rank-two GLS.
EstimateReport delta_fgls(const ReferralTree& tree, std::span<const double> y);
EstimateReport delta_fgls(const RdsSample& sample);

/// Block-level spectral quantities from a referral count matrix.
struct SbmSpectrum {
  Eigen::MatrixXd Q_sym;
  Eigen::VectorXd d;  // row sums of Q_sym
  Eigen::MatrixXd Q_L;
  Eigen::VectorXd Lambda;  // unclamped, leading first
  Eigen::MatrixXd U;
};

/// Symmetrizes, normalizes by the symmetrized row sums and decomposes.
/// Throws kDegenerateBlock on a zero row sum.
SbmSpectrum sbm_spectrum(const Eigen::MatrixXd& Q);

/// f = Z D^{-1/2} U, beta_l = (1/n) sum_t y_t f_l(t), and
/// gamma(d) = sum_l beta_l^2 Lambda_l^d over all K modes. The leading
/// Lambda is taken as exactly 1; the rest are clamped to +-kEigenClamp.
AutoCovariance sbm_autocovariance(const SbmSpectrum& spectrum, std::span<const int> labels,
                                  std::span<const double> y, double nugget);

/// Labels must lie in [0, K). Blocks never visited are dropped with a warning.
EstimateReport sbm_fgls(const ReferralTree& tree, std::span<const double> y,
                        std::span<const int> labels, int K);
EstimateReport sbm_fgls(const RdsSample& sample, std::span<const int> labels, int K);

struct Reweighted {
  RdsSample sample;  // y replaced by Y / (H^{-1} deg)
  double h_inv = 0.0;
  std::vector<std::string> warnings;
};

/// H^{-1} = sbm_fgls on 1/deg; falls back to the harmonic mean when that
/// estimate is not positive.
Reweighted fgls_reweight(const RdsSample& sample, std::span<const int> labels, int K);
/// H^{-1} = mean of 1/deg.
Reweighted vh_reweight(const RdsSample& sample);

/// GLS with the exact covariance of the population chain. y_population
/// is indexed by population node.
EstimateReport oracle_gls(const RdsSample& sample, const SpectralDecomp& spec,
                          std::span<const double> y_population);

/// Dense labels 0..K-1 from distinct outcome values, in increasing order.
std::vector<int> labels_from_values(std::span<const double> y, int* num_labels);

}  // namespace rdsgls
