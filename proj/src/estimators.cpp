#include "rdsgls/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "rdsgls/error.hpp"
#include "rdsgls/kernels.hpp"

namespace rdsgls {

namespace {

double clamp_eigen(double lambda) { return std::clamp(lambda, -kEigenClamp, kEigenClamp); }

bool is_constant(std::span<const double> y) {
  return std::all_of(y.begin(), y.end(), [&](double v) { return v == y[0]; });
}

EstimateReport trivial_report(std::string name, std::span<const double> y) {
  EstimateReport r;
  r.estimator = std::move(name);
  r.n = static_cast<int>(y.size());
  r.mu_hat = y[0];
  r.weights.assign(y.size(), 1.0 / static_cast<double>(y.size()));
  return r;
}

void require_nonempty(std::span<const double> y) {
  if (y.empty()) throw Error(ErrorCode::kInvalidArgument, "empty sample");
}

void require_matching(const ReferralTree& tree, std::span<const double> y) {
  if (static_cast<int>(y.size()) != tree.size()) {
    throw Error(ErrorCode::kInvalidArgument, "outcome length " + std::to_string(y.size()) +
                                                 " does not match tree size " +
                                                 std::to_string(tree.size()));
  }
  require_nonempty(y);
}

double sample_variance(std::span<const double> y) {
  const double n = static_cast<double>(y.size());
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : y) ss += (v - mean) * (v - mean);
  return ss / (n - 1.0);
}

// Rank-two GLS with the given lambda, plus its RSE on this tree.
void fill_ranktwo(EstimateReport& r, const ReferralTree& tree, std::span<const double> y,
                  double lambda, double beta2) {
  const auto gls = gls_ranktwo(tree, 1.0, lambda, y);
  r.mu_hat = gls.estimate;
  r.weights = gls.weights;
  r.eigenvalues = {lambda};
  r.beta2 = {beta2};
  r.rse = ranktwo_rse(tree_distance_distribution(tree), lambda, r.rse_variant);
}

}  // namespace

LagStatistics lag_statistics(const ReferralTree& tree, std::span<const double> y, double m) {
  require_matching(tree, y);
  const int n = tree.size();
  if (n < 2) throw Error(ErrorCode::kInsufficientDepth, "a single node has no lag-1 pairs");
  LagStatistics s;
  s.count0 = n;
  s.count1 = 2LL * (n - 1);
  double g0 = 0.0, g1 = 0.0, d1 = 0.0, d2 = 0.0;
  for (int t = 0; t < n; ++t) {
    g0 += (y[t] - m) * (y[t] - m);
    const int p = tree.parent(t);
    if (p < 0) continue;
    g1 += 2.0 * (y[t] - m) * (y[p] - m);
    d1 += 2.0 * (y[t] - y[p]) * (y[t] - y[p]);
    const int g = tree.parent(p);
    if (g >= 0) {
      d2 += 2.0 * (y[t] - y[g]) * (y[t] - y[g]);
      s.count2 += 2;
    }
  }
  for (int v = 0; v < n; ++v) {
    const auto kids = tree.children(v);
    const auto c = static_cast<long long>(kids.size());
    if (c < 2) continue;
    double sum = 0.0, sum_sq = 0.0;
    for (int k : kids) {
      sum += y[k];
      sum_sq += y[k] * y[k];
    }
    // Sum over ordered sibling pairs of squared differences.
    d2 += std::max(0.0, 2.0 * (static_cast<double>(c) * sum_sq - sum * sum));
    s.count2 += c * (c - 1);
  }
  s.gamma0 = g0 / static_cast<double>(s.count0);
  s.gamma1 = g1 / static_cast<double>(s.count1);
  s.delta1 = d1 / static_cast<double>(s.count1);
  if (s.count2 > 0) s.delta2 = d2 / static_cast<double>(s.count2);
  return s;
}

EstimateReport mean_estimator(std::span<const double> y) {
  require_nonempty(y);
  auto r = trivial_report("mean", y);
  r.mu_hat = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  if (y.size() == 1) r.mu_hat = y[0];
  return r;
}

EstimateReport mean_estimator(const RdsSample& sample) {
  auto r = mean_estimator(sample.y);
  r.restarts = sample.restarts;
  return r;
}

EstimateReport vh_estimator(std::span<const double> y, std::span<const double> degree) {
  require_nonempty(y);
  if (degree.size() != y.size()) {
    throw Error(ErrorCode::kInvalidArgument, "degree column length does not match outcomes");
  }
  EstimateReport r;
  r.estimator = "vh";
  r.n = static_cast<int>(y.size());
  r.weights.resize(y.size());
  double total = 0.0;
  for (std::size_t t = 0; t < y.size(); ++t) {
    if (!(degree[t] > 0.0)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "participant " + std::to_string(t) + " reports nonpositive degree");
    }
    r.weights[t] = 1.0 / degree[t];
    total += r.weights[t];
  }
  r.mu_hat = 0.0;
  for (std::size_t t = 0; t < y.size(); ++t) {
    r.weights[t] /= total;
    r.mu_hat += r.weights[t] * y[t];
  }
  if (y.size() == 1) r.mu_hat = y[0];
  return r;
}

EstimateReport vh_estimator(const RdsSample& sample) {
  auto r = vh_estimator(sample.y, sample.degree);
  r.restarts = sample.restarts;
  return r;
}

EstimateReport auto_fgls(const ReferralTree& tree, std::span<const double> y) {
  require_matching(tree, y);
  const int n = tree.size();
  if (n == 1 || is_constant(y)) {
    auto r = trivial_report("auto", y);
    if (n > 1) fill_ranktwo(r, tree, y, 0.0, 0.0);
    r.mu_hat = y[0];
    return r;
  }
  // gamma_m(0) and gamma_m(1) are quadratics in m; so is the rank-two GLS
  // numerator, whose weights are (1 - lambda (deg - 1)) / (1 + lambda).
  double s1 = 0.0, s2 = 0.0, cross = 0.0, edge_sum = 0.0, a = 0.0;
  for (int t = 0; t < n; ++t) {
    s1 += y[t];
    s2 += y[t] * y[t];
    a += (tree.degree(t) - 1) * y[t];
    const int p = tree.parent(t);
    if (p >= 0) {
      cross += 2.0 * y[t] * y[p];
      edge_sum += 2.0 * (y[t] + y[p]);
    }
  }
  const double nn = n;
  const double c1 = 2.0 * (nn - 1.0);
  const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
  double best_gap = std::numeric_limits<double>::infinity();
  double best_lambda = 0.0, best_g0 = 0.0;
  for (int k = 0; k < kAutoGridPoints; ++k) {
    const double m = *lo + (*hi - *lo) * k / (kAutoGridPoints - 1.0);
    const double g0 = (s2 - 2.0 * m * s1 + nn * m * m) / nn;
    const double g1 = (cross - m * edge_sum + c1 * m * m) / c1;
    if (!(g0 > 0.0)) continue;
    const double lambda = clamp_eigen(g1 / g0);
    const double mu = (s1 - lambda * a) / (nn - lambda * (nn - 2.0));
    const double gap = std::abs(mu - m);
    if (gap < best_gap) {
      best_gap = gap;
      best_lambda = lambda;
      best_g0 = g0;
    }
  }
  EstimateReport r;
  r.estimator = "auto";
  r.n = n;
  if (!std::isfinite(best_gap)) {
    r = mean_estimator(y);
    r.estimator = "auto";
    r.warnings.push_back("auto-fGLS grid search failed; returned the sample mean");
    return r;
  }
  fill_ranktwo(r, tree, y, best_lambda, best_g0);
  return r;
}

EstimateReport auto_fgls(const RdsSample& sample) {
  auto r = auto_fgls(sample.tree, sample.y);
  r.restarts = sample.restarts;
  return r;
}

EstimateReport delta_fgls(const ReferralTree& tree, std::span<const double> y) {
  require_matching(tree, y);
  const int n = tree.size();
  if (n == 1) return trivial_report("delta", y);
  const auto stats = lag_statistics(tree, y, 0.0);
  if (stats.count2 == 0) {
    throw Error(ErrorCode::kInsufficientDepth, "tree has no pairs at distance 2");
  }
  const double lambda = clamp_eigen((stats.delta2 - stats.delta1) /
                                    (stats.delta1 + 1.0 / std::sqrt(static_cast<double>(n))));
  EstimateReport r;
  r.estimator = "delta";
  r.n = n;
  fill_ranktwo(r, tree, y, lambda, 1.0);
  r.beta2.clear();
  return r;
}

EstimateReport delta_fgls(const RdsSample& sample) {
  auto r = delta_fgls(sample.tree, sample.y);
  r.restarts = sample.restarts;
  return r;
}

SbmSpectrum sbm_spectrum(const Eigen::MatrixXd& Q) {
  if (Q.rows() != Q.cols() || Q.rows() == 0) {
    throw Error(ErrorCode::kInvalidArgument, "referral count matrix must be square");
  }
  SbmSpectrum s;
  s.Q_sym = (Q + Q.transpose()) / 2.0;
  s.d = s.Q_sym.rowwise().sum();
  for (Eigen::Index k = 0; k < s.d.size(); ++k) {
    if (!(s.d[k] > 0.0)) {
      throw Error(ErrorCode::kDegenerateBlock,
                  "block " + std::to_string(k) + " has no referrals in or out");
    }
  }
  const Eigen::VectorXd inv_sqrt = s.d.cwiseSqrt().cwiseInverse();
  s.Q_L = inv_sqrt.asDiagonal() * s.Q_sym * inv_sqrt.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(s.Q_L);
  const auto order = detail::spectral_order(solver.eigenvalues());
  const auto K = s.Q_L.rows();
  s.Lambda.resize(K);
  s.U.resize(K, K);
  for (Eigen::Index l = 0; l < K; ++l) {
    s.Lambda[l] = solver.eigenvalues()[order[l]];
    s.U.col(l) = solver.eigenvectors().col(order[l]);
  }
  detail::fix_signs(s.U);
  return s;
}

AutoCovariance sbm_autocovariance(const SbmSpectrum& spectrum, std::span<const int> labels,
                                  std::span<const double> y, double nugget) {
  const auto K = spectrum.Lambda.size();
  Eigen::VectorXd block_sum = Eigen::VectorXd::Zero(K);
  for (std::size_t t = 0; t < labels.size(); ++t) block_sum[labels[t]] += y[t];
  const double n = static_cast<double>(labels.size());
  AutoCovariance ac;
  ac.nugget = nugget;
  for (Eigen::Index l = 0; l < K; ++l) {
    double beta = 0.0;
    for (Eigen::Index k = 0; k < K; ++k) {
      beta += block_sum[k] * spectrum.U(k, l) / std::sqrt(spectrum.d[k]);
    }
    beta /= n;
    // The leading mode is exactly 1 by construction. Left unclamped it adds a
    // constant to Sigma, which the nugget keeps PD and which GLS ignores.
    const double lambda = l == 0 ? 1.0 : clamp_eigen(spectrum.Lambda[l]);
    ac.terms.push_back({beta * beta, lambda});
  }
  return ac;
}

EstimateReport sbm_fgls(const ReferralTree& tree, std::span<const double> y,
                        std::span<const int> labels, int K) {
  require_matching(tree, y);
  if (K < 1) throw Error(ErrorCode::kInvalidArgument, "K must be at least 1");
  const int n = tree.size();
  if (static_cast<int>(labels.size()) != n) {
    throw Error(ErrorCode::kMissingLabel, "sample has no block labels");
  }
  std::vector<int> visits(K, 0);
  for (int t = 0; t < n; ++t) {
    if (labels[t] < 0 || labels[t] >= K) {
      throw Error(ErrorCode::kMissingLabel, "participant " + std::to_string(t) +
                                                " has no block label in [0," +
                                                std::to_string(K) + ")");
    }
    ++visits[labels[t]];
  }
  EstimateReport r;
  r.estimator = "sbm";
  r.n = n;
  std::vector<int> remap(K, -1);
  int kept = 0;
  for (int k = 0; k < K; ++k) {
    if (visits[k] > 0) {
      remap[k] = kept++;
    } else {
      r.warnings.push_back("block " + std::to_string(k) + " has no sampled nodes; dropped");
    }
  }
  r.K = kept;
  if (n == 1 || is_constant(y)) {
    r.mu_hat = y[0];
    r.weights.assign(n, 1.0 / n);
    return r;
  }
  std::vector<int> z(n);
  for (int t = 0; t < n; ++t) z[t] = remap[labels[t]];

  const auto spectrum = sbm_spectrum(referral_counts(tree, z, kept));
  const auto ac = sbm_autocovariance(spectrum, z, y, sample_variance(y));
  const auto sigma = build_sigma(tree, ac);
  const auto gls = gls_solve(sigma, y);
  r.mu_hat = gls.estimate;
  r.weights = gls.weights;
  r.nugget = ac.nugget;
  for (std::size_t l = 1; l < ac.terms.size(); ++l) {
    r.eigenvalues.push_back(ac.terms[l].lambda);
    r.beta2.push_back(ac.terms[l].beta2);
  }
  r.rse = rse_from_forms(1.0 / gls.variance, sigma.values.sum(), n, r.rse_variant);
  return r;
}

EstimateReport sbm_fgls(const RdsSample& sample, std::span<const int> labels, int K) {
  auto r = sbm_fgls(sample.tree, sample.y, labels, K);
  r.restarts = sample.restarts;
  return r;
}

namespace {

Reweighted apply_weights(const RdsSample& sample, double h_inv) {
  Reweighted out;
  out.sample = sample;
  out.h_inv = h_inv;
  for (std::size_t t = 0; t < sample.y.size(); ++t) {
    out.sample.y[t] = sample.y[t] / (h_inv * sample.degree[t]);
  }
  return out;
}

std::vector<double> inverse_degrees(const RdsSample& sample) {
  if (sample.degree.size() != sample.y.size()) {
    throw Error(ErrorCode::kInvalidArgument, "sample has no degree column");
  }
  std::vector<double> inv(sample.degree.size());
  for (std::size_t t = 0; t < inv.size(); ++t) {
    if (!(sample.degree[t] > 0.0)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "participant " + std::to_string(t) + " reports nonpositive degree");
    }
    inv[t] = 1.0 / sample.degree[t];
  }
  return inv;
}

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

Reweighted fgls_reweight(const RdsSample& sample, std::span<const int> labels, int K) {
  const auto inv = inverse_degrees(sample);
  const auto est = sbm_fgls(sample.tree, inv, labels, K);
  double h_inv = est.mu_hat;
  std::vector<std::string> warnings = est.warnings;
  if (!(h_inv > 0.0)) {
    warnings.push_back("fGLS normalizing constant is not positive; used the harmonic mean");
    h_inv = mean_of(inv);
  }
  auto out = apply_weights(sample, h_inv);
  out.warnings = std::move(warnings);
  return out;
}

Reweighted vh_reweight(const RdsSample& sample) {
  return apply_weights(sample, mean_of(inverse_degrees(sample)));
}

EstimateReport oracle_gls(const RdsSample& sample, const SpectralDecomp& spec,
                          std::span<const double> y_population) {
  const auto& y = sample.y;
  require_matching(sample.tree, y);
  const auto beta = beta_coefficients(y_population, spec);
  const auto ac = AutoCovariance::from_spectrum(beta, spec.eigenvalues);
  double total = 0.0;
  for (const auto& t : ac.terms) total += t.beta2;
  if (sample.size() == 1 || total == 0.0) {
    auto r = trivial_report("oracle", y);
    r.mu_hat = mean_estimator(y).mu_hat;
    return r;
  }
  const auto sigma = build_sigma(sample.tree, ac);
  const auto gls = gls_solve(sigma, y);
  EstimateReport r;
  r.estimator = "oracle";
  r.n = sample.size();
  r.mu_hat = gls.estimate;
  r.weights = gls.weights;
  r.restarts = sample.restarts;
  for (const auto& t : ac.terms) {
    r.eigenvalues.push_back(t.lambda);
    r.beta2.push_back(t.beta2);
  }
  r.rse = rse_from_forms(1.0 / gls.variance, sigma.values.sum(), r.n, r.rse_variant);
  return r;
}

std::vector<int> labels_from_values(std::span<const double> y, int* num_labels) {
  std::vector<double> values(y.begin(), y.end());
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  std::vector<int> labels(y.size());
  for (std::size_t t = 0; t < y.size(); ++t) {
    labels[t] = static_cast<int>(std::lower_bound(values.begin(), values.end(), y[t]) -
                                 values.begin());
  }
  if (num_labels != nullptr) *num_labels = static_cast<int>(values.size());
  return labels;
}

}  // namespace rdsgls
