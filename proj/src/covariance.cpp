#include "rdsgls/covariance.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "rdsgls/error.hpp"

namespace rdsgls {

AutoCovariance AutoCovariance::from_spectrum(const Eigen::VectorXd& beta,
                                             const Eigen::VectorXd& eigenvalues) {
  AutoCovariance ac;
  for (Eigen::Index l = 1; l < beta.size(); ++l) {
    ac.terms.push_back({beta[l] * beta[l], eigenvalues[l]});
  }
  return ac;
}

double gamma_eval(const AutoCovariance& ac, int d) {
  double g = 0.0;
  for (const auto& term : ac.terms) {
    g += term.beta2 * (d == 0 ? 1.0 : std::pow(term.lambda, d));
  }
  if (d == 0) g += ac.nugget;
  return g;
}

std::vector<double> gamma_table(const AutoCovariance& ac, int max_d) {
  std::vector<double> table(max_d + 1, 0.0);
  for (const auto& term : ac.terms) {
    double power = 1.0;
    for (int d = 0; d <= max_d; ++d) {
      table[d] += term.beta2 * power;
      power *= term.lambda;
    }
  }
  return table;
}

CovarianceMatrix build_sigma(const DistanceMatrix& dist, const AutoCovariance& ac) {
  int max_d = 0;
  for (std::uint16_t d : dist.d) max_d = std::max<int>(max_d, d);
  const auto table = gamma_table(ac, max_d);
  return {fill_covariance(dist, table, ac.nugget), ac.nugget};
}

CovarianceMatrix build_sigma(const ReferralTree& tree, const AutoCovariance& ac,
                             int max_n) {
  return build_sigma(all_pairs_distances(tree, max_n), ac);
}

std::vector<double> ranktwo_inverse_apply(const ReferralTree& tree, double beta2,
                                          double lambda, std::span<const double> v) {
  if (!(std::abs(lambda) < 1.0)) {
    throw Error(ErrorCode::kSingular, "rank-two Sigma is singular for |lambda| >= 1");
  }
  if (!(beta2 > 0.0)) throw Error(ErrorCode::kSingular, "rank-two Sigma needs beta2 > 0");
  const int n = tree.size();
  if (static_cast<int>(v.size()) != n) {
    throw Error(ErrorCode::kInvalidArgument, "vector length does not match the tree");
  }
  const double scale = 1.0 / (beta2 * (1.0 - lambda * lambda));
  std::vector<double> out(n);
  for (int s = 0; s < n; ++s) {
    double acc = (1.0 + lambda * lambda * (tree.degree(s) - 1)) * v[s];
    if (s > 0) acc -= lambda * v[tree.parent(s)];
    for (int c : tree.children(s)) acc -= lambda * v[c];
    out[s] = acc * scale;
  }
  return out;
}

std::vector<double> ranktwo_inverse_ones(const ReferralTree& tree, double beta2,
                                         double lambda) {
  if (!(std::abs(lambda) < 1.0)) {
    throw Error(ErrorCode::kSingular, "rank-two Sigma is singular for |lambda| >= 1");
  }
  const double scale = 1.0 / (beta2 * (1.0 + lambda));
  std::vector<double> out(tree.size());
  for (int s = 0; s < tree.size(); ++s) {
    out[s] = (1.0 - lambda * (tree.degree(s) - 1)) * scale;
  }
  return out;
}

double one_sigma_inv_one_ranktwo(int n, double beta2, double lambda) {
  if (!(std::abs(lambda) < 1.0)) {
    throw Error(ErrorCode::kSingular, "rank-two Sigma is singular for |lambda| >= 1");
  }
  const double nn = n;
  return nn * (1.0 - lambda * (1.0 - 2.0 / nn)) / (beta2 * (1.0 + lambda));
}

namespace {

GlsResult finish_gls(std::vector<double> x, std::span<const double> y) {
  const double total = std::accumulate(x.begin(), x.end(), 0.0);
  GlsResult out;
  out.variance = 1.0 / total;
  out.estimate = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] /= total;
    out.estimate += x[i] * y[i];
  }
  out.weights = std::move(x);
  return out;
}

}  // namespace

GlsResult gls_solve(const CovarianceMatrix& sigma, std::span<const double> y) {
  const int n = sigma.size();
  if (static_cast<int>(y.size()) != n) {
    throw Error(ErrorCode::kInvalidArgument, "outcome length does not match Sigma");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(sigma.values);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::kFactorization,
                "Sigma is not positive definite; add a nugget to the diagonal");
  }
  const Eigen::VectorXd x = llt.solve(Eigen::VectorXd::Ones(n));
  if (!x.allFinite() || !(x.sum() > 0.0)) {
    throw Error(ErrorCode::kFactorization,
                "Sigma is numerically singular; add a nugget to the diagonal");
  }
  return finish_gls(std::vector<double>(x.data(), x.data() + n), y);
}

GlsResult gls_ranktwo(const ReferralTree& tree, double beta2, double lambda,
                      std::span<const double> y) {
  if (static_cast<int>(y.size()) != tree.size()) {
    throw Error(ErrorCode::kInvalidArgument, "outcome length does not match the tree");
  }
  return finish_gls(ranktwo_inverse_ones(tree, beta2, lambda), y);
}

double theorem2_limit(double lambda, double beta2) {
  return beta2 * (1.0 + lambda) / (1.0 - lambda);
}

std::vector<double> vandermonde_weights(std::span<const double> eigenvalues) {
  const auto K = static_cast<Eigen::Index>(eigenvalues.size());
  if (K == 0) throw Error(ErrorCode::kInvalidArgument, "no eigenvalues given");
  if (std::abs(eigenvalues[0] - 1.0) > 1e-12) {
    throw Error(ErrorCode::kInvalidArgument, "the first eigenvalue must be 1");
  }
  for (Eigen::Index a = 0; a < K; ++a) {
    for (Eigen::Index b = a + 1; b < K; ++b) {
      if (std::abs(eigenvalues[a] - eigenvalues[b]) < 1e-12) {
        throw Error(ErrorCode::kReducedSystemUnsupported,
                    "repeated eigenvalue " + std::to_string(eigenvalues[a]) +
                        "; only distinct eigenvalues are supported");
      }
    }
  }
  // Row l: lambda_l^0, lambda_l^1, ..., lambda_l^{K-1}.
  Eigen::MatrixXd V(K, K);
  for (Eigen::Index l = 0; l < K; ++l) {
    double power = 1.0;
    for (Eigen::Index a = 0; a < K; ++a) {
      V(l, a) = power;
      power *= eigenvalues[l];
    }
  }
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(K);
  rhs[0] = 1.0;
  const Eigen::VectorXd gamma = V.fullPivLu().solve(rhs);
  return {gamma.data(), gamma.data() + K};
}

double vandermonde_estimator(const ReferralTree& tree, std::span<const double> y,
                             std::span<const double> eigenvalues) {
  const auto weights = vandermonde_weights(eigenvalues);
  const int K = static_cast<int>(weights.size());
  const int start_depth = tree.height() - K + 1;
  if (start_depth < 0) {
    throw Error(ErrorCode::kInsufficientDepth,
                "tree of height " + std::to_string(tree.height()) + " has no run of length " +
                    std::to_string(K));
  }
  double total = 0.0;
  int runs = 0;
  for (int t = 0; t < tree.size(); ++t) {
    if (tree.depth(t) != start_depth) continue;
    double run = 0.0;
    int node = t;
    int a = 0;
    for (; a < K; ++a) {
      run += weights[a] * y[node];
      if (a + 1 < K) {
        auto kids = tree.children(node);
        if (kids.empty()) break;
        node = kids[0];
      }
    }
    if (a == K) {
      total += run;
      ++runs;
    }
  }
  if (runs == 0) {
    throw Error(ErrorCode::kInsufficientDepth, "no downward run of length " + std::to_string(K));
  }
  return total / runs;
}

std::vector<double> active_eigenvalues(const Eigen::VectorXd& beta,
                                       const Eigen::VectorXd& eigenvalues, double tol) {
  std::vector<double> out{eigenvalues[0]};
  for (Eigen::Index l = 1; l < beta.size(); ++l) {
    if (std::abs(beta[l]) > tol) out.push_back(eigenvalues[l]);
  }
  return out;
}

double critical_threshold(double lambda2) {
  if (lambda2 == 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / (lambda2 * lambda2);
}

}  // namespace rdsgls
