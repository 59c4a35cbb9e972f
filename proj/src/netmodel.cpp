#include "rdsgls/netmodel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <string>

#include "rdsgls/error.hpp"
#include "rdsgls/rng.hpp"

namespace rdsgls {

// ---------------------------------------------------------------------------
// WeightedGraph

WeightedGraph WeightedGraph::from_edges(int num_nodes,
                                        std::span<const Edge> edges) {
  if (num_nodes <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "graph needs at least one node");
  }
  WeightedGraph g;
  g.num_nodes_ = num_nodes;
  std::vector<std::size_t> count(num_nodes, 0);
  for (const Edge& e : edges) {
    if (e.u < 0 || e.v < 0 || e.u >= num_nodes || e.v >= num_nodes) {
      throw Error(ErrorCode::kInvalidArgument,
                  "edge (" + std::to_string(e.u) + "," + std::to_string(e.v) +
                      ") references a node outside [0," +
                      std::to_string(num_nodes) + ")");
    }
    if (!(e.w > 0.0) || !std::isfinite(e.w)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "edge (" + std::to_string(e.u) + "," + std::to_string(e.v) +
                      ") has a nonpositive weight");
    }
    ++count[e.u];
    if (e.u != e.v) ++count[e.v];
  }
  g.offsets_.assign(num_nodes + 1, 0);
  for (int i = 0; i < num_nodes; ++i) g.offsets_[i + 1] = g.offsets_[i] + count[i];
  g.adj_.resize(g.offsets_.back());
  g.w_.resize(g.offsets_.back());
  std::vector<std::size_t> fill(g.offsets_.begin(), g.offsets_.end() - 1);
  for (const Edge& e : edges) {
    g.adj_[fill[e.u]] = e.v;
    g.w_[fill[e.u]++] = e.w;
    if (e.u != e.v) {
      g.adj_[fill[e.v]] = e.u;
      g.w_[fill[e.v]++] = e.w;
    }
  }
  g.degree_.assign(num_nodes, 0.0);
  g.contacts_.assign(num_nodes, 0);
  std::vector<std::pair<int, double>> row;
  for (int i = 0; i < num_nodes; ++i) {
    const std::size_t b = g.offsets_[i], e = g.offsets_[i + 1];
    row.clear();
    for (std::size_t k = b; k < e; ++k) row.emplace_back(g.adj_[k], g.w_[k]);
    std::sort(row.begin(), row.end());
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k > 0 && row[k].first == row[k - 1].first) {
        throw Error(ErrorCode::kInvalidArgument,
                    "duplicate edge between nodes " + std::to_string(i) +
                        " and " + std::to_string(row[k].first));
      }
      g.adj_[b + k] = row[k].first;
      g.w_[b + k] = row[k].second;
      g.degree_[i] += row[k].second;
      if (row[k].first != i) ++g.contacts_[i];
    }
  }
  g.num_edges_ = edges.size();
  return g;
}

double WeightedGraph::weight(int i, int j) const {
  auto nb = neighbors(i);
  auto it = std::lower_bound(nb.begin(), nb.end(), j);
  if (it == nb.end() || *it != j) return 0.0;
  return w_[offsets_[i] + static_cast<std::size_t>(it - nb.begin())];
}

std::vector<Edge> WeightedGraph::edges() const {
  std::vector<Edge> out;
  out.reserve(num_edges_);
  for (int i = 0; i < num_nodes_; ++i) {
    auto nb = neighbors(i);
    auto wt = weights(i);
    for (std::size_t k = 0; k < nb.size(); ++k) {
      if (nb[k] >= i) out.push_back({i, nb[k], wt[k]});
    }
  }
  return out;
}

Component largest_component(const WeightedGraph& graph) {
  const int n = graph.num_nodes();
  std::vector<int> comp(n, -1);
  int best = -1;
  std::size_t best_size = 0;
  std::vector<int> queue;
  for (int s = 0, c = 0; s < n; ++s) {
    if (comp[s] >= 0) continue;
    queue.assign(1, s);
    comp[s] = c;
    for (std::size_t h = 0; h < queue.size(); ++h) {
      for (int v : graph.neighbors(queue[h])) {
        if (comp[v] < 0) {
          comp[v] = c;
          queue.push_back(v);
        }
      }
    }
    if (queue.size() > best_size) {
      best_size = queue.size();
      best = c;
    }
    ++c;
  }
  Component out;
  std::vector<int> new_id(n, -1);
  for (int i = 0; i < n; ++i) {
    if (comp[i] == best) {
      new_id[i] = static_cast<int>(out.original_id.size());
      out.original_id.push_back(i);
    }
  }
  std::vector<Edge> kept;
  for (const Edge& e : graph.edges()) {
    if (new_id[e.u] >= 0) kept.push_back({new_id[e.u], new_id[e.v], e.w});
  }
  out.graph = WeightedGraph::from_edges(static_cast<int>(out.original_id.size()), kept);
  return out;
}

// ---------------------------------------------------------------------------
// DC-SBM parameters

void DcSbmParams::validate() const {
  const int K = num_blocks();
  if (B.cols() != K || K == 0) {
    throw Error(ErrorCode::kInvalidParameters, "B must be square and nonempty");
  }
  if (theta.size() != z.size()) {
    throw Error(ErrorCode::kInvalidParameters, "theta and z differ in length");
  }
  for (int u = 0; u < K; ++u) {
    for (int v = 0; v < K; ++v) {
      if (B(u, v) < 0.0 || B(u, v) != B(v, u)) {
        throw Error(ErrorCode::kInvalidParameters,
                    "B must be symmetric and nonnegative");
      }
    }
  }
  std::vector<double> sums(K, 0.0);
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (z[i] < 0 || z[i] >= K) {
      throw Error(ErrorCode::kInvalidParameters,
                  "node " + std::to_string(i) + " has a label outside [0,K)");
    }
    if (!(theta[i] > 0.0)) {
      throw Error(ErrorCode::kInvalidParameters,
                  "theta must be positive (node " + std::to_string(i) + ")");
    }
    sums[z[i]] += theta[i];
  }
  for (int u = 0; u < K; ++u) {
    if (std::abs(sums[u] - 1.0) > 1e-9) {
      throw Error(ErrorCode::kInvalidParameters,
                  "theta does not sum to one in block " + std::to_string(u));
    }
  }
  if (max_edge_probability() > 1.0) {
    throw Error(ErrorCode::kInvalidParameters,
                "some edge probability theta_i theta_j B exceeds one");
  }
}

double DcSbmParams::max_edge_probability() const {
  const int K = num_blocks();
  // Two largest theta per block handle the i != j restriction within a block.
  std::vector<double> top1(K, 0.0), top2(K, 0.0);
  for (std::size_t i = 0; i < z.size(); ++i) {
    const int u = z[i];
    if (theta[i] > top1[u]) {
      top2[u] = top1[u];
      top1[u] = theta[i];
    } else if (theta[i] > top2[u]) {
      top2[u] = theta[i];
    }
  }
  double best = 0.0;
  for (int u = 0; u < K; ++u) {
    best = std::max(best, top1[u] * top2[u] * B(u, u));
    for (int v = u + 1; v < K; ++v) best = std::max(best, top1[u] * top1[v] * B(u, v));
  }
  return best;
}

// ---------------------------------------------------------------------------
// TransitionModel

void TransitionModel::finalize() {
  cdf_.resize(probs_.size());
  for (int i = 0; i < n_; ++i) {
    double acc = 0.0;
    for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k) {
      acc += probs_[k];
      cdf_[k] = acc;
    }
  }
  pi_cdf_.resize(n_);
  std::partial_sum(pi_.begin(), pi_.end(), pi_cdf_.begin());
}

TransitionModel build_transition(const WeightedGraph& graph) {
  const int n = graph.num_nodes();
  TransitionModel t;
  t.n_ = n;
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    if (!(graph.degree(i) > 0.0)) {
      throw Error(ErrorCode::kDegenerateNode,
                  "node " + std::to_string(i) + " has zero degree");
    }
    total += graph.degree(i);
  }
  t.offsets_.assign(n + 1, 0);
  for (int i = 0; i < n; ++i) {
    const double deg = graph.degree(i);
    auto nb = graph.neighbors(i);
    auto wt = graph.weights(i);
    for (std::size_t k = 0; k < nb.size(); ++k) {
      t.cols_.push_back(nb[k]);
      t.probs_.push_back(wt[k] / deg);
    }
    t.offsets_[i + 1] = t.cols_.size();
    t.pi_.push_back(deg / total);
    t.contacts_.push_back(graph.contact_count(i));
  }
  t.finalize();
  return t;
}

TransitionModel TransitionModel::from_dense(const Eigen::MatrixXd& P,
                                            std::span<const double> pi) {
  const int n = static_cast<int>(P.rows());
  if (P.cols() != n || static_cast<int>(pi.size()) != n) {
    throw Error(ErrorCode::kInvalidArgument, "P must be square and match pi");
  }
  TransitionModel t;
  t.n_ = n;
  t.offsets_.assign(n + 1, 0);
  for (int i = 0; i < n; ++i) {
    int contacts = 0;
    for (int j = 0; j < n; ++j) {
      if (P(i, j) < 0.0) {
        throw Error(ErrorCode::kInvalidArgument, "negative transition probability");
      }
      if (P(i, j) > 0.0) {
        t.cols_.push_back(j);
        t.probs_.push_back(P(i, j));
        if (j != i) ++contacts;
      }
    }
    if (std::abs(P.row(i).sum() - 1.0) > 1e-12) {
      throw Error(ErrorCode::kInvalidArgument,
                  "row " + std::to_string(i) + " of P does not sum to one");
    }
    t.offsets_[i + 1] = t.cols_.size();
    t.contacts_.push_back(contacts);
  }
  t.pi_.assign(pi.begin(), pi.end());
  t.finalize();
  return t;
}

Eigen::MatrixXd TransitionModel::dense() const {
  if (n_ > kDenseLimit) {
    throw Error(ErrorCode::kCapacity,
                "dense transition matrix requested for N > " +
                    std::to_string(kDenseLimit));
  }
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n_, n_);
  for (int i = 0; i < n_; ++i) {
    for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k) P(i, cols_[k]) = probs_[k];
  }
  return P;
}

double TransitionModel::row_sum_error() const {
  double worst = 0.0;
  for (int i = 0; i < n_; ++i) {
    double s = 0.0;
    for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k) s += probs_[k];
    worst = std::max(worst, std::abs(s - 1.0));
  }
  return worst;
}

double TransitionModel::detailed_balance_error() const {
  double worst = 0.0;
  for (int i = 0; i < n_; ++i) {
    for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k) {
      const int j = cols_[k];
      auto cj = row_states(j);
      auto it = std::lower_bound(cj.begin(), cj.end(), i);
      double pji = 0.0;
      if (it != cj.end() && *it == i) pji = probs_[offsets_[j] + (it - cj.begin())];
      worst = std::max(worst, std::abs(pi_[i] * probs_[k] - pi_[j] * pji));
    }
  }
  return worst;
}

bool TransitionModel::irreducible() const {
  if (n_ == 0) return false;
  // Forward reachability from 0 on P and on its transpose.
  std::vector<std::vector<int>> reverse(n_);
  for (int i = 0; i < n_; ++i) {
    for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k) {
      if (probs_[k] > 0.0) reverse[cols_[k]].push_back(i);
    }
  }
  auto reach = [&](bool forward) {
    std::vector<char> seen(n_, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
      const int i = stack.back();
      stack.pop_back();
      auto visit = [&](int j) {
        if (!seen[j]) {
          seen[j] = 1;
          ++count;
          stack.push_back(j);
        }
      };
      if (forward) {
        for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k) {
          if (probs_[k] > 0.0) visit(cols_[k]);
        }
      } else {
        for (int j : reverse[i]) visit(j);
      }
    }
    return count == n_;
  };
  return reach(true) && reach(false);
}

// ---------------------------------------------------------------------------
// Spectra

namespace detail {

std::vector<int> spectral_order(const Eigen::VectorXd& values) {
  const int n = static_cast<int>(values.size());
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  if (n == 0) return idx;
  int top = 0;
  for (int i = 1; i < n; ++i) {
    if (values[i] > values[top]) top = i;
  }
  std::swap(idx[0], idx[top]);
  constexpr double kTie = 1e-12;
  std::stable_sort(idx.begin() + 1, idx.end(), [&](int a, int b) {
    const double ma = std::abs(values[a]), mb = std::abs(values[b]);
    if (std::abs(ma - mb) > kTie) return ma > mb;
    return values[a] > values[b];
  });
  return idx;
}

void fix_signs(Eigen::MatrixXd& vectors) {
  for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
    const double scale = vectors.col(c).cwiseAbs().maxCoeff();
    for (Eigen::Index r = 0; r < vectors.rows(); ++r) {
      if (std::abs(vectors(r, c)) > 1e-10 * scale) {
        if (vectors(r, c) < 0.0) vectors.col(c) *= -1.0;
        break;
      }
    }
  }
}

}  // namespace detail

SpectralDecomp spectral_decompose(const TransitionModel& model) {
  const int n = model.num_states();
  if (n > kDenseLimit) {
    throw Error(ErrorCode::kCapacity,
                "spectral_decompose is dense; N exceeds " + std::to_string(kDenseLimit));
  }
  const double balance = model.detailed_balance_error();
  if (!(balance < 1e-10)) {
    throw Error(ErrorCode::kReversibilityViolation,
                "detailed balance fails (max error " + std::to_string(balance) + ")");
  }
  auto pi = model.pi();
  Eigen::VectorXd sqrt_pi(n);
  for (int i = 0; i < n; ++i) {
    if (!(pi[i] > 0.0)) {
      throw Error(ErrorCode::kDegenerateNode,
                  "stationary mass of node " + std::to_string(i) + " is zero");
    }
    sqrt_pi[i] = std::sqrt(pi[i]);
  }
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    auto cols = model.row_states(i);
    auto probs = model.row_probs(i);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      S(i, cols[k]) = sqrt_pi[i] * probs[k] / sqrt_pi[cols[k]];
    }
  }
  // Average with the transpose to remove rounding asymmetry.
  S = 0.5 * (S + S.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(S);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::kFactorization, "symmetric eigensolver failed");
  }
  const auto order = detail::spectral_order(solver.eigenvalues());
  SpectralDecomp out;
  out.eigenvalues.resize(n);
  out.f.resize(n, n);
  out.pi = Eigen::Map<const Eigen::VectorXd>(pi.data(), n);
  for (int c = 0; c < n; ++c) {
    out.eigenvalues[c] = solver.eigenvalues()[order[c]];
    out.f.col(c) = solver.eigenvectors().col(order[c]).cwiseQuotient(sqrt_pi);
  }
  detail::fix_signs(out.f);
  return out;
}

Eigen::VectorXd beta_coefficients(std::span<const double> y,
                                  const SpectralDecomp& spec) {
  const auto n = spec.f.rows();
  if (static_cast<Eigen::Index>(y.size()) != n) {
    throw Error(ErrorCode::kInvalidArgument, "y length does not match the state space");
  }
  Eigen::VectorXd weighted(n);
  for (Eigen::Index i = 0; i < n; ++i) weighted[i] = y[i] * spec.pi[i];
  return spec.f.transpose() * weighted;
}

ExpectedChain dcsbm_expected_matrices(const DcSbmParams& params) {
  params.validate();
  const int n = params.num_nodes();
  if (n > kDenseLimit) {
    throw Error(ErrorCode::kCapacity,
                "expected matrices are dense; N exceeds " + std::to_string(kDenseLimit));
  }
  ExpectedChain out;
  out.A.resize(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      out.A(i, j) = params.theta[i] * params.theta[j] * params.B(params.z[i], params.z[j]);
    }
  }
  const Eigen::VectorXd deg = out.A.rowwise().sum();
  for (int i = 0; i < n; ++i) {
    if (!(deg[i] > 0.0)) {
      throw Error(ErrorCode::kDegenerateBlock,
                  "block " + std::to_string(params.z[i]) + " has zero expected degree");
    }
  }
  out.m = params.B.sum();
  out.P = deg.cwiseInverse().asDiagonal() * out.A;
  out.pi = deg / out.m;
  return out;
}

WeightedGraph expected_graph(const ExpectedChain& chain) {
  const int n = static_cast<int>(chain.A.rows());
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      if (chain.A(i, j) > 0.0) edges.push_back({i, j, chain.A(i, j)});
    }
  }
  return WeightedGraph::from_edges(n, edges);
}

WeightedGraph dcsbm_sample(const DcSbmParams& params, std::uint64_t seed) {
  params.validate();
  const int n = params.num_nodes();
  const int K = params.num_blocks();
  Rng rng(seed, 0);
  std::vector<std::vector<int>> members(K);
  std::vector<double> theta_max(K, 0.0);
  for (int i = 0; i < n; ++i) {
    members[params.z[i]].push_back(i);
    theta_max[params.z[i]] = std::max(theta_max[params.z[i]], params.theta[i]);
  }
  std::vector<Edge> edges;
  // For node i and block v, walk the candidates in v with geometric skips at
  // the envelope rate p_max = theta_i theta_max(v) B, then thin each
  // candidate to its exact probability.
  for (int u = 0; u < K; ++u) {
    for (int v = u; v < K; ++v) {
      const double b = params.B(u, v);
      if (b <= 0.0) continue;
      const auto& targets = members[v];
      for (int i : members[u]) {
        std::size_t start = 0;
        if (u == v) {
          start = static_cast<std::size_t>(
                      std::upper_bound(targets.begin(), targets.end(), i) -
                      targets.begin());
        }
        const double p_max = std::min(1.0, params.theta[i] * theta_max[v] * b);
        if (p_max <= 0.0) continue;
        const double log_q = std::log1p(-p_max);
        std::size_t k = start;
        while (k < targets.size()) {
          if (p_max < 1.0) {
            const double skip = std::floor(std::log(rng.uniform_pos()) / log_q);
            if (skip >= static_cast<double>(targets.size() - k)) break;
            k += static_cast<std::size_t>(skip);
          }
          const int j = targets[k];
          const double p = params.theta[i] * params.theta[j] * b;
          if (p >= p_max || rng.uniform() * p_max < p) edges.push_back({i, j, 1.0});
          ++k;
        }
      }
    }
  }
  return WeightedGraph::from_edges(n, edges);
}

BlockSpectrum blockmodel_spectrum(const Eigen::MatrixXd& B, std::span<const int> z) {
  const auto K = B.rows();
  if (B.cols() != K || K == 0) {
    throw Error(ErrorCode::kInvalidArgument, "B must be square and nonempty");
  }
  if ((B - B.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, B.cwiseAbs().maxCoeff()) ||
      B.minCoeff() < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "B must be symmetric and nonnegative");
  }
  const Eigen::VectorXd rows = B.rowwise().sum();
  for (Eigen::Index u = 0; u < K; ++u) {
    if (!(rows[u] > 0.0)) {
      throw Error(ErrorCode::kDegenerateBlock,
                  "block " + std::to_string(u) + " has a zero row sum in B");
    }
  }
  BlockSpectrum out;
  out.m = B.sum();
  const Eigen::VectorXd inv_sqrt = rows.cwiseSqrt().cwiseInverse();
  out.B_L = inv_sqrt.asDiagonal() * B * inv_sqrt.asDiagonal();
  out.B_L = 0.5 * (out.B_L + out.B_L.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(out.B_L);
  const auto order = detail::spectral_order(solver.eigenvalues());
  out.Lambda.resize(K);
  out.U.resize(K, K);
  for (Eigen::Index c = 0; c < K; ++c) {
    out.Lambda[c] = solver.eigenvalues()[order[c]];
    out.U.col(c) = solver.eigenvectors().col(order[c]);
  }
  detail::fix_signs(out.U);
  if (!z.empty()) {
    const Eigen::MatrixXd rows_of_f = std::sqrt(out.m) * inv_sqrt.asDiagonal() * out.U;
    out.f_star.resize(static_cast<Eigen::Index>(z.size()), K);
    for (std::size_t i = 0; i < z.size(); ++i) {
      if (z[i] < 0 || z[i] >= K) {
        throw Error(ErrorCode::kInvalidArgument, "label outside [0,K)");
      }
      out.f_star.row(static_cast<Eigen::Index>(i)) = rows_of_f.row(z[i]);
    }
  }
  return out;
}

double second_eigenvalue_sparse(const TransitionModel& model, std::uint64_t seed,
                                int max_iter, double tol) {
  const int n = model.num_states();
  auto pi = model.pi();
  // Iterate on S = Pi^{1/2} P Pi^{-1/2}, deflating its top eigenvector sqrt(pi).
  Eigen::VectorXd sqrt_pi(n), x(n), y(n);
  for (int i = 0; i < n; ++i) sqrt_pi[i] = std::sqrt(pi[i]);
  Rng rng(seed, 1);
  for (int i = 0; i < n; ++i) x[i] = rng.normal();
  auto deflate = [&](Eigen::VectorXd& v) { v -= sqrt_pi.dot(v) * sqrt_pi; };
  deflate(x);
  x.normalize();
  double rayleigh = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    for (int i = 0; i < n; ++i) {
      auto cols = model.row_states(i);
      auto probs = model.row_probs(i);
      double acc = 0.0;
      for (std::size_t k = 0; k < cols.size(); ++k) acc += probs[k] * x[cols[k]] / sqrt_pi[cols[k]];
      y[i] = sqrt_pi[i] * acc;
    }
    deflate(y);
    const double next = x.dot(y);
    const double norm = y.norm();
    if (norm == 0.0) return 0.0;
    x = y / norm;
    if (it > 10 && std::abs(next - rayleigh) < tol * std::abs(next)) return next;
    rayleigh = next;
  }
  return rayleigh;
}

}  // namespace rdsgls
