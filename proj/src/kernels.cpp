#include "rdsgls/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <limits>
#include <string>

#include "rdsgls/error.hpp"

namespace rdsgls {

namespace {

void check_capacity(const ReferralTree& tree, int max_n) {
  if (tree.size() > max_n) {
    throw Error(ErrorCode::kCapacity,
                "tree with " + std::to_string(tree.size()) +
                    " nodes exceeds the dense limit of " + std::to_string(max_n));
  }
  // Diameter is at most twice the height.
  if (2L * tree.height() > std::numeric_limits<std::uint16_t>::max()) {
    throw Error(ErrorCode::kCapacity, "tree diameter does not fit in 16 bits");
  }
}

// BFS over the undirected tree from `source`, writing one row.
void bfs_row(const ReferralTree& tree, int source, std::uint16_t* row,
             std::vector<int>& queue) {
  const int n = tree.size();
  std::fill(row, row + n, std::numeric_limits<std::uint16_t>::max());
  queue.assign(1, source);
  row[source] = 0;
  for (std::size_t h = 0; h < queue.size(); ++h) {
    const int t = queue[h];
    const auto next = static_cast<std::uint16_t>(row[t] + 1);
    const int p = tree.parent(t);
    if (p >= 0 && row[p] == std::numeric_limits<std::uint16_t>::max()) {
      row[p] = next;
      queue.push_back(p);
    }
    for (int c : tree.children(t)) {
      if (row[c] == std::numeric_limits<std::uint16_t>::max()) {
        row[c] = next;
        queue.push_back(c);
      }
    }
  }
}

}  // namespace

void set_kernel_threads(int threads) {
  if (threads > 0) omp_set_num_threads(threads);
}

DistanceMatrix all_pairs_distances_serial(const ReferralTree& tree, int max_n) {
  check_capacity(tree, max_n);
  DistanceMatrix out;
  out.n = tree.size();
  out.d.resize(static_cast<std::size_t>(out.n) * out.n);
  std::vector<int> queue;
  for (int s = 0; s < out.n; ++s) {
    bfs_row(tree, s, out.d.data() + static_cast<std::size_t>(s) * out.n, queue);
  }
  return out;
}

DistanceMatrix all_pairs_distances(const ReferralTree& tree, int max_n) {
  check_capacity(tree, max_n);
  DistanceMatrix out;
  out.n = tree.size();
  out.d.resize(static_cast<std::size_t>(out.n) * out.n);
  const int n = out.n;
#pragma omp parallel
  {
    std::vector<int> queue;
#pragma omp for schedule(dynamic, 16)
    for (int s = 0; s < n; ++s) {
      bfs_row(tree, s, out.d.data() + static_cast<std::size_t>(s) * n, queue);
    }
  }
  return out;
}

Eigen::MatrixXd fill_covariance_serial(const DistanceMatrix& dist,
                                       std::span<const double> table, double nugget) {
  const int n = dist.n;
  Eigen::MatrixXd sigma(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) sigma(i, j) = table[dist(i, j)];
    sigma(j, j) += nugget;
  }
  return sigma;
}

Eigen::MatrixXd fill_covariance(const DistanceMatrix& dist,
                                std::span<const double> table, double nugget) {
  const int n = dist.n;
  Eigen::MatrixXd sigma(n, n);
  // Column-major fill; the distance table is symmetric so d(i, j) = d(j, i)
  // reads row j contiguously.
#pragma omp parallel for schedule(static)
  for (int j = 0; j < n; ++j) {
    const std::uint16_t* row = dist.d.data() + static_cast<std::size_t>(j) * n;
    double* col = sigma.data() + static_cast<std::size_t>(j) * n;
    for (int i = 0; i < n; ++i) col[i] = table[row[i]];
    col[j] += nugget;
  }
  return sigma;
}

std::vector<std::uint64_t> distance_histogram_serial(const DistanceMatrix& dist) {
  std::vector<std::uint64_t> counts;
  for (std::uint16_t d : dist.d) {
    if (d >= counts.size()) counts.resize(d + 1, 0);
    ++counts[d];
  }
  return counts;
}

std::vector<std::uint64_t> distance_histogram(const DistanceMatrix& dist) {
  const std::uint16_t max_d =
      dist.d.empty() ? 0 : *std::max_element(dist.d.begin(), dist.d.end());
  std::vector<std::uint64_t> counts(max_d + 1, 0);
  const auto total = static_cast<long long>(dist.d.size());
#pragma omp parallel
  {
    std::vector<std::uint64_t> local(max_d + 1, 0);
#pragma omp for schedule(static) nowait
    for (long long k = 0; k < total; ++k) ++local[dist.d[k]];
#pragma omp critical
    for (std::size_t d = 0; d < local.size(); ++d) counts[d] += local[d];
  }
  return counts;
}

}  // namespace rdsgls
