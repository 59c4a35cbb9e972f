#pragma once

// Data-parallel O(n^2) kernels over a referral tree. Each kernel has an
// OpenMP version and a `_serial` reference that the tests compare against.

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "rdsgls/referral.hpp"

namespace rdsgls {

/// Row-major n x n table of tree distances.
struct DistanceMatrix {
  int n = 0;
  std::vector<std::uint16_t> d;
  std::uint16_t operator()(int a, int b) const {
    return d[static_cast<std::size_t>(a) * n + b];
  }
};

/// Largest n the dense kernels accept (O(n^2) memory).
inline constexpr int kMaxDenseTree = 10000;

/// One BFS per source. Throws kCapacity when n exceeds `max_n` or the
/// tree's diameter does not fit in 16 bits.
DistanceMatrix all_pairs_distances(const ReferralTree& tree, int max_n = kMaxDenseTree);
DistanceMatrix all_pairs_distances_serial(const ReferralTree& tree,
                                          int max_n = kMaxDenseTree);

/// Sigma(s, t) = table[d(s, t)] + nugget * [s == t].
Eigen::MatrixXd fill_covariance(const DistanceMatrix& dist,
                                std::span<const double> table, double nugget);
Eigen::MatrixXd fill_covariance_serial(const DistanceMatrix& dist,
                                       std::span<const double> table, double nugget);

/// Ordered-pair counts per distance.
std::vector<std::uint64_t> distance_histogram(const DistanceMatrix& dist);
std::vector<std::uint64_t> distance_histogram_serial(const DistanceMatrix& dist);

/// Sets the OpenMP team size used by the kernels (<= 0 keeps the default).
void set_kernel_threads(int threads);

}  // namespace rdsgls
