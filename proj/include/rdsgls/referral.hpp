#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace rdsgls {

/// Rooted index tree of an RDS. Node 0 is the seed; every other node's
/// parent has a smaller index, so any prefix 0..k-1 is itself a tree.
class ReferralTree {
 public:
  ReferralTree() : ReferralTree(std::vector<int>{-1}) {}
  /// parent[0] must be -1 and parent[t] must lie in [0, t) for t > 0;
  /// otherwise kInvalidArgument.
  explicit ReferralTree(std::vector<int> parent);

  int size() const { return static_cast<int>(parent_.size()); }
  int parent(int t) const { return parent_[t]; }
  std::span<const int> parents() const { return parent_; }
  std::span<const int> children(int t) const {
    return {child_.data() + child_offsets_[t], child_.data() + child_offsets_[t + 1]};
  }
  int depth(int t) const { return depth_[t]; }
  int height() const { return height_; }
  /// Undirected degree in the tree.
  int degree(int t) const {
    return static_cast<int>(children(t).size()) + (t == 0 ? 0 : 1);
  }
  /// Path length between a and b, via parent climbing.
  int distance(int a, int b) const;
  /// First n nodes (n in [1, size()]).
  ReferralTree prefix(int n) const;

  bool operator==(const ReferralTree& other) const { return parent_ == other.parent_; }

 private:
  std::vector<int> parent_;
  std::vector<int> child_offsets_;
  std::vector<int> child_;
  std::vector<int> depth_;
  int height_ = 0;
};

/// Probability vector over offspring counts {0, ..., R_max}.
using OffspringPmf = std::vector<double>;

/// Throws kInvalidArgument unless entries are nonnegative and sum to 1.
void validate_pmf(std::span<const double> pmf);
double pmf_mean(std::span<const double> pmf);

/// P(R = 0..3) = 1/6, 1/3, 1/3, 1/6; mean 1.5.
OffspringPmf offspring_four_point();
/// Zero-free referral distribution with mean 2.36 (above the critical
/// threshold of the three-block network).
OffspringPmf offspring_fast_referral();
/// The fast distribution mixed with a point mass at zero; mean 1.78.
OffspringPmf offspring_slow_referral();
/// Lookup by name: "four-point", "fast", "slow"; otherwise a comma list of
/// probabilities. Throws kInvalidArgument.
OffspringPmf offspring_from_string(std::string_view text);

ReferralTree complete_binary_tree(int levels);

struct GaltonWatsonResult {
  ReferralTree tree;
  int restarts = 0;
};

/// Breadth-first Galton-Watson tree truncated at exactly target_n nodes;
/// a process that dies early is restarted with fresh randomness.
GaltonWatsonResult galton_watson_tree(std::span<const double> offspring_pmf,
                                      int target_n, std::uint64_t seed,
                                      int max_restarts = 1000);

/// Law of d(I, J) for I, J independent and uniform on the tree nodes.
struct DistanceDistribution {
  int n = 0;
  std::vector<std::uint64_t> counts;  // ordered pairs at each distance
  std::vector<double> pmf;
};

/// Exact, by merging per-subtree depth histograms bottom-up (long-path
/// merging keeps this near O(n * height)).
DistanceDistribution tree_distance_distribution(const ReferralTree& tree);

/// G(x) = sum_d p_d x^d with 0^0 = 1. Throws kDomain for |x| > 1.
double distance_pgf(const DistanceDistribution& dist, double x);

/// Convenience: n^2 G(x), i.e. 1' [x^{d(s,t)}] 1.
double ones_quadratic_form(const DistanceDistribution& dist, double x);

}  // namespace rdsgls
