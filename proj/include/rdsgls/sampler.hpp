#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rdsgls/netmodel.hpp"
#include "rdsgls/referral.hpp"

namespace rdsgls {

/// One RDS sample indexed by tree node. `degree` is the reported contact
/// count (unweighted), even when recruitment used edge weights. `block`
/// holds 0-based labels, -1 when unlabeled.
struct RdsSample {
  ReferralTree tree;
  std::vector<int> node;
  std::vector<double> y;
  std::vector<double> degree;
  std::vector<int> block;
  int restarts = 0;

  int size() const { return tree.size(); }
  /// First n participants with their induced subtree.
  RdsSample prefix(int n) const;
  bool operator==(const RdsSample& other) const = default;
};

/// Copies population values onto the sampled nodes.
void attach_outcome(RdsSample& sample, std::span<const double> y_population);
void attach_blocks(RdsSample& sample, std::span<const int> z_population);

enum class WalkMode { kWithReplacement, kWithoutReplacement };
enum class SeedRule { kStationaryPi, kUniform, kDegreeProportional };

SeedRule seed_rule_from_string(const std::string& text);

struct WalkConfig {
  WalkMode mode = WalkMode::kWithoutReplacement;
  OffspringPmf offspring_pmf = offspring_four_point();
  int target_n = 500;
  SeedRule seed_rule = SeedRule::kDegreeProportional;
  int max_restarts = 1000;
  /// When >= 0, every attempt starts from this node instead of seed_rule.
  int seed_node = -1;

  void validate() const;
};

/// (T, P)-walk: X_0 ~ pi, each child drawn from its parent's row of P,
/// with replacement. Throws kInvalidArgument if P is reducible.
RdsSample markov_walk(const ReferralTree& tree, const TransitionModel& model,
                      std::uint64_t seed);

/// Without-replacement recruitment, built wave by wave. Each participant
/// draws R from the offspring pmf and refers min(R, eligible) not-yet
/// sampled contacts, chosen with probability proportional to w_ij. An
/// early extinction restarts from a fresh seed node. Throws
/// kSamplingFailed after cfg.max_restarts restarts.
RdsSample rds_without_replacement(const WeightedGraph& graph, const WalkConfig& cfg,
                                  std::uint64_t seed);

/// Q_uv = (1/n) * #{tree edges parent -> child with labels (u, v)}.
/// Throws kMissingLabel for labels outside [0, K).
Eigen::MatrixXd referral_counts(const RdsSample& sample, int K);
Eigen::MatrixXd referral_counts(const ReferralTree& tree, std::span<const int> labels,
                                int K);

}  // namespace rdsgls
