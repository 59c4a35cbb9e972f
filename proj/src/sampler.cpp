#include "rdsgls/sampler.hpp"

#include <string>

#include "rdsgls/error.hpp"
#include "rdsgls/rng.hpp"

namespace rdsgls {

RdsSample RdsSample::prefix(int n) const {
  RdsSample out;
  out.tree = tree.prefix(n);
  out.node.assign(node.begin(), node.begin() + n);
  if (!y.empty()) out.y.assign(y.begin(), y.begin() + n);
  if (!degree.empty()) out.degree.assign(degree.begin(), degree.begin() + n);
  if (!block.empty()) out.block.assign(block.begin(), block.begin() + n);
  out.restarts = restarts;
  return out;
}

void attach_outcome(RdsSample& sample, std::span<const double> y_population) {
  sample.y.resize(sample.node.size());
  for (std::size_t t = 0; t < sample.node.size(); ++t) {
    sample.y[t] = y_population[sample.node[t]];
  }
}

void attach_blocks(RdsSample& sample, std::span<const int> z_population) {
  sample.block.resize(sample.node.size());
  for (std::size_t t = 0; t < sample.node.size(); ++t) {
    sample.block[t] = z_population[sample.node[t]];
  }
}

SeedRule seed_rule_from_string(const std::string& text) {
  if (text == "stationary_pi" || text == "pi") return SeedRule::kStationaryPi;
  if (text == "uniform") return SeedRule::kUniform;
  if (text == "degree_proportional" || text == "degree") {
    return SeedRule::kDegreeProportional;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown seed rule '" + text + "'");
}

void WalkConfig::validate() const {
  if (target_n < 1) throw Error(ErrorCode::kInvalidArgument, "target_n must be >= 1");
  if (max_restarts < 0) throw Error(ErrorCode::kInvalidArgument, "max_restarts must be >= 0");
  if (mode == WalkMode::kWithoutReplacement) validate_pmf(offspring_pmf);
}

RdsSample markov_walk(const ReferralTree& tree, const TransitionModel& model,
                      std::uint64_t seed) {
  if (!model.irreducible()) {
    throw Error(ErrorCode::kInvalidArgument, "transition model is not irreducible");
  }
  Rng rng(seed, 0);
  RdsSample s;
  s.tree = tree;
  const int n = tree.size();
  s.node.resize(n);
  s.degree.resize(n);
  s.node[0] = static_cast<int>(rng.from_cdf(model.pi_cdf()));
  for (int t = 1; t < n; ++t) {
    const int from = s.node[tree.parent(t)];
    s.node[t] = model.row_states(from)[rng.from_cdf(model.row_cdf(from))];
  }
  for (int t = 0; t < n; ++t) s.degree[t] = model.contact_counts()[s.node[t]];
  return s;
}

RdsSample rds_without_replacement(const WeightedGraph& graph, const WalkConfig& cfg,
                                  std::uint64_t seed) {
  cfg.validate();
  const int N = graph.num_nodes();
  Rng rng(seed, 0);
  std::vector<double> seed_cdf(N);
  double acc = 0.0;
  for (int i = 0; i < N; ++i) {
    switch (cfg.seed_rule) {
      case SeedRule::kStationaryPi: acc += graph.degree(i); break;
      case SeedRule::kUniform: acc += 1.0; break;
      case SeedRule::kDegreeProportional: acc += graph.contact_count(i); break;
    }
    seed_cdf[i] = acc;
  }
  if (!(acc > 0.0)) throw Error(ErrorCode::kSamplingFailed, "no eligible seed node");
  if (cfg.seed_node >= N) throw Error(ErrorCode::kInvalidArgument, "seed_node out of range");
  std::vector<double> offspring_cdf(cfg.offspring_pmf.size());
  acc = 0.0;
  for (std::size_t r = 0; r < offspring_cdf.size(); ++r) {
    offspring_cdf[r] = (acc += cfg.offspring_pmf[r]);
  }

  std::vector<char> sampled(N, 0);
  std::vector<int> node, parent;
  std::vector<int> eligible;
  std::vector<double> weight;
  int largest = 0;
  for (int attempt = 0; attempt <= cfg.max_restarts; ++attempt) {
    for (int x : node) sampled[x] = 0;
    node.clear();
    parent.clear();
    const int root =
        cfg.seed_node >= 0 ? cfg.seed_node : static_cast<int>(rng.from_cdf(seed_cdf));
    node.push_back(root);
    parent.push_back(-1);
    sampled[root] = 1;
    // Participants are processed in index order, which is wave order.
    for (int head = 0; head < static_cast<int>(node.size()) &&
                       static_cast<int>(node.size()) < cfg.target_n;
         ++head) {
      const int r = static_cast<int>(rng.from_cdf(offspring_cdf));
      if (r == 0) continue;
      const int from = node[head];
      eligible.clear();
      weight.clear();
      auto nb = graph.neighbors(from);
      auto wt = graph.weights(from);
      for (std::size_t k = 0; k < nb.size(); ++k) {
        if (!sampled[nb[k]]) {
          eligible.push_back(nb[k]);
          weight.push_back(wt[k]);
        }
      }
      double total = 0.0;
      for (double w : weight) total += w;
      for (int c = 0; c < r && !eligible.empty() &&
                      static_cast<int>(node.size()) < cfg.target_n;
           ++c) {
        // Sequential weighted draw without replacement.
        double u = rng.uniform() * total;
        std::size_t pick = 0;
        for (; pick + 1 < weight.size(); ++pick) {
          if (u < weight[pick]) break;
          u -= weight[pick];
        }
        const int chosen = eligible[pick];
        total -= weight[pick];
        eligible[pick] = eligible.back();
        weight[pick] = weight.back();
        eligible.pop_back();
        weight.pop_back();
        sampled[chosen] = 1;
        node.push_back(chosen);
        parent.push_back(head);
      }
    }
    largest = std::max(largest, static_cast<int>(node.size()));
    if (static_cast<int>(node.size()) == cfg.target_n) {
      RdsSample s;
      s.tree = ReferralTree(parent);
      s.node = node;
      s.degree.resize(node.size());
      for (std::size_t t = 0; t < node.size(); ++t) {
        s.degree[t] = graph.contact_count(node[t]);
      }
      s.restarts = attempt;
      return s;
    }
  }
  throw Error(ErrorCode::kSamplingFailed,
              "referral chain died before " + std::to_string(cfg.target_n) +
                  " participants in " + std::to_string(cfg.max_restarts + 1) +
                  " attempts (largest attempt reached " + std::to_string(largest) + ")");
}

Eigen::MatrixXd referral_counts(const ReferralTree& tree, std::span<const int> labels,
                                int K) {
  const int n = tree.size();
  if (static_cast<int>(labels.size()) != n) {
    throw Error(ErrorCode::kMissingLabel, "sample has no block labels");
  }
  for (int t = 0; t < n; ++t) {
    if (labels[t] < 0 || labels[t] >= K) {
      throw Error(ErrorCode::kMissingLabel,
                  "participant " + std::to_string(t) + " has no block label in [0," +
                      std::to_string(K) + ")");
    }
  }
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(K, K);
  for (int t = 1; t < n; ++t) Q(labels[tree.parent(t)], labels[t]) += 1.0;
  return Q / static_cast<double>(n);
}

Eigen::MatrixXd referral_counts(const RdsSample& sample, int K) {
  return referral_counts(sample.tree, sample.block, K);
}

}  // namespace rdsgls
