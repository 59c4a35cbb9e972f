#pragma once

#include <cmath>
#include <vector>

#include "rdsgls/netmodel.hpp"
#include "rdsgls/referral.hpp"
#include "rdsgls/rng.hpp"

namespace testing {

inline rdsgls::WeightedGraph make_graph(int n, std::vector<rdsgls::Edge> edges) {
  return rdsgls::WeightedGraph::from_edges(n, edges);
}

inline rdsgls::WeightedGraph path_graph(int n) {
  std::vector<rdsgls::Edge> e;
  for (int i = 0; i + 1 < n; ++i) e.push_back({i, i + 1, 1.0});
  return make_graph(n, e);
}

inline rdsgls::WeightedGraph complete_graph(int n) {
  std::vector<rdsgls::Edge> e;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) e.push_back({i, j, 1.0});
  return make_graph(n, e);
}

/// Two states with self-loop weight p and cross weight 1 - p, so the
/// chain is [[p, 1-p], [1-p, p]] with eigenvalues 1 and 2p - 1.
inline rdsgls::WeightedGraph two_state(double p) {
  return make_graph(2, {{0, 0, p}, {1, 1, p}, {0, 1, 1.0 - p}});
}

inline rdsgls::ReferralTree path_tree(int n) {
  std::vector<int> parent(n);
  for (int t = 0; t < n; ++t) parent[t] = t - 1;
  return rdsgls::ReferralTree(parent);
}

inline rdsgls::ReferralTree star_tree(int n) {
  std::vector<int> parent(n, 0);
  parent[0] = -1;
  return rdsgls::ReferralTree(parent);
}

/// Uniform random recursive tree: parent of t drawn from [0, t).
inline rdsgls::ReferralTree random_tree(int n, std::uint64_t seed) {
  rdsgls::Rng rng(seed);
  std::vector<int> parent(n, -1);
  for (int t = 1; t < n; ++t) parent[t] = static_cast<int>(rng.below(t));
  return rdsgls::ReferralTree(parent);
}

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double variance(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

}  // namespace testing
