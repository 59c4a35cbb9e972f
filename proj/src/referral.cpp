#include "rdsgls/referral.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>

#include "rdsgls/error.hpp"
#include "rdsgls/rng.hpp"

namespace rdsgls {

ReferralTree::ReferralTree(std::vector<int> parent) : parent_(std::move(parent)) {
  const int n = size();
  if (n == 0 || parent_[0] != -1) {
    throw Error(ErrorCode::kInvalidArgument, "tree root (node 0) must have parent -1");
  }
  child_offsets_.assign(n + 1, 0);
  depth_.assign(n, 0);
  for (int t = 1; t < n; ++t) {
    if (parent_[t] < 0 || parent_[t] >= t) {
      throw Error(ErrorCode::kInvalidArgument,
                  "node " + std::to_string(t) + " has parent " +
                      std::to_string(parent_[t]) + "; parents must precede children");
    }
    ++child_offsets_[parent_[t] + 1];
    depth_[t] = depth_[parent_[t]] + 1;
    height_ = std::max(height_, depth_[t]);
  }
  for (int t = 0; t < n; ++t) child_offsets_[t + 1] += child_offsets_[t];
  child_.resize(n > 0 ? n - 1 : 0);
  std::vector<int> fill(child_offsets_.begin(), child_offsets_.end() - 1);
  for (int t = 1; t < n; ++t) child_[fill[parent_[t]]++] = t;
}

int ReferralTree::distance(int a, int b) const {
  int d = 0;
  while (depth_[a] > depth_[b]) { a = parent_[a]; ++d; }
  while (depth_[b] > depth_[a]) { b = parent_[b]; ++d; }
  while (a != b) {
    a = parent_[a];
    b = parent_[b];
    d += 2;
  }
  return d;
}

ReferralTree ReferralTree::prefix(int n) const {
  if (n < 1 || n > size()) {
    throw Error(ErrorCode::kInvalidArgument, "prefix length out of range");
  }
  return ReferralTree(std::vector<int>(parent_.begin(), parent_.begin() + n));
}

// ---------------------------------------------------------------------------
// Offspring distributions

void validate_pmf(std::span<const double> pmf) {
  if (pmf.empty()) throw Error(ErrorCode::kInvalidArgument, "empty offspring pmf");
  double total = 0.0;
  for (double p : pmf) {
    if (!(p >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "negative pmf entry");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw Error(ErrorCode::kInvalidArgument,
                "offspring pmf sums to " + std::to_string(total) + ", not 1");
  }
}

double pmf_mean(std::span<const double> pmf) {
  double m = 0.0;
  for (std::size_t r = 0; r < pmf.size(); ++r) m += static_cast<double>(r) * pmf[r];
  return m;
}

OffspringPmf offspring_four_point() { return {1.0 / 6, 1.0 / 3, 1.0 / 3, 1.0 / 6}; }

OffspringPmf offspring_fast_referral() {
  return {0.0, 0.27, 0.35, 0.21, 0.11, 0.04, 0.02};
}

OffspringPmf offspring_slow_referral() {
  // Mixing weight q on zero solves 2.36 (1 - q) = 1.78.
  const double q = 0.58 / 2.36;
  OffspringPmf pmf = offspring_fast_referral();
  for (double& p : pmf) p *= 1.0 - q;
  pmf[0] += q;
  return pmf;
}

OffspringPmf offspring_from_string(std::string_view text) {
  if (text == "four-point") return offspring_four_point();
  if (text == "fast") return offspring_fast_referral();
  if (text == "slow") return offspring_slow_referral();
  OffspringPmf pmf;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find(',', pos), text.size());
    std::string token(text.substr(pos, end - pos));
    try {
      std::size_t used = 0;
      pmf.push_back(std::stod(token, &used));
      if (used != token.size()) throw std::invalid_argument(token);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kInvalidArgument,
                  "offspring pmf entry '" + token + "' is not a number");
    }
    pos = end + 1;
  }
  validate_pmf(pmf);
  return pmf;
}

// ---------------------------------------------------------------------------
// Tree constructors

ReferralTree complete_binary_tree(int levels) {
  if (levels < 1 || levels > 30) {
    throw Error(ErrorCode::kInvalidArgument, "levels must be in [1, 30]");
  }
  const int n = (1 << levels) - 1;
  std::vector<int> parent(n);
  parent[0] = -1;
  for (int t = 1; t < n; ++t) parent[t] = (t - 1) / 2;
  return ReferralTree(std::move(parent));
}

GaltonWatsonResult galton_watson_tree(std::span<const double> offspring_pmf,
                                      int target_n, std::uint64_t seed,
                                      int max_restarts) {
  validate_pmf(offspring_pmf);
  if (target_n < 1) throw Error(ErrorCode::kInvalidArgument, "target_n must be >= 1");
  std::vector<double> cdf(offspring_pmf.size());
  double acc = 0.0;
  for (std::size_t r = 0; r < cdf.size(); ++r) cdf[r] = (acc += offspring_pmf[r]);
  Rng rng(seed, 0);
  std::vector<int> parent;
  for (int attempt = 0; attempt <= max_restarts; ++attempt) {
    parent.assign(1, -1);
    // Nodes are created in breadth-first order, so the queue is the index.
    for (int head = 0; head < static_cast<int>(parent.size()) &&
                       static_cast<int>(parent.size()) < target_n;
         ++head) {
      const auto r = static_cast<int>(rng.from_cdf(cdf));
      for (int c = 0; c < r && static_cast<int>(parent.size()) < target_n; ++c) {
        parent.push_back(head);
      }
    }
    if (static_cast<int>(parent.size()) == target_n) {
      return {ReferralTree(std::move(parent)), attempt};
    }
  }
  throw Error(ErrorCode::kImpossibleTarget,
              "Galton-Watson process died before " + std::to_string(target_n) +
                  " nodes in " + std::to_string(max_restarts + 1) + " attempts");
}

// ---------------------------------------------------------------------------
// Distance distribution

DistanceDistribution tree_distance_distribution(const ReferralTree& tree) {
  const int n = tree.size();
  DistanceDistribution out;
  out.n = n;
  out.counts.assign(static_cast<std::size_t>(tree.height()) * 2 + 1, 0);
  // hist[t] holds subtree depth counts relative to t, stored reversed:
  // index len-1 is depth 0, so "shift one level down" is a push_back.
  std::vector<std::vector<std::uint64_t>> hist(n);
  std::vector<std::uint64_t> shifted;
  for (int t = n - 1; t >= 0; --t) {
    auto kids = tree.children(t);
    int deepest = -1;
    for (int c : kids) {
      if (deepest < 0 || hist[c].size() > hist[deepest].size()) deepest = c;
    }
    std::vector<std::uint64_t> acc;
    if (deepest >= 0) acc = std::move(hist[deepest]);
    // acc currently holds depths relative to the deepest child; append t
    // itself at depth 0 so every entry moves one level down.
    acc.push_back(1);
    // Pairs (t, x) with x in the deepest child's subtree.
    for (std::size_t k = 0; k + 1 < acc.size(); ++k) {
      const std::size_t d = acc.size() - 1 - k;
      out.counts[d] += 2 * acc[k];
    }
    for (int c : kids) {
      if (c == deepest) continue;
      const auto& h = hist[c];
      const std::size_t la = acc.size(), lh = h.size();
      // Child depth j (relative to c) is depth j+1 relative to t.
      for (std::size_t a = 0; a < la; ++a) {
        const std::size_t da = la - 1 - a;
        if (acc[a] == 0) continue;
        for (std::size_t b = 0; b < lh; ++b) {
          const std::size_t db = lh - b;
          out.counts[da + db] += 2 * acc[a] * h[b];
        }
      }
      // Merge: depth db = lh - b maps to index la - 1 - db of acc.
      for (std::size_t b = 0; b < lh; ++b) acc[la - 1 - (lh - b)] += h[b];
      hist[c].clear();
      hist[c].shrink_to_fit();
    }
    hist[t] = std::move(acc);
  }
  out.counts[0] += static_cast<std::uint64_t>(n);
  while (out.counts.size() > 1 && out.counts.back() == 0) out.counts.pop_back();
  const double total = static_cast<double>(n) * static_cast<double>(n);
  out.pmf.resize(out.counts.size());
  for (std::size_t d = 0; d < out.counts.size(); ++d) {
    out.pmf[d] = static_cast<double>(out.counts[d]) / total;
  }
  return out;
}

double distance_pgf(const DistanceDistribution& dist, double x) {
  if (std::abs(x) > 1.0) {
    throw Error(ErrorCode::kDomain, "distance PGF needs |x| <= 1");
  }
  double acc = 0.0;
  for (auto it = dist.pmf.rbegin(); it != dist.pmf.rend(); ++it) acc = acc * x + *it;
  return acc;
}

double ones_quadratic_form(const DistanceDistribution& dist, double x) {
  double acc = 0.0;
  for (auto it = dist.counts.rbegin(); it != dist.counts.rend(); ++it) {
    acc = acc * x + static_cast<double>(*it);
  }
  return acc;
}

}  // namespace rdsgls
