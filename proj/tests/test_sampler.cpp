#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "helpers.hpp"
#include "rdsgls/error.hpp"
#include "rdsgls/io.hpp"
#include "rdsgls/sampler.hpp"

using namespace rdsgls;

TEST_CASE("single-node walk draws from pi") {
  const auto g = testing::path_graph(3);
  const auto model = build_transition(g);
  const ReferralTree root;
  const int reps = 100000;
  std::vector<int> counts(3, 0);
  for (int r = 0; r < reps; ++r) ++counts[markov_walk(root, model, derive_seed(1, r)).node[0]];
  for (int i = 0; i < 3; ++i) {
    const double p = model.pi()[i];
    CHECK(std::abs(counts[i] / double(reps) - p) < 3.5 * std::sqrt(p * (1 - p) / reps));
  }
}

TEST_CASE("two-state walk reproduces the transition matrix") {
  const auto model = build_transition(testing::two_state(0.9));
  const auto s = markov_walk(testing::path_tree(1000), model, 17);
  double stay[2] = {0, 0}, total[2] = {0, 0};
  for (int t = 1; t < s.size(); ++t) {
    const int from = s.node[s.tree.parent(t)];
    total[from] += 1;
    if (s.node[t] == from) stay[from] += 1;
  }
  for (int k = 0; k < 2; ++k) {
    const double se = std::sqrt(0.09 / total[k]);
    CHECK(std::abs(stay[k] / total[k] - 0.9) < 4 * se);
  }
}

TEST_CASE("every tree node is marginally stationary") {
  const auto model = build_transition(testing::complete_graph(3));
  const ReferralTree tree({-1, 0, 1});
  const int reps = 10000;
  std::vector<std::vector<double>> counts(3, std::vector<double>(3, 0.0));
  for (int r = 0; r < reps; ++r) {
    const auto s = markov_walk(tree, model, derive_seed(2, r));
    for (int t = 0; t < 3; ++t) counts[t][s.node[t]] += 1;
  }
  for (int t = 0; t < 3; ++t) {
    double chi2 = 0.0;
    for (int i = 0; i < 3; ++i) {
      const double expect = reps / 3.0;
      chi2 += (counts[t][i] - expect) * (counts[t][i] - expect) / expect;
    }
    CHECK(chi2 < 13.82);  // chi-square, 2 df, alpha = 0.001
  }
}

TEST_CASE("reducible chains are refused") {
  Eigen::MatrixXd P = Eigen::MatrixXd::Identity(2, 2);
  const std::vector<double> pi{0.5, 0.5};
  CHECK_THROWS_AS(markov_walk(testing::path_tree(3), TransitionModel::from_dense(P, pi), 1), Error);
}

TEST_CASE("without replacement on a complete graph") {
  const auto g = testing::complete_graph(600);
  WalkConfig cfg;
  cfg.target_n = 500;
  // Zero-free offspring: with every contact eligible nobody can stall.
  cfg.offspring_pmf = offspring_fast_referral();
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto s = rds_without_replacement(g, cfg, seed);
    CHECK(s.size() == 500);
    CHECK(s.restarts == 0);
    CHECK(std::set<int>(s.node.begin(), s.node.end()).size() == 500);
    CHECK(s.degree[0] == 599.0);
  }
}

TEST_CASE("path graph is walked in order") {
  WalkConfig cfg;
  cfg.offspring_pmf = {0.0, 1.0};
  cfg.target_n = 10;
  cfg.seed_node = 0;
  const auto s = rds_without_replacement(testing::path_graph(10), cfg, 3);
  for (int t = 0; t < 10; ++t) {
    CHECK(s.node[t] == t);
    CHECK(s.tree.parent(t) == t - 1);
  }
}

TEST_CASE("restarts and failure") {
  // Two disjoint edges: no walk can reach three participants.
  const auto g = testing::make_graph(4, {{0, 1, 1.0}, {2, 3, 1.0}});
  WalkConfig cfg;
  cfg.target_n = 3;
  cfg.max_restarts = 7;
  try {
    rds_without_replacement(g, cfg, 1);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kSamplingFailed);
  }

  // Offspring zero half the time: extinctions happen and are counted.
  WalkConfig flaky;
  flaky.offspring_pmf = {0.5, 0.0, 0.5};
  flaky.target_n = 50;
  int restarted = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto s = rds_without_replacement(testing::complete_graph(80), flaky, seed);
    CHECK(s.size() == 50);
    if (s.restarts > 0) ++restarted;
  }
  CHECK(restarted > 0);
}

TEST_CASE("without replacement is deterministic and valid") {
  Rng rng(8);
  std::vector<Edge> edges;
  for (int i = 0; i < 300; ++i)
    for (int j = i + 1; j < 300; ++j)
      if (rng.bernoulli(0.03)) edges.push_back({i, j, 1.0 + rng.below(3)});
  const auto g = largest_component(testing::make_graph(300, edges)).graph;
  WalkConfig cfg;
  cfg.target_n = 150;
  const auto a = rds_without_replacement(g, cfg, 99);
  const auto b = rds_without_replacement(g, cfg, 99);
  CHECK(a == b);
  CHECK(std::set<int>(a.node.begin(), a.node.end()).size() == 150);
  for (int t = 1; t < a.size(); ++t) {
    CHECK(g.weight(a.node[a.tree.parent(t)], a.node[t]) > 0.0);
    CHECK(a.degree[t] == g.contact_count(a.node[t]));
  }
}

TEST_CASE("heavier within-block weights raise same-block referrals") {
  const int N = 400;
  std::vector<int> z(N);
  for (int i = 0; i < N; ++i) z[i] = i % 2;
  Rng rng(21);
  std::vector<Edge> plain, heavy;
  for (int i = 0; i < N; ++i)
    for (int j = i + 1; j < N; ++j)
      if (rng.bernoulli(0.05)) {
        plain.push_back({i, j, 1.0});
        heavy.push_back({i, j, z[i] == z[j] ? 10.0 : 1.0});
      }
  const auto gp = testing::make_graph(N, plain);
  const auto gh = testing::make_graph(N, heavy);
  WalkConfig cfg;
  cfg.target_n = 100;
  double same_plain = 0.0, same_heavy = 0.0;
  for (int r = 0; r < 200; ++r) {
    auto sp = rds_without_replacement(gp, cfg, derive_seed(5, r));
    auto sh = rds_without_replacement(gh, cfg, derive_seed(5, r));
    attach_blocks(sp, z);
    attach_blocks(sh, z);
    same_plain += referral_counts(sp, 2).trace();
    same_heavy += referral_counts(sh, 2).trace();
    // Reported degree ignores the weights.
    for (int t = 0; t < sh.size(); ++t) CHECK(sh.degree[t] == gp.contact_count(sh.node[t]));
  }
  CHECK(same_heavy > same_plain);
}

TEST_CASE("referral counts") {
  SUBCASE("one block") {
    const auto tree = testing::path_tree(6);
    const std::vector<int> labels(6, 0);
    const auto Q = referral_counts(tree, labels, 1);
    CHECK(Q(0, 0) == doctest::Approx(5.0 / 6.0));
  }
  SUBCASE("alternating path") {
    const auto Q = referral_counts(testing::path_tree(4), std::vector<int>{0, 1, 0, 1}, 2);
    CHECK(Q(0, 0) == 0.0);
    CHECK(Q(0, 1) == doctest::Approx(0.5));
    CHECK(Q(1, 0) == doctest::Approx(0.25));
    CHECK(Q(1, 1) == 0.0);
  }
  SUBCASE("missing labels") {
    CHECK_THROWS_AS(referral_counts(testing::path_tree(3), std::vector<int>{0, -1, 0}, 1), Error);
    CHECK_THROWS_AS(referral_counts(testing::path_tree(3), std::vector<int>{0, 2, 0}, 2), Error);
  }
  SUBCASE("three-block fixture") {
    const auto s = read_sample_csv_file(RDSGLS_TEST_DATA "/table1_sample.csv");
    const Eigen::MatrixXd nQ = s.size() * referral_counts(s, 3);
    Eigen::Matrix3d expect;
    expect << 5, 5, 2, 7, 46, 1, 4, 8, 28;
    CHECK((nQ - expect).cwiseAbs().maxCoeff() < 1e-12);
  }
}
