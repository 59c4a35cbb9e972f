#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "rdsgls/diagnostics.hpp"
#include "rdsgls/error.hpp"

using namespace rdsgls;

TEST_CASE("RSE of the identity") {
  const CovarianceMatrix I{Eigen::MatrixXd::Identity(4, 4), 0.0};
  CHECK(rse(I) == doctest::Approx(0.5));
  CHECK(rse(I, RseVariant::kMeanVariance) == doctest::Approx(1.0));
  CHECK(rse_variant_from_string("as_printed") == RseVariant::kAsPrinted);
  CHECK(rse_variant_from_string("mean_variance") == RseVariant::kMeanVariance);
  CHECK(std::string(to_string(RseVariant::kMeanVariance)) == "mean_variance");
  CHECK_THROWS_AS(rse_variant_from_string("other"), Error);
}

TEST_CASE("RSE is scale free") {
  const auto tree = testing::random_tree(30, 8);
  const auto S = build_sigma(tree, AutoCovariance{{{0.3, 0.6}, {0.1, -0.2}}, 0.2});
  for (auto v : {RseVariant::kAsPrinted, RseVariant::kMeanVariance}) {
    const double base = rse(S, v);
    CHECK(base > 0.0);
    CHECK(rse(CovarianceMatrix{5.0 * S.values, 1.0}, v) == doctest::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("rank-two curve") {
  const auto tree = complete_binary_tree(10);
  const auto dense = rse(build_sigma(tree, AutoCovariance::rank_two(1.0, 0.8)));
  const std::vector<double> grid{0.8};
  CHECK(std::abs(ranktwo_rse_curve(tree, grid)[0] - dense) < 1e-10);

  const auto zero = ranktwo_rse_curve(tree, std::vector<double>{0.0});
  CHECK(zero[0] == doctest::Approx(1.0 / std::sqrt(1023.0)));

  const auto small = complete_binary_tree(5);
  const double from_curve = ranktwo_rse_curve(small, std::vector<double>{0.55})[0];
  for (double b2 : {0.1, 1.0, 10.0})
    CHECK(rse(build_sigma(small, AutoCovariance::rank_two(b2, 0.55))) ==
          doctest::Approx(from_curve).epsilon(1e-10));

  const auto mid = complete_binary_tree(9);
  std::vector<double> up;
  for (int k = 0; k <= 90; ++k) up.push_back(k / 100.0);
  const auto curve = ranktwo_rse_curve(mid, up);
  for (std::size_t k = 1; k < curve.size(); ++k) CHECK(curve[k] <= curve[k - 1] + 1e-15);

  const auto grid181 = default_lambda_grid();
  CHECK(grid181.size() == 181);
  CHECK(grid181.front() == doctest::Approx(-0.9));
  CHECK(grid181.back() == doctest::Approx(0.9));
}

TEST_CASE("Jensen bound examples") {
  const auto tree = complete_binary_tree(8);
  const auto eq = jensen_check(AutoCovariance::rank_two(0.4, 0.7), tree);
  CHECK(std::abs(eq.lhs - eq.rhs) < 1e-10 * eq.lhs);
  CHECK(eq.bound_holds.value());

  const AutoCovariance mix{{{0.5, 0.9}, {0.5, 0.1}}, 0.0};
  const auto r = jensen_check(mix, tree);
  CHECK(r.lambda_auto == doctest::Approx(0.5));
  CHECK(r.lambda2 == doctest::Approx(0.9));
  CHECK(r.lambda_bound_holds);
  CHECK(r.lhs > r.rhs);
  CHECK(r.bound_holds.value());

  const AutoCovariance neg{{{0.5, 0.9}, {0.5, -0.4}}, 0.0};
  const auto n = jensen_check(neg, tree);
  CHECK(!n.bound_holds.has_value());
  CHECK(n.lambda_bound_holds);
}

TEST_CASE("Jensen bound on random inputs") {
  Rng rng(12);
  for (int t = 0; t < 10; ++t) {
    const auto tree = testing::random_tree(20 + 10 * t, 200 + t);
    for (int k = 0; k < 100; ++k) {
      AutoCovariance ac;
      const int terms = 1 + static_cast<int>(rng.below(4));
      for (int l = 0; l < terms; ++l) ac.terms.push_back({rng.uniform(), 0.99 * rng.uniform()});
      if (k % 3 == 0) ac.nugget = rng.uniform();
      const auto r = jensen_check(ac, tree);
      REQUIRE(r.bound_holds.has_value());
      CHECK(*r.bound_holds);
      CHECK(r.lambda_bound_holds);
    }
  }
}
