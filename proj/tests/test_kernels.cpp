#include <doctest.h>

#include "helpers.hpp"
#include "rdsgls/covariance.hpp"
#include "rdsgls/error.hpp"
#include "rdsgls/kernels.hpp"

using namespace rdsgls;

TEST_CASE("parallel kernels reproduce the serial references") {
  set_kernel_threads(4);
  for (int trial = 0; trial < 6; ++trial) {
    const auto tree = trial % 2 == 0
                          ? testing::random_tree(50 + 90 * trial, trial)
                          : galton_watson_tree(offspring_four_point(), 50 + 90 * trial, trial).tree;
    const auto ds = all_pairs_distances_serial(tree);
    const auto dp = all_pairs_distances(tree);
    CHECK(ds.n == tree.size());
    CHECK(ds.d == dp.d);
    for (int a = 0; a < tree.size(); a += 7)
      for (int b = 0; b < tree.size(); b += 5) CHECK(ds(a, b) == tree.distance(a, b));

    const auto table = gamma_table(AutoCovariance{{{0.3, 0.7}, {0.1, -0.4}}, 0.0}, 400);
    const Eigen::MatrixXd cs = fill_covariance_serial(ds, table, 0.05);
    const Eigen::MatrixXd cp = fill_covariance(dp, table, 0.05);
    CHECK((cs - cp).cwiseAbs().maxCoeff() == 0.0);
    CHECK(cs(0, 0) == doctest::Approx(0.45));

    CHECK(distance_histogram_serial(ds) == distance_histogram(dp));
  }
  set_kernel_threads(1);
}

TEST_CASE("capacity limit") {
  const auto tree = testing::path_tree(20);
  try {
    all_pairs_distances(tree, 10);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kCapacity);
  }
}
