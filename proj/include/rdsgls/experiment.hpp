#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rdsgls/diagnostics.hpp"
#include "rdsgls/estimators.hpp"
#include "rdsgls/netmodel.hpp"
#include "rdsgls/sampler.hpp"

namespace rdsgls {

/// Referral counts between three demographic blocks (rows refer to
/// columns), in B, W, H order.
Eigen::Matrix3d table1_counts();

/// Population share of each block of the three-block network, in B, W, H order.
std::vector<double> table1_block_shares();

/// DC-SBM built from the symmetrized three-block referral counts. B is scaled so the
/// mean expected degree is `expected_degree`; theta_i = 0.3 + Gamma(200,
/// rate 300), normalized within each block; blocks are contiguous.
DcSbmParams table1_params(int N, double expected_degree, std::uint64_t seed);

/// One block, B = [[expected_degree * N]], same theta law.
DcSbmParams single_block_params(int N, double expected_degree, std::uint64_t seed);

enum class OutcomeKind { kAligned, kCorrelated, kUncorrelated, kConstant, kColumn };

struct OutcomeSpec {
  std::string name;
  OutcomeKind kind = OutcomeKind::kAligned;
  /// kAligned: value per block (default 1, 1, 0). kCorrelated: Bernoulli
  /// rate per block (default 0.7, 0.1, 0.9). kUncorrelated: rates[0]
  /// (default 0.66). kConstant: rates[0].
  std::vector<double> rates;
  /// kColumn: name of a numeric column in the attribute file.
  std::string column;

  void validate() const;
};

OutcomeSpec default_outcome(OutcomeKind kind);
OutcomeKind outcome_kind_from_string(const std::string& text);

enum class NetworkSource { kTable1, kSingleBlock, kEdgeList };

struct NetworkSpec {
  NetworkSource source = NetworkSource::kTable1;
  int N = 5000;
  double expected_degree = 30.0;
  std::string edge_list;   // kEdgeList
  std::string attributes;  // optional node CSV with "block" and outcome columns
  /// Weight on within-block edges before sampling; 1 disables preferential
  /// recruitment.
  double within_block_weight = 1.0;
};

struct ExperimentConfig {
  NetworkSpec network;
  std::vector<OutcomeSpec> outcomes{default_outcome(OutcomeKind::kAligned)};
  WalkConfig walk;
  std::vector<std::string> estimators{"mean", "vh", "auto", "delta", "sbm_y", "sbm_z"};
  std::vector<int> sample_sizes{100, 500};
  int replicates = 100;
  std::uint64_t seed = 0;
  int jobs = 1;

  void validate() const;
};

/// The sampled frame: largest connected component of the generated or
/// loaded network, with labels and outcomes restricted to it.
struct Population {
  WeightedGraph graph;  // sampling weights (within-block weight applied)
  std::vector<int> z;   // -1 when unknown
  int K = 0;
  std::vector<std::string> block_names;
  std::vector<std::string> outcome_names;
  std::vector<std::vector<double>> outcomes;  // parallel to outcome_names
};

Population build_population(const ExperimentConfig& cfg);

/// Estimators understood by run_estimator: mean, vh, auto, delta (rank-two
/// on VH-reweighted outcomes), sbm_y (blocks = outcome values), sbm_z
/// (blocks = sample labels); the last two use fGLS reweighting.
const std::vector<std::string>& known_estimators();
EstimateReport run_estimator(const std::string& name, const RdsSample& sample, int K);

struct RmseRow {
  std::string estimator;
  int n = 0;
  std::string outcome;
  double rmse = 0.0;
  double bias = 0.0;
  double sd = 0.0;  // sample standard deviation of the estimates
  int replicates = 0;
  int failures = 0;
};

struct RmseTable {
  std::vector<RmseRow> rows;
  std::vector<std::pair<std::string, double>> truths;  // outcome -> mu_true

  /// Throws kInvalidArgument when absent.
  const RmseRow& find(const std::string& estimator, int n,
                      const std::string& outcome) const;
};

/// Draws one sample of max(sample_sizes) per replicate and evaluates every
/// estimator on its prefixes. Replicates whose sampling fails are dropped
/// and counted. Results do not depend on cfg.jobs.
RmseTable run_rmse_experiment(const ExperimentConfig& cfg);
RmseTable run_rmse_experiment(const ExperimentConfig& cfg, const Population& population);

/// One sample of size n from the population under cfg.walk.
RdsSample draw_sample(const Population& population, const WalkConfig& walk, int n,
                      std::uint64_t seed);

struct Figure1Row {
  double p = 0.0;
  int levels = 0;
  int n = 0;
  double var_gls = 0.0;
  double var_mean = 0.0;
  double ratio = 0.0;
};

/// Var(GLS)/Var(mean) for the balanced two-state chain on complete binary
/// trees: lambda = 2p - 1 and beta2 = 1/4.
std::vector<Figure1Row> figure1_ratio(std::span<const double> p_grid,
                                      std::span<const int> levels_grid);

struct DiagnosticData {
  std::vector<DiagnosticPoint> points;  // estimator points, then the curve
  std::vector<std::string> warnings;
};

/// Points for auto, delta, sbm_y (K_y - 1 of them) and sbm_z (K_z - 1),
/// computed on the raw outcome, followed by the rank-two curve on `grid`.
DiagnosticData emit_diagnostics(const RdsSample& sample, std::span<const double> y,
                                std::span<const int> blocks, int K,
                                std::span<const double> grid,
                                RseVariant variant = RseVariant::kAsPrinted);

}  // namespace rdsgls
