#include "rdsgls/experiment.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <string>

#include "rdsgls/error.hpp"
#include "rdsgls/io.hpp"
#include "rdsgls/rng.hpp"

namespace rdsgls {

namespace {

// Stream ids for derive_seed; each consumer of randomness gets its own.
constexpr std::uint64_t kThetaStream = 1;
constexpr std::uint64_t kGraphStream = 2;
constexpr std::uint64_t kOutcomeStream = 100;
constexpr std::uint64_t kReplicateStream = 1'000'000;

constexpr std::uint64_t kGwStream = 1;
constexpr std::uint64_t kWalkStream = 2;

std::vector<double> draw_theta(std::span<const int> z, int K, Rng& rng) {
  std::vector<double> theta(z.size());
  std::vector<double> total(K, 0.0);
  for (std::size_t i = 0; i < z.size(); ++i) {
    theta[i] = 0.3 + rng.gamma(200.0, 300.0);
    total[z[i]] += theta[i];
  }
  for (std::size_t i = 0; i < z.size(); ++i) theta[i] /= total[z[i]];
  return theta;
}

std::vector<int> contiguous_blocks(int N, std::span<const double> shares) {
  std::vector<int> z;
  z.reserve(N);
  double cumulative = 0.0;
  for (std::size_t k = 0; k < shares.size(); ++k) {
    cumulative += shares[k];
    const int end = k + 1 == shares.size() ? N : static_cast<int>(std::lround(cumulative * N));
    while (static_cast<int>(z.size()) < end) z.push_back(static_cast<int>(k));
  }
  return z;
}

bool is_constant(std::span<const double> y) {
  return std::all_of(y.begin(), y.end(), [&](double v) { return v == y[0]; });
}

}  // namespace

Eigen::Matrix3d table1_counts() {
  Eigen::Matrix3d c;
  c << 5, 5, 2,
       7, 46, 1,
       4, 8, 28;
  return c;
}

std::vector<double> table1_block_shares() {
  const std::vector<double> raw{0.13, 0.33, 0.53};
  const double total = std::accumulate(raw.begin(), raw.end(), 0.0);
  std::vector<double> out;
  for (double r : raw) out.push_back(r / total);
  return out;
}

DcSbmParams table1_params(int N, double expected_degree, std::uint64_t seed) {
  if (N < 3) throw Error(ErrorCode::kInvalidArgument, "N must be at least 3");
  const Eigen::Matrix3d counts = table1_counts();
  const Eigen::MatrixXd sym = (counts + counts.transpose()) / 2.0;
  DcSbmParams p;
  // 1'B1 = N * expected_degree, which is the sum of expected degrees.
  p.B = expected_degree * N * sym / sym.sum();
  p.z = contiguous_blocks(N, table1_block_shares());
  Rng rng(seed, kThetaStream);
  p.theta = draw_theta(p.z, 3, rng);
  return p;
}

DcSbmParams single_block_params(int N, double expected_degree, std::uint64_t seed) {
  if (N < 2) throw Error(ErrorCode::kInvalidArgument, "N must be at least 2");
  DcSbmParams p;
  p.B = Eigen::MatrixXd::Constant(1, 1, expected_degree * N);
  p.z.assign(N, 0);
  Rng rng(seed, kThetaStream);
  p.theta = draw_theta(p.z, 1, rng);
  return p;
}

void OutcomeSpec::validate() const {
  if (name.empty()) throw Error(ErrorCode::kInvalidArgument, "outcome needs a name");
  const bool rates_are_probabilities =
      kind == OutcomeKind::kCorrelated || kind == OutcomeKind::kUncorrelated;
  if (rates_are_probabilities) {
    for (double r : rates) {
      if (!(r >= 0.0 && r <= 1.0)) {
        throw Error(ErrorCode::kInvalidArgument,
                    "outcome '" + name + "' has a rate outside [0, 1]");
      }
    }
  }
  if (kind == OutcomeKind::kColumn && column.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "outcome '" + name + "' needs a column");
  }
}

OutcomeSpec default_outcome(OutcomeKind kind) {
  switch (kind) {
    case OutcomeKind::kAligned: return {"aligned", kind, {1.0, 1.0, 0.0}, {}};
    case OutcomeKind::kCorrelated: return {"correlated", kind, {0.7, 0.1, 0.9}, {}};
    case OutcomeKind::kUncorrelated: return {"uncorrelated", kind, {0.66}, {}};
    case OutcomeKind::kConstant: return {"constant", kind, {1.0}, {}};
    case OutcomeKind::kColumn: return {"column", kind, {}, {}};
  }
  return {};
}

OutcomeKind outcome_kind_from_string(const std::string& text) {
  if (text == "aligned") return OutcomeKind::kAligned;
  if (text == "correlated") return OutcomeKind::kCorrelated;
  if (text == "uncorrelated") return OutcomeKind::kUncorrelated;
  if (text == "constant") return OutcomeKind::kConstant;
  if (text == "column") return OutcomeKind::kColumn;
  throw Error(ErrorCode::kInvalidArgument, "unknown outcome kind '" + text + "'");
}

void ExperimentConfig::validate() const {
  if (replicates < 1) throw Error(ErrorCode::kInvalidArgument, "replicates must be >= 1");
  if (jobs < 1) throw Error(ErrorCode::kInvalidArgument, "jobs must be >= 1");
  if (sample_sizes.empty()) throw Error(ErrorCode::kInvalidArgument, "no sample sizes");
  for (int n : sample_sizes) {
    if (n < 1) throw Error(ErrorCode::kInvalidArgument, "sample sizes must be >= 1");
  }
  if (outcomes.empty()) throw Error(ErrorCode::kInvalidArgument, "no outcomes");
  for (const auto& o : outcomes) o.validate();
  for (const auto& e : estimators) {
    const auto& known = known_estimators();
    if (std::find(known.begin(), known.end(), e) == known.end()) {
      throw Error(ErrorCode::kInvalidArgument, "unknown estimator '" + e + "'");
    }
  }
  if (!(network.within_block_weight > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "within-block weight must be positive");
  }
  WalkConfig w = walk;
  w.target_n = *std::max_element(sample_sizes.begin(), sample_sizes.end());
  w.validate();
}

Population build_population(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto& net = cfg.network;
  WeightedGraph full;
  std::vector<int> z;
  int K = 0;
  std::vector<std::string> names;
  NodeTable attributes;
  bool have_attributes = false;
  switch (net.source) {
    case NetworkSource::kTable1:
    case NetworkSource::kSingleBlock: {
      const auto params = net.source == NetworkSource::kTable1
                              ? table1_params(net.N, net.expected_degree, cfg.seed)
                              : single_block_params(net.N, net.expected_degree, cfg.seed);
      full = dcsbm_sample(params, derive_seed(cfg.seed, kGraphStream));
      z = params.z;
      K = params.num_blocks();
      names = net.source == NetworkSource::kTable1 ? std::vector<std::string>{"B", "W", "H"}
                                                   : std::vector<std::string>{"A"};
      break;
    }
    case NetworkSource::kEdgeList: {
      full = read_edge_list_file(net.edge_list);
      z.assign(full.num_nodes(), -1);
      if (!net.attributes.empty()) {
        attributes = read_node_table_file(net.attributes);
        have_attributes = true;
        if (attributes.has_block) {
          const auto ids = encode_blocks(attributes.block, &names);
          K = static_cast<int>(names.size());
          for (std::size_t r = 0; r < ids.size(); ++r) {
            if (attributes.node[r] < 0 || attributes.node[r] >= full.num_nodes()) {
              throw Error(ErrorCode::kParse, "attribute row for unknown node " +
                                                 std::to_string(attributes.node[r]));
            }
            z[attributes.node[r]] = ids[r];
          }
        }
      }
      break;
    }
  }

  const int N = full.num_nodes();
  std::vector<std::vector<double>> outcomes;
  std::vector<std::string> outcome_names;
  for (std::size_t o = 0; o < cfg.outcomes.size(); ++o) {
    const auto& spec = cfg.outcomes[o];
    std::vector<double> y(N, 0.0);
    Rng rng(cfg.seed, kOutcomeStream + o);
    auto block_rate = [&](int i) {
      if (z[i] < 0 || z[i] >= static_cast<int>(spec.rates.size())) {
        throw Error(ErrorCode::kMissingLabel,
                    "outcome '" + spec.name + "' needs a rate for the block of node " +
                        std::to_string(i));
      }
      return spec.rates[z[i]];
    };
    for (int i = 0; i < N; ++i) {
      switch (spec.kind) {
        case OutcomeKind::kAligned: y[i] = block_rate(i); break;
        case OutcomeKind::kCorrelated: y[i] = rng.bernoulli(block_rate(i)) ? 1.0 : 0.0; break;
        case OutcomeKind::kUncorrelated:
          y[i] = rng.bernoulli(spec.rates.empty() ? 0.66 : spec.rates[0]) ? 1.0 : 0.0;
          break;
        case OutcomeKind::kConstant: y[i] = spec.rates.empty() ? 1.0 : spec.rates[0]; break;
        case OutcomeKind::kColumn: break;
      }
    }
    if (spec.kind == OutcomeKind::kColumn) {
      if (!have_attributes) {
        throw Error(ErrorCode::kInvalidArgument,
                    "outcome '" + spec.name + "' reads a column but no attribute file is set");
      }
      y = attributes.by_node(spec.column, N);
    }
    outcomes.push_back(std::move(y));
    outcome_names.push_back(spec.name);
  }

  // Preferential recruitment reweights within-block edges before taking
  // the component; contact counts stay unweighted.
  if (net.within_block_weight != 1.0) {
    auto edges = full.edges();
    for (auto& e : edges) {
      if (z[e.u] >= 0 && z[e.u] == z[e.v]) e.w *= net.within_block_weight;
    }
    full = WeightedGraph::from_edges(N, edges);
  }

  auto component = largest_component(full);
  Population pop;
  pop.graph = std::move(component.graph);
  pop.K = K;
  pop.block_names = std::move(names);
  pop.outcome_names = std::move(outcome_names);
  pop.z.resize(component.original_id.size());
  pop.outcomes.assign(outcomes.size(), std::vector<double>(component.original_id.size()));
  for (std::size_t i = 0; i < component.original_id.size(); ++i) {
    const int old = component.original_id[i];
    pop.z[i] = z[old];
    for (std::size_t o = 0; o < outcomes.size(); ++o) pop.outcomes[o][i] = outcomes[o][old];
  }
  return pop;
}

const std::vector<std::string>& known_estimators() {
  static const std::vector<std::string> names{"mean", "vh", "auto", "delta", "sbm_y", "sbm_z"};
  return names;
}

EstimateReport run_estimator(const std::string& name, const RdsSample& sample, int K) {
  const auto& known = known_estimators();
  if (std::find(known.begin(), known.end(), name) == known.end()) {
    throw Error(ErrorCode::kInvalidArgument, "unknown estimator '" + name + "'");
  }
  EstimateReport r;
  if (!sample.y.empty() && is_constant(sample.y)) {
    // Every weighted average of a constant is that constant.
    r.estimator = name;
    r.mu_hat = sample.y[0];
    r.n = sample.size();
    r.weights.assign(sample.y.size(), 1.0 / static_cast<double>(sample.y.size()));
  } else if (name == "mean") {
    r = mean_estimator(sample);
  } else if (name == "vh") {
    r = vh_estimator(sample);
  } else if (name == "auto" || name == "delta") {
    const auto rw = vh_reweight(sample);
    r = name == "auto" ? auto_fgls(rw.sample) : delta_fgls(rw.sample);
  } else {
    int k = K;
    std::vector<int> labels;
    if (name == "sbm_y") {
      labels = labels_from_values(sample.y, &k);
    } else {
      labels = sample.block;
    }
    auto rw = fgls_reweight(sample, labels, k);
    r = sbm_fgls(rw.sample, labels, k);
    r.estimator = name;
    r.warnings.insert(r.warnings.begin(), rw.warnings.begin(), rw.warnings.end());
  }
  r.restarts = sample.restarts;
  return r;
}

const RmseRow& RmseTable::find(const std::string& estimator, int n,
                               const std::string& outcome) const {
  for (const auto& row : rows) {
    if (row.estimator == estimator && row.n == n && row.outcome == outcome) return row;
  }
  throw Error(ErrorCode::kInvalidArgument, "no RMSE row for " + estimator + " at n=" +
                                               std::to_string(n) + " on " + outcome);
}

RdsSample draw_sample(const Population& population, const WalkConfig& walk, int n,
                      std::uint64_t seed) {
  WalkConfig cfg = walk;
  cfg.target_n = n;
  RdsSample s;
  if (cfg.mode == WalkMode::kWithoutReplacement) {
    s = rds_without_replacement(population.graph, cfg, seed);
  } else {
    auto gw = galton_watson_tree(cfg.offspring_pmf, n, derive_seed(seed, kGwStream),
                                 cfg.max_restarts);
    s = markov_walk(gw.tree, build_transition(population.graph),
                    derive_seed(seed, kWalkStream));
    s.restarts = gw.restarts;
  }
  attach_blocks(s, population.z);
  return s;
}

RmseTable run_rmse_experiment(const ExperimentConfig& cfg) {
  return run_rmse_experiment(cfg, build_population(cfg));
}

RmseTable run_rmse_experiment(const ExperimentConfig& cfg, const Population& pop) {
  cfg.validate();
  const int R = cfg.replicates;
  const auto& sizes = cfg.sample_sizes;
  const int n_max = *std::max_element(sizes.begin(), sizes.end());
  const std::size_t O = pop.outcomes.size();
  const std::size_t S = sizes.size();
  const std::size_t E = cfg.estimators.size();
  auto slot = [&](std::size_t o, std::size_t s, std::size_t e) { return (o * S + s) * E + e; };

  std::vector<std::vector<double>> estimates(R);
  std::vector<char> failed(R, 0);
  std::vector<std::exception_ptr> errors(R);
  // A fixed trip count and per-replicate seeds keep the result independent
  // of scheduling.
#pragma omp parallel for schedule(dynamic, 1) num_threads(cfg.jobs)
  for (int r = 0; r < R; ++r) {
    try {
      RdsSample sample;
      try {
        sample = draw_sample(pop, cfg.walk, n_max, derive_seed(cfg.seed, kReplicateStream + r));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kSamplingFailed) throw;
        failed[r] = 1;
        continue;
      }
      estimates[r].resize(O * S * E);
      for (std::size_t o = 0; o < O; ++o) {
        attach_outcome(sample, pop.outcomes[o]);
        for (std::size_t s = 0; s < S; ++s) {
          const auto prefix = sizes[s] == n_max ? sample : sample.prefix(sizes[s]);
          for (std::size_t e = 0; e < E; ++e) {
            estimates[r][slot(o, s, e)] =
                run_estimator(cfg.estimators[e], prefix, pop.K).mu_hat;
          }
        }
      }
    } catch (const Error& e) {
      errors[r] = std::make_exception_ptr(
          Error(e.code(), "replicate " + std::to_string(r) + ": " + e.what()));
    } catch (...) {
      errors[r] = std::current_exception();
    }
  }
  for (const auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }

  RmseTable table;
  const int failures = static_cast<int>(std::count(failed.begin(), failed.end(), 1));
  for (std::size_t o = 0; o < O; ++o) {
    const auto& y = pop.outcomes[o];
    const double mu_true = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
    table.truths.emplace_back(pop.outcome_names[o], mu_true);
    for (std::size_t s = 0; s < S; ++s) {
      for (std::size_t e = 0; e < E; ++e) {
        RmseRow row;
        row.estimator = cfg.estimators[e];
        row.n = sizes[s];
        row.outcome = pop.outcome_names[o];
        row.failures = failures;
        double sum = 0.0, sum_sq_err = 0.0;
        for (int r = 0; r < R; ++r) {
          if (failed[r]) continue;
          const double v = estimates[r][slot(o, s, e)];
          sum += v;
          sum_sq_err += (v - mu_true) * (v - mu_true);
          ++row.replicates;
        }
        const double k = row.replicates;
        if (row.replicates == 0) {
          row.rmse = row.bias = row.sd = std::nan("");
        } else {
          const double mean = sum / k;
          double ss = 0.0;
          for (int r = 0; r < R; ++r) {
            if (failed[r]) continue;
            const double v = estimates[r][slot(o, s, e)];
            ss += (v - mean) * (v - mean);
          }
          row.bias = mean - mu_true;
          row.rmse = std::sqrt(sum_sq_err / k);
          row.sd = row.replicates > 1 ? std::sqrt(ss / (k - 1.0)) : 0.0;
        }
        table.rows.push_back(row);
      }
    }
  }
  return table;
}

std::vector<Figure1Row> figure1_ratio(std::span<const double> p_grid,
                                      std::span<const int> levels_grid) {
  constexpr double kBeta2 = 0.25;
  std::vector<Figure1Row> rows;
  for (int levels : levels_grid) {
    const auto tree = complete_binary_tree(levels);
    const auto dist = tree_distance_distribution(tree);
    for (double p : p_grid) {
      if (!(p > 0.5 && p < 1.0)) {
        throw Error(ErrorCode::kInvalidArgument, "p must lie in (1/2, 1)");
      }
      const double lambda = 2.0 * p - 1.0;
      Figure1Row row;
      row.p = p;
      row.levels = levels;
      row.n = tree.size();
      row.var_gls = 1.0 / one_sigma_inv_one_ranktwo(row.n, kBeta2, lambda);
      row.var_mean = kBeta2 * distance_pgf(dist, lambda);
      row.ratio = row.var_gls / row.var_mean;
      rows.push_back(row);
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Figure1Row& a, const Figure1Row& b) {
    return a.p < b.p;
  });
  return rows;
}

DiagnosticData emit_diagnostics(const RdsSample& sample, std::span<const double> y,
                                std::span<const int> blocks, int K,
                                std::span<const double> grid, RseVariant variant) {
  DiagnosticData out;
  const int n = sample.size();
  const double variant_scale = variant == RseVariant::kAsPrinted ? 1.0 : std::sqrt(n);
  const auto dist = tree_distance_distribution(sample.tree);
  const bool constant = is_constant(y);
  auto add = [&](const std::string& name, double lambda, double value) {
    out.points.push_back({name, lambda, value, n, variant});
  };
  auto guarded = [&](const std::string& name, auto&& body) {
    try {
      body();
    } catch (const Error& e) {
      out.warnings.push_back(name + ": " + e.what());
    }
  };

  guarded("auto", [&] {
    const auto r = auto_fgls(sample.tree, y);
    add("auto", r.eigenvalues.at(0), ranktwo_rse(dist, r.eigenvalues.at(0), variant));
  });
  guarded("delta", [&] {
    const auto r = delta_fgls(sample.tree, y);
    add("delta", r.eigenvalues.at(0), ranktwo_rse(dist, r.eigenvalues.at(0), variant));
  });
  auto sbm_points = [&](const std::string& name, std::span<const int> labels, int k) {
    guarded(name, [&] {
      if (constant) {
        // Sigma-hat degenerates; such outcomes carry no correlation.
        for (int l = 1; l < k; ++l) add(name, 0.0, ranktwo_rse(dist, 0.0, variant));
        return;
      }
      const auto r = sbm_fgls(sample.tree, y, labels, k);
      for (const auto& w : r.warnings) out.warnings.push_back(name + ": " + w);
      for (double lambda : r.eigenvalues) add(name, lambda, r.rse * variant_scale);
    });
  };
  int k_y = 0;
  const auto y_labels = labels_from_values(y, &k_y);
  sbm_points("sbm_y", y_labels, k_y);
  sbm_points("sbm_z", blocks, K);

  for (double lambda : grid) add("ranktwo_curve", lambda, ranktwo_rse(dist, lambda, variant));
  return out;
}

}  // namespace rdsgls
