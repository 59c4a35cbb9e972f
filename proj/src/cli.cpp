#include "rdsgls/cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "rdsgls/config.hpp"
#include "rdsgls/error.hpp"
#include "rdsgls/io.hpp"
#include "rdsgls/kernels.hpp"

namespace rdsgls {

namespace {

// Bad flag values found after CLI11 parsing; exit code 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<double> parse_doubles(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("bad number '" + item + "' in '" + text + "'");
    }
  }
  if (out.empty()) throw UsageError("empty list");
  return out;
}

// "5..15" or "5,7,9".
std::vector<int> parse_int_range(const std::string& text) {
  std::vector<int> out;
  try {
    if (const auto dots = text.find(".."); dots != std::string::npos) {
      const int lo = std::stoi(text.substr(0, dots));
      const int hi = std::stoi(text.substr(dots + 2));
      if (lo > hi) throw std::invalid_argument(text);
      for (int v = lo; v <= hi; ++v) out.push_back(v);
    } else {
      for (double v : parse_doubles(text)) out.push_back(static_cast<int>(v));
    }
  } catch (const std::logic_error&) {
    throw UsageError("bad range '" + text + "'");
  }
  return out;
}

class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) : path_(path), fallback_(fallback) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw Error(ErrorCode::kIo, "cannot open '" + path + "' for writing");
    }
  }
  std::ostream& stream() { return path_.empty() ? fallback_ : file_; }
  void close() {
    if (path_.empty()) return;
    file_.close();
    if (!file_) throw Error(ErrorCode::kIo, "failed writing '" + path_ + "'");
  }

 private:
  std::string path_;
  std::ostream& fallback_;
  std::ofstream file_;
};

void warn(std::ostream& err, const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) err << "warning: " << w << '\n';
}

NetworkSource network_source(const std::string& text) {
  if (text == "table1") return NetworkSource::kTable1;
  if (text == "single_block") return NetworkSource::kSingleBlock;
  throw UsageError("unknown network '" + text + "'");
}

std::vector<OutcomeSpec> outcome_specs(const std::string& list) {
  std::vector<OutcomeSpec> out;
  std::stringstream ss(list);
  std::string name;
  while (std::getline(ss, name, ',')) {
    try {
      out.push_back(default_outcome(outcome_kind_from_string(name)));
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
    if (out.back().kind == OutcomeKind::kColumn) throw UsageError("column outcomes need a file");
  }
  return out;
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Respondent-driven sampling simulation and GLS estimation"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  std::optional<std::uint64_t> seed_flag;
  auto add_seed = [&](CLI::App* sub) {
    sub->add_option("--seed", seed_flag,
                    "64-bit seed; falls back to RDSGLS_SEED, then " +
                        std::to_string(kDefaultSeed));
  };

  // gen-graph
  auto* gen = app.add_subcommand("gen-graph", "Generate a DC-SBM network and node attributes");
  std::string gen_out, gen_network = "table1", gen_outcomes = "aligned,correlated,uncorrelated";
  int gen_n = 5000;
  double gen_degree = 30.0, gen_weight = 1.0;
  gen->add_option("--out", gen_out, "Output directory for edges.txt and nodes.csv")->required();
  gen->add_option("--network", gen_network, "table1 or single_block")->capture_default_str();
  gen->add_option("--N", gen_n, "Number of nodes")->capture_default_str();
  gen->add_option("--expected-degree", gen_degree, "Mean expected degree")->capture_default_str();
  gen->add_option("--within-block-weight", gen_weight,
                  "Weight of within-block edges (preferential recruitment)")
      ->capture_default_str();
  gen->add_option("--outcomes", gen_outcomes,
                  "Comma list of aligned, correlated, uncorrelated, constant")
      ->capture_default_str();
  add_seed(gen);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Draw one RDS sample from a network");
  std::string sim_graph, sim_attr, sim_outcome, sim_out, sim_mode = "without_replacement";
  std::string sim_offspring = "four-point", sim_seed_rule = "degree_proportional";
  int sim_n = 500, sim_restarts = 1000;
  sim->add_option("--graph", sim_graph, "Edge list 'u v [w]'")->required();
  sim->add_option("--attributes", sim_attr, "Node CSV with node, block and outcome columns");
  sim->add_option("--outcome", sim_outcome, "Outcome column (default: first numeric column)");
  sim->add_option("--n", sim_n, "Sample size")->capture_default_str();
  sim->add_option("--mode", sim_mode, "without_replacement or with_replacement")
      ->capture_default_str();
  sim->add_option("--offspring", sim_offspring,
                  "four-point, fast, slow, or a comma list of probabilities")
      ->capture_default_str();
  sim->add_option("--seed-rule", sim_seed_rule, "stationary_pi, uniform or degree_proportional")
      ->capture_default_str();
  sim->add_option("--max-restarts", sim_restarts, "Restarts before giving up")
      ->capture_default_str();
  sim->add_option("--out", sim_out, "Sample CSV path")->required();
  add_seed(sim);

  // estimate
  auto* est = app.add_subcommand("estimate", "Estimate the population mean from a sample");
  std::string est_sample, est_name = "vh", est_out, est_variant = "as_printed";
  est->add_option("--sample", est_sample, "Sample CSV")->required();
  est->add_option("--estimator", est_name, "mean, vh, auto, delta, sbm_y or sbm_z")
      ->capture_default_str();
  est->add_option("--variant", est_variant, "RSE variant: as_printed or mean_variance")
      ->capture_default_str();
  est->add_option("--out", est_out, "JSON report path (default: standard output)");

  // diagnose
  auto* dia = app.add_subcommand("diagnose", "Write the RSE diagnostic dataset for a sample");
  std::string dia_sample, dia_out, dia_variant = "as_printed";
  dia->add_option("--sample", dia_sample, "Sample CSV")->required();
  dia->add_option("--variant", dia_variant, "as_printed or mean_variance")->capture_default_str();
  dia->add_option("--out", dia_out, "Diagnostic CSV path (default: standard output)");

  // experiment
  auto* exp = app.add_subcommand("experiment", "Run a Monte Carlo RMSE experiment");
  std::string exp_config, exp_out;
  int exp_jobs = 1;
  std::optional<int> exp_replicates;
  exp->add_option("--config", exp_config, "INI file with [network] [outcomes] [walk] "
                                          "[estimators] [run]")
      ->required();
  exp->add_option("--jobs", exp_jobs, "Parallel replicates")->capture_default_str();
  exp->add_option("--replicates", exp_replicates, "Override [run] replicates");
  exp->add_option("--out", exp_out, "RMSE CSV path (default: standard output)");
  add_seed(exp);

  // figure1
  auto* fig = app.add_subcommand("figure1", "Variance ratio of GLS to the sample mean");
  std::string fig_p = "0.6,0.75,0.9", fig_levels = "5..15", fig_out;
  fig->add_option("--p", fig_p, "Comma list of p in (1/2, 1)")->capture_default_str();
  fig->add_option("--levels", fig_levels, "Binary tree levels, 'a..b' or a comma list")
      ->capture_default_str();
  fig->add_option("--out", fig_out, "CSV path (default: standard output)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    if (!exp->parsed()) set_kernel_threads(1);

    if (gen->parsed()) {
      ExperimentConfig cfg;
      cfg.network.source = network_source(gen_network);
      cfg.network.N = gen_n;
      cfg.network.expected_degree = gen_degree;
      cfg.network.within_block_weight = gen_weight;
      cfg.outcomes = outcome_specs(gen_outcomes);
      cfg.seed = resolve_seed(seed_flag);
      const auto pop = build_population(cfg);
      std::filesystem::create_directories(gen_out);
      Output edges((std::filesystem::path(gen_out) / "edges.txt").string(), out);
      write_edge_list(edges.stream(), pop.graph);
      edges.close();
      NodeTable table;
      table.has_block = true;
      for (int i = 0; i < pop.graph.num_nodes(); ++i) {
        table.node.push_back(i);
        table.block.push_back(pop.block_names[pop.z[i]]);
      }
      table.columns = pop.outcome_names;
      table.values = pop.outcomes;
      Output nodes((std::filesystem::path(gen_out) / "nodes.csv").string(), out);
      write_node_table(nodes.stream(), table);
      nodes.close();
    } else if (sim->parsed()) {
      const auto graph = read_edge_list_file(sim_graph);
      Population pop;
      pop.graph = graph;
      pop.z.assign(graph.num_nodes(), -1);
      std::vector<double> y;
      if (!sim_attr.empty()) {
        const auto table = read_node_table_file(sim_attr);
        if (table.has_block) {
          const auto ids = encode_blocks(table.block, &pop.block_names);
          for (std::size_t r = 0; r < ids.size(); ++r) {
            if (table.node[r] < graph.num_nodes()) pop.z[table.node[r]] = ids[r];
          }
          pop.K = static_cast<int>(pop.block_names.size());
        }
        std::string column = sim_outcome;
        if (column.empty() && !table.columns.empty()) column = table.columns.front();
        if (!column.empty()) y = table.by_node(column, graph.num_nodes());
      } else if (!sim_outcome.empty()) {
        throw UsageError("--outcome needs --attributes");
      }
      WalkConfig walk;
      try {
        walk.mode = walk_mode_from_string(sim_mode);
        walk.offspring_pmf = offspring_from_string(sim_offspring);
        walk.seed_rule = seed_rule_from_string(sim_seed_rule);
      } catch (const Error& e) {
        throw UsageError(e.what());
      }
      walk.max_restarts = sim_restarts;
      auto sample = draw_sample(pop, walk, sim_n, resolve_seed(seed_flag));
      if (!y.empty()) attach_outcome(sample, y);
      if (sample.restarts > 0) {
        err << "warning: sampling restarted " << sample.restarts << " times\n";
      }
      if (std::all_of(sample.block.begin(), sample.block.end(), [](int b) { return b < 0; })) {
        sample.block.clear();
      }
      Output o(sim_out, out);
      write_sample_csv(o.stream(), sample);
      o.close();
    } else if (est->parsed()) {
      std::vector<std::string> names;
      const auto sample = read_sample_csv_file(est_sample, &names);
      RseVariant variant;
      try {
        variant = rse_variant_from_string(est_variant);
      } catch (const Error& e) {
        throw UsageError(e.what());
      }
      const auto& known = known_estimators();
      if (std::find(known.begin(), known.end(), est_name) == known.end()) {
        throw UsageError("unknown estimator '" + est_name + "'");
      }
      auto report = run_estimator(est_name, sample, static_cast<int>(names.size()));
      if (variant == RseVariant::kMeanVariance) report.rse *= std::sqrt(report.n);
      report.rse_variant = variant;
      warn(err, report.warnings);
      Output o(est_out, out);
      write_report_json(o.stream(), report);
      o.close();
    } else if (dia->parsed()) {
      std::vector<std::string> names;
      const auto sample = read_sample_csv_file(dia_sample, &names);
      RseVariant variant;
      try {
        variant = rse_variant_from_string(dia_variant);
      } catch (const Error& e) {
        throw UsageError(e.what());
      }
      const auto grid = default_lambda_grid();
      const auto data = emit_diagnostics(sample, sample.y, sample.block,
                                         static_cast<int>(names.size()), grid, variant);
      warn(err, data.warnings);
      Output o(dia_out, out);
      write_diagnostics_csv(o.stream(), data.points);
      o.close();
    } else if (exp->parsed()) {
      auto cfg = load_experiment_config(exp_config);
      if (seed_flag) cfg.seed = *seed_flag;
      if (exp_replicates) cfg.replicates = *exp_replicates;
      cfg.jobs = exp_jobs;
      const auto table = run_rmse_experiment(cfg);
      for (const auto& row : table.rows) {
        if (row.failures > 0) {
          err << "warning: " << row.failures << " replicates failed to sample\n";
          break;
        }
      }
      Output o(exp_out, out);
      write_rmse_csv(o.stream(), table);
      o.close();
    } else if (fig->parsed()) {
      const auto p = parse_doubles(fig_p);
      const auto levels = parse_int_range(fig_levels);
      for (double v : p) {
        if (!(v > 0.5 && v < 1.0)) throw UsageError("p must lie in (1/2, 1)");
      }
      for (int l : levels) {
        if (l < 1 || l > 24) throw UsageError("levels must lie in 1..24");
      }
      const auto rows = figure1_ratio(p, levels);
      Output o(fig_out, out);
      write_figure1_csv(o.stream(), rows);
      o.close();
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const Error& e) {
    err << "error: " << to_string(e.code()) << ": " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace rdsgls
