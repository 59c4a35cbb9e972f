#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "rdsgls/diagnostics.hpp"
#include "rdsgls/estimators.hpp"
#include "rdsgls/experiment.hpp"
#include "rdsgls/netmodel.hpp"
#include "rdsgls/referral.hpp"
#include "rdsgls/sampler.hpp"

namespace rdsgls {

/// Lines "u v [w]", 0-based ids, '#' comments. The node count is
/// max(min_nodes, largest id + 1). Parse errors name `source` and the line.
WeightedGraph read_edge_list(std::istream& in, const std::string& source, int min_nodes = 0);
WeightedGraph read_edge_list_file(const std::string& path, int min_nodes = 0);
/// Weights at 17 significant digits so a re-read is exact.
void write_edge_list(std::ostream& out, const WeightedGraph& graph);

/// CSV with a mandatory "node" column, optional "block" (string labels) and
/// any number of numeric columns. Rows may come in any node order.
struct NodeTable {
  std::vector<int> node;
  bool has_block = false;
  std::vector<std::string> block;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> values;  // values[c][row]

  /// nullptr when absent.
  const std::vector<double>* column(const std::string& name) const;
  /// Column values indexed by node id (size num_nodes); throws kMissingLabel
  /// when a node has no row.
  std::vector<double> by_node(const std::string& name, int num_nodes) const;
};

NodeTable read_node_table(std::istream& in, const std::string& source);
NodeTable read_node_table_file(const std::string& path);
void write_node_table(std::ostream& out, const NodeTable& table);

/// Dense ids for string block labels, in sorted label order.
std::vector<int> encode_blocks(std::span<const std::string> labels,
                               std::vector<std::string>* names);

ReferralTree read_tree_csv(std::istream& in, const std::string& source);
void write_tree_csv(std::ostream& out, const ReferralTree& tree);

/// Columns node,parent,pop_node,y,degree,block; block may be empty.
/// Integer block labels are kept; other strings are encoded in sorted order.
RdsSample read_sample_csv(std::istream& in, const std::string& source,
                          std::vector<std::string>* block_names = nullptr);
RdsSample read_sample_csv_file(const std::string& path,
                               std::vector<std::string>* block_names = nullptr);
void write_sample_csv(std::ostream& out, const RdsSample& sample);

/// Keys estimator, mu_hat, eigenvalues, beta2, nugget, rse, n, K, warnings;
/// numbers at 17 significant digits, NaN as null.
void write_report_json(std::ostream& out, const EstimateReport& report);

void write_diagnostics_csv(std::ostream& out, std::span<const DiagnosticPoint> points);
void write_rmse_csv(std::ostream& out, const RmseTable& table);
void write_figure1_csv(std::ostream& out, std::span<const Figure1Row> rows);

/// 10 significant digits, the CSV convention.
std::string format_csv_number(double value);
/// 17 significant digits; "null" for non-finite values.
std::string format_json_number(double value);

}  // namespace rdsgls
