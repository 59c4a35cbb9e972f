#include "rdsgls/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "rdsgls/error.hpp"

namespace rdsgls {

namespace {

[[noreturn]] void parse_error(const std::string& source, int line, const std::string& what) {
  throw Error(ErrorCode::kParse, source + ":" + std::to_string(line) + ": " + what);
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

bool parse_int(const std::string& text, long long& value) {
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  return ec == std::errc() && ptr == end && !text.empty();
}

bool parse_double(const std::string& text, double& value) {
  if (text.empty()) return false;
  char* end = nullptr;
  value = std::strtod(text.c_str(), &end);
  return end == text.c_str() + text.size();
}

int to_int(const std::string& source, int line, const std::string& text, const char* what) {
  long long v = 0;
  if (!parse_int(text, v) || v < -1 || v > 2'000'000'000) {
    parse_error(source, line, std::string("bad ") + what + " '" + text + "'");
  }
  return static_cast<int>(v);
}

double to_double(const std::string& source, int line, const std::string& text,
                 const char* what) {
  double v = 0.0;
  if (!parse_double(text, v)) {
    parse_error(source, line, std::string("bad ") + what + " '" + text + "'");
  }
  return v;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "' for reading");
  return in;
}

std::string format_with(double value, const char* fmt) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, value);
  return buf;
}

// Header columns by name; missing mandatory columns are parse errors.
struct Header {
  std::map<std::string, std::size_t> index;
  std::size_t width = 0;

  std::size_t require(const std::string& source, const std::string& name) const {
    auto it = index.find(name);
    if (it == index.end()) parse_error(source, 1, "missing column '" + name + "'");
    return it->second;
  }
  bool has(const std::string& name) const { return index.count(name) > 0; }
};

Header read_header(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) parse_error(source, 1, "empty file, expected a header");
  Header h;
  const auto cells = split_csv(line);
  h.width = cells.size();
  for (std::size_t c = 0; c < cells.size(); ++c) {
    if (!h.index.emplace(cells[c], c).second) {
      parse_error(source, 1, "duplicate column '" + cells[c] + "'");
    }
  }
  return h;
}

// Yields (line number, cells) for every nonblank data row.
template <typename F>
void for_each_row(std::istream& in, const std::string& source, const Header& header, F&& f) {
  std::string line;
  int number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (trim(line).empty()) continue;
    auto cells = split_csv(line);
    if (cells.size() != header.width) {
      parse_error(source, number, "expected " + std::to_string(header.width) + " fields, got " +
                                      std::to_string(cells.size()));
    }
    f(number, cells);
  }
}

}  // namespace

std::string format_csv_number(double value) { return format_with(value, "%.10g"); }

std::string format_json_number(double value) {
  if (!std::isfinite(value)) return "null";
  return format_with(value, "%.17g");
}

WeightedGraph read_edge_list(std::istream& in, const std::string& source, int min_nodes) {
  std::vector<Edge> edges;
  int max_id = -1;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto text = trim(line);
    if (text.empty()) continue;
    if (text[0] == '#') {
      // "# nodes N" keeps trailing isolated nodes through a round trip.
      std::istringstream comment(text.substr(1));
      std::string key;
      long long count = 0;
      if (comment >> key >> count && key == "nodes" && count >= 0 && count < 2'000'000'000) {
        min_nodes = std::max(min_nodes, static_cast<int>(count));
      }
      continue;
    }
    std::istringstream fields(text);
    std::string a, b, w, extra;
    fields >> a >> b;
    if (b.empty()) parse_error(source, number, "expected 'u v [w]'");
    fields >> w >> extra;
    if (!extra.empty()) parse_error(source, number, "too many fields");
    Edge e;
    e.u = to_int(source, number, a, "node id");
    e.v = to_int(source, number, b, "node id");
    if (e.u < 0 || e.v < 0) parse_error(source, number, "node ids must be nonnegative");
    e.w = w.empty() ? 1.0 : to_double(source, number, w, "weight");
    if (!(e.w > 0.0)) parse_error(source, number, "weight must be positive");
    max_id = std::max({max_id, e.u, e.v});
    edges.push_back(e);
  }
  const int n = std::max(min_nodes, max_id + 1);
  try {
    return WeightedGraph::from_edges(n, edges);
  } catch (const Error& e) {
    throw Error(ErrorCode::kParse, source + ": " + e.what());
  }
}

WeightedGraph read_edge_list_file(const std::string& path, int min_nodes) {
  auto in = open_input(path);
  return read_edge_list(in, path, min_nodes);
}

void write_edge_list(std::ostream& out, const WeightedGraph& graph) {
  out << "# nodes " << graph.num_nodes() << "\n";
  for (const auto& e : graph.edges()) {
    out << e.u << ' ' << e.v << ' ' << format_with(e.w, "%.17g") << '\n';
  }
}

const std::vector<double>* NodeTable::column(const std::string& name) const {
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (columns[c] == name) return &values[c];
  }
  return nullptr;
}

std::vector<double> NodeTable::by_node(const std::string& name, int num_nodes) const {
  const auto* col = column(name);
  if (col == nullptr) throw Error(ErrorCode::kMissingLabel, "no column '" + name + "'");
  std::vector<double> out(num_nodes, std::nan(""));
  std::vector<char> seen(num_nodes, 0);
  for (std::size_t r = 0; r < node.size(); ++r) {
    if (node[r] >= 0 && node[r] < num_nodes) {
      out[node[r]] = (*col)[r];
      seen[node[r]] = 1;
    }
  }
  for (int i = 0; i < num_nodes; ++i) {
    if (!seen[i]) {
      throw Error(ErrorCode::kMissingLabel,
                  "column '" + name + "' has no value for node " + std::to_string(i));
    }
  }
  return out;
}

NodeTable read_node_table(std::istream& in, const std::string& source) {
  const auto header = read_header(in, source);
  NodeTable t;
  const auto node_col = header.require(source, "node");
  std::size_t block_col = header.width;
  if (header.has("block")) {
    t.has_block = true;
    block_col = header.index.at("block");
  }
  std::vector<std::size_t> numeric;
  std::vector<std::pair<std::size_t, std::string>> ordered;
  for (const auto& [name, c] : header.index) ordered.emplace_back(c, name);
  std::sort(ordered.begin(), ordered.end());
  for (const auto& [c, name] : ordered) {
    if (c == node_col || c == block_col) continue;
    numeric.push_back(c);
    t.columns.push_back(name);
  }
  t.values.resize(numeric.size());
  for_each_row(in, source, header, [&](int number, const std::vector<std::string>& cells) {
    const int id = to_int(source, number, cells[node_col], "node id");
    if (id < 0) parse_error(source, number, "node ids must be nonnegative");
    t.node.push_back(id);
    if (t.has_block) t.block.push_back(cells[block_col]);
    for (std::size_t k = 0; k < numeric.size(); ++k) {
      t.values[k].push_back(to_double(source, number, cells[numeric[k]], "number"));
    }
  });
  return t;
}

NodeTable read_node_table_file(const std::string& path) {
  auto in = open_input(path);
  return read_node_table(in, path);
}

void write_node_table(std::ostream& out, const NodeTable& table) {
  out << "node";
  if (table.has_block) out << ",block";
  for (const auto& c : table.columns) out << ',' << c;
  out << '\n';
  for (std::size_t r = 0; r < table.node.size(); ++r) {
    out << table.node[r];
    if (table.has_block) out << ',' << table.block[r];
    for (const auto& col : table.values) out << ',' << format_csv_number(col[r]);
    out << '\n';
  }
}

std::vector<int> encode_blocks(std::span<const std::string> labels,
                               std::vector<std::string>* names) {
  std::vector<std::string> distinct(labels.begin(), labels.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  std::vector<int> ids(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    ids[i] = static_cast<int>(std::lower_bound(distinct.begin(), distinct.end(), labels[i]) -
                              distinct.begin());
  }
  if (names != nullptr) *names = std::move(distinct);
  return ids;
}

ReferralTree read_tree_csv(std::istream& in, const std::string& source) {
  const auto header = read_header(in, source);
  const auto node_col = header.require(source, "node");
  const auto parent_col = header.require(source, "parent");
  std::vector<int> parent;
  for_each_row(in, source, header, [&](int number, const std::vector<std::string>& cells) {
    const int id = to_int(source, number, cells[node_col], "node id");
    if (id != static_cast<int>(parent.size())) {
      parse_error(source, number, "expected node " + std::to_string(parent.size()));
    }
    parent.push_back(to_int(source, number, cells[parent_col], "parent"));
  });
  try {
    return ReferralTree(parent);
  } catch (const Error& e) {
    throw Error(ErrorCode::kParse, source + ": " + e.what());
  }
}

void write_tree_csv(std::ostream& out, const ReferralTree& tree) {
  out << "node,parent\n";
  for (int t = 0; t < tree.size(); ++t) out << t << ',' << tree.parent(t) << '\n';
}

RdsSample read_sample_csv(std::istream& in, const std::string& source,
                          std::vector<std::string>* block_names) {
  const auto header = read_header(in, source);
  const auto node_col = header.require(source, "node");
  const auto parent_col = header.require(source, "parent");
  const auto pop_col = header.require(source, "pop_node");
  const auto y_col = header.require(source, "y");
  const auto degree_col = header.require(source, "degree");
  const bool has_block = header.has("block");
  const std::size_t block_col = has_block ? header.index.at("block") : 0;

  std::vector<int> parent;
  std::vector<std::string> raw_blocks;
  RdsSample s;
  for_each_row(in, source, header, [&](int number, const std::vector<std::string>& cells) {
    const int id = to_int(source, number, cells[node_col], "node id");
    if (id != static_cast<int>(parent.size())) {
      parse_error(source, number, "expected node " + std::to_string(parent.size()));
    }
    parent.push_back(to_int(source, number, cells[parent_col], "parent"));
    s.node.push_back(to_int(source, number, cells[pop_col], "pop_node"));
    s.y.push_back(to_double(source, number, cells[y_col], "y"));
    s.degree.push_back(to_double(source, number, cells[degree_col], "degree"));
    raw_blocks.push_back(has_block ? cells[block_col] : std::string());
  });
  if (parent.empty()) parse_error(source, 2, "sample has no rows");
  try {
    s.tree = ReferralTree(parent);
  } catch (const Error& e) {
    throw Error(ErrorCode::kParse, source + ": " + e.what());
  }

  // Integer labels are used as given; any other label set is encoded.
  bool all_int = true;
  for (const auto& b : raw_blocks) {
    long long v = 0;
    if (!b.empty() && !(parse_int(b, v) && v >= 0)) all_int = false;
  }
  s.block.assign(raw_blocks.size(), -1);
  std::vector<std::string> names;
  if (all_int) {
    int max_label = -1;
    for (std::size_t t = 0; t < raw_blocks.size(); ++t) {
      if (raw_blocks[t].empty()) continue;
      s.block[t] = std::stoi(raw_blocks[t]);
      max_label = std::max(max_label, s.block[t]);
    }
    for (int k = 0; k <= max_label; ++k) names.push_back(std::to_string(k));
  } else {
    std::vector<std::string> present;
    for (const auto& b : raw_blocks) {
      if (!b.empty()) present.push_back(b);
    }
    const auto ids = encode_blocks(present, &names);
    for (std::size_t t = 0, k = 0; t < raw_blocks.size(); ++t) {
      if (!raw_blocks[t].empty()) s.block[t] = ids[k++];
    }
  }
  if (std::all_of(s.block.begin(), s.block.end(), [](int b) { return b < 0; })) {
    s.block.clear();
  }
  if (block_names != nullptr) *block_names = std::move(names);
  return s;
}

RdsSample read_sample_csv_file(const std::string& path, std::vector<std::string>* block_names) {
  auto in = open_input(path);
  return read_sample_csv(in, path, block_names);
}

void write_sample_csv(std::ostream& out, const RdsSample& sample) {
  out << "node,parent,pop_node,y,degree,block\n";
  for (int t = 0; t < sample.size(); ++t) {
    out << t << ',' << sample.tree.parent(t) << ',' << sample.node[t] << ',';
    if (!sample.y.empty()) out << format_csv_number(sample.y[t]);
    out << ',';
    if (!sample.degree.empty()) out << format_csv_number(sample.degree[t]);
    out << ',';
    if (!sample.block.empty() && sample.block[t] >= 0) out << sample.block[t];
    out << '\n';
  }
}

namespace {

std::string json_string(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out + "\"";
}

std::string json_numbers(std::span<const double> values) {
  std::string out = "[";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ", ";
    out += format_json_number(values[i]);
  }
  return out + "]";
}

}  // namespace

void write_report_json(std::ostream& out, const EstimateReport& r) {
  out << "{\n";
  out << "  \"estimator\": " << json_string(r.estimator) << ",\n";
  out << "  \"mu_hat\": " << format_json_number(r.mu_hat) << ",\n";
  out << "  \"eigenvalues\": " << json_numbers(r.eigenvalues) << ",\n";
  out << "  \"beta2\": " << json_numbers(r.beta2) << ",\n";
  out << "  \"nugget\": " << format_json_number(r.nugget) << ",\n";
  out << "  \"rse\": " << format_json_number(r.rse) << ",\n";
  out << "  \"rse_variant\": " << json_string(to_string(r.rse_variant)) << ",\n";
  out << "  \"n\": " << r.n << ",\n";
  out << "  \"K\": " << r.K << ",\n";
  out << "  \"warnings\": [";
  for (std::size_t i = 0; i < r.warnings.size(); ++i) {
    out << (i > 0 ? ", " : "") << json_string(r.warnings[i]);
  }
  out << "]\n}\n";
}

void write_diagnostics_csv(std::ostream& out, std::span<const DiagnosticPoint> points) {
  out << "estimator,lambda_hat,rse,variant\n";
  for (const auto& p : points) {
    out << p.estimator << ',' << format_csv_number(p.lambda_hat) << ','
        << format_csv_number(p.rse) << ',' << to_string(p.variant) << '\n';
  }
}

void write_rmse_csv(std::ostream& out, const RmseTable& table) {
  out << "estimator,n,outcome,rmse,bias,sd,replicates,failures\n";
  for (const auto& r : table.rows) {
    out << r.estimator << ',' << r.n << ',' << r.outcome << ',' << format_csv_number(r.rmse)
        << ',' << format_csv_number(r.bias) << ',' << format_csv_number(r.sd) << ','
        << r.replicates << ',' << r.failures << '\n';
  }
}

void write_figure1_csv(std::ostream& out, std::span<const Figure1Row> rows) {
  out << "p,levels,n,var_gls,var_mean,ratio\n";
  for (const auto& r : rows) {
    out << format_csv_number(r.p) << ',' << r.levels << ',' << r.n << ','
        << format_csv_number(r.var_gls) << ',' << format_csv_number(r.var_mean) << ','
        << format_csv_number(r.ratio) << '\n';
  }
}

}  // namespace rdsgls
