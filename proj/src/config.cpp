#include "rdsgls/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "rdsgls/error.hpp"

namespace rdsgls {

namespace pt = boost::property_tree;

namespace {

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    const auto e = item.find_last_not_of(" \t");
    out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

std::uint64_t parse_u64(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || text[0] == '-') {
    throw Error(ErrorCode::kInvalidArgument, what + " must be an unsigned integer, got '" +
                                                 text + "'");
  }
  return v;
}

class Section {
 public:
  Section(const pt::ptree& root, const std::string& name, const std::string& source)
      : name_(name), source_(source) {
    if (auto child = root.get_child_optional(name)) tree_ = *child;
  }

  std::optional<std::string> text(const std::string& key) {
    used_.insert(key);
    if (auto v = tree_.get_optional<std::string>(path(key))) return *v;
    return std::nullopt;
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    used_.insert(key);
    if (!tree_.count(key)) return;
    try {
      out = tree_.get<T>(path(key));
    } catch (const pt::ptree_bad_data&) {
      fail("bad value for '" + key + "'");
    }
  }

  void reject_unknown() const {
    for (const auto& [key, value] : tree_) {
      if (!used_.count(key)) fail("unknown key '" + key + "'");
    }
  }

  // Keys such as "aligned.rates" contain dots, so disable path splitting.
  static pt::ptree::path_type path(const std::string& key) { return {key, '\0'}; }

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::kParse, source_ + ": [" + name_ + "] " + what);
  }

 private:
  pt::ptree tree_;
  std::string name_;
  std::string source_;
  std::set<std::string> used_;
};

}  // namespace

std::uint64_t resolve_seed(std::optional<std::uint64_t> cli_seed) {
  if (cli_seed) return *cli_seed;
  if (const char* env = std::getenv("RDSGLS_SEED"); env != nullptr && *env != '\0') {
    return parse_u64(env, "RDSGLS_SEED");
  }
  return kDefaultSeed;
}

WalkMode walk_mode_from_string(const std::string& text) {
  if (text == "without_replacement") return WalkMode::kWithoutReplacement;
  if (text == "with_replacement") return WalkMode::kWithReplacement;
  throw Error(ErrorCode::kInvalidArgument, "unknown walk mode '" + text + "'");
}

ExperimentConfig parse_experiment_config(std::istream& in, const std::string& source) {
  pt::ptree root;
  try {
    pt::read_ini(in, root);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::kParse,
                source + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  static const std::set<std::string> sections{"network", "outcomes", "walk", "estimators",
                                              "run"};
  for (const auto& [name, child] : root) {
    if (!sections.count(name)) {
      throw Error(ErrorCode::kParse, source + ": unknown section [" + name + "]");
    }
  }

  ExperimentConfig cfg;
  try {
    Section net(root, "network", source);
    if (auto s = net.text("source")) {
      if (*s == "table1") cfg.network.source = NetworkSource::kTable1;
      else if (*s == "single_block") cfg.network.source = NetworkSource::kSingleBlock;
      else if (*s == "edge_list") cfg.network.source = NetworkSource::kEdgeList;
      else net.fail("unknown source '" + *s + "'");
    }
    net.read("N", cfg.network.N);
    net.read("expected_degree", cfg.network.expected_degree);
    net.read("edge_list", cfg.network.edge_list);
    net.read("attributes", cfg.network.attributes);
    net.read("within_block_weight", cfg.network.within_block_weight);
    net.reject_unknown();

    // [outcomes] list = a, b; each entry is a kind name or has <name>.kind.
    Section out(root, "outcomes", source);
    if (auto list = out.text("list")) {
      cfg.outcomes.clear();
      for (const auto& name : split_list(*list)) {
        const auto kind_text = out.text(name + ".kind").value_or(name);
        OutcomeSpec spec = default_outcome(outcome_kind_from_string(kind_text));
        spec.name = name;
        if (auto rates = out.text(name + ".rates")) {
          spec.rates.clear();
          for (const auto& r : split_list(*rates)) {
            try {
              spec.rates.push_back(std::stod(r));
            } catch (const std::exception&) {
              out.fail("bad rate '" + r + "' for outcome '" + name + "'");
            }
          }
        }
        if (auto column = out.text(name + ".column")) spec.column = *column;
        cfg.outcomes.push_back(std::move(spec));
      }
    }
    out.reject_unknown();

    Section walk(root, "walk", source);
    if (auto m = walk.text("mode")) cfg.walk.mode = walk_mode_from_string(*m);
    if (auto o = walk.text("offspring")) cfg.walk.offspring_pmf = offspring_from_string(*o);
    if (auto s = walk.text("seed_rule")) cfg.walk.seed_rule = seed_rule_from_string(*s);
    walk.read("max_restarts", cfg.walk.max_restarts);
    walk.reject_unknown();

    Section est(root, "estimators", source);
    if (auto list = est.text("list")) cfg.estimators = split_list(*list);
    est.reject_unknown();

    Section run(root, "run", source);
    if (auto sizes = run.text("sample_sizes")) {
      cfg.sample_sizes.clear();
      for (const auto& s : split_list(*sizes)) {
        cfg.sample_sizes.push_back(static_cast<int>(parse_u64(s, "sample size")));
      }
    }
    run.read("replicates", cfg.replicates);
    if (auto seed = run.text("seed")) cfg.seed = parse_u64(*seed, "seed");
    else cfg.seed = resolve_seed(std::nullopt);
    run.read("jobs", cfg.jobs);
    run.reject_unknown();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kParse) throw;
    throw Error(ErrorCode::kParse, source + ": " + e.what());
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "' for reading");
  return parse_experiment_config(in, path);
}

}  // namespace rdsgls
