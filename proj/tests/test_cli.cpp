#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "rdsgls/cli.hpp"
#include "rdsgls/io.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "rdsgls");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = rdsgls::dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch() {
  const fs::path dir = RDSGLS_TEST_TMP;
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("usage errors exit with 1") {
  CHECK(run({}).code == 1);
  CHECK(run({"bogus"}).code == 1);
  CHECK(run({"estimate"}).code == 1);
  const auto r = run({"estimate", "--sample", RDSGLS_TEST_DATA "/vh_sample.csv", "--estimator", "median"});
  CHECK(r.code == 1);
  CHECK(r.err.rfind("error: ", 0) == 0);
}

TEST_CASE("help documents every subcommand") {
  const auto r = run({"--help"});
  CHECK(r.code == 0);
  for (const char* s : {"gen-graph", "simulate", "estimate", "diagnose", "experiment", "figure1"})
    CHECK(r.out.find(s) != std::string::npos);
  CHECK(run({"simulate", "--help"}).out.find("--seed-rule") != std::string::npos);
}

TEST_CASE("runtime errors exit with 2") {
  const auto r = run({"estimate", "--sample", "/nonexistent/sample.csv"});
  CHECK(r.code == 2);
  CHECK(r.err.rfind("error: ", 0) == 0);
}

TEST_CASE("VH report matches the golden file") {
  const auto out = scratch() / "vh.json";
  const auto r = run({"estimate", "--sample", RDSGLS_TEST_DATA "/vh_sample.csv", "--estimator",
                      "vh", "--out", out.string()});
  REQUIRE(r.code == 0);
  CHECK(slurp(out) == slurp(RDSGLS_TEST_DATA "/vh_report.json"));
  const auto stdout_run = run({"estimate", "--sample", RDSGLS_TEST_DATA "/vh_sample.csv", "--estimator", "vh"});
  CHECK(stdout_run.out == slurp(RDSGLS_TEST_DATA "/vh_report.json"));
}

TEST_CASE("generate, simulate, estimate, diagnose") {
  const auto dir = scratch() / "pipeline";
  fs::remove_all(dir);
  REQUIRE(run({"gen-graph", "--out", dir.string(), "--N", "800", "--expected-degree", "12",
               "--outcomes", "aligned,correlated", "--seed", "4"})
              .code == 0);
  const auto edges = dir / "edges.txt";
  const auto nodes = dir / "nodes.csv";
  REQUIRE(fs::exists(edges));
  REQUIRE(fs::exists(nodes));

  // parse(emit(G)) = G.
  const auto g = rdsgls::read_edge_list_file(edges.string());
  std::ostringstream again;
  rdsgls::write_edge_list(again, g);
  CHECK(again.str() == slurp(edges));

  const auto a = dir / "a.csv";
  const auto b = dir / "b.csv";
  for (const auto& p : {a, b}) {
    const auto r = run({"simulate", "--graph", edges.string(), "--attributes", nodes.string(),
                        "--outcome", "correlated", "--n", "120", "--seed", "11", "--out", p.string()});
    REQUIRE(r.code == 0);
  }
  CHECK(slurp(a) == slurp(b));
  const auto c = dir / "c.csv";
  REQUIRE(run({"simulate", "--graph", edges.string(), "--attributes", nodes.string(), "--n",
               "120", "--seed", "12", "--out", c.string()})
              .code == 0);
  CHECK(slurp(a) != slurp(c));

  for (const char* est : {"mean", "vh", "auto", "delta", "sbm_y", "sbm_z"}) {
    const auto r = run({"estimate", "--sample", a.string(), "--estimator", est});
    CHECK(r.code == 0);
    CHECK(r.out.find("\"estimator\"") != std::string::npos);
  }
  const auto mv = run({"estimate", "--sample", a.string(), "--estimator", "sbm_z", "--variant", "mean_variance"});
  CHECK(mv.out.find("mean_variance") != std::string::npos);

  const auto diag = dir / "diag.csv";
  REQUIRE(run({"diagnose", "--sample", a.string(), "--out", diag.string()}).code == 0);
  const auto text = slurp(diag);
  CHECK(text.rfind("estimator,lambda_hat,rse,variant\n", 0) == 0);
  CHECK(text.find("ranktwo_curve") != std::string::npos);

  // Only the requested paths were written.
  int files = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    (void)entry;
    ++files;
  }
  CHECK(files == 6);
}

TEST_CASE("figure1 ratios are below one") {
  const auto r = run({"figure1", "--p", "0.6,0.75,0.9", "--levels", "5..15"});
  REQUIRE(r.code == 0);
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  CHECK(line == "p,levels,n,var_gls,var_mean,ratio");
  int rows = 0;
  while (std::getline(in, line)) {
    const double ratio = std::stod(line.substr(line.rfind(',') + 1));
    CHECK(ratio < 1.0);
    ++rows;
  }
  CHECK(rows == 33);
  CHECK(run({"figure1", "--p", "0.3"}).code == 1);
}

TEST_CASE("experiment subcommand") {
  const auto dir = scratch();
  const auto cfg = dir / "exp.ini";
  {
    std::ofstream f(cfg);
    f << "[network]\nsource = table1\nN = 500\nexpected_degree = 10\n"
         "[outcomes]\nlist = aligned\n"
         "[estimators]\nlist = mean, vh, sbm_z\n"
         "[run]\nsample_sizes = 40\nreplicates = 4\nseed = 3\n";
  }
  const auto out = dir / "rmse.csv";
  const auto r = run({"experiment", "--config", cfg.string(), "--jobs", "2", "--out", out.string()});
  REQUIRE(r.code == 0);
  const auto text = slurp(out);
  CHECK(text.rfind("estimator,n,outcome,rmse,bias,sd,replicates,failures\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 4);

  std::ofstream(dir / "bad.ini") << "[run]\nreplicates = many\n";
  CHECK(run({"experiment", "--config", (dir / "bad.ini").string()}).code == 2);
}
