#include "doctest.h"

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "dendroflow/experiments.hpp"
#include "dendroflow/tree.hpp"

namespace fs = std::filesystem;

namespace {

struct CmdResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr
};

CmdResult run_cli(const std::string& args, const std::string& env_prefix = "") {
  std::string cmd = env_prefix + std::string(DENDROFLOW_CLI_PATH) + " " + args + " 2>&1";
  std::array<char, 4096> buf{};
  CmdResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  while (std::size_t got = fread(buf.data(), 1, buf.size(), pipe)) r.output.append(buf.data(), got);
  int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("dendroflow_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void spit(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("help and unknown flags") {
  CHECK(run_cli("--help").exit_code == 0);
  CHECK(run_cli("bogus-subcommand").exit_code != 0);
}

TEST_CASE("simulate: deterministic output with a fixed seed") {
  CmdResult a = run_cli("--seed 7 simulate --kind gaussian --n 200");
  CmdResult b = run_cli("--seed 7 simulate --kind gaussian --n 200");
  CmdResult c = run_cli("--seed 8 simulate --kind gaussian --n 200");
  CHECK(a.exit_code == 0);
  CHECK(a.output == b.output);
  CHECK(a.output != c.output);
  CHECK(a.output.rfind("value\n", 0) == 0);
}

TEST_CASE("analyze: hand-traced example and error codes") {
  fs::path dir = fresh_dir("analyze");
  spit(dir / "series.csv", "value\n0\n2\n1\n3\n0\n");
  CmdResult r = run_cli("--out " + (dir / "out").string() + " analyze " + (dir / "series.csv").string());
  CHECK(r.exit_code == 0);

  std::string stats = slurp(dir / "out" / "stats.csv");
  CHECK(stats.find("N_r,1,,2") != std::string::npos);
  CHECK(stats.find("N_r,2,,1") != std::string::npos);
  std::string tree_txt = slurp(dir / "out" / "tree.txt");
  CHECK(tree_txt.rfind("ghost 1\n", 0) == 0);
  dendroflow::Tree t = dendroflow::parse_tree(tree_txt);
  CHECK(t.size() == 3);

  spit(dir / "empty.csv", "");
  CHECK(run_cli("analyze " + (dir / "empty.csv").string()).exit_code == 2);
  spit(dir / "mono.csv", "value\n1\n2\n3\n");
  CmdResult mono = run_cli("analyze " + (dir / "mono.csv").string());
  CHECK(mono.exit_code == 2);
  CHECK(mono.output.find("degenerate") != std::string::npos);
  spit(dir / "bad.csv", "value\n1\ntwo\n3\n");
  CmdResult bad = run_cli("analyze " + (dir / "bad.csv").string());
  CHECK(bad.exit_code == 2);
  CHECK(bad.output.find("line 3") != std::string::npos);
}

TEST_CASE("analyze --prune applies series prunings first") {
  fs::path dir = fresh_dir("prune_analyze");
  spit(dir / "series.csv", "value\n3\n1\n4\n2\n5\n0\n6\n");
  CmdResult direct = run_cli("prune --k 1 " + (dir / "series.csv").string());
  CHECK(direct.exit_code == 0);
  CHECK(direct.output == "value\n1\n2\n0\n");

  CmdResult r = run_cli("--out " + (dir / "out").string() + " analyze --prune 1 " +
                        (dir / "series.csv").string());
  CHECK(r.exit_code == 0);
  // the pruned series [1,2,0] is a single-peak tree: one leaf, no merges
  std::string stats = slurp(dir / "out" / "stats.csv");
  CHECK(stats.find("N_r,1,,1") != std::string::npos);
}

TEST_CASE("analyze round trip through the serialized tree") {
  fs::path dir = fresh_dir("roundtrip");
  spit(dir / "series.csv", "value\n0\n3\n1\n4\n0.5\n2\n0\n");
  CmdResult first =
      run_cli("--out " + (dir / "a").string() + " analyze " + (dir / "series.csv").string());
  CHECK(first.exit_code == 0);

  dendroflow::Tree t = dendroflow::parse_tree(slurp(dir / "a" / "tree.txt"));
  dendroflow::HarrisPath h = dendroflow::harris_path(t);
  std::ostringstream series2;
  series2 << "value\n";
  for (auto [x, y] : h.breakpoints) series2 << dendroflow::format_double(y) << "\n";
  spit(dir / "series2.csv", series2.str());
  CmdResult second =
      run_cli("--out " + (dir / "b").string() + " analyze " + (dir / "series2.csv").string());
  CHECK(second.exit_code == 0);
  CHECK(slurp(dir / "a" / "stats.csv") == slurp(dir / "b" / "stats.csv"));
}

TEST_CASE("two-column csv ingestion") {
  fs::path dir = fresh_dir("twocol");
  spit(dir / "series.csv", "t,value\n0,0\n1,2\n2,1\n3,3\n4,0\n");
  CmdResult r = run_cli("--out " + (dir / "out").string() + " analyze " + (dir / "series.csv").string());
  CHECK(r.exit_code == 0);
  spit(dir / "badt.csv", "t,value\n0,0\n2,2\n1,1\n");
  CHECK(run_cli("analyze " + (dir / "badt.csv").string()).exit_code == 2);
}

TEST_CASE("dynamics table") {
  CmdResult r = run_cli("dynamics --p 0.5 --lambda-u 1 --lambda-d 2 --steps 2");
  CHECK(r.exit_code == 0);
  CHECK(r.output.rfind("m,p,lambda_u,lambda_d,A,gamma,p2,p_min\n", 0) == 0);
  CHECK(r.output.find("\n0,0.5,1,2,1,2,") != std::string::npos);
  // after one pruning: p = 2/3, lambda_u = 0.5, lambda_d = 1
  CHECK(r.output.find("\n1,0.666666666667,0.5,1,0.5,2,") != std::string::npos);
}

TEST_CASE("experiment run: report files and exit code") {
  fs::path dir = fresh_dir("experiment");
  spit(dir / "ok.cfg",
       "kind = basins\n"
       "kernel = gaussian\n"
       "chain_length = 100000\n"
       "replicates = 2\n"
       "seed = 11\n"
       "check order1_basins_per_order2 = 4 0.5\n");
  CmdResult ok = run_cli("--out " + (dir / "out").string() + " experiment run " +
                         (dir / "ok.cfg").string());
  CHECK(ok.exit_code == 0);
  CHECK(ok.output.find("[PASS] order1_basins_per_order2") != std::string::npos);
  std::string json = slurp(dir / "out" / "report.json");
  CHECK(json.find("\"all_passed\": true") != std::string::npos);

  spit(dir / "fail.cfg",
       "kind = basins\n"
       "kernel = gaussian\n"
       "chain_length = 100000\n"
       "replicates = 2\n"
       "seed = 11\n"
       "check order1_basins_per_order2 = 10 0.1\n");
  CmdResult fail = run_cli("--out " + (dir / "out2").string() + " experiment run " +
                           (dir / "fail.cfg").string());
  CHECK(fail.exit_code == 1);

  spit(dir / "bad.cfg", "kind = basins\nchain_length = -3\n");
  CmdResult bad = run_cli("experiment run " + (dir / "bad.cfg").string());
  CHECK(bad.exit_code == 2);
  CHECK(bad.output.find("chain_length") != std::string::npos);
}

TEST_CASE("experiment outputs are byte-identical across thread counts") {
  fs::path dir = fresh_dir("threads");
  spit(dir / "cfg.cfg",
       "kind = horton_tokunaga\n"
       "kernel = gaussian\n"
       "chain_length = 20000\n"
       "replicates = 4\n"
       "batches = 4\n"
       "seed = 21\n");
  CmdResult one = run_cli("--threads 1 --out " + (dir / "t1").string() + " experiment run " +
                          (dir / "cfg.cfg").string());
  CmdResult four = run_cli("--threads 4 --out " + (dir / "t4").string() + " experiment run " +
                           (dir / "cfg.cfg").string());
  CHECK(one.exit_code == 0);
  CHECK(four.exit_code == 0);
  CHECK(slurp(dir / "t1" / "report.json") == slurp(dir / "t4" / "report.json"));
  CHECK(slurp(dir / "t1" / "report.csv") == slurp(dir / "t4" / "report.csv"));

  // DENDROFLOW_THREADS is the fallback when --threads is absent
  CmdResult env = run_cli("--out " + (dir / "tenv").string() + " experiment run " +
                              (dir / "cfg.cfg").string(),
                          "DENDROFLOW_THREADS=3 ");
  CHECK(env.exit_code == 0);
  CHECK(slurp(dir / "t1" / "report.json") == slurp(dir / "tenv" / "report.json"));
}

TEST_CASE("bundled acceptance configs parse") {
  for (const char* name : {"acceptance_theorem2.cfg", "acceptance_gw.cfg", "acceptance_basins.cfg",
                           "acceptance_forest.cfg", "acceptance_asymmetry.cfg", "acceptance_fbm.cfg",
                           "forest_laplace.cfg"}) {
    fs::path p = fs::path(DENDROFLOW_CONFIG_DIR) / name;
    std::ifstream in(p);
    REQUIRE(in.good());
    std::ostringstream os;
    os << in.rdbuf();
    CHECK_NOTHROW(dendroflow::parse_config(os.str()));
  }
}

}  // TEST_SUITE
