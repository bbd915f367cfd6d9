#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "json.hpp"

namespace {

namespace fs = std::filesystem;

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

fs::path temp_root() {
  static const fs::path root = [] {
    auto p = fs::temp_directory_path() /
             ("grouplin_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p;
  }();
  return root;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

RunResult run_cli(const std::string& args) {
  static int counter = 0;
  const fs::path out = temp_root() / ("out" + std::to_string(counter) + ".txt");
  const fs::path err = temp_root() / ("err" + std::to_string(counter) + ".txt");
  ++counter;
  const std::string cmd = std::string(GROUPLIN_CLI_PATH) + " " + args + " > " +
                          out.string() + " 2> " + err.string();
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

std::size_t count_data_rows(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  std::size_t rows = 0;
  bool seen_header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!seen_header) {
      seen_header = true;
      continue;
    }
    ++rows;
  }
  return rows;
}

}  // namespace

TEST_CASE("estimate with method=naive echoes the inputs") {
  const fs::path in = temp_root() / "xv.csv";
  spit(in, "x,v\n1.5,0.5\n-2,1\n0.25,2\n");
  const auto r = run_cli("estimate --in " + in.string() + " --method naive");
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("index,x,v,estimate,block,b_hat") != std::string::npos);
  CHECK(r.out.find("0,1.5,0.5,1.5,-1,0") != std::string::npos);
  CHECK(r.out.find("1,-2,1,-2,-1,0") != std::string::npos);
}

TEST_CASE("estimate group-linear on a homoscedastic file uses one block and "
          "matches the c* = 0.5 shrink") {
  const fs::path in = temp_root() / "homo.csv";
  spit(in, "x,v\n0,1\n1,1\n2,1\n3,1\n4,1\n");
  const fs::path part = temp_root() / "partition.json";
  const auto r = run_cli("estimate --in " + in.string() +
                         " --method gl --binning log --emit-partition " +
                         part.string());
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("0,0,1,0.4,0,0.2") != std::string::npos);
  CHECK(r.out.find("4,4,1,3.6,0,0.2") != std::string::npos);

  const auto pj = nlohmann::json::parse(slurp(part));
  REQUIRE(pj["intervals"].size() == 1);
  CHECK(pj["members"][0].size() == 5);
}

TEST_CASE("estimate reads stdin and writes files") {
  const fs::path in = temp_root() / "pipe.csv";
  spit(in, "x,v\n7.5,0.25\n");
  const fs::path out = temp_root() / "est.csv";
  const auto r = run_cli("estimate --in - --method naive --out " +
                         out.string() + " < " + in.string());
  REQUIRE(r.exit_code == 0);
  CHECK(slurp(out).find("0,7.5,0.25,7.5,-1,0") != std::string::npos);
}

TEST_CASE("estimate rejects malformed input with a line-numbered data error") {
  const fs::path bad = temp_root() / "bad.csv";
  spit(bad, "x,v\n1,0.5\noops\n");
  const auto r = run_cli("estimate --in " + bad.string());
  CHECK(r.exit_code == 3);
  CHECK(r.err.find(":3:") != std::string::npos);

  const fs::path negative = temp_root() / "neg.csv";
  spit(negative, "x,v\n1,-0.5\n");
  const auto neg = run_cli("estimate --in " + negative.string());
  CHECK(neg.exit_code == 3);
  CHECK(neg.err.find("v must be > 0") != std::string::npos);

  const fs::path empty = temp_root() / "empty.csv";
  spit(empty, "");
  CHECK(run_cli("estimate --in " + empty.string()).exit_code == 3);

  CHECK(run_cli("estimate --in " + temp_root().string() +
                "/does_not_exist.csv")
            .exit_code == 3);
}

TEST_CASE("usage errors exit with code 2") {
  CHECK(run_cli("simulate --scenario z --n 10 --reps 2").exit_code == 2);
  CHECK(run_cli("simulate --scenario a --methods banana --n 10 --reps 2")
            .exit_code == 2);
  CHECK(run_cli("curve --scenario a --n 50:20:10 --reps 2").exit_code == 2);
  CHECK(run_cli("nonsense").exit_code == 2);
  CHECK(run_cli("--help").exit_code == 0);
}

TEST_CASE("simulate emits one row per method plus oracle rows on request") {
  const auto r = run_cli(
      "simulate --scenario e --methods gl,naive --n 40 --reps 5 --seed 3 "
      "--oracles --mc-size 20000");
  REQUIRE(r.exit_code == 0);
  CHECK(count_data_rows(r.out) == 4);
  CHECK(r.out.find("e,oracle-linear,0,0,0.15,0") != std::string::npos);
  CHECK(r.out.find("oracle-xkb") != std::string::npos);
  CHECK(r.out.find("# seed: 3") != std::string::npos);
}

TEST_CASE("curve over the full grid has |methods| * |grid| rows and is "
          "byte-identical across runs") {
  const std::string args =
      "curve --scenario e --methods gl,sure-m,sure-sg --n 20:500:20 --reps 2 "
      "--seed 1";
  const auto r1 = run_cli(args);
  REQUIRE(r1.exit_code == 0);
  CHECK(count_data_rows(r1.out) == 75);  // 25 grid points x 3 methods
  const auto r2 = run_cli(args);
  CHECK(r1.out == r2.out);
}

TEST_CASE("simulate json output carries metadata and rows") {
  const auto r = run_cli(
      "simulate --scenario a --methods naive --n 30 --reps 4 --seed 9 "
      "--format json");
  REQUIRE(r.exit_code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["meta"]["seed"] == 9);
  REQUIRE(j["rows"].size() == 1);
  CHECK(j["rows"][0]["method"] == "naive");
  CHECK(j["rows"][0]["n"] == 30);
  CHECK(j["rows"][0]["N"] == 4);
}

TEST_CASE("baseball pipeline end to end") {
  std::ostringstream csv;
  csv << "id,h1,n1,h2,n2,pitcher\n";
  std::srand(12);
  for (int i = 0; i < 60; ++i) {
    const int n1 = 11 + std::rand() % 300;
    const int n2 = 11 + std::rand() % 300;
    const double p = 0.2 + 0.1 * (i % 3);
    int h1 = 0, h2 = 0;
    for (int t = 0; t < n1; ++t) h1 += (std::rand() % 1000) < 1000 * p;
    for (int t = 0; t < n2; ++t) h2 += (std::rand() % 1000) < 1000 * p;
    csv << "p" << i << ',' << h1 << ',' << n1 << ',' << h2 << ',' << n2 << ','
        << (i % 5 == 0 ? 1 : 0) << "\n";
  }
  const fs::path in = temp_root() / "league.csv";
  spit(in, csv.str());

  const auto naive_only = run_cli("baseball --in " + in.string() +
                                  " --methods naive --shuffles 2 --seed 5");
  REQUIRE(naive_only.exit_code == 0);
  CHECK(count_data_rows(naive_only.out) == 3);  // three subsets
  CHECK(naive_only.out.find("naive,all,1,1,0") != std::string::npos);

  const auto no_shuffle = run_cli("baseball --in " + in.string() +
                                  " --methods gl,naive --shuffles 0 --seed 5");
  REQUIRE(no_shuffle.exit_code == 0);
  CHECK(no_shuffle.out.find("method,subset,tse_ratio\n") != std::string::npos);
  CHECK(no_shuffle.out.find("shuffled") == std::string::npos);

  const auto missing = run_cli("baseball --in /nope/nothing.csv");
  CHECK(missing.exit_code == 3);
}
