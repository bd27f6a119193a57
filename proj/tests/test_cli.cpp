#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "wssp/cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = wssp::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "wssp_cli_tests";
  fs::create_directories(dir);
  const fs::path p = dir / name;
  fs::remove(p);
  return p;
}

}  // namespace

TEST_CASE("solve exports the value table") {
  const auto r = run({"solve", "--dist", "uniform:0,1", "--n", "14", "--b", "3", "--r", "2",
                      "--preselection", "0.682"});
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("j,X,Y,V,T\n", 0) == 0);
  const auto pos = r.out.find("\n1,2,1,");
  REQUIRE(pos != std::string::npos);
  const double v = std::stod(r.out.substr(pos + 7));
  CHECK(std::abs(v - 2.547) <= 0.0015);
  CHECK(r.out.find("\n15,0,1,0.682000,\n") != std::string::npos);

  const auto closed = run({"solve", "--dist", "uniform:0,1", "--n", "14", "--b", "3", "--r", "2",
                           "--preselection", "0.682", "--closed-form"});
  CHECK(closed.code == 0);
  CHECK(closed.out == r.out);
}

TEST_CASE("solve rank table") {
  const auto r = run({"solve", "--rank", "--n", "2", "--b", "1", "--r", "1"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("\n1,1,0,1.312500,") != std::string::npos);
}

TEST_CASE("solve rejects bad input without writing a file") {
  const auto path = scratch("bad.csv");
  auto r = run({"solve", "--dist", "uniform:0,1", "--n", "5", "--b", "6", "--r", "6", "--out",
                path.string()});
  CHECK(r.code == 2);
  CHECK_FALSE(fs::exists(path));

  r = run({"solve", "--dist", "uniform:0,1", "--n", "5", "--b", "2", "--r", "3"});
  CHECK(r.code == 2);
  r = run({"solve", "--dist", "normal:0,1", "--n", "5", "--b", "2", "--r", "2"});
  CHECK(r.code == 2);
  CHECK(r.err.find("--dist") != std::string::npos);
  r = run({"solve", "--dist", "uniform:0,1", "--n", "five", "--b", "2", "--r", "2"});
  CHECK(r.code == 2);
  r = run({"solve", "--dist", "uniform:0,1", "--n", "5", "--b", "2", "--r", "1"});
  CHECK(r.code == 2);  // missing preselection
  r = run({});
  CHECK(r.code == 2);
}

TEST_CASE("simulate is deterministic and writes one block per policy") {
  const auto a = scratch("sim_a.csv");
  const auto b = scratch("sim_b.csv");
  const auto meta = scratch("sim_a.json");
  const std::vector<std::string> common{"simulate", "--rounds", "3", "--population", "200",
                                        "--n", "20", "--b", "3", "--r", "1", "--dist",
                                        "uniform:0,1", "--policy", "ccmdp", "--policy", "rand",
                                        "--replicates", "8", "--seed", "5"};
  auto args_a = common;
  args_a.insert(args_a.end(), {"--out", a.string(), "--meta", meta.string()});
  auto args_b = common;
  args_b.insert(args_b.end(), {"--out", b.string(), "--threads", "1"});
  REQUIRE(run(args_a).code == 0);
  REQUIRE(run(args_b).code == 0);
  const std::string csv = slurp(a);
  CHECK(csv == slurp(b));
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
  CHECK(csv.find("\nccmdp,3,") != std::string::npos);
  CHECK(csv.find("\nrand,3,") != std::string::npos);
  const std::string m = slurp(meta);
  CHECK(m.find("mt19937_64") != std::string::npos);
}

TEST_CASE("simulate rejects unknown policies") {
  const auto path = scratch("sim_bad.csv");
  const auto r = run({"simulate", "--dist", "uniform:0,1", "--policy", "greedy", "--out",
                      path.string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("ccmdp-partial") != std::string::npos);
  CHECK_FALSE(fs::exists(path));
}

TEST_CASE("repro targets") {
  const auto example = run({"repro", "example"});
  CHECK(example.code == 0);
  CHECK(example.out.find("reject") != std::string::npos);
  const auto table = run({"repro", "table1"});
  CHECK(table.code == 0);
  CHECK(table.out.find("erratum") != std::string::npos);
  CHECK(run({"repro", "bogus"}).code == 2);
}
