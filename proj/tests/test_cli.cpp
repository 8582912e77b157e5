#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bcast/chain.hpp"
#include "bcast/cli.hpp"
#include "bcast/gfun.hpp"
#include "bcast/sim.hpp"
#include "json.hpp"

using namespace bcast;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

// Data rows only: comment lines dropped, header kept first.
std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  for (auto& line : lines_of(text)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::istringstream in(line);
    std::string f;
    while (std::getline(in, f, ',')) fields.push_back(f);
    if (line.back() == ',') fields.emplace_back();
    rows.push_back(fields);
  }
  return rows;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / "bcast_cli_tests";
  fs::create_directories(dir);
  return dir / name;
}

void put(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
}

fs::path golden(const std::string& name) { return fs::path(BCAST_GOLDEN_DIR) / name; }

double num(const std::string& s) { return std::stod(s); }

}  // namespace

TEST_CASE("thresholds golden file") {
  auto r = run({"thresholds", "--d-range", "2:6"});
  REQUIRE(r.code == 0);
  CHECK(r.out == slurp(golden("thresholds.csv")));
  auto rows = csv_rows(r.out);
  REQUIRE(rows.size() == 6);
  CHECK(rows[0] == std::vector<std::string>{"d", "delta_maj", "delta_es", "delta_bond", "delta_andor"});
  // d = 2
  CHECK(rows[1][1].empty());
  CHECK(std::abs(num(rows[1][2]) - 0.146447) < 1e-6);
  CHECK(std::abs(num(rows[1][4]) - 0.088562) < 1e-6);
  // d = 3
  CHECK(std::abs(num(rows[2][1]) - 0.166667) < 1e-6);
  CHECK(std::abs(num(rows[2][2]) - 0.211325) < 1e-6);
  CHECK(num(rows[2][3]) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("thresholds print twelve significant digits") {
  auto rows = csv_rows(run({"thresholds", "--d-range", "3"}).out);
  CHECK(rows[1][1] == "0.166666666667");
  CHECK(rows[1][2] == "0.211324865405");
}

TEST_CASE("empty and malformed ranges") {
  auto r = run({"thresholds", "--d-range", "5:2"});
  CHECK(r.code == 0);
  CHECK(csv_rows(r.out).size() == 1);
  CHECK(run({"thresholds", "--d-range", "2-5"}).code == exit_usage);
  CHECK(run({"thresholds", "--d-range", "1:3"}).code == exit_usage);
}

TEST_CASE("chain golden file and columns") {
  auto r = run({"chain", "--schedule", "const:8", "--delta", "0.1", "--depth", "6"});
  REQUIRE(r.code == 0);
  CHECK(r.out == slurp(golden("chain_majority.csv")));
  auto rows = csv_rows(r.out);
  CHECK(rows[0] == std::vector<std::string>{"k", "width", "tv", "decoder_error", "ml_error", "tv_bound"});
  CHECK(rows[1][2] == "1");
  CHECK(rows[1][3] == "0");
}

TEST_CASE("chain rows match the library") {
  auto r = run({"chain", "--schedule", "const:64", "--delta", "0.1", "--depth", "60"});
  auto rows = csv_rows(r.out);
  auto table = chain_table(ChainFamily::majority(3, LayerSchedule::constant(64), NoiseLevel(0.1)), 60);
  REQUIRE(rows.size() == table.size() + 1);
  for (std::size_t i = 0; i < table.size(); ++i) {
    CHECK(std::abs(num(rows[i + 1][2]) - table[i].tv) <= 1e-11 * std::max(1.0, table[i].tv));
    CHECK(std::abs(num(rows[i + 1][3]) - table[i].decoder_error) <= 1e-11);
  }
  // error rises then flattens out
  for (std::size_t i = 2; i < rows.size(); ++i) CHECK(num(rows[i][3]) >= num(rows[i - 1][3]) - 1e-15);
  CHECK(num(rows.back()[3]) - num(rows[rows.size() - 11][3]) < 1e-3);
  CHECK(num(rows.back()[3]) < 0.45);
}

TEST_CASE("supercritical tv stays under its bound column") {
  auto rows = csv_rows(run({"chain", "--schedule", "const:64", "--delta", "0.25", "--depth", "80"}).out);
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(num(rows[i][2]) <= num(rows[i][5]) + 1e-12);
}

TEST_CASE("and-or odd levels need the flag") {
  auto even = csv_rows(run({"chain", "--family", "andor", "--schedule", "const:16", "--delta", "0.05", "--depth", "6"}).out);
  auto all = csv_rows(
      run({"chain", "--family", "andor", "--schedule", "const:16", "--delta", "0.05", "--depth", "6", "--include-odd"})
          .out);
  CHECK(even.size() == 1 + 4);
  CHECK(all.size() == 1 + 7);
}

TEST_CASE("chain width guard") {
  auto r = run({"chain", "--schedule", "const:5000", "--depth", "2"});
  CHECK(r.code == exit_guard);
  CHECK(r.err.find("5000") != std::string::npos);
}

TEST_CASE("simulate is identical across thread counts") {
  std::vector<std::string> base{"--seed", "11", "--format", "json", "simulate", "--trials", "4000", "--depth", "10"};
  auto one = base, eight = base;
  one.insert(one.end(), {"--threads", "1"});
  eight.insert(eight.end(), {"--threads", "8"});
  auto a = run(one), b = run(eight);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  auto j = nlohmann::json::parse(a.out);
  CHECK(j["seed"] == 11);
  CHECK(j["ci"].size() == 2);
  CHECK(j["metadata"]["version"] == BCAST_VERSION);
  CHECK(!j["metadata"].contains("threads"));
}

TEST_CASE("simulate agrees with the exact chain") {
  auto r = run({"--format", "json", "--seed", "5", "simulate", "--trials", "20000", "--schedule", "const:16",
                "--delta", "0.1", "--depth", "12"});
  auto j = nlohmann::json::parse(r.out);
  auto table = chain_table(ChainFamily::majority(3, LayerSchedule::constant(16), NoiseLevel(0.1)), 12);
  const double exact = table.back().decoder_error;
  CHECK(j["ci"][0].get<double>() <= exact);
  CHECK(exact <= j["ci"][1].get<double>());
}

TEST_CASE("usage errors") {
  CHECK(run({"simulate", "--trials", "0"}).code == exit_usage);
  CHECK(run({}).code == exit_usage);
  CHECK(run({"chain", "--delta", "0.7"}).code == exit_usage);
  CHECK(run({"chain", "--schedule", "ring:3"}).code == exit_usage);
  CHECK(run({"--format", "xml", "thresholds"}).code == exit_usage);
  CHECK(run({"--help"}).code == exit_ok);
}

TEST_CASE("config file values and flag precedence") {
  auto cfg = scratch("chain.cfg");
  put(cfg, "# chain settings\ndelta = 0.2\ndepth = 4\nseed = 9\n");
  auto r = run({"chain", "--config", cfg.string(), "--depth", "3"});
  REQUIRE(r.code == 0);
  auto lines = lines_of(r.out);
  CHECK(std::find(lines.begin(), lines.end(), "# delta=0.2") != lines.end());
  CHECK(std::find(lines.begin(), lines.end(), "# depth=3") != lines.end());
  CHECK(std::find(lines.begin(), lines.end(), "# seed=9") != lines.end());
  CHECK(csv_rows(r.out).size() == 1 + 4);
  put(cfg, "delta 0.2\n");
  auto bad = run({"chain", "--config", cfg.string()});
  CHECK(bad.code == exit_usage);
  CHECK(bad.err.find("line 1") != std::string::npos);
}

TEST_CASE("out path") {
  auto p = scratch("thresholds_out.csv");
  fs::remove(p);
  auto r = run({"--out", p.string(), "thresholds", "--d-range", "2:6"});
  CHECK(r.code == 0);
  CHECK(r.out.empty());
  CHECK(slurp(p) == slurp(golden("thresholds.csv")));
}

TEST_CASE("expander gen, verify, search") {
  auto g1 = scratch("g1.txt"), g2 = scratch("g2.txt");
  CHECK(run({"--seed", "7", "--out", g1.string(), "expander", "gen", "--n", "32", "--d", "5"}).code == 0);
  CHECK(run({"--seed", "7", "--out", g2.string(), "expander", "gen", "--n", "32", "--d", "5"}).code == 0);
  CHECK(slurp(g1) == slurp(g2));
  CHECK(slurp(g1).rfind("32 5\n", 0) == 0);

  auto v = run({"expander", "verify", "--graph", g1.string()});
  REQUIRE(v.code == 0);
  auto rows = csv_rows(v.out);
  CHECK(rows[0][3] == "min_neighborhood");
  CHECK(rows[1][2] == "4");  // floor(32 * 5^(-6/5))
  CHECK(num(rows[1][3]) >= 1);
  CHECK((rows[1][5] == "true") == (num(rows[1][3]) >= num(rows[1][4])));

  auto s = run({"expander", "search", "--n", "4", "--d", "3", "--s", "1", "--required", "3"});
  CHECK(s.code == 0);
  CHECK(s.out.rfind("4 3\n", 0) == 0);
  CHECK(run({"expander", "search", "--n", "3", "--d", "2", "--s", "1", "--required", "4"}).code == exit_infeasible);
  CHECK(run({"expander", "search", "--n", "8", "--d", "5"}).code == exit_guard);
}

TEST_CASE("expander assemble") {
  auto r = run({"expander", "assemble", "--base-width", "10", "--d", "3"});
  CHECK(r.code == exit_usage);
  CHECK(r.err.find("M = exp(N / (4 d^(12/5))) >= 2") != std::string::npos);
  auto p = scratch("dag.txt");
  auto ok = run({"--out", p.string(), "expander", "assemble", "--base-width", "40", "--d", "3", "--depth", "12"});
  REQUIRE(ok.code == 0);
  auto rows = csv_rows(ok.out);
  CHECK(num(rows[1][2]) == 3);
  CHECK(num(rows[1][3]) <= 6);
  CHECK(dag_from_string(slurp(p)).depth() == 12);
}

TEST_CASE("sweep reproduces chain and resumes") {
  auto grid = scratch("grid1.txt"), manifest = scratch("manifest1.txt");
  fs::remove(manifest);
  put(grid, "mode = chain\ndelta = 0.1\nd = 3\nwidth = 16\ndepth = 20\n");
  auto first = run({"sweep", "--grid", grid.string(), "--manifest", manifest.string()});
  REQUIRE(first.code == 0);
  CHECK(first.err.find("1 cells computed") != std::string::npos);
  auto chain = csv_rows(run({"chain", "--schedule", "const:16", "--delta", "0.1", "--depth", "20"}).out);
  auto sweep = csv_rows(first.out);
  REQUIRE(sweep.size() == 2);
  std::vector<std::string> tail(sweep[1].begin() + 5, sweep[1].end());
  CHECK(tail == chain.back());

  auto again = run({"sweep", "--grid", grid.string(), "--manifest", manifest.string()});
  CHECK(again.err.find("0 cells computed, 1 reused") != std::string::npos);
  CHECK(again.out == first.out);
}

TEST_CASE("sweep across the majority threshold") {
  auto grid = scratch("grid2.txt");
  put(grid, "delta = 0.1, 0.15, 0.2, 0.25\nwidth = 64\ndepth = 100\n");
  auto r = run({"--threads", "4", "sweep", "--grid", grid.string()});
  REQUIRE(r.code == 0);
  auto rows = csv_rows(r.out);
  REQUIRE(rows.size() == 5);
  CHECK(num(rows[1][8]) < 0.2);
  CHECK(num(rows[4][8]) > 0.45);
  for (std::size_t i = 2; i < rows.size(); ++i) CHECK(num(rows[i][8]) > num(rows[i - 1][8]));
}

TEST_CASE("malformed grid names the line") {
  auto grid = scratch("grid3.txt");
  put(grid, "delta = 0.1\n\nwidth = 16, x\ndepth = 3\n");
  auto r = run({"sweep", "--grid", grid.string()});
  CHECK(r.code == exit_usage);
  CHECK(r.err.find("grid line 3") != std::string::npos);
  put(grid, "delta = 0.1\nwidth = 4\n");
  CHECK(run({"sweep", "--grid", grid.string()}).code == exit_usage);
}

TEST_CASE("remaining commands run") {
  auto fp = csv_rows(run({"fixedpoints", "--delta", "0.1,0.2"}).out);
  CHECK(fp.size() == 1 + 3 + 1);
  const double closed = (1 + std::sqrt((1 - 0.6) / std::pow(0.8, 3))) / 2;
  CHECK(std::abs(num(fp[3][5]) - closed) < 1e-9);
  auto c = run({"coupled", "--trials", "200", "--depth", "5"});
  CHECK(c.code == 0);
  CHECK(c.out.find("# result.violations=0") != std::string::npos);
  auto p = run({"percolate", "--trials", "200", "--depth", "5", "--format", "json"});
  CHECK(nlohmann::json::parse(p.out)["rows"].size() == 6);
  auto b = csv_rows(run({"bounds", "--delta", "0.25", "--d", "3", "--schedule", "const:10", "--depth", "5"}).out);
  CHECK(num(b[6][2]) == doctest::Approx(2.373046875));
  auto e = run({"expander", "simulate", "--base-width", "40", "--d", "3", "--depth", "10", "--trials", "500"});
  CHECK(e.code == 0);
}
