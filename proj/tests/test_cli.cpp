#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "baoi/cli.hpp"

using namespace baoi::cli;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Result r;
  r.code = run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> v;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) v.push_back(line);
  return v;
}

std::vector<std::string> data_lines(const std::string& text) {
  std::vector<std::string> v;
  for (auto& l : lines(text)) {
    if (!l.empty() && l[0] != '#') v.push_back(l);
  }
  return v;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> v;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) v.push_back(cell);
  if (!line.empty() && line.back() == ',') v.emplace_back();
  return v;
}

std::map<std::string, std::string> row_map(const std::string& header, const std::string& row) {
  const auto h = split(header);
  const auto r = split(row);
  REQUIRE(h.size() == r.size());
  std::map<std::string, std::string> m;
  for (std::size_t i = 0; i < h.size(); ++i) m[h[i]] = r[i];
  return m;
}

std::string temp_path(const std::string& name) {
  return std::string(std::getenv("TMPDIR") ? std::getenv("TMPDIR") : "/tmp") + "/baoi_test_" +
         name;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("number formatting") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(1.0 / 3.0) == "0.333333333333");
  CHECK(format_number(30.665) == "30.665");
  CHECK(format_number(std::nan("")) == "nan");
  CHECK(format_number(1e-20) == "1e-20");
}

TEST_CASE("grid parsing") {
  const Grid g = parse_grid("0.05:0.3:0.05");
  const auto v = g.values();
  REQUIRE(v.size() == 6);
  CHECK(v.front() == doctest::Approx(0.05));
  CHECK(v.back() == doctest::Approx(0.3));
  CHECK(parse_grid("0.2").values().size() == 1);
  CHECK(parse_grid("0.2:0.2:0.1").values().size() == 1);
  CHECK(parse_grid("10:200:10").values().size() == 20);
  CHECK_THROWS(parse_grid("1:2"));
  CHECK_THROWS(parse_grid("1:2:0"));
  CHECK_THROWS(parse_grid("2:1:0.5"));
  CHECK_THROWS(parse_grid("a:b:c"));
}

TEST_CASE("config parsing") {
  std::istringstream in("# comment\ndensity = 0.2\n\n--frame=40  # trailing\nmode=both\n");
  const auto entries = parse_config(in);
  REQUIRE(entries.size() == 3);
  CHECK(entries[0] == std::pair<std::string, std::string>{"density", "0.2"});
  CHECK(entries[1] == std::pair<std::string, std::string>{"frame", "40"});
  CHECK(entries[2] == std::pair<std::string, std::string>{"mode", "both"});
  std::istringstream bad("density 0.2\n");
  CHECK_THROWS(parse_config(bad));
}

TEST_CASE("fixed-point command") {
  const Result r = invoke({"fixed-point", "--density", "0.1", "--wmin", "16", "--range", "4"});
  CHECK(r.code == kExitOk);
  const auto rows = data_lines(r.out);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == "density,range,wmin,frame,lambda,p_tx,p_cl,mu,mu_times_frame,status");
  const auto m = row_map(rows[0], rows[1]);
  CHECK(std::stod(m.at("p_cl")) < 0.5);
  CHECK(m.at("status") == "stable");
  CHECK(r.out.find("# density=0.1\n") != std::string::npos);
}

TEST_CASE("fixed-point isolated-node limit") {
  const Result r = invoke({"fixed-point", "--density", "1e-6"});
  CHECK(r.code == kExitOk);
  const auto rows = data_lines(r.out);
  const auto m = row_map(rows[0], rows[1]);
  CHECK(std::stod(m.at("p_tx")) == doctest::Approx(2.0 / 17.0).epsilon(1e-6));
}

TEST_CASE("fixed-point reports instability above the density cap") {
  const Result r = invoke({"fixed-point", "--density", "0.4"});
  CHECK(r.code == kExitInfeasible);
  const auto rows = data_lines(r.out);
  CHECK(row_map(rows[0], rows[1]).at("status") == "unstable");
  CHECK(r.err.find("unstable") != std::string::npos);
}

TEST_CASE("analyze in both modes") {
  const Result r = invoke({"analyze", "--density", "0.2", "--frame", "50", "--mode", "both"});
  CHECK(r.code == kExitOk);
  const auto rows = data_lines(r.out);
  REQUIRE(rows.size() == 2);
  const auto m = row_map(rows[0], rows[1]);
  const double c = std::stod(m.at("baoi_consistent"));
  const double p = std::stod(m.at("baoi_paper"));
  CHECK(std::stod(m.at("baoi_deviation")) == doctest::Approx(p - c));
  CHECK(std::stod(m.at("velocity_consistent")) == doctest::Approx(1.0 / c).epsilon(1e-10));
  CHECK(std::stod(m.at("ey_consistent")) == doctest::Approx(50.0));
}

TEST_CASE("analyze leaves unselected mode columns empty") {
  const Result r = invoke({"analyze", "--mode", "paper"});
  const auto m = row_map(data_lines(r.out)[0], data_lines(r.out)[1]);
  CHECK(m.at("baoi_consistent").empty());
  CHECK(!m.at("baoi_paper").empty());
  CHECK(m.at("baoi_deviation").empty());
}

TEST_CASE("analyze with a forced service rate") {
  const Result r = invoke({"analyze", "--mu-override", "1", "--frame", "50"});
  CHECK(r.code == kExitOk);
  const auto m = row_map(data_lines(r.out)[0], data_lines(r.out)[1]);
  CHECK(std::abs(std::stod(m.at("baoi_consistent")) - 30.665) < 1e-9);
  CHECK(m.at("alpha") == "0");
  CHECK(invoke({"analyze", "--mu-override", "1.5"}).code == kExitUsage);
  CHECK(invoke({"analyze", "--mu-override", "0.01"}).code == kExitInfeasible);
}

TEST_CASE("sweep rows are recomputable by analyze") {
  const Result sweep =
      invoke({"sweep", "--sweep", "density", "--grid", "0.05:0.3:0.05", "--mode", "both"});
  CHECK(sweep.code == kExitOk);
  const auto rows = data_lines(sweep.out);
  REQUIRE(rows.size() == 7);
  double prev = 0.0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto cells = split(rows[i]);
    const Result one = invoke({"analyze", "--density", cells[0], "--mode", "both"});
    const auto single = data_lines(one.out);
    CHECK(rows[i].substr(rows[i].find(',') + 1) == single[1]);
    const double b = std::stod(row_map(rows[0], rows[i]).at("baoi_consistent"));
    CHECK(b > prev);
    prev = b;
  }
}

TEST_CASE("frame sweep marks unstable points and keeps grid order") {
  const Result r = invoke({"sweep", "--sweep", "frame", "--grid", "10:200:10", "--density", "0.2"});
  CHECK(r.code == kExitOk);
  const auto rows = data_lines(r.out);
  REQUIRE(rows.size() == 21);
  CHECK(row_map(rows[0], rows[1]).at("status") == "unstable");
  CHECK(row_map(rows[0], rows[1]).at("sweep_value") == "10");
  CHECK(row_map(rows[0], rows[20]).at("sweep_value") == "200");
  std::vector<double> ages;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto m = row_map(rows[0], rows[i]);
    if (m.at("status") == "ok") ages.push_back(std::stod(m.at("baoi_consistent")));
  }
  const auto best = std::min_element(ages.begin(), ages.end()) - ages.begin();
  CHECK(best > 0);
  CHECK(best < static_cast<long>(ages.size()) - 1);
}

TEST_CASE("single-value grid gives one row") {
  const Result r = invoke({"sweep", "--sweep", "density", "--grid", "0.1:0.1:0.05"});
  CHECK(r.code == kExitOk);
  CHECK(data_lines(r.out).size() == 2);
}

TEST_CASE("sweep fails only when every point fails") {
  CHECK(invoke({"sweep", "--sweep", "density", "--grid", "0.4:0.5:0.1"}).code == kExitInfeasible);
  CHECK(invoke({"sweep", "--sweep", "density", "--grid", "0.3:0.4:0.1"}).code == kExitOk);
}

TEST_CASE("usage errors") {
  CHECK(invoke({}).code == kExitUsage);
  CHECK(invoke({"analyze", "--bogus", "1"}).code == kExitUsage);
  CHECK(invoke({"analyze", "--mode", "weird"}).code == kExitUsage);
  CHECK(invoke({"analyze", "--density", "-1"}).code == kExitUsage);
  CHECK(invoke({"sweep", "--sweep", "range", "--grid", "1:2:1"}).code == kExitUsage);
  CHECK(invoke({"sweep", "--sweep", "density"}).code == kExitUsage);
  CHECK(invoke({"simulate", "--area-side", "20"}).code == kExitUsage);
  CHECK(invoke({"simulate", "--admission", "late"}).code == kExitUsage);
  CHECK(invoke({"analyze", "--config", "/nonexistent/baoi.cfg"}).code == kExitUsage);
  CHECK(invoke({"--help"}).code == kExitOk);
}

TEST_CASE("config file values yield to command-line flags") {
  const std::string path = temp_path("cfg.txt");
  {
    std::ofstream cfg(path);
    cfg << "density=0.2\nframe=40\nmode=both\nreps=4\n";
  }
  const Result r = invoke({"analyze", "--config", path, "--frame", "60"});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("# density=0.2\n") != std::string::npos);
  CHECK(r.out.find("# frame=60\n") != std::string::npos);
  CHECK(r.out.find("# mode=both\n") != std::string::npos);
  const auto m = row_map(data_lines(r.out)[0], data_lines(r.out)[1]);
  CHECK(m.at("frame") == "60");
  CHECK(m.at("density") == "0.2");

  {
    std::ofstream cfg(path);
    cfg << "density=0.2\nnot_a_flag=3\n";
  }
  CHECK(invoke({"analyze", "--config", path}).code == kExitUsage);
  std::remove(path.c_str());
}

TEST_CASE("simulate writes per-replication rows, summaries and a trace") {
  const std::string out = temp_path("sim.csv");
  const std::string trace = temp_path("trace.csv");
  const std::vector<std::string> args{"simulate", "--density", "0.1",  "--frames", "300",
                                      "--reps",   "3",         "--seed", "7",      "--out",
                                      out,        "--trace",   trace};
  const Result r = invoke(args);
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("p_tx: empirical") != std::string::npos);
  const std::string first = slurp(out);
  const auto rows = data_lines(first);
  REQUIRE(rows.size() == 1 + 3 + 4);
  CHECK(rows[0] == "row,seed,nodes,counted_nodes,mean_neighbors,p_tx,p_tx_active,p_cl,baoi");
  CHECK(split(rows[1])[1] == "7");
  CHECK(split(rows[3])[1] == "9");
  CHECK(rows[4].rfind("mean,", 0) == 0);
  CHECK(rows[5].rfind("ci95,", 0) == 0);
  CHECK(rows[6].rfind("analytic,", 0) == 0);
  CHECK(rows[7].rfind("rel_delta,", 0) == 0);

  // The trace reconstructs each node's sawtooth: the age at a broadcast is
  // slot - generation_slot and between broadcasts it grows by one per slot.
  const auto trace_rows = lines(slurp(trace));
  REQUIRE(trace_rows.size() > 10);
  CHECK(trace_rows[0] == "replication,node,slot,generation_slot,baoi");
  std::map<std::pair<int, int>, std::pair<long, long>> last;  // (rep,node) -> (slot, age)
  for (std::size_t i = 1; i < trace_rows.size(); ++i) {
    const auto c = split(trace_rows[i]);
    REQUIRE(c.size() == 5);
    const long slot = std::stol(c[2]);
    const long gen = std::stol(c[3]);
    const long age = std::stol(c[4]);
    CHECK(age == slot - gen);
    CHECK(gen <= slot);
    const auto key = std::make_pair(std::stoi(c[0]), std::stoi(c[1]));
    if (auto it = last.find(key); it != last.end()) {
      CHECK(slot > it->second.first);
      CHECK(age <= it->second.second + (slot - it->second.first));
    }
    last[key] = {slot, age};
  }

  CHECK(invoke(args).code == kExitOk);
  CHECK(slurp(out) == first);
  std::remove(out.c_str());
  std::remove(trace.c_str());
}

TEST_CASE("seed falls back to the environment") {
  ::setenv("BAOI_SEED", "11", 1);
  const Result r = invoke({"simulate", "--frames", "200", "--reps", "1"});
  ::unsetenv("BAOI_SEED");
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("# seed=11\n") != std::string::npos);
  const Result d = invoke({"simulate", "--frames", "200", "--reps", "1"});
  CHECK(d.out.find("# seed=1\n") != std::string::npos);
}

TEST_CASE("sweep with simulation is deterministic") {
  const std::vector<std::string> args{"sweep",  "--sweep", "density", "--grid", "0.1:0.15:0.05",
                                      "--simulate", "--frames", "200", "--reps", "2",
                                      "--seed", "5"};
  const Result a = invoke(args);
  const Result b = invoke(args);
  CHECK(a.code == kExitOk);
  CHECK(a.out == b.out);
  const auto rows = data_lines(a.out);
  REQUIRE(rows.size() == 3);
  const auto m = row_map(rows[0], rows[1]);
  CHECK(!m.at("sim_baoi").empty());
  CHECK(!m.at("sim_p_tx_ci").empty());
}
