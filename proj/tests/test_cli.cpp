// Copyright 2026 The qmux Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "qmux/cli.hpp"
#include "qmux/config.hpp"
#include "qmux/error.hpp"
#include "qmux/io.hpp"
#include "qmux/serialize.hpp"

using namespace qmux;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

json four_users() {
  return json::parse(R"({
    "schema_version": 1,
    "grid": {"band": [12, 60], "step": 2, "exclusions": [22, 34, 46, 58]},
    "pumps": {"labels": [34, 46], "powers_mw": 0.4},
    "users": {"count": 4}
  })");
}

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

fs::path workdir(const std::string& name) {
  auto d = fs::temp_directory_path() / "qmux_cli_test" / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

fs::path write_config(const fs::path& dir, const json& doc, const std::string& name = "config.json") {
  const auto p = dir / name;
  std::ofstream(p) << doc.dump(2);
  return p;
}

Run invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "qmux");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Run r;
  r.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string hash_of(const fs::path& p) { return io::hex64(io::fnv1a(io::read_file(p))); }

}  // namespace

TEST_CASE("run specification basics") {
  const auto s = cli::parse_spec(four_users());
  CHECK(s.user_count() == 4);
  CHECK(s.names == std::vector<std::string>{"A", "B", "C", "D"});
  CHECK(s.require_pumps().labels() == std::vector<int>{34, 46});
  CHECK(s.require_grid().is_excluded(22));
  CHECK_FALSE(s.has_source);
  CHECK(s.hash.size() == 16);
  auto other = four_users();
  other["users"]["count"] = 5;
  CHECK(cli::parse_spec(other).hash != s.hash);
}

TEST_CASE("run specification is fail-closed") {
  auto doc = four_users();
  doc.erase("schema_version");
  CHECK_THROWS_AS(cli::parse_spec(doc), ConfigError);
  doc = four_users();
  doc["schema_version"] = 2;
  CHECK_THROWS_AS(cli::parse_spec(doc), ConfigError);
  doc = four_users();
  doc["extra"] = 1;
  CHECK_THROWS_WITH_AS(cli::parse_spec(doc), "unknown key $.extra", ConfigError);
  doc = four_users();
  doc["grid"]["spacing"] = 100;
  CHECK_THROWS_WITH_AS(cli::parse_spec(doc), "unknown key $.grid.spacing", ConfigError);
  doc = four_users();
  doc["grid"]["band"] = "12-60";
  CHECK_THROWS_AS(cli::parse_spec(doc), ConfigError);
  doc = four_users();
  doc["pumps"]["powers_mw"] = {0.4};
  CHECK_THROWS_AS(cli::parse_spec(doc), ConfigError);
  doc = four_users();
  doc["users"]["count"] = 0;
  CHECK_THROWS_AS(cli::parse_spec(doc), ConfigError);
  doc = four_users();
  doc["run"] = {{"p_range_mw", {0.5, 0.5}}};
  CHECK_THROWS_AS(cli::parse_spec(doc), ConfigError);
  doc = four_users();
  doc["run"] = {{"solver", "magic"}};
  CHECK_THROWS_AS(cli::parse_spec(doc), ConfigError);
  doc = four_users();
  doc["run"] = {{"window_s", 1e-9}, {"sim", {{"nbar", 0.1}, {"t_sim_s", 0.0}}}};
  CHECK_THROWS_AS(cli::parse_spec(doc), ConfigError);
  doc = four_users();
  doc["run"] = {{"window_s", 1e-9}, {"sim", {{"nbar", 0.1}, {"pair_rate_hz", 1e5}}}};
  CHECK_THROWS_AS(cli::parse_spec(doc), ConfigError);
  doc = four_users();
  doc["source"] = {{"preset", "unknown"}};
  CHECK_THROWS_AS(cli::parse_spec(doc), ConfigError);
  CHECK_THROWS_AS(cli::parse_spec(json::array()), ConfigError);
}

TEST_CASE("users, pins and explicit channels") {
  auto doc = four_users();
  doc["users"] = json::parse(R"({"names": ["Alice", "Bob", "Carol", "Dave"], "pinned": {"Bob": [42]}})");
  auto s = cli::parse_spec(doc);
  CHECK(s.user_count() == 4);
  CHECK(s.pinned.at(42) == 1);
  CHECK(s.solve.pinned.at(42) == 1);
  CHECK(s.solve.names[0] == "Alice");

  doc["users"] = json::parse(R"({"names": ["A", "B"], "pinned": {"Q": [42]}})");
  CHECK_THROWS_AS(cli::parse_spec(doc), ConfigError);
  doc["users"] = json::parse(R"({"names": ["A", "A"]})");
  CHECK_THROWS_AS(cli::parse_spec(doc), ConfigError);
  doc["users"] = json::parse(R"({"channels": {"A": [38], "B": [42]}})");
  s = cli::parse_spec(doc);
  CHECK(s.user_count() == 2);
  CHECK(s.channels[1].channels == std::vector<int>{42});
  doc["users"] = json::parse(R"({"count": 3, "channels": {"A": [38], "B": [42]}})");
  CHECK_THROWS_AS(cli::parse_spec(doc), ConfigError);
}

TEST_CASE("presets fill grid, pumps and budget") {
  const auto s = cli::parse_spec(json::parse(R"({"schema_version": 1, "source": {"preset": "dual-pump",
      "mode": "calibrated", "dark_hz": 80}})"));
  REQUIRE(s.preset);
  CHECK(s.has_source);
  CHECK(s.mode == netplan::EvalMode::calibrated);
  CHECK(s.source.dark == 80.0);
  CHECK(s.require_pumps().labels() == std::vector<int>{34, 46});
  CHECK(s.budget.common_db.at("Coupling") == 1.5);
  CHECK(s.user_count() == 4);
}

TEST_CASE("explicit source parameters") {
  auto doc = four_users();
  doc["source"] = json::parse(R"({"coef_degenerate": 1e6, "coef_non_degenerate": 2e6, "noise_lin": 1e4,
      "dark_hz": 10, "delta_tau_s": 1e-9, "pair_coef": [{"channels": [38, 42], "value": 3e6}],
      "channel_noise_lin": {"38": 5e3}, "measured": [{"channels": [42, 38], "n_sift_hz": 100, "visibility": 0.9}]})");
  const auto s = cli::parse_spec(doc);
  CHECK(s.source.pair_coef.at({38, 42}) == 3e6);
  CHECK(s.source.noise_coefficient(38) == 5e3);
  CHECK(s.source.noise_coefficient(40) == 1e4);
  REQUIRE(s.source.measured_row(38, 42));
  CHECK(s.source.measured_row(38, 42)->qber == doctest::Approx(0.05));
  doc["source"]["coef_degenerate"] = -1.0;
  CHECK_THROWS_AS(cli::parse_spec(doc), ConfigError);
  doc["source"]["coef_degenerate"] = 1.0;
  doc["source"]["channel_noise_lin"] = {{"x38", 1.0}};
  CHECK_THROWS_AS(cli::parse_spec(doc), ConfigError);
}

TEST_CASE("plan json round trip") {
  const auto s = cli::parse_spec(four_users());
  const auto graph = alloc::build_pairing_graph(s.require_grid(), s.require_pumps());
  const auto plan = alloc::make_plan({{"A", {38}}, {"B", {42}}, {"C", {50, 54}}, {"D", {26, 30}}}, graph);
  const auto doc = serialize::plan_to_json(plan, graph);
  CHECK(doc["total_channels"] == 6);
  CHECK(doc["baseline"] == 12);
  CHECK(doc["links"].size() == 6);
  const auto back = serialize::plan_from_json(doc, graph);
  CHECK(back.total_channels() == 6);
  REQUIRE(back.links.size() == plan.links.size());
  for (std::size_t k = 0; k < back.links.size(); ++k) CHECK(back.links[k].edges.size() == plan.links[k].edges.size());
  auto bad = doc;
  bad["links"][0]["pairs"][0]["channels"] = {38, 44};
  CHECK_THROWS_AS(serialize::plan_from_json(bad, graph), PlanInvalid);
  CHECK_THROWS_AS(serialize::plan_from_json(json::object(), graph), InputError);
}

TEST_CASE("report csv layout") {
  netplan::NetworkReport r;
  netplan::ReportRow row;
  row.user_a = "A";
  row.user_b = "B";
  row.channel_a = 38;
  row.channel_b = 42;
  row.n_sift = 1613.9;
  row.visibility = 0.972;
  row.qber = 0.014;
  row.skr = 1236.5;
  row.secure = true;
  row.margin = 0.08;
  r.rows.push_back(row);
  r.total_skr = 1236.5;
  CHECK(serialize::report_to_csv(r) ==
        "users,channels,n_sift_hz,visibility,qber,skr_bps,secure,margin\n"
        "A&B,C38&C42,1613.9,0.972,0.014,1236.5,true,0.08\n"
        "Total,,,,,1236.5,,\n");
}

TEST_CASE("cli plan") {
  const auto dir = workdir("plan");
  const auto cfg = write_config(dir, four_users());
  auto r = invoke({"plan", "--config", cfg.string(), "--out", dir.string()});
  CHECK(r.code == 0);
  CHECK(r.out.find("6 channels (baseline 12)") != std::string::npos);
  const auto plan = json::parse(io::read_file(dir / "plan.json"));
  CHECK(plan["total_channels"] == 6);
  CHECK(plan.contains("timestamp"));

  auto one = four_users();
  one["users"]["count"] = 1;
  r = invoke({"plan", "--config", write_config(dir, one, "one.json").string(), "--out", dir.string()});
  CHECK(r.code == 0);
  CHECK(r.out.find("0 channels (baseline 0)") != std::string::npos);

  auto tight = four_users();
  tight["grid"] = json::parse(R"({"band": [28, 44], "step": 2, "exclusions": [34]})");
  r = invoke({"plan", "--config", write_config(dir, tight, "tight.json").string(), "--out", dir.string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("largest connectable user count 3") != std::string::npos);
}

TEST_CASE("cli exit codes on bad input") {
  const auto dir = workdir("bad");
  CHECK(invoke({"plan"}).code == 1);
  CHECK(invoke({"plan", "--config", (dir / "missing.json").string()}).code == 1);
  std::ofstream(dir / "junk.json") << "{ not json";
  CHECK(invoke({"plan", "--config", (dir / "junk.json").string()}).code == 1);
  CHECK(invoke({"frobnicate"}).code == 1);
  CHECK(invoke({}).code == 1);
  CHECK(invoke({"--format", "xml", "plan"}).code == 1);
  auto doc = four_users();
  doc["run"] = json::parse(R"({"window_s": 1e-9, "sim": {"nbar": 0.1, "t_sim_s": 0}})");
  CHECK(invoke({"simulate", "--config", write_config(dir, doc).string()}).code == 1);
  doc["run"] = json::parse(R"({"window_s": 1e-9, "sim": {"nbar": 0.1, "t_sim_s": 50}})");
  const auto r = invoke({"simulate", "--config", write_config(dir, doc).string(), "--out", dir.string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("cap") != std::string::npos);
  CHECK(invoke({"evaluate", "--config", write_config(dir, four_users()).string()}).code == 1);
  CHECK(invoke({"--help"}).code == 0);
}

TEST_CASE("cli evaluate") {
  const auto dir = workdir("evaluate");
  const auto cfg = write_config(dir, json::parse(R"({"schema_version": 1,
      "source": {"preset": "dual-pump", "mode": "calibrated"}})"));
  auto r = invoke({"evaluate", "--config", cfg.string(), "--out", dir.string(), "--no-timestamp"});
  REQUIRE(r.code == 0);
  const auto rep = json::parse(io::read_file(dir / "report.json"));
  CHECK(rep["rows"].size() == 7);
  CHECK_FALSE(rep["meta"].contains("timestamp"));
  const auto csv = io::read_file(dir / "report.csv");
  CHECK(csv.rfind("users,channels,n_sift_hz,visibility,qber,skr_bps", 0) == 0);

  const auto d2 = workdir("evaluate_csv");
  r = invoke({"--format", "csv", "evaluate", "--config", cfg.string(), "--out", d2.string(), "--no-timestamp"});
  CHECK(r.code == 0);
  CHECK(fs::exists(d2 / "report.csv"));
  CHECK_FALSE(fs::exists(d2 / "report.json"));
  CHECK(hash_of(d2 / "report.csv") == hash_of(dir / "report.csv"));

  const auto plan_dir = workdir("evaluate_plan");
  const auto plan_cfg = write_config(plan_dir, four_users());
  REQUIRE(invoke({"plan", "--config", plan_cfg.string(), "--out", plan_dir.string()}).code == 0);
  auto with_source = four_users();
  with_source["source"] = {{"preset", "dual-pump"}};
  r = invoke({"evaluate", "--config", write_config(plan_dir, with_source, "src.json").string(), "--plan",
              (plan_dir / "plan.json").string(), "--out", plan_dir.string()});
  CHECK(r.code == 0);

  auto wrong = json::parse(io::read_file(plan_dir / "plan.json"));
  wrong["users"][0]["channels"] = {40};
  std::ofstream(plan_dir / "wrong.json") << wrong.dump();
  r = invoke({"evaluate", "--config", (plan_dir / "src.json").string(), "--plan", (plan_dir / "wrong.json").string(),
              "--out", plan_dir.string()});
  CHECK(r.code == 2);

  const auto noisy = write_config(dir, json::parse(R"({"schema_version": 1,
      "source": {"preset": "dual-pump", "noise_lin": 1e7, "channel_noise_lin": {}}})"), "noisy.json");
  r = invoke({"evaluate", "--config", noisy.string(), "--out", dir.string()});
  CHECK(r.code == 0);
  CHECK(r.err.find("total secret key rate is 0") != std::string::npos);
}

TEST_CASE("cli optimize") {
  const auto dir = workdir("optimize");
  const auto cfg = write_config(dir, json::parse(R"({"schema_version": 1, "source": {"preset": "dual-pump"},
      "run": {"objective": "min-link", "scan_points": 41}})"));
  auto r = invoke({"optimize", "--config", cfg.string(), "--out", dir.string(), "--no-timestamp"});
  REQUIRE(r.code == 0);
  const auto scan = io::read_file(dir / "scan.csv");
  CHECK(scan.rfind("P_mW,qber_A&B_C38&C42", 0) == 0);
  CHECK(std::count(scan.begin(), scan.end(), '\n') == 42);
  const auto opt = json::parse(io::read_file(dir / "optimum.json"));
  CHECK(opt["p_star_mw"].get<double>() > 0.2);

  const auto hopeless = write_config(dir, json::parse(R"({"schema_version": 1,
      "source": {"preset": "dual-pump", "noise_lin": 1e9, "channel_noise_lin": {}}})"), "hopeless.json");
  CHECK(invoke({"optimize", "--config", hopeless.string(), "--out", dir.string()}).code == 2);
}

TEST_CASE("cli compare") {
  const auto dir = workdir("compare");
  auto doc = four_users();
  doc["compare"] = json::parse(R"({"pump_sets": [[46], [34, 46]]})");
  REQUIRE(invoke({"compare", "--config", write_config(dir, doc).string(), "--out", dir.string()}).code == 0);
  const auto cmp = json::parse(io::read_file(dir / "compare.json"));
  CHECK(cmp["schemes"][0]["channels"] == 12);
  CHECK(cmp["schemes"][1]["channels"] == 6);
  CHECK(cmp["schemes"][1]["savings"] == 6);
}

TEST_CASE("cli simulate is reproducible") {
  json doc = json::parse(R"({"schema_version": 1, "run": {"window_s": 2e-9, "seed": 42,
      "sim": {"nbar": 0.01, "t_sim_s": 0.05, "eta_s": 0.5, "eta_i": 0.5, "bbm92": true, "bit_flip_prob": 0.05,
              "jitter_sigma_s": 5e-11, "noise_s_hz": 1e4, "threads": 1}}})");
  const auto a = workdir("sim_a");
  const auto b = workdir("sim_b");
  const auto c = workdir("sim_c");
  REQUIRE(invoke({"simulate", "--config", write_config(a, doc).string(), "--out", a.string(), "--no-timestamp"}).code == 0);
  REQUIRE(invoke({"simulate", "--config", write_config(b, doc).string(), "--out", b.string(), "--no-timestamp"}).code == 0);
  doc["run"]["sim"]["threads"] = 4;
  REQUIRE(invoke({"simulate", "--config", write_config(c, doc).string(), "--out", c.string(), "--no-timestamp"}).code == 0);
  CHECK(hash_of(a / "stream.bin") == hash_of(b / "stream.bin"));
  CHECK(hash_of(a / "stats.json") == hash_of(b / "stats.json"));
  CHECK(hash_of(a / "stream.bin") == hash_of(c / "stream.bin"));
  CHECK(hash_of(a / "stats.json") == hash_of(c / "stats.json"));
  CHECK(json::parse(io::read_file(a / "stats.json")).contains("bbm92"));
  const auto d = workdir("sim_d");
  REQUIRE(invoke({"--seed", "43", "simulate", "--config", (a / "config.json").string(), "--out", d.string(),
                  "--no-timestamp"}).code == 0);
  CHECK(hash_of(a / "stream.bin") != hash_of(d / "stream.bin"));
  doc["run"]["sim"]["stream_format"] = "csv";
  const auto e = workdir("sim_e");
  REQUIRE(invoke({"simulate", "--config", write_config(e, doc).string(), "--out", e.string(), "--no-timestamp"}).code == 0);
  CHECK(sim::read_stream_csv((e / "stream.csv").string()) == sim::read_stream_binary((a / "stream.bin").string()));
}
