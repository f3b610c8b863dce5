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

#include "qmux/cli.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "qmux/config.hpp"
#include "qmux/error.hpp"
#include "qmux/io.hpp"
#include "qmux/serialize.hpp"

namespace qmux::cli {
namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  bool no_timestamp = false;
  std::string format;  // empty: both
  std::string plan;    // evaluate, optimize
};

struct Context {
  Globals g;
  Spec spec;
  std::string timestamp;
  std::ostream& out;
  std::ostream& err;

  fs::path path(const std::string& name) const { return fs::path(g.out) / name; }
  bool want(const std::string& fmt) const { return g.format.empty() || g.format == fmt; }
  void write(const std::string& name, const std::string& content) const {
    io::write_atomic(path(name), content);
    out << "wrote " << path(name).string() << '\n';
  }
  void write_json(const std::string& name, const json& doc) const { write(name, doc.dump(2) + "\n"); }
};

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Spec read_spec(const Globals& g) {
  if (g.config.empty()) throw ConfigError("--config is required");
  const std::string text = io::read_file(g.config);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(g.config + ": " + e.what());
  }
  if (g.seed) {
    if (!doc.is_object()) throw ConfigError("config must be an object");
    if (!doc.contains("run")) doc["run"] = json::object();
    if (!doc["run"].is_object()) throw ConfigError("$.run must be an object");
    doc["run"]["seed"] = *g.seed;
  }
  return parse_spec(doc);
}

const photonics::SourceParams& require_source(const Spec& s) {
  if (!s.has_source) throw ConfigError("source section is required");
  return s.source;
}

std::string summary(const alloc::AllocationPlan& plan) {
  const int n = static_cast<int>(plan.users.size());
  return std::to_string(plan.total_channels()) + " channels (baseline " + std::to_string(n * (n - 1)) + ")";
}

void print_users(const Context& c, const alloc::AllocationPlan& plan) {
  for (const auto& u : plan.users) {
    c.out << "  " << u.name << ":";
    for (int ch : u.channels) c.out << " C" << ch;
    c.out << '\n';
  }
}

alloc::AllocationPlan choose_plan(const Context& c, const alloc::PairingGraph& graph) {
  const Spec& s = c.spec;
  if (!c.g.plan.empty()) {
    json doc;
    try {
      doc = json::parse(io::read_file(c.g.plan));
    } catch (const json::parse_error& e) {
      throw InputError(c.g.plan + ": " + e.what());
    }
    return serialize::plan_from_json(doc, graph);
  }
  if (!s.channels.empty()) return alloc::make_plan(s.channels, graph);
  if (s.preset && !s.preset->plan.empty() &&
      (!s.n_users || *s.n_users == static_cast<int>(s.preset->plan.size()))) {
    auto users = s.preset->plan;
    if (s.names.size() == users.size())
      for (std::size_t k = 0; k < users.size(); ++k) users[k].name = s.names[k];
    return alloc::make_plan(std::move(users), graph);
  }
  return alloc::solve_allocation(graph, s.user_count(), s.solve).plan;
}

netplan::EvalOptions eval_options(const Spec& s) {
  netplan::EvalOptions o;
  o.mode = s.mode;
  o.f_ec = s.f_ec;
  o.window = s.window;
  return o;
}

void stamp(const Context& c, netplan::NetworkReport& r) {
  r.meta.config_hash = c.spec.hash;
  r.meta.timestamp = c.timestamp;
}

void print_report(const Context& c, const netplan::NetworkReport& r) {
  for (const auto& row : r.rows) {
    c.out << "  " << serialize::users_label(row) << ' ' << serialize::channels_label(row) << "  n_sift "
          << serialize::number(row.n_sift) << " Hz  qber " << serialize::number(row.qber) << "  skr "
          << serialize::number(row.skr) << " bps" << (row.secure ? "" : "  (insecure)") << '\n';
  }
  c.out << "total " << serialize::number(r.total_skr) << " bps over " << r.rows.size() << " rows, "
        << r.secure_rows << " secure\n";
  for (const auto& w : r.warnings) c.err << "warning: " << w << '\n';
}

int cmd_plan(Context& c) {
  const auto graph = alloc::build_pairing_graph(c.spec.require_grid(), c.spec.require_pumps());
  const auto sol = alloc::solve_allocation(graph, c.spec.user_count(), c.spec.solve);
  serialize::PlanMeta meta;
  meta.lower_bound = sol.lower_bound;
  meta.optimal = sol.optimal;
  meta.solver = alloc::to_string(sol.mode);
  meta.config_hash = c.spec.hash;
  meta.timestamp = c.timestamp;
  c.write_json("plan.json", serialize::plan_to_json(sol.plan, graph, meta));
  c.out << summary(sol.plan) << '\n';
  c.out << "lower bound " << sol.lower_bound << (sol.optimal ? ", optimal" : ", not proven optimal") << '\n';
  print_users(c, sol.plan);
  return kExitOk;
}

int cmd_evaluate(Context& c) {
  const auto& src = require_source(c.spec);
  const auto& pumps = c.spec.require_pumps();
  const auto graph = alloc::build_pairing_graph(c.spec.require_grid(), pumps);
  const auto plan = choose_plan(c, graph);
  auto report = netplan::evaluate_network(plan, graph, src, c.spec.budget, pumps, eval_options(c.spec));
  stamp(c, report);
  if (c.want("json")) c.write_json("report.json", serialize::report_to_json(report));
  if (c.want("csv")) c.write("report.csv", serialize::report_to_csv(report));
  c.out << summary(plan) << '\n';
  print_report(c, report);
  if (report.total_skr == 0.0) c.err << "warning: total secret key rate is 0\n";
  return kExitOk;
}

int cmd_simulate(Context& c) {
  if (!c.spec.sim) throw ConfigError("run.sim section is required");
  const SimSection& s = *c.spec.sim;
  double window = c.spec.window;
  if (!(window > 0.0) && c.spec.has_source) window = c.spec.source.delta_tau;
  if (!(window > 0.0)) throw ConfigError("run.window_s is required");
  const auto stream = sim::generate_stream(s.config);
  const std::string name = s.stream_format == "csv" ? "stream.csv" : "stream.bin";
  if (s.stream_format == "csv")
    sim::write_stream_csv(stream, c.path(name).string());
  else
    sim::write_stream_binary(stream, c.path(name).string());
  c.out << "wrote " << c.path(name).string() << '\n';
  const auto est = sim::estimate_stats(stream, window, 0.0, s.accidental_windows);
  json doc = serialize::stats_to_json(est, stream, window);
  if (s.config.bbm92) {
    const auto sifted = qkd::sift(stream, window);
    const auto key = qkd::skr({sifted.n_sift, sifted.qber, c.spec.f_ec});
    doc["bbm92"] = serialize::sift_to_json(sifted, key);
    c.out << "qber " << serialize::number(sifted.qber) << " +- " << serialize::number(sifted.qber_err)
          << "  n_sift " << serialize::number(sifted.n_sift) << " Hz  skr " << serialize::number(key.skr)
          << " bps\n";
  }
  if (!c.timestamp.empty()) doc["timestamp"] = c.timestamp;
  c.write_json("stats.json", doc);
  const auto& st = est.stats;
  c.out << "C " << serialize::number(st.C) << " +- " << serialize::number(est.C_err) << " Hz  A "
        << serialize::number(st.A) << " +- " << serialize::number(est.A_err) << " Hz  CAR "
        << serialize::number(st.car) << " +- " << serialize::number(est.car_err) << '\n';
  return kExitOk;
}

int cmd_optimize(Context& c) {
  const auto& src = require_source(c.spec);
  const auto& pumps = c.spec.require_pumps();
  const auto graph = alloc::build_pairing_graph(c.spec.require_grid(), pumps);
  const auto plan = choose_plan(c, graph);
  netplan::OptimizeOptions o;
  o.objective = c.spec.objective;
  o.p_min_mw = c.spec.p_min_mw;
  o.p_max_mw = c.spec.p_max_mw;
  o.scan_points = c.spec.scan_points;
  o.eval = eval_options(c.spec);
  auto res = netplan::optimize_pump_power(plan, graph, src, c.spec.budget, pumps, o);
  stamp(c, res.report);
  c.write("scan.csv", serialize::scan_to_csv(res));
  c.write_json("optimum.json", serialize::optimum_to_json(res, o.objective));
  c.out << "P* " << serialize::number(res.p_star_mw) << " mW  " << netplan::to_string(o.objective) << ' '
        << serialize::number(res.objective) << " bps\n";
  const netplan::ReportRow* weakest = nullptr;
  for (const auto& r : res.report.rows)
    if (!weakest || r.margin < weakest->margin) weakest = &r;
  if (weakest)
    c.out << "weakest row " << serialize::users_label(*weakest) << ' ' << serialize::channels_label(*weakest)
          << "  qber " << serialize::number(weakest->qber) << "  margin " << serialize::number(weakest->margin)
          << '\n';
  if (res.p_secure_max_mw)
    c.out << "all rows secure up to " << serialize::number(*res.p_secure_max_mw) << " mW\n";
  else
    c.out << "no scanned power keeps every row secure\n";
  print_report(c, res.report);
  return kExitOk;
}

int cmd_compare(Context& c) {
  if (!c.spec.compare) throw ConfigError("compare section is required");
  const auto& cs = *c.spec.compare;
  std::vector<grid::PumpConfig> sets;
  for (const auto& labels : cs.pump_sets) {
    try {
      sets.emplace_back(labels, std::vector<double>(labels.size(), cs.power_mw));
    } catch (const InputError& e) {
      throw ConfigError(std::string("compare.pump_sets: ") + e.what());
    }
  }
  netplan::CompareOptions o;
  o.solve = c.spec.solve;
  o.eval = eval_options(c.spec);
  if (cs.evaluate) {
    o.source = &require_source(c.spec);
    o.budget = &c.spec.budget;
  }
  const auto rows = netplan::compare_schemes(c.spec.user_count(), c.spec.require_grid(), sets, o);
  json doc = serialize::compare_to_json(rows);
  doc["config_hash"] = c.spec.hash;
  if (!c.timestamp.empty()) doc["timestamp"] = c.timestamp;
  if (c.want("json")) c.write_json("compare.json", doc);
  if (c.want("csv")) c.write("compare.csv", serialize::compare_to_csv(rows));
  for (const auto& r : rows) {
    c.out << "pumps";
    for (int p : r.pumps) c.out << ' ' << p;
    c.out << ": " << summary(r.plan) << ", saves " << r.savings;
    if (r.total_skr) c.out << ", total " << serialize::number(*r.total_skr) << " bps";
    c.out << '\n';
  }
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"qmux: wavelength-multiplexed entanglement distribution planner"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  std::uint64_t seed = 0;
  app.add_option("--config", g.config, "Run specification (JSON)");
  auto* seed_opt = app.add_option("--seed", seed, "Override run.seed");
  app.add_option("--out", g.out, "Output directory")->capture_default_str();
  app.add_flag("--no-timestamp", g.no_timestamp, "Omit timestamps from outputs");
  app.add_option("--format", g.format, "Write only this report format")->check(CLI::IsMember({"json", "csv"}));

  auto* plan = app.add_subcommand("plan", "Solve the channel allocation");
  auto* evaluate = app.add_subcommand("evaluate", "Per-link key rates of a plan");
  evaluate->add_option("--plan", g.plan, "Plan JSON; default from config or solver");
  auto* simulate = app.add_subcommand("simulate", "Generate time tags and estimate statistics");
  auto* optimize = app.add_subcommand("optimize", "Scan and optimize the pump power");
  optimize->add_option("--plan", g.plan, "Plan JSON; default from config or solver");
  auto* compare = app.add_subcommand("compare", "Compare pump configurations");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }
  if (seed_opt->count() > 0) g.seed = seed;

  try {
    Context c{g, read_spec(g), g.no_timestamp ? std::string() : utc_now(), out, err};
    if (plan->parsed()) return cmd_plan(c);
    if (evaluate->parsed()) return cmd_evaluate(c);
    if (simulate->parsed()) return cmd_simulate(c);
    if (optimize->parsed()) return cmd_optimize(c);
    if (compare->parsed()) return cmd_compare(c);
    return kExitInput;
  } catch (const Infeasible& e) {
    err << "error: " << e.what() << " (largest connectable user count " << e.witness()
        << (e.proven() ? ", proven" : ", search incomplete") << ")\n";
    return kExitInfeasible;
  } catch (const DomainInfeasible& e) {
    err << "error: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (...) {
    err << "error: unknown failure\n";
    return kExitInput;
  }
}

}  // namespace qmux::cli
