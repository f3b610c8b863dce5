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

#include "qmux/serialize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "qmux/error.hpp"
#include "qmux/io.hpp"

namespace qmux::serialize {

using json = nlohmann::json;

std::string number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

namespace {

// JSON has no infinity; CAR of an accidental-free link is written as null.
json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json edge_json(const alloc::Edge& e, int ca, int cb) {
  json pumps = json::array();
  for (const auto& s : e.sources) pumps.push_back({s.first, s.second});
  return {{"channels", {ca, cb}}, {"target", e.target}, {"process", grid::to_string(e.kind)}, {"pumps", pumps}};
}

}  // namespace

json plan_to_json(const alloc::AllocationPlan& plan, const alloc::PairingGraph& graph, const PlanMeta& meta) {
  json doc;
  doc["schema_version"] = 1;
  doc["kind"] = "plan";
  doc["pumps"] = graph.pumps().labels();
  json users = json::array();
  for (const auto& u : plan.users) users.push_back({{"name", u.name}, {"channels", u.channels}});
  doc["users"] = users;
  json links = json::array();
  for (const auto& l : plan.links) {
    const auto& ua = plan.users[l.u];
    json pairs = json::array();
    for (const auto& e : l.edges) {
      const bool a_first = std::count(ua.channels.begin(), ua.channels.end(), e.a) != 0;
      pairs.push_back(a_first ? edge_json(e, e.a, e.b) : edge_json(e, e.b, e.a));
    }
    links.push_back({{"users", {ua.name, plan.users[l.v].name}}, {"pairs", pairs}});
  }
  doc["links"] = links;
  const int n = static_cast<int>(plan.users.size());
  doc["total_channels"] = plan.total_channels();
  doc["baseline"] = n * (n - 1);
  if (meta.lower_bound) doc["lower_bound"] = *meta.lower_bound;
  if (meta.optimal) doc["optimal"] = *meta.optimal;
  if (!meta.solver.empty()) doc["solver"] = meta.solver;
  if (!meta.config_hash.empty()) doc["config_hash"] = meta.config_hash;
  if (!meta.timestamp.empty()) doc["timestamp"] = meta.timestamp;
  return doc;
}

alloc::AllocationPlan plan_from_json(const json& doc, const alloc::PairingGraph& graph) {
  if (!doc.is_object() || !doc.contains("users") || !doc["users"].is_array())
    throw InputError("plan: users[] is required");
  std::vector<alloc::UserChannels> users;
  try {
    for (const auto& u : doc["users"]) {
      alloc::UserChannels uc{u.at("name").get<std::string>(), u.at("channels").get<std::vector<int>>()};
      std::sort(uc.channels.begin(), uc.channels.end());
      users.push_back(std::move(uc));
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("plan: ") + e.what());
  }
  auto plan = alloc::make_plan(std::move(users), graph);
  if (doc.contains("links")) {
    try {
      for (const auto& l : doc["links"]) {
        const auto names = l.at("users").get<std::vector<std::string>>();
        if (names.size() != 2) throw InputError("plan: a link joins two users");
        int u = plan.user_index(names[0]);
        int v = plan.user_index(names[1]);
        if (u < 0 || v < 0) throw PlanInvalid("plan: link names an unknown user");
        if (u > v) std::swap(u, v);
        const auto* link = plan.link(u, v);
        for (const auto& p : l.at("pairs")) {
          const auto ch = p.at("channels").get<std::vector<int>>();
          if (ch.size() != 2) throw InputError("plan: a pair lists two channels");
          const int a = std::min(ch[0], ch[1]);
          const int b = std::max(ch[0], ch[1]);
          const bool listed = link && std::any_of(link->edges.begin(), link->edges.end(),
                                                  [&](const alloc::Edge& e) { return e.a == a && e.b == b; });
          if (!listed)
            throw PlanInvalid("plan: " + names[0] + "&" + names[1] + " pair C" + std::to_string(ch[0]) + "&C" +
                              std::to_string(ch[1]) + " is not realized by the pumps");
        }
      }
    } catch (const json::exception& e) {
      throw InputError(std::string("plan: ") + e.what());
    }
  }
  return plan;
}

std::string users_label(const netplan::ReportRow& row) { return row.user_a + "&" + row.user_b; }

std::string channels_label(const netplan::ReportRow& row) {
  return "C" + std::to_string(row.channel_a) + "&C" + std::to_string(row.channel_b);
}

json report_to_json(const netplan::NetworkReport& report) {
  json doc;
  doc["schema_version"] = 1;
  doc["kind"] = "report";
  const auto& m = report.meta;
  json meta = {{"source", m.source},     {"mode", m.mode},         {"pump_labels", m.pump_labels},
               {"pump_powers_mw", m.pump_powers_mw}, {"window_s", m.window}, {"f_ec", m.f_ec}};
  if (!m.config_hash.empty()) meta["config_hash"] = m.config_hash;
  if (!m.timestamp.empty()) meta["timestamp"] = m.timestamp;
  doc["meta"] = meta;
  json rows = json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"users", {r.user_a, r.user_b}},
                    {"channels", {r.channel_a, r.channel_b}},
                    {"process", grid::to_string(r.kind)},
                    {"C_hz", r.C},
                    {"A_hz", r.A},
                    {"singles_hz", {r.singles_a, r.singles_b}},
                    {"n_sift_hz", r.n_sift},
                    {"visibility", r.visibility},
                    {"qber", r.qber},
                    {"skr_bps", r.skr},
                    {"secure", r.secure},
                    {"margin", r.margin}});
  }
  doc["rows"] = rows;
  doc["total_skr_bps"] = report.total_skr;
  doc["secure_rows"] = report.secure_rows;
  doc["warnings"] = report.warnings;
  return doc;
}

std::string report_to_csv(const netplan::NetworkReport& report) {
  std::ostringstream out;
  out << "users,channels,n_sift_hz,visibility,qber,skr_bps,secure,margin\n";
  for (const auto& r : report.rows) {
    out << users_label(r) << ',' << channels_label(r) << ',' << number(r.n_sift) << ',' << number(r.visibility)
        << ',' << number(r.qber) << ',' << number(r.skr) << ',' << (r.secure ? "true" : "false") << ','
        << number(r.margin) << '\n';
  }
  out << "Total,,,,," << number(report.total_skr) << ",,\n";
  return out.str();
}

std::string scan_to_csv(const netplan::OptimizeResult& result) {
  std::ostringstream out;
  out << "P_mW";
  const auto& rows = result.report.rows;
  for (const auto& r : rows) out << ",qber_" << users_label(r) << '_' << channels_label(r);
  for (const auto& r : rows) out << ",skr_" << users_label(r) << '_' << channels_label(r);
  out << ",total,objective,feasible\n";
  for (const auto& p : result.curve) {
    out << number(p.power_mw);
    for (double q : p.qber) out << ',' << number(q);
    for (double s : p.skr) out << ',' << number(s);
    out << ',' << number(p.total) << ',' << number(p.objective) << ',' << (p.feasible ? "true" : "false") << '\n';
  }
  return out.str();
}

json optimum_to_json(const netplan::OptimizeResult& result, netplan::Objective objective) {
  json doc;
  doc["schema_version"] = 1;
  doc["kind"] = "optimum";
  doc["objective"] = netplan::to_string(objective);
  doc["p_star_mw"] = result.p_star_mw;
  doc["objective_value"] = result.objective;
  doc["p_secure_max_mw"] = result.p_secure_max_mw ? json(*result.p_secure_max_mw) : json(nullptr);
  doc["report"] = report_to_json(result.report);
  return doc;
}

json compare_to_json(const std::vector<netplan::SchemeRow>& rows) {
  json doc;
  doc["schema_version"] = 1;
  doc["kind"] = "compare";
  json arr = json::array();
  for (const auto& r : rows) {
    json users = json::array();
    for (const auto& u : r.plan.users) users.push_back({{"name", u.name}, {"channels", u.channels}});
    arr.push_back({{"pumps", r.pumps},
                   {"users", r.users},
                   {"channels", r.channels},
                   {"baseline", r.baseline},
                   {"savings", r.savings},
                   {"lower_bound", r.lower_bound},
                   {"optimal", r.optimal},
                   {"total_skr_bps", r.total_skr ? json(*r.total_skr) : json(nullptr)},
                   {"plan", users}});
  }
  doc["schemes"] = arr;
  return doc;
}

std::string compare_to_csv(const std::vector<netplan::SchemeRow>& rows) {
  std::ostringstream out;
  out << "pumps,users,channels,baseline,savings,lower_bound,optimal,total_skr_bps\n";
  for (const auto& r : rows) {
    std::string pumps;
    for (std::size_t k = 0; k < r.pumps.size(); ++k) pumps += (k ? " " : "") + std::to_string(r.pumps[k]);
    out << pumps << ',' << r.users << ',' << r.channels << ',' << r.baseline << ',' << r.savings << ','
        << r.lower_bound << ',' << (r.optimal ? "true" : "false") << ','
        << (r.total_skr ? number(*r.total_skr) : std::string()) << '\n';
  }
  return out.str();
}

json stats_to_json(const sim::EstimatedStats& est, const sim::TimeTagStream& stream, double window) {
  const auto& s = est.stats;
  json doc;
  doc["schema_version"] = 1;
  doc["kind"] = "stats";
  doc["seed"] = stream.info.seed;
  doc["config_hash"] = io::hex64(stream.info.config_hash);
  doc["rng"] = stream.info.rng;
  doc["duration_s"] = est.duration_s;
  doc["window_s"] = window;
  doc["events"] = {{"signal", stream.signal.size()}, {"idler", stream.idler.size()}};
  doc["raw_counts"] = est.raw_counts;
  doc["accidental_counts"] = est.accidental_counts;
  doc["C_hz"] = s.C;
  doc["C_err"] = est.C_err;
  doc["A_hz"] = s.A;
  doc["A_err"] = est.A_err;
  doc["car"] = finite_or_null(s.car);
  doc["car_err"] = finite_or_null(est.car_err);
  doc["visibility"] = s.visibility;
  doc["visibility_err"] = est.visibility_err;
  doc["singles_hz"] = {s.singles_s, s.singles_i};
  return doc;
}

json sift_to_json(const qkd::SiftResult& sift, const qkd::KeyRateResult& key) {
  return {{"n_sift_hz", sift.n_sift}, {"qber", sift.qber},   {"qber_err", sift.qber_err},
          {"kept", sift.kept},        {"errors", sift.errors}, {"coincidences", sift.coincidences},
          {"skr_bps", key.skr},       {"secure", key.secure}, {"margin", key.margin}};
}

}  // namespace qmux::serialize
