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

#include "qmux/config.hpp"

#include <algorithm>
#include <set>

#include "qmux/error.hpp"
#include "qmux/io.hpp"

namespace qmux::cli {
namespace {

using json = nlohmann::json;

// Object reader that records which keys were read and rejects the rest.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + " must be an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& at(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) throw ConfigError(where(key) + " is required");
    return j_.at(key);
  }

  template <class T>
  T get(const std::string& key) {
    const json& v = at(key);
    try {
      return v.get<T>();
    } catch (const json::exception&) {
      throw ConfigError(where(key) + " has the wrong type");
    }
  }

  template <class T>
  T get(const std::string& key, T fallback) {
    seen_.insert(key);
    return j_.contains(key) ? get<T>(key) : fallback;
  }

  Section child(const std::string& key) { return Section(at(key), where(key)); }

  std::string where(const std::string& key) const { return path_ + "." + key; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError("unknown key " + where(it.key()));
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

double positive(Section& s, const std::string& key, double fallback) {
  const double v = s.get<double>(key, fallback);
  if (!(v > 0.0)) throw ConfigError(s.where(key) + " must be positive");
  return v;
}

double non_negative(Section& s, const std::string& key, double fallback) {
  const double v = s.get<double>(key, fallback);
  if (!(v >= 0.0)) throw ConfigError(s.where(key) + " must be >= 0");
  return v;
}

int channel_key(const std::string& k, const std::string& where) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(k, &pos);
    if (pos != k.size()) throw std::invalid_argument(k);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(where + ": '" + k + "' is not a channel label");
  }
}

std::pair<int, int> channel_pair(Section& s, const std::string& key) {
  const auto v = s.get<std::vector<int>>(key);
  if (v.size() != 2 || v[0] == v[1]) throw ConfigError(s.where(key) + " must list two distinct channels");
  return {std::min(v[0], v[1]), std::max(v[0], v[1])};
}

std::map<std::string, double> db_map(Section& parent, const std::string& key) {
  Section s = parent.child(key);
  std::map<std::string, double> out;
  const json& j = parent.at(key);
  for (auto it = j.begin(); it != j.end(); ++it) out[it.key()] = non_negative(s, it.key(), 0.0);
  s.finish();
  return out;
}

grid::FrequencyGrid parse_grid(Section s) {
  const auto band = s.get<std::vector<int>>("band");
  if (band.size() != 2) throw ConfigError(s.where("band") + " must be [min, max]");
  const int step = s.get<int>("step", 2);
  const double f0 = s.get<double>("f0_thz", 190.0);
  const double spacing = positive(s, "spacing_ghz", 100.0);
  const auto ex = s.get<std::vector<int>>("exclusions", {});
  s.finish();
  try {
    return grid::FrequencyGrid(band[0], band[1], step, std::set<int>(ex.begin(), ex.end()), f0, spacing);
  } catch (const ConfigError&) {
    throw;
  } catch (const InputError& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }
}

grid::PumpConfig parse_pumps(Section s) {
  const auto labels = s.get<std::vector<int>>("labels");
  std::vector<double> powers;
  const json& p = s.at("powers_mw");
  if (p.is_number()) {
    powers.assign(labels.size(), p.get<double>());
  } else {
    powers = s.get<std::vector<double>>("powers_mw");
  }
  s.finish();
  try {
    return grid::PumpConfig(labels, powers);
  } catch (const InputError& e) {
    throw ConfigError(std::string("pumps: ") + e.what());
  }
}

photonics::SourceParams parse_source_params(Section& s, photonics::SourceParams src) {
  src.name = s.get<std::string>("name", src.name);
  src.delta_tau = positive(s, "delta_tau_s", src.delta_tau);
  src.coef_degenerate = non_negative(s, "coef_degenerate", src.coef_degenerate);
  src.coef_non_degenerate = non_negative(s, "coef_non_degenerate", src.coef_non_degenerate);
  src.noise_lin = non_negative(s, "noise_lin", src.noise_lin);
  src.dark = non_negative(s, "dark_hz", src.dark);
  if (s.has("pair_coef")) {
    src.pair_coef.clear();
    const json& arr = s.at("pair_coef");
    if (!arr.is_array()) throw ConfigError(s.where("pair_coef") + " must be an array");
    for (std::size_t k = 0; k < arr.size(); ++k) {
      Section e(arr[k], s.where("pair_coef") + "[" + std::to_string(k) + "]");
      const auto key = channel_pair(e, "channels");
      src.pair_coef[key] = non_negative(e, "value", 0.0);
      e.finish();
    }
  }
  if (s.has("channel_noise_lin")) {
    src.channel_noise_lin.clear();
    Section m = s.child("channel_noise_lin");
    const json& j = s.at("channel_noise_lin");
    for (auto it = j.begin(); it != j.end(); ++it)
      src.channel_noise_lin[channel_key(it.key(), m.where(it.key()))] = non_negative(m, it.key(), 0.0);
    m.finish();
  }
  if (s.has("measured")) {
    src.measured.clear();
    const json& arr = s.at("measured");
    if (!arr.is_array()) throw ConfigError(s.where("measured") + " must be an array");
    for (std::size_t k = 0; k < arr.size(); ++k) {
      Section e(arr[k], s.where("measured") + "[" + std::to_string(k) + "]");
      const auto key = channel_pair(e, "channels");
      photonics::MeasuredRow r;
      r.n_sift_hz = non_negative(e, "n_sift_hz", 0.0);
      const bool has_v = e.has("visibility");
      const bool has_q = e.has("qber");
      if (!has_v && !has_q) throw ConfigError(e.where("qber") + " or visibility is required");
      r.visibility = e.get<double>("visibility", 0.0);
      r.qber = e.get<double>("qber", 0.0);
      if (!has_q) r.qber = (1.0 - r.visibility) / 2.0;
      if (!has_v) r.visibility = 1.0 - 2.0 * r.qber;
      e.finish();
      src.measured[key] = r;
    }
  }
  try {
    src.validate();
  } catch (const InputError& e) {
    throw ConfigError(std::string("source: ") + e.what());
  }
  return src;
}

netplan::LinkBudget parse_budget(Section s) {
  netplan::LinkBudget b;
  if (s.has("common_db")) b.common_db = db_map(s, "common_db");
  if (s.has("channel_db")) {
    const auto m = db_map(s, "channel_db");
    for (const auto& [k, v] : m) b.channel_db[channel_key(k, s.where("channel_db"))] = v;
  }
  b.default_channel_db = non_negative(s, "default_channel_db", 0.0);
  if (s.has("user_db")) {
    Section u = s.child("user_db");
    const json& j = s.at("user_db");
    for (auto it = j.begin(); it != j.end(); ++it) b.user_db[it.key()] = db_map(u, it.key());
    u.finish();
  }
  if (s.has("default_user_db")) b.default_user_db = db_map(s, "default_user_db");
  s.finish();
  return b;
}

SimSection parse_sim(Section s, double window, std::uint64_t seed) {
  SimSection out;
  auto& c = out.config;
  const bool has_rate = s.has("pair_rate_hz");
  const bool has_nbar = s.has("nbar");
  if (has_rate == has_nbar) throw ConfigError(s.where("pair_rate_hz") + ": give exactly one of pair_rate_hz, nbar");
  if (has_nbar) {
    out.nbar = positive(s, "nbar", 0.0);
    if (!(window > 0.0)) throw ConfigError("run.sim.nbar needs run.window_s or a source");
    c.pair_rate = *out.nbar / window;
  } else {
    c.pair_rate = non_negative(s, "pair_rate_hz", 0.0);
  }
  c.t_sim = positive(s, "t_sim_s", 1.0);
  c.eta_s = s.get<double>("eta_s", 1.0);
  c.eta_i = s.get<double>("eta_i", 1.0);
  c.noise_s = non_negative(s, "noise_s_hz", 0.0);
  c.noise_i = non_negative(s, "noise_i_hz", 0.0);
  c.jitter_sigma = non_negative(s, "jitter_sigma_s", 0.0);
  c.bbm92 = s.get<bool>("bbm92", false);
  c.bit_flip_prob = s.get<double>("bit_flip_prob", 0.0);
  c.block_seconds = positive(s, "block_s", c.block_seconds);
  c.threads = s.get<unsigned>("threads", 1u);
  c.max_events = s.get<std::uint64_t>("max_events", c.max_events);
  c.seed = seed;
  out.stream_format = s.get<std::string>("stream_format", "binary");
  if (out.stream_format != "binary" && out.stream_format != "csv")
    throw ConfigError(s.where("stream_format") + " must be binary or csv");
  out.accidental_windows = s.get<int>("accidental_windows", 10);
  if (out.accidental_windows < 2 || out.accidental_windows % 2 != 0)
    throw ConfigError(s.where("accidental_windows") + " must be even and >= 2");
  s.finish();
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("run.sim: ") + e.what());
  }
  return out;
}

}  // namespace

int Spec::user_count() const {
  if (n_users) return *n_users;
  if (!channels.empty()) return static_cast<int>(channels.size());
  if (preset && !preset->plan.empty()) return static_cast<int>(preset->plan.size());
  throw ConfigError("users.count or users.names is required");
}

const grid::FrequencyGrid& Spec::require_grid() const {
  if (!grid) throw ConfigError("grid section is required");
  return *grid;
}

const grid::PumpConfig& Spec::require_pumps() const {
  if (!pumps) throw ConfigError("pumps section is required");
  return *pumps;
}

Spec parse_spec(const json& document) {
  Spec spec;
  spec.document = document;
  spec.hash = io::hex64(io::fnv1a(document.dump()));
  Section root(document, "$");
  const json& ver = root.at("schema_version");
  if (!ver.is_number_integer() || ver.get<int>() != kSchemaVersion)
    throw ConfigError("schema_version must be " + std::to_string(kSchemaVersion));

  if (root.has("source")) {
    Section s = root.child("source");
    spec.has_source = true;
    photonics::SourceParams base;
    if (s.has("preset")) {
      spec.preset = netplan::load_preset(s.get<std::string>("preset"));
      base = spec.preset->source;
      spec.budget = spec.preset->budget;
    }
    try {
      spec.mode = netplan::eval_mode_from_string(s.get<std::string>("mode", "predictive"));
    } catch (const InputError& e) {
      throw ConfigError(std::string("source.mode: ") + e.what());
    }
    spec.source = parse_source_params(s, base);
    s.finish();
  }

  if (root.has("grid")) spec.grid = parse_grid(root.child("grid"));
  else if (spec.preset) spec.grid = spec.preset->grid;
  if (root.has("pumps")) spec.pumps = parse_pumps(root.child("pumps"));
  else if (spec.preset) spec.pumps = spec.preset->pumps;

  if (root.has("users")) {
    Section u = root.child("users");
    if (u.has("names")) {
      spec.names = u.get<std::vector<std::string>>("names");
      std::set<std::string> uniq(spec.names.begin(), spec.names.end());
      if (uniq.size() != spec.names.size() || uniq.count(""))
        throw ConfigError("users.names must be distinct and non-empty");
      spec.n_users = static_cast<int>(spec.names.size());
    }
    if (u.has("count")) {
      const int n = u.get<int>("count");
      if (n < 1) throw ConfigError("users.count must be >= 1");
      if (spec.n_users && *spec.n_users != n) throw ConfigError("users.count disagrees with users.names");
      spec.n_users = n;
    }
    if (u.has("channels")) {
      Section c = u.child("channels");
      const json& j = u.at("channels");
      for (auto it = j.begin(); it != j.end(); ++it) {
        auto ch = c.get<std::vector<int>>(it.key());
        std::sort(ch.begin(), ch.end());
        spec.channels.push_back({it.key(), ch});
      }
      c.finish();
      if (!spec.names.empty()) {
        std::vector<alloc::UserChannels> ordered;
        for (const auto& n : spec.names) {
          auto f = std::find_if(spec.channels.begin(), spec.channels.end(),
                                [&](const alloc::UserChannels& x) { return x.name == n; });
          if (f == spec.channels.end()) throw ConfigError("users.channels has no entry for " + n);
          ordered.push_back(*f);
        }
        if (ordered.size() != spec.channels.size())
          throw ConfigError("users.channels names a user missing from users.names");
        spec.channels = ordered;
      }
      if (spec.n_users && *spec.n_users != static_cast<int>(spec.channels.size()))
        throw ConfigError("users.channels disagrees with the user count");
    }
    if (!spec.n_users && spec.channels.empty())
      throw ConfigError("users needs count, names or channels");
    if (!spec.n_users) spec.n_users = static_cast<int>(spec.channels.size());
    if (spec.names.empty()) {
      if (!spec.channels.empty())
        for (const auto& c : spec.channels) spec.names.push_back(c.name);
      else
        spec.names = alloc::default_user_names(*spec.n_users);
    }
    if (u.has("pinned")) {
      Section p = u.child("pinned");
      const json& j = u.at("pinned");
      for (auto it = j.begin(); it != j.end(); ++it) {
        auto f = std::find(spec.names.begin(), spec.names.end(), it.key());
        if (f == spec.names.end()) throw ConfigError("users.pinned names unknown user " + it.key());
        for (int ch : p.get<std::vector<int>>(it.key())) {
          if (spec.pinned.count(ch)) throw ConfigError("channel " + std::to_string(ch) + " is pinned twice");
          spec.pinned[ch] = static_cast<int>(f - spec.names.begin());
        }
      }
      p.finish();
    }
    u.finish();
  }

  if (root.has("budget")) spec.budget = parse_budget(root.child("budget"));

  static const json kEmpty = json::object();
  Section run = root.has("run") ? root.child("run") : Section(kEmpty, "$.run");
  spec.window = run.has("window_s") ? positive(run, "window_s", 0.0) : 0.0;
  spec.seed = run.get<std::uint64_t>("seed", 0);
  spec.f_ec = run.get<double>("f_ec", 1.2);
  if (!(spec.f_ec >= 1.0)) throw ConfigError("run.f_ec must be >= 1");
  try {
    spec.objective = netplan::objective_from_string(run.get<std::string>("objective", "total"));
  } catch (const InputError& e) {
    throw ConfigError(std::string("run.objective: ") + e.what());
  }
  if (run.has("p_range_mw")) {
    const auto r = run.get<std::vector<double>>("p_range_mw");
    if (r.size() != 2 || !(r[0] > 0.0) || !(r[1] > r[0]))
      throw ConfigError("run.p_range_mw must be [min, max] with 0 < min < max");
    spec.p_min_mw = r[0];
    spec.p_max_mw = r[1];
  }
  spec.scan_points = run.get<int>("scan_points", 191);
  if (spec.scan_points < 3) throw ConfigError("run.scan_points must be >= 3");
  try {
    spec.solve.mode = alloc::solve_mode_from_string(run.get<std::string>("solver", "exact"));
  } catch (const InputError& e) {
    throw ConfigError(std::string("run.solver: ") + e.what());
  }
  spec.solve.node_limit = run.get<std::uint64_t>("node_limit", spec.solve.node_limit);
  spec.solve.anneal_iterations = run.get<std::uint64_t>("anneal_iterations", spec.solve.anneal_iterations);
  spec.solve.pinned = spec.pinned;
  spec.solve.names = spec.names;
  if (run.has("sim")) spec.sim = parse_sim(run.child("sim"), spec.window > 0.0 ? spec.window : (spec.has_source ? spec.source.delta_tau : 0.0), spec.seed);
  run.finish();

  if (root.has("compare")) {
    Section c = root.child("compare");
    CompareSection cs;
    cs.pump_sets = c.get<std::vector<std::vector<int>>>("pump_sets");
    if (cs.pump_sets.empty()) throw ConfigError("compare.pump_sets must not be empty");
    cs.power_mw = positive(c, "power_mw", 0.4);
    cs.evaluate = c.get<bool>("evaluate", false);
    c.finish();
    spec.compare = cs;
  }
  root.finish();
  return spec;
}

Spec load_spec(const std::string& path) {
  const std::string text = io::read_file(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return parse_spec(doc);
}

}  // namespace qmux::cli
