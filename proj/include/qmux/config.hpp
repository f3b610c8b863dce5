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

#pragma once

// Run specification: a JSON document validated against schema version 1.
// Unknown keys anywhere are errors.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qmux/alloc.hpp"
#include "qmux/netplan.hpp"
#include "qmux/sim.hpp"

namespace qmux::cli {

inline constexpr int kSchemaVersion = 1;

struct SimSection {
  sim::SimConfig config;  // pair_rate filled from nbar when given
  std::optional<double> nbar;
  std::string stream_format = "binary";  // binary | csv
  int accidental_windows = 10;
};

struct CompareSection {
  std::vector<std::vector<int>> pump_sets;
  double power_mw = 0.4;
  bool evaluate = false;
};

struct Spec {
  nlohmann::json document;  // as parsed
  std::string hash;         // FNV-1a of the canonical document, hex

  std::optional<grid::FrequencyGrid> grid;
  std::optional<grid::PumpConfig> pumps;

  std::optional<int> n_users;
  std::vector<std::string> names;
  std::map<int, int> pinned;                    // channel -> user index
  std::vector<alloc::UserChannels> channels;  // explicit plan, may be empty

  std::optional<netplan::Preset> preset;
  photonics::SourceParams source;
  bool has_source = false;
  netplan::EvalMode mode = netplan::EvalMode::predictive;
  netplan::LinkBudget budget;

  double window = 0.0;  // s; 0 uses the source's delta_tau
  std::uint64_t seed = 0;
  double f_ec = 1.2;
  netplan::Objective objective = netplan::Objective::total;
  double p_min_mw = 0.05;
  double p_max_mw = 1.0;
  int scan_points = 191;
  alloc::SolveOptions solve;

  std::optional<SimSection> sim;
  std::optional<CompareSection> compare;

  /// Number of users the spec asks for.
  int user_count() const;
  const grid::FrequencyGrid& require_grid() const;
  const grid::PumpConfig& require_pumps() const;
};

/// Throws ConfigError with the offending key path.
Spec parse_spec(const nlohmann::json& document);
Spec load_spec(const std::string& path);

}  // namespace qmux::cli
