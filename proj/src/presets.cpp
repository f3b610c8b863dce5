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

// Shipped source presets. Each is calibrated when loaded by inverting the
// predictive model on the measured link table it carries.

#include <numeric>

#include "qmux/error.hpp"
#include "qmux/netplan.hpp"

namespace qmux::netplan {
namespace {

constexpr double kDeltaTau = 2e-9;  // s
constexpr double kDark = 50.0;      // Hz per detector
constexpr double kPumpPower = 0.4;  // mW per pump

std::map<std::string, std::map<std::string, double>> detector_losses() {
  return {{"A", {{"PC1", 0.1}, {"SNSPD1", 1.0}}},
          {"B", {{"PC2", 0.1}, {"SNSPD2", 1.0}}},
          {"C", {{"PC3", 0.2}, {"SNSPD3", 1.3}}},
          {"D", {{"PC4", 0.1}, {"SNSPD4", 0.9}}}};
}

std::map<std::string, double> mean_detector_loss() { return {{"PC", 0.125}, {"SNSPD", 1.05}}; }

double mean_of(const std::map<int, double>& m) {
  double s = 0.0;
  for (const auto& [k, v] : m) s += v;
  return s / static_cast<double>(m.size());
}

LinkBudget dual_budget() {
  LinkBudget b;
  b.common_db = {{"Coupling", 1.5}, {"DWDM-C46", 0.8}, {"DWDM-C34", 0.7}};
  b.channel_db = {{38, 2.04}, {42, 2.35}, {54, 3.19}, {50, 3.72}, {26, 2.39}, {30, 3.24}};
  b.default_channel_db = mean_of(b.channel_db);
  b.user_db = detector_losses();
  b.default_user_db = mean_detector_loss();
  return b;
}

std::vector<alloc::UserChannels> dual_plan() {
  return {{"A", {38}}, {"B", {42}}, {"C", {50, 54}}, {"D", {26, 30}}};
}

std::vector<CalibrationRow> dual_rows() {
  return {{38, 42, 1613.9, 0.971, 0.014}, {38, 54, 260.0, 0.844, 0.078},
          {38, 30, 405.6, 0.871, 0.065},  {42, 50, 268.2, 0.849, 0.076},
          {42, 26, 267.4, 0.832, 0.084},  {50, 30, 585.0, 0.932, 0.034},
          {54, 26, 460.0, 0.848, 0.076}};
}

Preset dual_pump() {
  grid::FrequencyGrid g(12, 60, 2);
  grid::PumpConfig p({34, 46}, {kPumpPower, kPumpPower});
  const auto graph = alloc::build_pairing_graph(g, p);
  const auto budget = dual_budget();
  CalibrationReport cal;
  auto src = calibrate_source(dual_rows(), dual_plan(), graph, budget, p, kDeltaTau, kDark, &cal);
  src.name = "dual-pump";
  src.provenance =
      "dual pump C34/C46 at 0.4 mW each; pair coefficients and detector noise fitted to the measured "
      "four-user link table (N_sift, visibility) with the dual-pump loss tables";
  return {"dual-pump", "four users on six channels, pumps C34 and C46", src, budget, g, p,
          dual_plan(), cal};
}

Preset single_c46() {
  grid::FrequencyGrid g(12, 60, 2);
  grid::PumpConfig p({46}, {kPumpPower});
  const auto graph = alloc::build_pairing_graph(g, p);
  LinkBudget b;
  b.common_db = {{"Coupling", 1.5}, {"DWDM-C46", 0.8}};
  b.channel_db = {{58, 2.59}, {56, 3.35}, {54, 3.27}, {52, 3.26}, {50, 4.58}, {34, 5.66},
                  {48, 4.00}, {40, 4.99}, {36, 5.30}, {44, 3.72}, {42, 5.33}, {38, 5.47}};
  b.default_channel_db = mean_of(b.channel_db);
  b.user_db = detector_losses();
  b.default_user_db = mean_detector_loss();
  const std::vector<alloc::UserChannels> plan = {
      {"A", {54, 56, 58}}, {"B", {34, 50, 52}}, {"C", {36, 40, 48}}, {"D", {38, 42, 44}}};
  const std::vector<CalibrationRow> rows = {
      {58, 34, 336.0, 0.9325, 0.0337}, {56, 36, 280.8, 0.8856, 0.0572},
      {54, 38, 283.8, 0.9073, 0.0463}, {52, 40, 337.8, 0.9290, 0.0355},
      {50, 42, 298.7, 0.8654, 0.0673}, {48, 44, 333.5, 0.9251, 0.0374}};
  CalibrationReport cal;
  auto src = calibrate_source(rows, plan, graph, b, p, kDeltaTau, kDark, &cal);
  src.name = "single-c46";
  src.provenance =
      "single pump C46 at 0.4 mW; fitted to the measured single-pump four-user link table with the "
      "single-pump loss table";
  return {"single-c46", "four users on twelve channels, pump C46", src, b, g, p, plan, cal};
}

Preset single_c34() {
  const Preset dual = dual_pump();
  grid::FrequencyGrid g(12, 60, 2);
  grid::PumpConfig p({34}, {kPumpPower});
  photonics::SourceParams src;
  src.name = "single-c34";
  src.provenance =
      "degenerate C34 process of dual-pump with the C46 pump switched off; no measured rows";
  src.delta_tau = dual.source.delta_tau;
  src.dark = dual.source.dark;
  src.reference_power_mw = kPumpPower;
  src.coef_degenerate = dual.source.coef_degenerate;
  src.coef_non_degenerate = dual.source.coef_non_degenerate;
  for (const auto& [k, v] : dual.source.pair_coef)
    if (k.first + k.second == 68) src.pair_coef[k] = v;
  src.channel_noise_lin = dual.source.channel_noise_lin;
  src.noise_lin = mean_of(src.channel_noise_lin);
  LinkBudget b = dual.budget;
  b.common_db.erase("DWDM-C46");
  return {"single-c34", "single pump C34 derived from the dual-pump calibration", src, b, g, p,
          {}, {}};
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"dual-pump", "single-c34", "single-c46"};
}

Preset load_preset(const std::string& name) {
  if (name == "dual-pump") return dual_pump();
  if (name == "single-c46") return single_c46();
  if (name == "single-c34") return single_c34();
  throw ConfigError("unknown source preset '" + name + "'");
}

}  // namespace qmux::netplan
