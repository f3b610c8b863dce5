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

// Network evaluation: plan + source + loss budget + pumps -> per-row key
// rates. One row per realizing channel pair; a user pair joined by two
// channel pairs yields two rows.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qmux/alloc.hpp"
#include "qmux/grid.hpp"
#include "qmux/photonics.hpp"
#include "qmux/qkd.hpp"

namespace qmux::netplan {

/// rate * 10^(-loss/10). Throws DomainError on negative loss.
double apply_losses(double rate, double loss_db);
double transmission(double loss_db);

struct LinkBudget {
  std::map<std::string, double> common_db;  // every path
  std::map<int, double> channel_db;         // demultiplexer / multiplexer
  double default_channel_db = 0.0;          // channels without an entry
  std::map<std::string, std::map<std::string, double>> user_db;  // user -> component -> dB
  std::map<std::string, double> default_user_db;  // users without an entry

  double path_db(const std::string& user, int channel) const;
  double eta(const std::string& user, int channel) const;
  void validate() const;
};

enum class EvalMode { predictive, calibrated };
std::string to_string(EvalMode mode);
EvalMode eval_mode_from_string(const std::string& s);

struct EvalOptions {
  EvalMode mode = EvalMode::predictive;
  double f_ec = qkd::kDefaultFec;
  double window = 0.0;  // s; 0 takes the source's delta_tau
};

struct ReportRow {
  std::string user_a;
  std::string user_b;
  int channel_a = 0;  // held by user_a
  int channel_b = 0;
  grid::ProcessKind kind = grid::ProcessKind::degenerate;
  double C = 0.0;
  double A = 0.0;
  double singles_a = 0.0;
  double singles_b = 0.0;
  double n_sift = 0.0;
  double visibility = 0.0;
  double qber = 0.0;
  double skr = 0.0;
  bool secure = false;
  double margin = 0.0;
};

struct ReportMeta {
  std::string source;
  std::string mode;
  std::string config_hash;
  std::string timestamp;
  std::vector<int> pump_labels;
  std::vector<double> pump_powers_mw;
  double window = 0.0;
  double f_ec = qkd::kDefaultFec;
};

struct NetworkReport {
  std::vector<ReportRow> rows;
  double total_skr = 0.0;
  int secure_rows = 0;
  ReportMeta meta;
  std::vector<std::string> warnings;
};

/// Throws PlanInvalid when verify_plan rejects the plan, and ConfigError in
/// calibrated mode when a row has no measurement.
NetworkReport evaluate_network(const alloc::AllocationPlan& plan, const alloc::PairingGraph& graph,
                               const photonics::SourceParams& source, const LinkBudget& budget,
                               const grid::PumpConfig& pumps, const EvalOptions& options = {});

/// Detected singles on each user's detector in predictive mode.
std::vector<double> user_singles(const alloc::AllocationPlan& plan, const alloc::PairingGraph& graph,
                                 const photonics::SourceParams& source, const LinkBudget& budget,
                                 const grid::PumpConfig& pumps);

enum class Objective { total, min_link };
std::string to_string(Objective objective);
Objective objective_from_string(const std::string& s);

struct ScanPoint {
  double power_mw = 0.0;
  std::vector<double> qber;  // per report row
  std::vector<double> skr;
  double total = 0.0;
  double objective = 0.0;
  bool feasible = true;  // every pair keeps nbar < 1
};

struct OptimizeOptions {
  Objective objective = Objective::total;
  double p_min_mw = 0.05;
  double p_max_mw = 1.0;
  int scan_points = 191;
  double tolerance_mw = 1e-6;
  EvalOptions eval;
};

struct OptimizeResult {
  double p_star_mw = 0.0;
  double objective = 0.0;
  NetworkReport report;
  std::vector<ScanPoint> curve;
  /// Largest power at which every row is secure, refined between scan points;
  /// empty when no scanned power qualifies.
  std::optional<double> p_secure_max_mw;
};

/// All pumps share one power P. Rows are always evaluated in predictive mode,
/// since measured rows do not depend on P. Throws NoSecurePower when the objective is
/// zero over the whole range.
OptimizeResult optimize_pump_power(const alloc::AllocationPlan& plan, const alloc::PairingGraph& graph,
                                   const photonics::SourceParams& source, const LinkBudget& budget,
                                   const grid::PumpConfig& pumps, const OptimizeOptions& options);

/// Objective at one power.
ScanPoint evaluate_power(const alloc::AllocationPlan& plan, const alloc::PairingGraph& graph,
                         const photonics::SourceParams& source, const LinkBudget& budget,
                         const grid::PumpConfig& pumps, double power_mw, const OptimizeOptions& options);

struct SchemeRow {
  std::vector<int> pumps;
  int users = 0;
  int channels = 0;
  int baseline = 0;
  int savings = 0;  // baseline - channels
  int lower_bound = 0;
  bool optimal = false;
  std::optional<double> total_skr;  // when a source is given
  alloc::AllocationPlan plan;
};

struct CompareOptions {
  alloc::SolveOptions solve;
  EvalOptions eval;
  const photonics::SourceParams* source = nullptr;
  const LinkBudget* budget = nullptr;
};

/// One row per pump configuration. Infeasible propagates.
std::vector<SchemeRow> compare_schemes(int n_users, const grid::FrequencyGrid& band,
                                       const std::vector<grid::PumpConfig>& pumps_list,
                                       const CompareOptions& options = {});

/// Measured link used to calibrate a predictive source.
struct CalibrationRow {
  int channel_a = 0;
  int channel_b = 0;
  double n_sift_hz = 0.0;
  double visibility = 0.0;
  double qber = 0.0;
};

struct CalibrationReport {
  std::map<std::string, double> user_noise_hz;  // fitted detector noise at the reference power
  double residual = 0.0;  // RMS of log(A_model / A_measured)
};

/// Inverts the predictive model on measured rows at the given pump powers:
/// per-pair coefficients from C = n_sift (1 + V), per-kind means for
/// unmeasured pairs, and per-user linear noise fitted to the accidentals
/// A = n_sift (1 - V) in log space. Rows are also pinned for calibrated mode.
photonics::SourceParams calibrate_source(const std::vector<CalibrationRow>& rows,
                                         const std::vector<alloc::UserChannels>& users,
                                         const alloc::PairingGraph& graph, const LinkBudget& budget,
                                         const grid::PumpConfig& pumps, double delta_tau, double dark_hz,
                                         CalibrationReport* report = nullptr);

struct Preset {
  std::string name;
  std::string description;
  photonics::SourceParams source;
  LinkBudget budget;
  grid::FrequencyGrid grid;
  grid::PumpConfig pumps;
  std::vector<alloc::UserChannels> plan;  // empty: let the solver choose
  CalibrationReport calibration;
};

std::vector<std::string> preset_names();
/// Throws ConfigError for unknown names.
Preset load_preset(const std::string& name);

}  // namespace qmux::netplan
