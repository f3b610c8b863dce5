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

// ITU channel grid, pump configuration, and the energy-conservation pairing
// rule: channels a and b can carry a photon pair when a + b equals p_i + p_j
// for some pumps i <= j.

#include <compare>
#include <set>
#include <string>
#include <vector>

namespace qmux::grid {

/// Integer channel number on the 100 GHz ITU grid (38 is C38).
struct Channel {
  int label = 0;
  friend auto operator<=>(const Channel&, const Channel&) = default;
};

enum class ProcessKind { degenerate, non_degenerate, mixed };

std::string to_string(ProcessKind kind);
ProcessKind process_kind_from_string(const std::string& s);

/// Indices into PumpConfig::labels(), first <= second. first == second is the
/// degenerate process 2*p_i.
struct PumpPair {
  int first = 0;
  int second = 0;
  bool degenerate() const { return first == second; }
  friend bool operator==(const PumpPair&, const PumpPair&) = default;
};

struct SumTarget {
  int value = 0;
  std::vector<PumpPair> sources;  // every (i <= j) with p_i + p_j == value
  ProcessKind kind() const;
};

class PumpConfig {
 public:
  /// Labels are stored sorted ascending; powers follow their label.
  PumpConfig(std::vector<int> labels, std::vector<double> powers_mw);

  const std::vector<int>& labels() const { return labels_; }
  const std::vector<double>& powers_mw() const { return powers_; }
  std::size_t size() const { return labels_.size(); }
  double total_power_mw() const;

  /// Same labels, every pump set to `power_mw`.
  PumpConfig with_equal_power(double power_mw) const;

 private:
  std::vector<int> labels_;
  std::vector<double> powers_;
};

class FrequencyGrid {
 public:
  FrequencyGrid(int band_min, int band_max, int step,
                std::set<int> excluded = {}, double f0_thz = 190.0,
                double spacing_ghz = 100.0);

  int band_min() const { return band_min_; }
  int band_max() const { return band_max_; }
  int step() const { return step_; }
  const std::set<int>& excluded() const { return excluded_; }
  double f0_thz() const { return f0_thz_; }
  double spacing_ghz() const { return spacing_ghz_; }

  /// In band and on the step lattice (excluded channels included).
  bool on_grid(int label) const;
  bool is_excluded(int label) const { return excluded_.count(label) != 0; }
  bool usable(int label) const { return on_grid(label) && !is_excluded(label); }

  std::vector<int> lattice() const;
  std::vector<int> usable_channels() const;

  double frequency_thz(int label) const;
  double wavelength_nm(int label) const;

  /// Adds the given labels that fall on the grid; others are ignored.
  FrequencyGrid with_exclusions(const std::set<int>& labels) const;

 private:
  int band_min_;
  int band_max_;
  int step_;
  std::set<int> excluded_;
  double f0_thz_;
  double spacing_ghz_;
};

/// { p_i + p_j : i <= j }, ascending.
std::vector<SumTarget> sum_targets(const PumpConfig& pumps);
std::vector<int> sum_target_values(const PumpConfig& pumps);

/// { 2 p_i - p_j : i != j }, ascending.
std::set<int> stimulated_fwm_lines(const PumpConfig& pumps);
/// Same, restricted to labels on `grid`.
std::set<int> stimulated_fwm_lines(const PumpConfig& pumps,
                                   const FrequencyGrid& grid);

/// `grid` with pump channels and stimulated-FWM lines excluded.
FrequencyGrid effective_grid(const FrequencyGrid& grid, const PumpConfig& pumps);

struct Partner {
  Channel channel;
  int target = 0;
  ProcessKind kind = ProcessKind::degenerate;
};

/// Usable channels correlated with `c`, ascending by label. Throws
/// ChannelExcluded when `c` itself is not usable.
std::vector<Partner> partner_channels(Channel c, const FrequencyGrid& grid,
                                      const PumpConfig& pumps);

}  // namespace qmux::grid
