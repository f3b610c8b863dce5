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

#include "qmux/grid.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "qmux/error.hpp"

namespace qmux::grid {

std::string to_string(ProcessKind kind) {
  switch (kind) {
    case ProcessKind::degenerate:
      return "degenerate";
    case ProcessKind::non_degenerate:
      return "non-degenerate";
    case ProcessKind::mixed:
      return "mixed";
  }
  return "unknown";
}

ProcessKind process_kind_from_string(const std::string& s) {
  if (s == "degenerate") return ProcessKind::degenerate;
  if (s == "non-degenerate") return ProcessKind::non_degenerate;
  if (s == "mixed") return ProcessKind::mixed;
  throw InputError("unknown process kind '" + s + "'");
}

ProcessKind SumTarget::kind() const {
  bool deg = false;
  bool nondeg = false;
  for (const auto& s : sources) (s.degenerate() ? deg : nondeg) = true;
  if (deg && nondeg) return ProcessKind::mixed;
  return deg ? ProcessKind::degenerate : ProcessKind::non_degenerate;
}

PumpConfig::PumpConfig(std::vector<int> labels, std::vector<double> powers_mw) {
  if (labels.empty()) throw InputError("pump configuration needs at least one pump");
  if (labels.size() != powers_mw.size())
    throw InputError("pump labels and powers differ in length");
  std::vector<std::size_t> order(labels.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return labels[a] < labels[b]; });
  for (std::size_t k = 0; k < order.size(); ++k) {
    const int label = labels[order[k]];
    const double p = powers_mw[order[k]];
    if (k > 0 && label == labels_.back())
      throw InputError("duplicate pump label " + std::to_string(label));
    if (!(p > 0.0) || !std::isfinite(p))
      throw InputError("pump power must be strictly positive");
    labels_.push_back(label);
    powers_.push_back(p);
  }
}

double PumpConfig::total_power_mw() const {
  return std::accumulate(powers_.begin(), powers_.end(), 0.0);
}

PumpConfig PumpConfig::with_equal_power(double power_mw) const {
  return PumpConfig(labels_, std::vector<double>(labels_.size(), power_mw));
}

FrequencyGrid::FrequencyGrid(int band_min, int band_max, int step,
                             std::set<int> excluded, double f0_thz,
                             double spacing_ghz)
    : band_min_(band_min),
      band_max_(band_max),
      step_(step),
      excluded_(std::move(excluded)),
      f0_thz_(f0_thz),
      spacing_ghz_(spacing_ghz) {
  if (band_min_ > band_max_) throw InputError("empty band");
  if (step_ < 1) throw InputError("grid step must be >= 1");
  if ((band_max_ - band_min_) % step_ != 0)
    throw InputError("grid step must divide the band width");
  if (!(spacing_ghz_ > 0.0)) throw InputError("grid spacing must be positive");
  for (int e : excluded_)
    if (!on_grid(e))
      throw InputError("excluded channel " + std::to_string(e) + " is not on the grid");
}

bool FrequencyGrid::on_grid(int label) const {
  return label >= band_min_ && label <= band_max_ &&
         (label - band_min_) % step_ == 0;
}

std::vector<int> FrequencyGrid::lattice() const {
  std::vector<int> out;
  for (int c = band_min_; c <= band_max_; c += step_) out.push_back(c);
  return out;
}

std::vector<int> FrequencyGrid::usable_channels() const {
  std::vector<int> out;
  for (int c = band_min_; c <= band_max_; c += step_)
    if (!is_excluded(c)) out.push_back(c);
  return out;
}

double FrequencyGrid::frequency_thz(int label) const {
  return f0_thz_ + label * spacing_ghz_ * 1e-3;
}

double FrequencyGrid::wavelength_nm(int label) const {
  constexpr double c_nm_thz = 299792.458;
  return c_nm_thz / frequency_thz(label);
}

FrequencyGrid FrequencyGrid::with_exclusions(const std::set<int>& labels) const {
  std::set<int> merged = excluded_;
  for (int l : labels)
    if (on_grid(l)) merged.insert(l);
  return FrequencyGrid(band_min_, band_max_, step_, std::move(merged), f0_thz_,
                       spacing_ghz_);
}

std::vector<SumTarget> sum_targets(const PumpConfig& pumps) {
  std::map<int, SumTarget> by_value;
  const auto& p = pumps.labels();
  for (int i = 0; i < static_cast<int>(p.size()); ++i) {
    for (int j = i; j < static_cast<int>(p.size()); ++j) {
      auto& t = by_value[p[i] + p[j]];
      t.value = p[i] + p[j];
      t.sources.push_back({i, j});
    }
  }
  std::vector<SumTarget> out;
  for (auto& [v, t] : by_value) out.push_back(std::move(t));
  return out;
}

std::vector<int> sum_target_values(const PumpConfig& pumps) {
  std::vector<int> out;
  for (const auto& t : sum_targets(pumps)) out.push_back(t.value);
  return out;
}

std::set<int> stimulated_fwm_lines(const PumpConfig& pumps) {
  std::set<int> out;
  const auto& p = pumps.labels();
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = 0; j < p.size(); ++j)
      if (i != j) out.insert(2 * p[i] - p[j]);
  return out;
}

std::set<int> stimulated_fwm_lines(const PumpConfig& pumps,
                                   const FrequencyGrid& grid) {
  std::set<int> out;
  for (int l : stimulated_fwm_lines(pumps))
    if (grid.on_grid(l)) out.insert(l);
  return out;
}

FrequencyGrid effective_grid(const FrequencyGrid& grid, const PumpConfig& pumps) {
  std::set<int> extra = stimulated_fwm_lines(pumps);
  extra.insert(pumps.labels().begin(), pumps.labels().end());
  return grid.with_exclusions(extra);
}

std::vector<Partner> partner_channels(Channel c, const FrequencyGrid& grid,
                                      const PumpConfig& pumps) {
  const FrequencyGrid eff = effective_grid(grid, pumps);
  if (!eff.usable(c.label)) throw ChannelExcluded(c.label);
  std::vector<Partner> out;
  for (const auto& t : sum_targets(pumps)) {
    const int p = t.value - c.label;
    if (p == c.label || !eff.usable(p)) continue;
    out.push_back({Channel{p}, t.value, t.kind()});
  }
  std::sort(out.begin(), out.end(), [](const Partner& a, const Partner& b) {
    return a.channel < b.channel;
  });
  return out;
}

}  // namespace qmux::grid
