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

// Pair-source statistics: coincidences C, accidentals A, CAR and raw
// visibility, with per-path efficiency, linear noise, dark counts and
// crosstalk from multiplexed states that share a detector.

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "qmux/grid.hpp"

namespace qmux::photonics {

struct CoincidenceStats {
  double C = 0.0;  // Hz
  double A = 0.0;  // Hz
  double car = 0.0;         // C / A, +inf when A == 0
  double visibility = 0.0;  // (C - A) / (C + A)
  double singles_s = 0.0;   // Hz
  double singles_i = 0.0;   // Hz
  double delta_tau = 0.0;   // s

  /// A / (C + A).
  double qber() const;
};

/// Fills car and visibility from (C, A). Throws DomainError on negative or
/// non-finite rates.
CoincidenceStats make_stats(double C, double A, double delta_tau, double singles_s = 0.0,
                            double singles_i = 0.0);

/// Stats with coincidence rate C whose raw visibility is V.
CoincidenceStats stats_from_visibility(double visibility, double C, double delta_tau);

/// C = n/dt, A = n^2/dt. Requires 0 < nbar < 1.
CoincidenceStats ideal_stats(double nbar, double delta_tau);

struct MeasuredRow {
  double n_sift_hz = 0.0;
  double visibility = 0.0;
  double qber = 0.0;
};

struct SourceParams {
  std::string name = "custom";
  std::string provenance;
  double delta_tau = 2e-9;          // s
  double reference_power_mw = 0.0;  // per pump, informational
  double coef_degenerate = 0.0;     // Hz / mW^2
  double coef_non_degenerate = 0.0;  // Hz / mW^2
  std::map<std::pair<int, int>, double> pair_coef;  // (a < b) -> Hz / mW^2
  double noise_lin = 0.0;  // detected Hz per mW of total pump power, per channel
  std::map<int, double> channel_noise_lin;
  double dark = 0.0;  // Hz per detector
  std::map<std::pair<int, int>, MeasuredRow> measured;  // (a < b)

  double coefficient(grid::ProcessKind kind) const;
  double pair_coefficient(int a, int b, grid::ProcessKind kind) const;
  double noise_coefficient(int channel) const;
  /// Mean pair number per window per mW^2.
  double nbar_per_mw2(grid::ProcessKind kind) const { return coefficient(kind) * delta_tau; }
  const MeasuredRow* measured_row(int a, int b) const;

  /// Throws DomainError on negative coefficients or delta_tau <= 0.
  void validate() const;
};

/// Pair rate of channel pair (a, b) fed by `sources`: the sum over pump pairs
/// (i, j) of coefficient * P_i * P_j. A per-pair override replaces the
/// per-kind coefficient for every source.
double pair_rate(const SourceParams& params, int a, int b,
                 const std::vector<grid::PumpPair>& sources, const grid::PumpConfig& pumps);

/// What one detector sees besides the selected pair.
struct SideLoad {
  double eta = 1.0;
  double crosstalk_hz = 0.0;  // pair rates of other states on this path, before eta
  double noise_hz = 0.0;      // detected noise
  double dark_hz = 0.0;
};

/// S = eta (R + crosstalk) + noise + dark; C = eta_s eta_i R; A = S_s S_i dt.
CoincidenceStats coincidence_model(double pair_rate_hz, const SideLoad& s, const SideLoad& i,
                                   double delta_tau);

/// Single link. Degenerate pairs scale with P1^2, non-degenerate with P1 P2;
/// linear noise scales with P1 + P2 on each side.
CoincidenceStats link_stats(const SourceParams& params, double p1_mw, double p2_mw,
                            grid::ProcessKind process, double eta_s, double eta_i,
                            double crosstalk_s_hz = 0.0, double crosstalk_i_hz = 0.0);

struct SinglesFit {
  double a = 0.0;  // Hz / mW^2
  double b = 0.0;  // Hz / mW
  double residual = 0.0;  // L2 norm
  bool clamped = false;
};

/// Least squares S = a P^2 + b P with a, b >= 0.
SinglesFit fit_singles(const std::vector<std::pair<double, double>>& points);

/// (C/2)[1 + v cos(alpha + beta)] + A with v = V (C + 2A) / C, so the fringe
/// has raw visibility V and mean C/2 + A.
double franson_rate(double alpha, double beta, const CoincidenceStats& stats);

/// Visibility of a sinusoid fitted to samples taken uniformly over one
/// period: first-harmonic amplitude over mean, equal to (max - min) / (max + min).
double fringe_visibility(const std::vector<double>& rates);

/// `n` samples of alpha over [0, 2 pi) at fixed beta.
std::vector<double> franson_scan(const CoincidenceStats& stats, double beta, int n);

/// (CAR - 1) / (CAR + 1); 1 for infinite CAR.
double visibility_from_car(double car);

}  // namespace qmux::photonics
