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

#include "qmux/photonics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Dense>

#include "qmux/error.hpp"

namespace qmux::photonics {
namespace {

void require_rate(double v, const char* what) {
  if (!std::isfinite(v) || v < 0.0) throw DomainError(std::string(what) + " must be finite and >= 0");
}

void require_eta(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) throw DomainError(std::string(what) + " must lie in [0, 1]");
}

std::pair<int, int> key(int a, int b) { return a < b ? std::pair(a, b) : std::pair(b, a); }

}  // namespace

double CoincidenceStats::qber() const { return C + A > 0.0 ? A / (C + A) : 0.5; }

CoincidenceStats make_stats(double C, double A, double delta_tau, double singles_s,
                            double singles_i) {
  require_rate(C, "coincidence rate");
  require_rate(A, "accidental rate");
  require_rate(singles_s, "singles rate");
  require_rate(singles_i, "singles rate");
  if (!(delta_tau > 0.0)) throw DomainError("coincidence window must be positive");
  CoincidenceStats s;
  s.C = C;
  s.A = A;
  s.delta_tau = delta_tau;
  s.singles_s = singles_s;
  s.singles_i = singles_i;
  s.car = A > 0.0 ? C / A : std::numeric_limits<double>::infinity();
  s.visibility = C + A > 0.0 ? (C - A) / (C + A) : 0.0;
  return s;
}

CoincidenceStats stats_from_visibility(double visibility, double C, double delta_tau) {
  if (!(visibility > 0.0 && visibility <= 1.0)) throw DomainError("visibility must lie in (0, 1]");
  return make_stats(C, C * (1.0 - visibility) / (1.0 + visibility), delta_tau);
}

CoincidenceStats ideal_stats(double nbar, double delta_tau) {
  if (!(nbar > 0.0 && nbar < 1.0)) throw DomainError("nbar must lie in (0, 1)");
  if (!(delta_tau > 0.0)) throw DomainError("coincidence window must be positive");
  const double r = nbar / delta_tau;
  return make_stats(r, r * r * delta_tau, delta_tau, r, r);
}

double SourceParams::coefficient(grid::ProcessKind kind) const {
  switch (kind) {
    case grid::ProcessKind::degenerate:
      return coef_degenerate;
    case grid::ProcessKind::non_degenerate:
      return coef_non_degenerate;
    case grid::ProcessKind::mixed:
      break;
  }
  throw DomainError("a mixed target has no single coefficient");
}

double SourceParams::pair_coefficient(int a, int b, grid::ProcessKind kind) const {
  auto it = pair_coef.find(key(a, b));
  return it != pair_coef.end() ? it->second : coefficient(kind);
}

double SourceParams::noise_coefficient(int channel) const {
  auto it = channel_noise_lin.find(channel);
  return it != channel_noise_lin.end() ? it->second : noise_lin;
}

const MeasuredRow* SourceParams::measured_row(int a, int b) const {
  auto it = measured.find(key(a, b));
  return it == measured.end() ? nullptr : &it->second;
}

void SourceParams::validate() const {
  if (!(delta_tau > 0.0)) throw DomainError("delta_tau must be positive");
  require_rate(coef_degenerate, "coef_degenerate");
  require_rate(coef_non_degenerate, "coef_non_degenerate");
  require_rate(noise_lin, "noise_lin");
  require_rate(dark, "dark");
  for (const auto& [k, v] : pair_coef) require_rate(v, "pair coefficient");
  for (const auto& [k, v] : channel_noise_lin) require_rate(v, "channel noise");
  for (const auto& [k, r] : measured) {
    require_rate(r.n_sift_hz, "measured n_sift");
    if (!(r.qber >= 0.0 && r.qber <= 0.5)) throw DomainError("measured qber must lie in [0, 0.5]");
  }
}

double pair_rate(const SourceParams& params, int a, int b,
                 const std::vector<grid::PumpPair>& sources, const grid::PumpConfig& pumps) {
  const auto& p = pumps.powers_mw();
  const auto ov = params.pair_coef.find(key(a, b));
  double r = 0.0;
  for (const auto& s : sources) {
    const double coef = ov != params.pair_coef.end()
                            ? ov->second
                            : params.coefficient(s.degenerate() ? grid::ProcessKind::degenerate
                                                                : grid::ProcessKind::non_degenerate);
    r += coef * p[s.first] * p[s.second];
  }
  return r;
}

CoincidenceStats coincidence_model(double pair_rate_hz, const SideLoad& s, const SideLoad& i,
                                   double delta_tau) {
  require_rate(pair_rate_hz, "pair rate");
  for (const SideLoad* side : {&s, &i}) {
    require_eta(side->eta, "efficiency");
    require_rate(side->crosstalk_hz, "crosstalk rate");
    require_rate(side->noise_hz, "noise rate");
    require_rate(side->dark_hz, "dark rate");
  }
  const double ss = s.eta * (pair_rate_hz + s.crosstalk_hz) + s.noise_hz + s.dark_hz;
  const double si = i.eta * (pair_rate_hz + i.crosstalk_hz) + i.noise_hz + i.dark_hz;
  return make_stats(s.eta * i.eta * pair_rate_hz, ss * si * delta_tau, delta_tau, ss, si);
}

CoincidenceStats link_stats(const SourceParams& params, double p1_mw, double p2_mw,
                            grid::ProcessKind process, double eta_s, double eta_i,
                            double crosstalk_s_hz, double crosstalk_i_hz) {
  require_rate(p1_mw, "pump power");
  require_rate(p2_mw, "pump power");
  params.validate();
  const double p_eff = process == grid::ProcessKind::degenerate ? p1_mw * p1_mw : p1_mw * p2_mw;
  const double r = params.coefficient(process) * p_eff;
  const double noise = params.noise_lin * (p1_mw + p2_mw);
  return coincidence_model(r, {eta_s, crosstalk_s_hz, noise, params.dark},
                           {eta_i, crosstalk_i_hz, noise, params.dark}, params.delta_tau);
}

SinglesFit fit_singles(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) throw DomainError("fit_singles needs at least three points");
  Eigen::MatrixXd X(points.size(), 2);
  Eigen::VectorXd y(points.size());
  for (std::size_t k = 0; k < points.size(); ++k) {
    const auto [p, s] = points[k];
    if (!std::isfinite(p) || p < 0.0) throw DomainError("powers must be finite and >= 0");
    if (!std::isfinite(s) || s < 0.0) throw DomainError("singles rates must be finite and >= 0");
    X(k, 0) = p * p;
    X(k, 1) = p;
    y(k) = s;
  }
  const Eigen::Matrix2d n = X.transpose() * X;
  const double scale = n(0, 0) * n(1, 1);
  if (!(scale > 0.0) || std::abs(n.determinant()) <= 1e-12 * scale)
    throw IllConditioned("singles fit needs at least two distinct non-zero powers");
  const Eigen::Vector2d sol = X.colPivHouseholderQr().solve(y);

  SinglesFit f{sol(0), sol(1), 0.0, false};
  if (f.a < 0.0 || f.b < 0.0) {
    f.clamped = true;
    // Best one-term fit on the boundary that stays feasible.
    const double a_only = std::max(0.0, X.col(0).dot(y) / X.col(0).squaredNorm());
    const double b_only = std::max(0.0, X.col(1).dot(y) / X.col(1).squaredNorm());
    const double ra = (y - a_only * X.col(0)).norm();
    const double rb = (y - b_only * X.col(1)).norm();
    if (ra <= rb) {
      f.a = a_only;
      f.b = 0.0;
    } else {
      f.a = 0.0;
      f.b = b_only;
    }
  }
  f.residual = (y - X * Eigen::Vector2d(f.a, f.b)).norm();
  return f;
}

double franson_rate(double alpha, double beta, const CoincidenceStats& stats) {
  if (!(stats.C > 0.0)) return stats.A;
  const double v = stats.visibility * (stats.C + 2.0 * stats.A) / stats.C;
  return 0.5 * stats.C * (1.0 + v * std::cos(alpha + beta)) + stats.A;
}

double fringe_visibility(const std::vector<double>& rates) {
  if (rates.size() < 3) throw DomainError("fringe fit needs at least three samples");
  const double n = static_cast<double>(rates.size());
  double m = 0.0;
  double c = 0.0;
  double s = 0.0;
  for (std::size_t k = 0; k < rates.size(); ++k) {
    const double a = 2.0 * std::numbers::pi * static_cast<double>(k) / n;
    m += rates[k];
    c += rates[k] * std::cos(a);
    s += rates[k] * std::sin(a);
  }
  m /= n;
  return m > 0.0 ? 2.0 * std::hypot(c, s) / n / m : 0.0;
}

std::vector<double> franson_scan(const CoincidenceStats& stats, double beta, int n) {
  if (n < 1) throw DomainError("scan needs at least one sample");
  std::vector<double> out(n);
  for (int k = 0; k < n; ++k)
    out[k] = franson_rate(2.0 * std::numbers::pi * k / n, beta, stats);
  return out;
}

double visibility_from_car(double car) {
  if (!(car > 0.0)) throw DomainError("CAR must be positive");
  if (std::isinf(car)) return 1.0;
  return (car - 1.0) / (car + 1.0);
}

}  // namespace qmux::photonics
