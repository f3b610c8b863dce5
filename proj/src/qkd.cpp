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

#include "qmux/qkd.hpp"

#include <algorithm>
#include <cmath>

#include "qmux/error.hpp"

namespace qmux::qkd {

double h2(double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("h2 argument must lie in [0, 1]");
  if (x == 0.0 || x == 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

double qber_from_visibility(double visibility) {
  if (!(visibility >= 0.0 && visibility <= 1.0)) throw DomainError("visibility must lie in [0, 1]");
  return (1.0 - visibility) / 2.0;
}

KeyRateResult skr(const KeyRateInput& in) {
  if (!std::isfinite(in.n_sift) || in.n_sift < 0.0) throw DomainError("n_sift must be >= 0");
  if (!(in.qber >= 0.0 && in.qber <= 0.5)) throw DomainError("qber must lie in [0, 0.5]");
  if (!(in.f_ec >= 1.0) || !std::isfinite(in.f_ec)) throw DomainError("f_ec must be >= 1");
  KeyRateResult r;
  r.skr = std::max(0.0, in.n_sift * (1.0 - (1.0 + in.f_ec) * h2(in.qber)));
  r.secure = r.skr > 0.0;
  r.margin = qber_threshold(in.f_ec).qber - in.qber;
  return r;
}

Threshold qber_threshold(double f_ec) {
  if (!(f_ec >= 1.0) || !std::isfinite(f_ec)) throw DomainError("f_ec must be >= 1");
  double lo = 0.0;
  double hi = 0.5;
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    if (1.0 - (1.0 + f_ec) * h2(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  const double x = 0.5 * (lo + hi);
  return {x, 1.0 - 2.0 * x};
}

namespace {

void check_x(double x, double delta_tau) {
  if (!(x > 0.0 && x < 0.5)) throw DomainError("x must lie in (0, 0.5)");
  if (!(delta_tau > 0.0)) throw DomainError("delta_tau must be positive");
}

}  // namespace

double closed_form_skr(double x, double delta_tau, double f_ec) {
  check_x(x, delta_tau);
  return std::max(0.0, (1.0 - x) / (delta_tau * x * x) * (1.0 - (1.0 + f_ec) * h2(x)));
}

double ideal_source_skr(double x, double delta_tau, double f_ec) {
  check_x(x, delta_tau);
  return std::max(0.0, x / ((1.0 - x) * (1.0 - x) * delta_tau) * (1.0 - (1.0 + f_ec) * h2(x)));
}

SiftResult sift(const sim::TimeTagStream& stream, double window, double offset) {
  if (!(window > 0.0)) throw DomainError("coincidence window must be positive");
  if (!stream.info.tagged) throw InputError("stream carries no basis tags");
  const std::int64_t half = std::max<std::int64_t>(1, std::llround(window * 1e12)) / 2;
  const std::int64_t off = std::llround(offset * 1e12);
  const auto& s = stream.signal;
  const auto& id = stream.idler;
  SiftResult r;
  std::size_t first = 0;
  for (const auto& e : s) {
    while (first < id.size() && id[first].t_ps < e.t_ps - off - half) ++first;
    for (std::size_t j = first; j < id.size() && id[j].t_ps <= e.t_ps - off + half; ++j) {
      ++r.coincidences;
      if (id[j].basis != e.basis) continue;
      ++r.kept;
      if (id[j].bit != e.bit) ++r.errors;
    }
  }
  if (r.kept == 0) throw InsufficientStatistics("no matching-basis coincidences");
  const double t = stream.duration_s();
  const double k = static_cast<double>(r.kept);
  r.n_sift = k / t;
  r.qber = static_cast<double>(r.errors) / k;
  r.qber_err = std::sqrt(std::max(r.qber * (1.0 - r.qber), 1.0 / k) / k);
  return r;
}

}  // namespace qmux::qkd
