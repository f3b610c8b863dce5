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

// BBM92 key-rate arithmetic with symmetric bit and phase error rates.

#include "qmux/sim.hpp"

namespace qmux::qkd {

inline constexpr double kDefaultFec = 1.2;

/// Binary entropy in bits; h2(0) = h2(1) = 0.
double h2(double x);

/// (1 - V) / 2.
double qber_from_visibility(double visibility);

struct KeyRateInput {
  double n_sift = 0.0;  // Hz
  double qber = 0.0;
  double f_ec = kDefaultFec;
};

struct KeyRateResult {
  double skr = 0.0;  // bps, >= 0
  bool secure = false;
  double margin = 0.0;  // qber_threshold(f_ec) - qber
};

/// n_sift [1 - (1 + f) h2(qber)], clamped at zero.
KeyRateResult skr(const KeyRateInput& input);

struct Threshold {
  double qber = 0.0;
  double visibility = 0.0;  // 1 - 2 qber
};

/// Root of 1 - (1 + f) h2(x) on (0, 1/2), bisected to 1e-10.
Threshold qber_threshold(double f_ec = kDefaultFec);

/// Ideal-source rate in the closed form (1 - x) / (dt x^2) [1 - (1 + f) h2(x)],
/// clamped at zero.
double closed_form_skr(double x, double delta_tau, double f_ec = kDefaultFec);

/// Ideal-source rate from its exact sifted rate x / ((1 - x)^2 dt), clamped at
/// zero.
double ideal_source_skr(double x, double delta_tau, double f_ec = kDefaultFec);

struct SiftResult {
  double n_sift = 0.0;  // Hz, matching-basis coincidences
  double qber = 0.0;
  double qber_err = 0.0;  // binomial standard error
  std::uint64_t kept = 0;
  std::uint64_t errors = 0;
  std::uint64_t coincidences = 0;  // all bases
};

/// Keeps coincidences with |t_s - t_i - offset| <= window / 2 and matching
/// bases. Throws InsufficientStatistics when none are kept.
SiftResult sift(const sim::TimeTagStream& stream, double window, double offset = 0.0);

}  // namespace qmux::qkd
