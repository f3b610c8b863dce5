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

// Monte-Carlo time tagger. Pair emissions form a Poisson process; each photon
// survives its path independently, picks up Gaussian jitter and, for BBM92
// runs, a basis and an outcome bit. Timestamps are integer picoseconds.
//
// The time axis is cut into fixed blocks, each drawn from its own RNG
// substream, so a stream depends on the seed and the config but not on the
// thread count.

#include <cstdint>
#include <string>
#include <vector>

#include "qmux/photonics.hpp"

namespace qmux::sim {

enum class Basis : std::uint8_t { none = 0, Z = 1, X = 2 };

struct Event {
  std::int64_t t_ps = 0;
  Basis basis = Basis::none;
  std::uint8_t bit = 0;
  friend bool operator==(const Event&, const Event&) = default;
};

struct SimConfig {
  double pair_rate = 0.0;  // Hz
  double eta_s = 1.0;
  double eta_i = 1.0;
  double noise_s = 0.0;  // Hz
  double noise_i = 0.0;  // Hz
  double jitter_sigma = 0.0;  // s, per photon
  double t_sim = 1.0;  // s
  std::uint64_t seed = 0;
  bool bbm92 = false;
  double bit_flip_prob = 0.0;  // idler flip among matching-basis pairs
  double block_seconds = 1e-3;
  unsigned threads = 1;  // 0: hardware concurrency
  std::uint64_t max_events = 20'000'000;

  /// Throws ConfigError.
  void validate() const;
};

/// FNV-1a over the canonical JSON form of every field that shapes the stream.
std::uint64_t config_hash(const SimConfig& cfg);

struct StreamInfo {
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
  std::string rng;
  std::int64_t duration_ps = 0;
  bool tagged = false;  // basis and bit carry meaning
  friend bool operator==(const StreamInfo&, const StreamInfo&) = default;
};

struct TimeTagStream {
  StreamInfo info;
  std::vector<Event> signal;  // strictly increasing t_ps
  std::vector<Event> idler;

  double duration_s() const { return static_cast<double>(info.duration_ps) * 1e-12; }
  friend bool operator==(const TimeTagStream&, const TimeTagStream&) = default;
};

/// Throws CapacityError when the expected event count exceeds cfg.max_events.
TimeTagStream generate_stream(const SimConfig& cfg);

/// Signal and idler exchanged.
TimeTagStream swap_sides(const TimeTagStream& stream);

struct Histogram {
  std::int64_t lo_ps = 0;  // bins [lo + k w, lo + (k + 1) w); the last is closed at hi
  std::int64_t hi_ps = 0;
  std::int64_t bin_ps = 1;
  std::vector<std::uint64_t> counts;

  std::uint64_t total() const;
  std::int64_t bin_center_ps(std::size_t k) const;
};

struct CountOptions {
  double histogram_span = 0.0;  // s, centred on the offset; 0: the window
  double histogram_bin = 0.0;   // s; 0: 100 bins over the span
  int accidental_windows = 10;  // even
};

struct CoincidenceCount {
  std::uint64_t counts = 0;  // pairs with |t_s - t_i - offset| <= window / 2
  Histogram histogram;       // of t_s - t_i
  std::vector<std::uint64_t> shifted;  // counts in the displaced windows
  double accidental_counts = 0.0;      // mean over shifted
  std::int64_t half_window_ps = 0;
  std::int64_t offset_ps = 0;
};

/// Pairs with t_s - t_i in [lo_ps, hi_ps].
std::uint64_t count_delays(const std::vector<Event>& s, const std::vector<Event>& i,
                           std::int64_t lo_ps, std::int64_t hi_ps);

/// Accidentals come from windows displaced by +-(10 + 2j) windows,
/// j = 0 .. accidental_windows / 2 - 1.
CoincidenceCount count_coincidences(const TimeTagStream& stream, double window, double offset = 0.0,
                                    const CountOptions& options = {});

struct EstimatedStats {
  photonics::CoincidenceStats stats;
  double C_err = 0.0;  // Poisson standard errors
  double A_err = 0.0;
  double car_err = 0.0;
  double visibility_err = 0.0;
  std::uint64_t raw_counts = 0;
  double accidental_counts = 0.0;
  double duration_s = 0.0;
};

/// C = raw / T - A. Throws InsufficientStatistics when no accidental is seen.
EstimatedStats estimate_stats(const TimeTagStream& stream, double window, double offset = 0.0,
                              int accidental_windows = 10);

void write_stream_csv(const TimeTagStream& stream, const std::string& path);
TimeTagStream read_stream_csv(const std::string& path);
void write_stream_binary(const TimeTagStream& stream, const std::string& path);
TimeTagStream read_stream_binary(const std::string& path);

}  // namespace qmux::sim
