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

#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "qmux/error.hpp"
#include "qmux/photonics.hpp"
#include "qmux/qkd.hpp"
#include "qmux/sim.hpp"

using namespace qmux;
using namespace qmux::sim;

namespace {

SimConfig base(double rate, double t) {
  SimConfig c;
  c.pair_rate = rate;
  c.t_sim = t;
  c.seed = 99;
  return c;
}

bool increasing_in_range(const std::vector<Event>& v, std::int64_t end) {
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (v[k].t_ps < 0 || v[k].t_ps >= end) return false;
    if (k > 0 && v[k].t_ps <= v[k - 1].t_ps) return false;
  }
  return true;
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "qmux_sim_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

// |Poisson estimate - expectation| in standard deviations.
double sigmas(double observed, double expected) { return std::abs(observed - expected) / std::sqrt(expected); }

}  // namespace

TEST_CASE("config validation") {
  auto c = base(1e5, 0.01);
  CHECK_NOTHROW(c.validate());
  c.t_sim = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = base(1e5, 0.01);
  c.eta_s = 1.5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = base(-1.0, 0.01);
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = base(1e5, 0.01);
  c.bit_flip_prob = 1.5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = base(1e9, 1.0);
  CHECK_THROWS_AS(generate_stream(c), CapacityError);
}

TEST_CASE("streams are ordered and bounded") {
  auto c = base(2e5, 0.05);
  c.noise_s = 1e5;
  c.noise_i = 5e4;
  c.jitter_sigma = 100e-12;
  c.eta_s = 0.6;
  const auto s = generate_stream(c);
  CHECK(s.info.duration_ps == 50'000'000'000);
  CHECK(increasing_in_range(s.signal, s.info.duration_ps));
  CHECK(increasing_in_range(s.idler, s.info.duration_ps));
}

TEST_CASE("determinism across seeds and threads") {
  auto c = base(3e5, 0.02);
  c.noise_s = 1e4;
  c.jitter_sigma = 50e-12;
  c.bbm92 = true;
  c.bit_flip_prob = 0.1;
  c.threads = 1;
  const auto a = generate_stream(c);
  c.threads = 4;
  const auto b = generate_stream(c);
  CHECK(a == b);
  c.threads = 0;
  CHECK(generate_stream(c) == a);
  c.seed = 100;
  CHECK_FALSE(generate_stream(c) == a);
  auto d = c;
  d.threads = 7;
  CHECK(config_hash(c) == config_hash(d));
  d.eta_i = 0.9;
  CHECK(config_hash(c) != config_hash(d));
}

TEST_CASE("poisson counts match their rates") {
  auto c = base(0.0, 1.0);
  c.noise_s = 1e5;
  c.noise_i = 2e4;
  const auto s = generate_stream(c);
  CHECK(sigmas(static_cast<double>(s.signal.size()), 1e5) < 5.0);
  CHECK(sigmas(static_cast<double>(s.idler.size()), 2e4) < 5.0);

  auto p = base(1e5, 1.0);
  p.eta_s = 0.3;
  p.eta_i = 0.7;
  const auto q = generate_stream(p);
  CHECK(sigmas(static_cast<double>(q.signal.size()), 3e4) < 5.0);
  CHECK(sigmas(static_cast<double>(q.idler.size()), 7e4) < 5.0);
  const auto cc = count_coincidences(q, 1e-9);
  CHECK(sigmas(static_cast<double>(cc.counts), 0.21e5) < 5.0);
}

TEST_CASE("lossless jitter-free pairs coincide exactly") {
  const auto s = generate_stream(base(5e4, 0.1));
  CHECK(s.signal.size() == s.idler.size());
  const auto cc = count_coincidences(s, 10e-12);
  CHECK(cc.counts == s.signal.size());
}

TEST_CASE("histogram integrates to the coincidence count") {
  auto c = base(2e5, 0.1);
  c.jitter_sigma = 200e-12;
  c.noise_s = c.noise_i = 1e5;
  const auto s = generate_stream(c);
  const auto cc = count_coincidences(s, 1e-9);
  CHECK(cc.histogram.total() == cc.counts);
  CHECK(cc.histogram.counts.size() == 100);
  CHECK(cc.shifted.size() == 10);
  CountOptions wide;
  wide.histogram_span = 4e-9;
  wide.histogram_bin = 50e-12;
  const auto w = count_coincidences(s, 1e-9, 0.0, wide);
  CHECK(w.histogram.total() == count_delays(s.signal, s.idler, -2000, 2000));
  CHECK(w.counts == cc.counts);
}

TEST_CASE("gaussian jitter fraction inside the window") {
  auto c = base(1e5, 1.0);
  c.jitter_sigma = 300e-12;
  const auto s = generate_stream(c);
  const double w = 1e-9;
  const auto cc = count_coincidences(s, w);
  // delta = j_s - j_i is normal with sd sqrt(2) sigma
  const double frac = std::erf((w / 2) / (2.0 * c.jitter_sigma));
  const double expected = frac * static_cast<double>(s.signal.size());
  CHECK(sigmas(static_cast<double>(cc.counts), expected) < 5.0);
}

TEST_CASE("swapping sides mirrors the delay") {
  auto c = base(1e5, 0.05);
  c.jitter_sigma = 100e-12;
  c.noise_s = 2e5;
  const auto s = generate_stream(c);
  const auto t = swap_sides(s);
  CHECK(t.signal == s.idler);
  CHECK(t.idler == s.signal);
  CHECK(count_coincidences(s, 1e-9, 300e-12).counts == count_coincidences(t, 1e-9, -300e-12).counts);
  CHECK(count_delays(s.signal, s.idler, -100, 700) == count_delays(t.signal, t.idler, -700, 100));
}

TEST_CASE("estimated stats agree with the link model") {
  for (double eta : {1.0, 0.5}) {
    const double dt = 2e-9;
    const double nbar = 0.02;
    photonics::SourceParams p;
    p.coef_degenerate = nbar / dt;  // P = 1 mW gives nbar / dt pairs/s
    p.delta_tau = dt;
    const auto model = photonics::link_stats(p, 1.0, 1.0, grid::ProcessKind::degenerate, eta, eta);
    auto c = base(nbar / dt, 0.02);
    c.eta_s = c.eta_i = eta;
    const auto est = estimate_stats(generate_stream(c), dt);
    CHECK(std::abs(est.stats.C - model.C) < 5.0 * est.C_err);
    CHECK(std::abs(est.stats.A - model.A) < 5.0 * est.A_err);
    CHECK(std::abs(est.stats.car - model.car) < 5.0 * est.car_err);
  }
}

TEST_CASE("estimate needs accidentals") {
  const auto s = generate_stream(base(1e3, 0.01));
  CHECK_THROWS_AS(estimate_stats(s, 1e-9), InsufficientStatistics);
}

TEST_CASE("bbm92 tags flip bits at the configured rate") {
  auto c = base(2e5, 0.5);
  c.bbm92 = true;
  c.bit_flip_prob = 0.1;
  const auto s = generate_stream(c);
  CHECK(s.info.tagged);
  const auto r = qkd::sift(s, 1e-9);
  CHECK(std::abs(r.qber - 0.1) < 5.0 * r.qber_err);
  CHECK(sigmas(r.n_sift * c.t_sim, 0.5 * c.pair_rate * c.t_sim) < 5.0);
}

TEST_CASE("stream files round trip") {
  auto c = base(5e4, 0.01);
  c.bbm92 = true;
  c.noise_s = 1e4;
  const auto s = generate_stream(c);
  const auto bin = scratch("s.bin").string();
  const auto csv = scratch("s.csv").string();
  write_stream_binary(s, bin);
  write_stream_csv(s, csv);
  CHECK(read_stream_binary(bin) == s);
  CHECK(read_stream_csv(csv) == s);

  std::ofstream(scratch("bad.bin").string(), std::ios::binary) << "QMUXTAG0garbage";
  CHECK_THROWS_AS(read_stream_binary(scratch("bad.bin").string()), InputError);
  std::ofstream(scratch("bad.csv").string()) << "#{}\ndetector_id,timestamp_ps,basis,bit\n0,abc,Z,1\n";
  CHECK_THROWS_AS(read_stream_csv(scratch("bad.csv").string()), InputError);
  CHECK_THROWS_AS(read_stream_csv(scratch("missing.csv").string()), InputError);
}
