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

#include "qmux/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "qmux/error.hpp"
#include "qmux/io.hpp"
#include "qmux/rng.hpp"

namespace qmux::sim {
namespace {

using json = nlohmann::json;

constexpr double kPsPerSecond = 1e12;
constexpr char kBinaryMagic[8] = {'Q', 'M', 'U', 'X', 'T', 'A', 'G', '1'};

std::int64_t to_ps(double seconds) { return std::llround(seconds * kPsPerSecond); }

struct BlockEvents {
  std::vector<Event> s;
  std::vector<Event> i;
};

Basis random_basis(Rng& rng) { return rng.bernoulli(0.5) ? Basis::X : Basis::Z; }

void add_noise(std::vector<Event>& out, double rate, double t0, double t1, bool tagged, Rng& rng) {
  if (rate <= 0.0) return;
  const double rate_ps = rate / kPsPerSecond;
  for (double t = t0 + rng.exponential(rate_ps); t < t1; t += rng.exponential(rate_ps)) {
    Event e{static_cast<std::int64_t>(std::floor(t))};
    if (tagged) {
      e.basis = random_basis(rng);
      e.bit = rng.bernoulli(0.5) ? 1 : 0;
    }
    out.push_back(e);
  }
}

BlockEvents make_block(const SimConfig& cfg, std::uint64_t block, std::int64_t block_ps,
                       std::int64_t duration_ps) {
  Rng rng(cfg.seed, block);
  BlockEvents ev;
  const double t0 = static_cast<double>(block) * static_cast<double>(block_ps);
  const double t1 = std::min(t0 + static_cast<double>(block_ps), static_cast<double>(duration_ps));
  const double jitter_ps = cfg.jitter_sigma * kPsPerSecond;
  if (cfg.pair_rate > 0.0) {
    const double rate_ps = cfg.pair_rate / kPsPerSecond;
    for (double t = t0 + rng.exponential(rate_ps); t < t1; t += rng.exponential(rate_ps)) {
      const bool keep_s = rng.bernoulli(cfg.eta_s);
      const bool keep_i = rng.bernoulli(cfg.eta_i);
      double ts = t;
      double ti = t;
      if (jitter_ps > 0.0) {
        ts += rng.normal(0.0, jitter_ps);
        ti += rng.normal(0.0, jitter_ps);
      }
      Event es{static_cast<std::int64_t>(std::floor(ts))};
      Event ei{static_cast<std::int64_t>(std::floor(ti))};
      if (cfg.bbm92) {
        es.basis = random_basis(rng);
        ei.basis = random_basis(rng);
        es.bit = rng.bernoulli(0.5) ? 1 : 0;
        if (es.basis == ei.basis)
          ei.bit = es.bit ^ (rng.bernoulli(cfg.bit_flip_prob) ? 1 : 0);
        else
          ei.bit = rng.bernoulli(0.5) ? 1 : 0;
      }
      if (keep_s) ev.s.push_back(es);
      if (keep_i) ev.i.push_back(ei);
    }
  }
  add_noise(ev.s, cfg.noise_s, t0, t1, cfg.bbm92, rng);
  add_noise(ev.i, cfg.noise_i, t0, t1, cfg.bbm92, rng);
  return ev;
}

// Sorts, drops events outside [0, T) and bumps equal timestamps so each
// detector is strictly increasing.
void finish(std::vector<Event>& v, std::int64_t duration_ps) {
  std::sort(v.begin(), v.end(), [](const Event& a, const Event& b) {
    if (a.t_ps != b.t_ps) return a.t_ps < b.t_ps;
    if (a.basis != b.basis) return a.basis < b.basis;
    return a.bit < b.bit;
  });
  std::erase_if(v, [&](const Event& e) { return e.t_ps < 0 || e.t_ps >= duration_ps; });
  for (std::size_t k = 1; k < v.size(); ++k)
    if (v[k].t_ps <= v[k - 1].t_ps) v[k].t_ps = v[k - 1].t_ps + 1;
  while (!v.empty() && v.back().t_ps >= duration_ps) v.pop_back();
}

char basis_char(Basis b) {
  switch (b) {
    case Basis::Z:
      return 'Z';
    case Basis::X:
      return 'X';
    case Basis::none:
      break;
  }
  return '-';
}

Basis basis_from_char(char c) {
  if (c == 'Z') return Basis::Z;
  if (c == 'X') return Basis::X;
  if (c == '-') return Basis::none;
  throw InputError(std::string("bad basis tag '") + c + "'");
}

json info_json(const StreamInfo& info) {
  return json{{"format", "qmux-stream"},
              {"version", 1},
              {"seed", info.seed},
              {"config_hash", io::hex64(info.config_hash)},
              {"rng", info.rng},
              {"duration_ps", info.duration_ps},
              {"tagged", info.tagged}};
}

StreamInfo info_from_json(const json& j) {
  try {
    if (j.at("format") != "qmux-stream" || j.at("version") != 1)
      throw InputError("not a version 1 qmux stream");
    StreamInfo info;
    info.seed = j.at("seed").get<std::uint64_t>();
    info.config_hash = std::stoull(j.at("config_hash").get<std::string>(), nullptr, 16);
    info.rng = j.at("rng").get<std::string>();
    info.duration_ps = j.at("duration_ps").get<std::int64_t>();
    info.tagged = j.at("tagged").get<bool>();
    return info;
  } catch (const json::exception& e) {
    throw InputError(std::string("bad stream header: ") + e.what());
  } catch (const std::logic_error& e) {
    throw InputError(std::string("bad stream header: ") + e.what());
  }
}

void check_monotone(const std::vector<Event>& v, std::int64_t duration_ps) {
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (v[k].t_ps < 0 || v[k].t_ps >= duration_ps)
      throw InputError("stream timestamp outside [0, duration)");
    if (k > 0 && v[k].t_ps <= v[k - 1].t_ps)
      throw InputError("stream timestamps are not strictly increasing");
  }
}

}  // namespace

void SimConfig::validate() const {
  auto rate = [](double v, const char* what) {
    if (!std::isfinite(v) || v < 0.0) throw ConfigError(std::string(what) + " must be finite and >= 0");
  };
  rate(pair_rate, "pair_rate");
  rate(noise_s, "noise_s");
  rate(noise_i, "noise_i");
  rate(jitter_sigma, "jitter_sigma");
  if (!(eta_s >= 0.0 && eta_s <= 1.0) || !(eta_i >= 0.0 && eta_i <= 1.0))
    throw ConfigError("efficiencies must lie in [0, 1]");
  if (!(t_sim > 0.0) || !std::isfinite(t_sim)) throw ConfigError("t_sim must be positive");
  if (!(bit_flip_prob >= 0.0 && bit_flip_prob <= 1.0))
    throw ConfigError("bit_flip_prob must lie in [0, 1]");
  if (!(block_seconds > 0.0) || to_ps(block_seconds) < 1)
    throw ConfigError("block_seconds must be at least 1 ps");
}

std::uint64_t config_hash(const SimConfig& cfg) {
  const json j{{"pair_rate", cfg.pair_rate},       {"eta_s", cfg.eta_s},
               {"eta_i", cfg.eta_i},               {"noise_s", cfg.noise_s},
               {"noise_i", cfg.noise_i},           {"jitter_sigma", cfg.jitter_sigma},
               {"t_sim", cfg.t_sim},               {"seed", cfg.seed},
               {"bbm92", cfg.bbm92},               {"bit_flip_prob", cfg.bit_flip_prob},
               {"block_seconds", cfg.block_seconds}, {"rng", kRngAlgorithm}};
  return io::fnv1a(j.dump());
}

TimeTagStream generate_stream(const SimConfig& cfg) {
  cfg.validate();
  const double expected =
      cfg.t_sim * (cfg.pair_rate * (cfg.eta_s + cfg.eta_i) + cfg.noise_s + cfg.noise_i);
  if (expected > static_cast<double>(cfg.max_events))
    throw CapacityError("expected " + std::to_string(static_cast<long long>(expected)) +
                        " events exceeds the cap of " + std::to_string(cfg.max_events));

  TimeTagStream out;
  out.info = {cfg.seed, config_hash(cfg), kRngAlgorithm, to_ps(cfg.t_sim), cfg.bbm92};
  const std::int64_t duration_ps = out.info.duration_ps;
  const std::int64_t block_ps = to_ps(cfg.block_seconds);
  const std::uint64_t n_blocks =
      static_cast<std::uint64_t>((duration_ps + block_ps - 1) / block_ps);

  std::vector<BlockEvents> blocks(n_blocks);
  unsigned threads = cfg.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : cfg.threads;
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, std::max<std::uint64_t>(n_blocks, 1)));
  auto work = [&](unsigned w) {
    for (std::uint64_t b = w; b < n_blocks; b += threads)
      blocks[b] = make_block(cfg, b, block_ps, duration_ps);
  };
  if (threads <= 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work, w);
  }

  std::size_t ns = 0;
  std::size_t ni = 0;
  for (const auto& b : blocks) {
    ns += b.s.size();
    ni += b.i.size();
  }
  out.signal.reserve(ns);
  out.idler.reserve(ni);
  for (auto& b : blocks) {
    out.signal.insert(out.signal.end(), b.s.begin(), b.s.end());
    out.idler.insert(out.idler.end(), b.i.begin(), b.i.end());
    b = {};
  }
  finish(out.signal, duration_ps);
  finish(out.idler, duration_ps);
  return out;
}

TimeTagStream swap_sides(const TimeTagStream& stream) {
  TimeTagStream out = stream;
  std::swap(out.signal, out.idler);
  return out;
}

std::uint64_t Histogram::total() const {
  std::uint64_t t = 0;
  for (auto c : counts) t += c;
  return t;
}

std::int64_t Histogram::bin_center_ps(std::size_t k) const {
  const std::int64_t a = lo_ps + static_cast<std::int64_t>(k) * bin_ps;
  const std::int64_t b = std::min(a + bin_ps, hi_ps);
  return (a + b) / 2;
}

std::uint64_t count_delays(const std::vector<Event>& s, const std::vector<Event>& i,
                           std::int64_t lo_ps, std::int64_t hi_ps) {
  std::uint64_t n = 0;
  std::size_t first = 0;
  for (const auto& e : s) {
    const std::int64_t min_ti = e.t_ps - hi_ps;
    const std::int64_t max_ti = e.t_ps - lo_ps;
    while (first < i.size() && i[first].t_ps < min_ti) ++first;
    for (std::size_t j = first; j < i.size() && i[j].t_ps <= max_ti; ++j) ++n;
  }
  return n;
}

CoincidenceCount count_coincidences(const TimeTagStream& stream, double window, double offset,
                                    const CountOptions& options) {
  if (!(window > 0.0)) throw DomainError("coincidence window must be positive");
  if (options.accidental_windows < 0 || options.accidental_windows % 2 != 0)
    throw DomainError("accidental_windows must be even and >= 0");
  CoincidenceCount out;
  const std::int64_t w = std::max<std::int64_t>(1, to_ps(window));
  out.half_window_ps = w / 2;
  out.offset_ps = to_ps(offset);

  const std::int64_t half_span =
      options.histogram_span > 0.0 ? to_ps(options.histogram_span) / 2 : out.half_window_ps;
  Histogram& h = out.histogram;
  h.lo_ps = out.offset_ps - half_span;
  h.hi_ps = out.offset_ps + half_span;
  const std::int64_t width = h.hi_ps - h.lo_ps;
  h.bin_ps = options.histogram_bin > 0.0 ? std::max<std::int64_t>(1, to_ps(options.histogram_bin))
                                         : std::max<std::int64_t>(1, width / 100);
  h.counts.assign(static_cast<std::size_t>(std::max<std::int64_t>(1, (width + h.bin_ps - 1) / h.bin_ps)),
                  0);

  const std::int64_t lo = out.offset_ps - out.half_window_ps;
  const std::int64_t hi = out.offset_ps + out.half_window_ps;
  const auto& s = stream.signal;
  const auto& id = stream.idler;
  std::size_t first_w = 0;
  std::size_t first_h = 0;
  for (const auto& e : s) {
    while (first_w < id.size() && id[first_w].t_ps < e.t_ps - hi) ++first_w;
    for (std::size_t j = first_w; j < id.size() && id[j].t_ps <= e.t_ps - lo; ++j) ++out.counts;
    while (first_h < id.size() && id[first_h].t_ps < e.t_ps - h.hi_ps) ++first_h;
    for (std::size_t j = first_h; j < id.size() && id[j].t_ps <= e.t_ps - h.lo_ps; ++j) {
      const std::int64_t d = e.t_ps - id[j].t_ps;
      const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>((d - h.lo_ps) / h.bin_ps),
                                                  h.counts.size() - 1);
      ++h.counts[k];
    }
  }

  for (int j = 0; j < options.accidental_windows / 2; ++j) {
    const std::int64_t shift = (10 + 2 * j) * w;
    for (const std::int64_t sgn : {std::int64_t{1}, std::int64_t{-1}}) {
      const std::int64_t c = out.offset_ps + sgn * shift;
      out.shifted.push_back(count_delays(s, id, c - out.half_window_ps, c + out.half_window_ps));
    }
  }
  if (!out.shifted.empty()) {
    double sum = 0.0;
    for (auto c : out.shifted) sum += static_cast<double>(c);
    out.accidental_counts = sum / static_cast<double>(out.shifted.size());
  }
  return out;
}

EstimatedStats estimate_stats(const TimeTagStream& stream, double window, double offset,
                              int accidental_windows) {
  if (accidental_windows < 2) throw DomainError("need at least two accidental windows");
  CountOptions opt;
  opt.accidental_windows = accidental_windows;
  const CoincidenceCount cc = count_coincidences(stream, window, offset, opt);
  const double t = stream.duration_s();
  if (!(t > 0.0)) throw InsufficientStatistics("stream has zero duration");
  double acc_sum = 0.0;
  for (auto c : cc.shifted) acc_sum += static_cast<double>(c);
  if (acc_sum <= 0.0) throw InsufficientStatistics("no accidental coincidences observed");

  const double k = static_cast<double>(cc.shifted.size());
  const double raw = static_cast<double>(cc.counts);
  const double a = cc.accidental_counts / t;
  const double c = std::max(0.0, raw / t - a);
  EstimatedStats e;
  e.stats = photonics::make_stats(c, a, window, static_cast<double>(stream.signal.size()) / t,
                                  static_cast<double>(stream.idler.size()) / t);
  e.A_err = std::sqrt(acc_sum) / (k * t);
  const double raw_err = std::sqrt(raw) / t;
  e.C_err = std::hypot(raw_err, e.A_err);
  e.car_err = c > 0.0 ? e.stats.car * std::hypot(e.C_err / c, e.A_err / a) : 0.0;
  // V = 1 - 2 A / (C + A) with C + A the raw rate.
  const double r = raw / t;
  e.visibility_err = r > 0.0 ? 2.0 * std::hypot(e.A_err / r, a * raw_err / (r * r)) : 0.0;
  e.raw_counts = cc.counts;
  e.accidental_counts = cc.accidental_counts;
  e.duration_s = t;
  return e;
}

void write_stream_csv(const TimeTagStream& stream, const std::string& path) {
  io::write_atomic(path, [&](std::ostream& o) {
    const json h = info_json(stream.info);
    o << "# " << h.dump() << "\n";
    o << "detector_id,timestamp_ps,basis,bit\n";
    int det = 0;
    for (const auto* side : {&stream.signal, &stream.idler}) {
      for (const auto& e : *side)
        o << det << ',' << e.t_ps << ',' << basis_char(e.basis) << ',' << int(e.bit) << '\n';
      ++det;
    }
  });
}

TimeTagStream read_stream_csv(const std::string& path) {
  std::istringstream in(io::read_file(path));
  std::string line;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0)
    throw InputError(path + ": missing stream header");
  TimeTagStream out;
  try {
    out.info = info_from_json(json::parse(line.substr(2)));
  } catch (const json::exception& e) {
    throw InputError(path + ": bad stream header: " + e.what());
  }
  if (!std::getline(in, line) || line != "detector_id,timestamp_ps,basis,bit")
    throw InputError(path + ": missing column header");
  std::size_t lineno = 2;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    int det = -1;
    long long t = 0;
    char basis = 0;
    int bit = -1;
    if (std::sscanf(line.c_str(), "%d,%lld,%c,%d", &det, &t, &basis, &bit) != 4 ||
        (det != 0 && det != 1) || (bit != 0 && bit != 1))
      throw InputError(path + ":" + std::to_string(lineno) + ": malformed event");
    Event e{t, basis_from_char(basis), static_cast<std::uint8_t>(bit)};
    (det == 0 ? out.signal : out.idler).push_back(e);
  }
  check_monotone(out.signal, out.info.duration_ps);
  check_monotone(out.idler, out.info.duration_ps);
  return out;
}

namespace {

template <class T>
void put(std::ostream& o, T v) {
  unsigned char b[sizeof(T)];
  for (std::size_t k = 0; k < sizeof(T); ++k) b[k] = static_cast<unsigned char>((static_cast<std::uint64_t>(v) >> (8 * k)) & 0xff);
  o.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <class T>
T get(const std::string& buf, std::size_t& pos) {
  if (pos + sizeof(T) > buf.size()) throw InputError("truncated binary stream");
  std::uint64_t v = 0;
  for (std::size_t k = 0; k < sizeof(T); ++k)
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[pos + k])) << (8 * k);
  pos += sizeof(T);
  return static_cast<T>(v);
}

}  // namespace

// Layout: magic, u32 header length, JSON header, then per detector a u64
// count followed by the timestamp, basis and bit columns. Little endian.
void write_stream_binary(const TimeTagStream& stream, const std::string& path) {
  io::write_atomic(
      path,
      [&](std::ostream& o) {
        o.write(kBinaryMagic, sizeof kBinaryMagic);
        const std::string h = info_json(stream.info).dump();
        put<std::uint32_t>(o, static_cast<std::uint32_t>(h.size()));
        o << h;
        for (const auto* side : {&stream.signal, &stream.idler}) {
          put<std::uint64_t>(o, side->size());
          for (const auto& e : *side) put<std::int64_t>(o, e.t_ps);
          for (const auto& e : *side) put<std::uint8_t>(o, static_cast<std::uint8_t>(e.basis));
          for (const auto& e : *side) put<std::uint8_t>(o, e.bit);
        }
      },
      true);
}

TimeTagStream read_stream_binary(const std::string& path) {
  const std::string buf = io::read_file(path);
  if (buf.size() < sizeof kBinaryMagic || std::memcmp(buf.data(), kBinaryMagic, sizeof kBinaryMagic) != 0)
    throw InputError(path + ": not a qmux binary stream");
  std::size_t pos = sizeof kBinaryMagic;
  const auto hlen = get<std::uint32_t>(buf, pos);
  if (pos + hlen > buf.size()) throw InputError(path + ": truncated header");
  TimeTagStream out;
  try {
    out.info = info_from_json(json::parse(buf.substr(pos, hlen)));
  } catch (const json::exception& e) {
    throw InputError(path + ": bad stream header: " + e.what());
  }
  pos += hlen;
  for (auto* side : {&out.signal, &out.idler}) {
    const auto n = get<std::uint64_t>(buf, pos);
    if (n > (buf.size() - pos) / 10) throw InputError(path + ": truncated event columns");
    side->resize(n);
    for (auto& e : *side) e.t_ps = get<std::int64_t>(buf, pos);
    for (auto& e : *side) {
      const auto b = get<std::uint8_t>(buf, pos);
      if (b > 2) throw InputError(path + ": bad basis tag");
      e.basis = static_cast<Basis>(b);
    }
    for (auto& e : *side) {
      e.bit = get<std::uint8_t>(buf, pos);
      if (e.bit > 1) throw InputError(path + ": bad bit");
    }
  }
  if (pos != buf.size()) throw InputError(path + ": trailing bytes");
  check_monotone(out.signal, out.info.duration_ps);
  check_monotone(out.idler, out.info.duration_ps);
  return out;
}

}  // namespace qmux::sim
