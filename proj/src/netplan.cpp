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

#include "qmux/netplan.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qmux/error.hpp"

namespace qmux::netplan {
namespace {

double sum_db(const std::map<std::string, double>& m) {
  double s = 0.0;
  for (const auto& [k, v] : m) s += v;
  return s;
}

void check_pumps(const alloc::PairingGraph& graph, const grid::PumpConfig& pumps) {
  if (graph.pumps().labels() != pumps.labels())
    throw ConfigError("pump labels differ from the pairing graph's pumps");
}

void check_plan(const alloc::AllocationPlan& plan, const alloc::PairingGraph& graph) {
  const auto r = alloc::verify_plan(plan, graph, static_cast<int>(plan.users.size()));
  if (r.valid) return;
  std::string why;
  if (!r.shared_channels.empty()) why += " shared channels;";
  if (!r.unknown_channels.empty()) why += " channels outside the graph;";
  for (const auto& [u, v] : r.missing_pairs)
    why += " " + plan.users[u].name + "&" + plan.users[v].name + " has no channel pair;";
  for (const auto& b : r.bad_links) why += " " + b + ";";
  throw PlanInvalid("plan does not verify:" + why);
}

struct RowRef {
  int u;
  int v;
  const alloc::Edge* edge;
  int ch_u;
  int ch_v;
};

std::vector<RowRef> row_refs(const alloc::AllocationPlan& plan) {
  std::vector<RowRef> out;
  for (const auto& link : plan.links) {
    const auto& su = plan.users[link.u].channels;
    std::vector<RowRef> rows;
    for (const auto& e : link.edges) {
      const bool a_in_u = std::find(su.begin(), su.end(), e.a) != su.end();
      rows.push_back({link.u, link.v, &e, a_in_u ? e.a : e.b, a_in_u ? e.b : e.a});
    }
    std::sort(rows.begin(), rows.end(), [](const RowRef& x, const RowRef& y) {
      return std::pair(x.ch_u, x.ch_v) < std::pair(y.ch_u, y.ch_v);
    });
    out.insert(out.end(), rows.begin(), rows.end());
  }
  return out;
}

double window_of(const photonics::SourceParams& source, const EvalOptions& o) {
  const double w = o.window > 0.0 ? o.window : source.delta_tau;
  if (!(w > 0.0)) throw ConfigError("coincidence window must be positive");
  return w;
}

}  // namespace

double transmission(double loss_db) {
  if (!(loss_db >= 0.0) || !std::isfinite(loss_db)) throw DomainError("loss must be finite and >= 0 dB");
  return std::pow(10.0, -loss_db / 10.0);
}

double apply_losses(double rate, double loss_db) { return rate * transmission(loss_db); }

double LinkBudget::path_db(const std::string& user, int channel) const {
  double db = sum_db(common_db);
  auto c = channel_db.find(channel);
  db += c != channel_db.end() ? c->second : default_channel_db;
  auto u = user_db.find(user);
  db += sum_db(u != user_db.end() ? u->second : default_user_db);
  return db;
}

double LinkBudget::eta(const std::string& user, int channel) const {
  return transmission(path_db(user, channel));
}

void LinkBudget::validate() const {
  auto check = [](double v, const std::string& what) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("loss '" + what + "' must be >= 0 dB");
  };
  for (const auto& [k, v] : common_db) check(v, k);
  for (const auto& [k, v] : channel_db) check(v, "C" + std::to_string(k));
  check(default_channel_db, "default channel");
  for (const auto& [u, m] : user_db)
    for (const auto& [k, v] : m) check(v, u + "/" + k);
  for (const auto& [k, v] : default_user_db) check(v, "default user/" + k);
}

std::string to_string(EvalMode mode) {
  return mode == EvalMode::predictive ? "predictive" : "calibrated";
}

EvalMode eval_mode_from_string(const std::string& s) {
  if (s == "predictive") return EvalMode::predictive;
  if (s == "calibrated") return EvalMode::calibrated;
  throw ConfigError("unknown evaluation mode '" + s + "'");
}

std::vector<double> user_singles(const alloc::AllocationPlan& plan, const alloc::PairingGraph& graph,
                                 const photonics::SourceParams& source, const LinkBudget& budget,
                                 const grid::PumpConfig& pumps) {
  const double p_total = pumps.total_power_mw();
  std::vector<double> out;
  for (const auto& u : plan.users) {
    double s = source.dark;
    for (int c : u.channels) {
      const int idx = graph.index_of(c);
      if (idx < 0) throw PlanInvalid("channel " + std::to_string(c) + " is not in the graph");
      double pairs = 0.0;
      for (int j : graph.neighbors(idx)) {
        const int p = graph.vertices()[j];
        const alloc::Edge* e = graph.find_edge(c, p);
        pairs += photonics::pair_rate(source, c, p, e->sources, pumps);
      }
      s += budget.eta(u.name, c) * pairs + source.noise_coefficient(c) * p_total;
    }
    out.push_back(s);
  }
  return out;
}

NetworkReport evaluate_network(const alloc::AllocationPlan& plan, const alloc::PairingGraph& graph,
                               const photonics::SourceParams& source, const LinkBudget& budget,
                               const grid::PumpConfig& pumps, const EvalOptions& options) {
  source.validate();
  budget.validate();
  check_pumps(graph, pumps);
  check_plan(plan, graph);
  const double window = window_of(source, options);

  NetworkReport rep;
  rep.meta.source = source.name;
  rep.meta.mode = to_string(options.mode);
  rep.meta.pump_labels = pumps.labels();
  rep.meta.pump_powers_mw = pumps.powers_mw();
  rep.meta.window = window;
  rep.meta.f_ec = options.f_ec;

  std::vector<double> singles;
  if (options.mode == EvalMode::predictive)
    singles = user_singles(plan, graph, source, budget, pumps);

  for (const auto& r : row_refs(plan)) {
    ReportRow row;
    row.user_a = plan.users[r.u].name;
    row.user_b = plan.users[r.v].name;
    row.channel_a = r.ch_u;
    row.channel_b = r.ch_v;
    row.kind = r.edge->kind;
    if (options.mode == EvalMode::predictive) {
      const double rate = photonics::pair_rate(source, r.edge->a, r.edge->b, r.edge->sources, pumps);
      const auto st = photonics::make_stats(
          budget.eta(row.user_a, r.ch_u) * budget.eta(row.user_b, r.ch_v) * rate,
          singles[r.u] * singles[r.v] * window, window, singles[r.u], singles[r.v]);
      row.C = st.C;
      row.A = st.A;
      row.singles_a = st.singles_s;
      row.singles_b = st.singles_i;
      row.n_sift = 0.5 * (st.C + st.A);
      row.qber = std::min(st.qber(), 0.5);
      row.visibility = 1.0 - 2.0 * row.qber;
    } else {
      const photonics::MeasuredRow* m = source.measured_row(r.ch_u, r.ch_v);
      if (m == nullptr)
        throw ConfigError("source '" + source.name + "' has no measurement for C" +
                          std::to_string(r.ch_u) + "&C" + std::to_string(r.ch_v));
      row.n_sift = m->n_sift_hz;
      row.qber = m->qber;
      row.visibility = 1.0 - 2.0 * row.qber;
      row.C = row.n_sift * (1.0 + row.visibility);
      row.A = row.n_sift * (1.0 - row.visibility);
    }
    const auto k = qkd::skr({row.n_sift, row.qber, options.f_ec});
    row.skr = k.skr;
    row.secure = k.secure;
    row.margin = k.margin;
    rep.rows.push_back(row);
  }
  for (const auto& row : rep.rows) {
    rep.total_skr += row.skr;
    if (row.secure) ++rep.secure_rows;
    else
      rep.warnings.push_back(row.user_a + "&" + row.user_b + " C" + std::to_string(row.channel_a) +
                             "&C" + std::to_string(row.channel_b) + " is not secure");
  }
  if (!rep.rows.empty() && rep.secure_rows == 0) rep.warnings.push_back("no secure link");
  return rep;
}

std::string to_string(Objective objective) {
  return objective == Objective::total ? "total" : "min-link";
}

Objective objective_from_string(const std::string& s) {
  if (s == "total") return Objective::total;
  if (s == "min-link") return Objective::min_link;
  throw ConfigError("unknown objective '" + s + "'");
}

ScanPoint evaluate_power(const alloc::AllocationPlan& plan, const alloc::PairingGraph& graph,
                         const photonics::SourceParams& source, const LinkBudget& budget,
                         const grid::PumpConfig& pumps, double power_mw, const OptimizeOptions& options) {
  const auto p = pumps.with_equal_power(power_mw);
  const auto rep = evaluate_network(plan, graph, source, budget, p, options.eval);
  ScanPoint pt;
  pt.power_mw = power_mw;
  pt.total = rep.total_skr;
  for (const auto& r : rep.rows) {
    pt.qber.push_back(r.qber);
    pt.skr.push_back(r.skr);
  }
  if (options.eval.mode == EvalMode::predictive) {
    const double window = window_of(source, options.eval);
    for (const auto& link : plan.links)
      for (const auto& e : link.edges)
        if (photonics::pair_rate(source, e.a, e.b, e.sources, p) * window >= 1.0) pt.feasible = false;
  }
  if (!pt.feasible) return pt;
  if (options.objective == Objective::total) {
    pt.objective = pt.total;
  } else {
    std::map<std::pair<std::string, std::string>, double> per_link;
    for (const auto& link : plan.links) per_link[{plan.users[link.u].name, plan.users[link.v].name}] = 0.0;
    for (const auto& r : rep.rows) per_link[{r.user_a, r.user_b}] += r.skr;
    pt.objective = std::numeric_limits<double>::infinity();
    for (const auto& [k, v] : per_link) pt.objective = std::min(pt.objective, v);
    if (per_link.empty()) pt.objective = 0.0;
  }
  return pt;
}

OptimizeResult optimize_pump_power(const alloc::AllocationPlan& plan, const alloc::PairingGraph& graph,
                                   const photonics::SourceParams& source, const LinkBudget& budget,
                                   const grid::PumpConfig& pumps, const OptimizeOptions& requested) {
  OptimizeOptions options = requested;
  options.eval.mode = EvalMode::predictive;
  const double lo = options.p_min_mw;
  const double hi = options.p_max_mw;
  if (!(lo > 0.0) || !(hi > lo) || !std::isfinite(hi))
    throw ConfigError("power range must satisfy 0 < p_min < p_max");
  if (options.scan_points < 3) throw ConfigError("scan needs at least three points");
  if (!(options.tolerance_mw > 0.0)) throw ConfigError("tolerance must be positive");

  OptimizeResult res;
  const int n = options.scan_points;
  for (int k = 0; k < n; ++k) {
    const double p = lo + (hi - lo) * k / (n - 1);
    res.curve.push_back(evaluate_power(plan, graph, source, budget, pumps, p, options));
  }
  int best = 0;
  for (int k = 1; k < n; ++k)
    if (res.curve[k].objective > res.curve[best].objective) best = k;
  if (!(res.curve[best].objective > 0.0))
    throw NoSecurePower("objective '" + to_string(options.objective) + "' is zero for every power in [" +
                        std::to_string(lo) + ", " + std::to_string(hi) + "] mW");

  auto f = [&](double p) { return evaluate_power(plan, graph, source, budget, pumps, p, options).objective; };
  double a = res.curve[std::max(best - 1, 0)].power_mw;
  double b = res.curve[std::min(best + 1, n - 1)].power_mw;
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - g * (b - a);
  double x2 = a + g * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  while (b - a > options.tolerance_mw) {
    if (f1 >= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = f(x2);
    }
  }
  double p_star = res.curve[best].power_mw;
  double f_star = res.curve[best].objective;
  for (double p : {a, b, 0.5 * (a + b)}) {
    const double v = f(p);
    if (v > f_star) {
      f_star = v;
      p_star = p;
    }
  }
  auto all_secure = [&](const ScanPoint& pt) {
    if (!pt.feasible || pt.skr.empty()) return false;
    return std::all_of(pt.skr.begin(), pt.skr.end(), [](double v) { return v > 0.0; });
  };
  int last = -1;
  for (int k = 0; k < n; ++k)
    if (all_secure(res.curve[k])) last = k;
  if (last >= 0) {
    double ok = res.curve[last].power_mw;
    if (last + 1 < n) {
      double bad = res.curve[last + 1].power_mw;
      while (bad - ok > options.tolerance_mw) {
        const double mid = 0.5 * (ok + bad);
        (all_secure(evaluate_power(plan, graph, source, budget, pumps, mid, options)) ? ok : bad) = mid;
      }
    }
    res.p_secure_max_mw = ok;
  }
  res.p_star_mw = p_star;
  res.objective = f_star;
  res.report = evaluate_network(plan, graph, source, budget, pumps.with_equal_power(p_star), options.eval);
  return res;
}

std::vector<SchemeRow> compare_schemes(int n_users, const grid::FrequencyGrid& band,
                                       const std::vector<grid::PumpConfig>& pumps_list,
                                       const CompareOptions& options) {
  const int baseline = alloc::baseline_channel_count(n_users);
  std::vector<SchemeRow> out;
  for (const auto& pumps : pumps_list) {
    const auto graph = alloc::build_pairing_graph(band, pumps);
    const auto sol = alloc::solve_allocation(graph, n_users, options.solve);
    SchemeRow row;
    row.pumps = pumps.labels();
    row.users = n_users;
    row.channels = sol.plan.total_channels();
    row.baseline = baseline;
    row.savings = baseline - row.channels;
    row.lower_bound = sol.lower_bound;
    row.optimal = sol.optimal;
    row.plan = sol.plan;
    if (options.source != nullptr && options.budget != nullptr) {
      EvalOptions eo = options.eval;
      eo.mode = EvalMode::predictive;
      row.total_skr = evaluate_network(sol.plan, graph, *options.source, *options.budget, pumps, eo).total_skr;
    }
    out.push_back(std::move(row));
  }
  return out;
}

photonics::SourceParams calibrate_source(const std::vector<CalibrationRow>& rows,
                                         const std::vector<alloc::UserChannels>& users,
                                         const alloc::PairingGraph& graph, const LinkBudget& budget,
                                         const grid::PumpConfig& pumps, double delta_tau, double dark_hz,
                                         CalibrationReport* report) {
  if (rows.empty()) throw InputError("calibration needs at least one measured row");
  if (!(delta_tau > 0.0)) throw InputError("delta_tau must be positive");
  std::map<int, int> owner;
  for (std::size_t u = 0; u < users.size(); ++u)
    for (int c : users[u].channels) owner[c] = static_cast<int>(u);

  photonics::SourceParams src;
  src.delta_tau = delta_tau;
  src.dark = dark_hz;
  src.reference_power_mw = pumps.powers_mw().front();

  struct Fit {
    int u, v;
    double log_a;  // log of the measured accidentals
  };
  std::vector<Fit> fits;
  double sum_deg = 0.0;
  double sum_non = 0.0;
  int n_deg = 0;
  int n_non = 0;
  for (const auto& r : rows) {
    const alloc::Edge* e = graph.find_edge(r.channel_a, r.channel_b);
    if (e == nullptr)
      throw InputError("C" + std::to_string(r.channel_a) + "&C" + std::to_string(r.channel_b) +
                       " is not a channel pair of the graph");
    if (!owner.count(r.channel_a) || !owner.count(r.channel_b))
      throw InputError("calibration row uses a channel no user holds");
    const int u = owner[r.channel_a];
    const int v = owner[r.channel_b];
    const double c = r.n_sift_hz * (1.0 + r.visibility);
    const double a = r.n_sift_hz * (1.0 - r.visibility);
    if (!(c > 0.0) || !(a > 0.0)) throw InputError("calibration rows need 0 < V < 1 and n_sift > 0");
    const double eta2 = budget.eta(users[u].name, r.channel_a) * budget.eta(users[v].name, r.channel_b);
    double p_eff = 0.0;
    for (const auto& s : e->sources) p_eff += pumps.powers_mw()[s.first] * pumps.powers_mw()[s.second];
    const double coef = c / eta2 / p_eff;
    src.pair_coef[{std::min(r.channel_a, r.channel_b), std::max(r.channel_a, r.channel_b)}] = coef;
    if (e->kind == grid::ProcessKind::degenerate) {
      sum_deg += coef;
      ++n_deg;
    } else {
      sum_non += coef;
      ++n_non;
    }
    src.measured[{std::min(r.channel_a, r.channel_b), std::max(r.channel_a, r.channel_b)}] = {
        r.n_sift_hz, r.visibility, r.qber};
    fits.push_back({u, v, std::log(a)});
  }
  const double mean_deg = n_deg ? sum_deg / n_deg : sum_non / n_non;
  const double mean_non = n_non ? sum_non / n_non : sum_deg / n_deg;
  src.coef_degenerate = mean_deg;
  src.coef_non_degenerate = mean_non;

  // Pair-photon singles per user with the noise still zero.
  alloc::AllocationPlan partial;
  partial.users = users;
  const std::vector<double> base = user_singles(partial, graph, src, budget, pumps);

  // log A = y_u + y_v + log dt with y = log S and S >= base: a box-constrained
  // linear least-squares problem in y, solved by coordinate descent.
  const std::size_t nu = users.size();
  std::vector<double> lb(nu);
  std::vector<double> y(nu);
  for (std::size_t u = 0; u < nu; ++u) y[u] = lb[u] = std::log(base[u]);
  const double log_dt = std::log(delta_tau);
  for (int sweep = 0; sweep < 100000; ++sweep) {
    double change = 0.0;
    for (std::size_t u = 0; u < nu; ++u) {
      double s = 0.0;
      int k = 0;
      for (const auto& f : fits) {
        if (f.u == static_cast<int>(u)) s += f.log_a - log_dt - y[f.v], ++k;
        else if (f.v == static_cast<int>(u)) s += f.log_a - log_dt - y[f.u], ++k;
      }
      if (k == 0) continue;
      const double nyu = std::max(lb[u], s / k);
      change = std::max(change, std::abs(nyu - y[u]));
      y[u] = nyu;
    }
    if (change < 1e-15) break;
  }
  CalibrationReport rep;
  const double p_total = pumps.total_power_mw();
  for (std::size_t u = 0; u < nu; ++u) {
    const double noise = std::max(0.0, std::exp(y[u]) - base[u]);
    rep.user_noise_hz[users[u].name] = noise;
    for (int c : users[u].channels)
      src.channel_noise_lin[c] = noise / p_total / static_cast<double>(users[u].channels.size());
  }
  double ss = 0.0;
  for (const auto& f : fits) {
    const double r = y[f.u] + y[f.v] + log_dt - f.log_a;
    ss += r * r;
  }
  rep.residual = std::sqrt(ss / static_cast<double>(fits.size()));
  if (report != nullptr) *report = rep;
  return src;
}

}  // namespace qmux::netplan
