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

// Allocation search. Three stages share one internal representation, an
// owner per graph vertex (-1 = unused):
//   construct()  greedy coverage rule
//   refine()     annealing of user labels over graph-local channel pools,
//                for a fixed channel budget
//   ExactSearch  branch and bound over budgets, channels in ascending label
//                order, users introduced in order of first channel
// All stages are deterministic for fixed options.

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <optional>
#include <set>

#include "qmux/alloc.hpp"
#include "qmux/error.hpp"
#include "qmux/rng.hpp"

namespace qmux::alloc {
namespace {

using Owners = std::vector<int>;

struct Problem {
  const PairingGraph& graph;
  int n_users;
  int n_vertices;
  int max_degree;
  int need;  // lower bound on channels per user
  std::vector<int> pin;  // per vertex: internal user index or -1
  int pinned_users;      // internal users [0, pinned_users) carry pins
  std::vector<int> external_of_pinned;
  std::vector<double> weight;  // per vertex
};

Problem make_problem(const PairingGraph& g, int n_users, const SolveOptions& opt) {
  Problem p{g, n_users, static_cast<int>(g.size()), g.max_degree(), 0, {}, 0, {}, {}};
  p.need = (n_users <= 1 || p.max_degree == 0)
               ? 0
               : (n_users - 1 + p.max_degree - 1) / p.max_degree;
  p.pin.assign(p.n_vertices, -1);
  p.weight.assign(p.n_vertices, 0.0);
  for (const auto& [label, w] : opt.weights) {
    const int i = g.index_of(label);
    if (i >= 0) p.weight[i] = w;
  }
  std::map<int, int> internal;  // external user -> internal
  for (const auto& [label, user] : opt.pinned) {
    if (user < 0 || user >= n_users)
      throw InputError("pinned channel " + std::to_string(label) + " names user " +
                       std::to_string(user) + " outside [0, N)");
    const int i = g.index_of(label);
    if (i < 0) throw ChannelExcluded(label);
    internal.emplace(user, 0);
  }
  int k = 0;
  for (auto& [ext, in] : internal) {
    in = k++;
    p.external_of_pinned.push_back(ext);
  }
  p.pinned_users = k;
  for (const auto& [label, user] : opt.pinned) p.pin[g.index_of(label)] = internal[user];
  return p;
}

// Edge counts between users plus the number of uncovered pairs.
class Coverage {
 public:
  explicit Coverage(int n_users)
      : n_(n_users), cnt_(static_cast<std::size_t>(n_users) * n_users, 0),
        uncovered_(n_users * (n_users - 1) / 2) {}

  void add(int u, int w) {
    if (u == w || u < 0 || w < 0) return;
    if (cnt_[u * n_ + w]++ == 0) --uncovered_;
    ++cnt_[w * n_ + u];
  }
  void remove(int u, int w) {
    if (u == w || u < 0 || w < 0) return;
    if (--cnt_[u * n_ + w] == 0) ++uncovered_;
    --cnt_[w * n_ + u];
  }
  bool covered(int u, int w) const { return cnt_[u * n_ + w] > 0; }
  int uncovered() const { return uncovered_; }
  int missing_of(int u) const {
    int m = 0;
    for (int w = 0; w < n_; ++w)
      if (w != u && cnt_[u * n_ + w] == 0) ++m;
    return m;
  }

 private:
  int n_;
  std::vector<int> cnt_;
  int uncovered_;
};

Coverage coverage_of(const Problem& p, const Owners& own) {
  Coverage cov(p.n_users);
  for (int i = 0; i < p.n_vertices; ++i) {
    if (own[i] < 0) continue;
    for (int j : p.graph.neighbors(i))
      if (j > i) cov.add(own[i], own[j]);
  }
  return cov;
}

bool all_users_present(const Problem& p, const Owners& own) {
  std::vector<char> seen(p.n_users, 0);
  for (int o : own)
    if (o >= 0) seen[o] = 1;
  return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
}

Owners pinned_owners(const Problem& p) { return p.pin; }

// Drops channels that are not needed for full coverage, heaviest and then
// highest label first. Pinned channels stay.
void prune(const Problem& p, Owners& own) {
  std::vector<int> order;
  for (int i = 0; i < p.n_vertices; ++i)
    if (own[i] >= 0 && p.pin[i] < 0) order.push_back(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (p.weight[a] != p.weight[b]) return p.weight[a] > p.weight[b];
    return a > b;
  });
  for (int i : order) {
    const int u = own[i];
    own[i] = -1;
    if (coverage_of(p, own).uncovered() != 0 || !all_users_present(p, own)) own[i] = u;
  }
}

std::optional<Owners> construct(const Problem& p) {
  Owners own = pinned_owners(p);
  Coverage cov = coverage_of(p, own);
  const auto& g = p.graph;
  while (cov.uncovered() > 0) {
    int best_gain = 0;
    int best_c = -1;
    int best_u = -1;
    std::vector<int> missing(p.n_users);
    for (int u = 0; u < p.n_users; ++u) missing[u] = cov.missing_of(u);
    for (int c = 0; c < p.n_vertices; ++c) {
      if (own[c] >= 0) continue;
      for (int u = 0; u < p.n_users; ++u) {
        std::set<int> newly;
        for (int j : g.neighbors(c)) {
          const int w = own[j];
          if (w >= 0 && w != u && !cov.covered(u, w)) newly.insert(w);
        }
        const int gain = static_cast<int>(newly.size());
        if (gain == 0) continue;
        bool better = gain > best_gain;
        if (!better && gain == best_gain && best_c >= 0) {
          if (c == best_c) {
            better = missing[u] > missing[best_u];
          } else if (p.weight[c] != p.weight[best_c]) {
            better = p.weight[c] < p.weight[best_c];
          }
        }
        if (better) {
          best_gain = gain;
          best_c = c;
          best_u = u;
        }
      }
    }
    if (best_c >= 0) {
      own[best_c] = best_u;
      for (int j : g.neighbors(best_c)) cov.add(best_u, own[j]);
      continue;
    }
    // Nothing extends coverage: open a fresh edge for the uncovered pair
    // whose users miss the most links.
    int su = -1;
    int sv = -1;
    for (int u = 0; u < p.n_users; ++u)
      for (int v = u + 1; v < p.n_users; ++v)
        if (!cov.covered(u, v) &&
            (su < 0 || missing[u] + missing[v] > missing[su] + missing[sv])) {
          su = u;
          sv = v;
        }
    bool placed = false;
    for (int a = 0; a < p.n_vertices && !placed; ++a) {
      if (own[a] >= 0) continue;
      for (int b : g.neighbors(a)) {
        if (b < a || own[b] >= 0) continue;
        own[a] = su;
        own[b] = sv;
        for (int j : g.neighbors(a)) cov.add(su, own[j]);
        for (int j : g.neighbors(b))
          if (j != a) cov.add(sv, own[j]);
        placed = true;
        break;
      }
    }
    if (!placed) return std::nullopt;
  }
  if (!all_users_present(p, own)) return std::nullopt;
  prune(p, own);
  return own;
}

// Graph-local pool of `size` vertices grown breadth-first from the pinned
// channels and `seed`.
std::vector<int> grow_pool(const Problem& p, int seed, int size) {
  std::vector<char> in(p.n_vertices, 0);
  std::vector<int> pool;
  std::deque<int> queue;
  auto push = [&](int v) {
    if (in[v]) return;
    in[v] = 1;
    pool.push_back(v);
    queue.push_back(v);
  };
  for (int i = 0; i < p.n_vertices; ++i)
    if (p.pin[i] >= 0) push(i);
  if (seed >= 0) push(seed);
  int next_root = 0;
  while (static_cast<int>(pool.size()) < size) {
    if (queue.empty()) {
      while (next_root < p.n_vertices && in[next_root]) ++next_root;
      if (next_root >= p.n_vertices) break;
      push(next_root);
      continue;
    }
    const int v = queue.front();
    queue.pop_front();
    for (int j : p.graph.neighbors(v)) {
      if (static_cast<int>(pool.size()) >= size) break;
      push(j);
    }
  }
  std::sort(pool.begin(), pool.end());
  return pool;
}

int internal_edges(const Problem& p, const std::vector<int>& pool) {
  std::vector<char> in(p.n_vertices, 0);
  for (int v : pool) in[v] = 1;
  int e = 0;
  for (int v : pool)
    for (int j : p.graph.neighbors(v))
      if (j > v && in[j]) ++e;
  return e;
}

std::optional<Owners> anneal(const Problem& p, const std::vector<int>& pool,
                             std::uint64_t iterations, Rng& rng) {
  const int n = static_cast<int>(pool.size());
  std::vector<int> local(p.n_vertices, -1);
  for (int k = 0; k < n; ++k) local[pool[k]] = k;
  std::vector<std::vector<int>> adj(n);
  for (int k = 0; k < n; ++k)
    for (int j : p.graph.neighbors(pool[k]))
      if (local[j] >= 0) adj[k].push_back(local[j]);

  std::vector<int> movable;
  std::vector<int> own(n);
  int rr = 0;
  std::vector<int> free_users;
  for (int u = 0; u < p.n_users; ++u) free_users.push_back(u);
  for (int k = 0; k < n; ++k) {
    if (p.pin[pool[k]] >= 0) {
      own[k] = p.pin[pool[k]];
    } else {
      own[k] = rr++ % p.n_users;
      movable.push_back(k);
    }
  }
  if (movable.empty()) return std::nullopt;
  for (std::size_t k = movable.size(); k > 1; --k) {
    const std::size_t j = rng.below(k);
    std::swap(own[movable[k - 1]], own[movable[j]]);
  }

  Coverage cov(p.n_users);
  for (int k = 0; k < n; ++k)
    for (int j : adj[k])
      if (j > k) cov.add(own[k], own[j]);

  auto move = [&](int k, int to) {
    const int from = own[k];
    for (int j : adj[k]) {
      cov.remove(from, own[j]);
      cov.add(to, own[j]);
    }
    own[k] = to;
  };

  const double t0 = 1.5;
  const double t1 = 0.02;
  for (std::uint64_t it = 0; it < iterations && cov.uncovered() > 0; ++it) {
    const double temp = t0 + (t1 - t0) * static_cast<double>(it) / static_cast<double>(iterations);
    const int before = cov.uncovered();
    const int a = movable[rng.below(movable.size())];
    const int old_a = own[a];
    if (rng.uniform() < 0.5 || movable.size() < 2) {
      int to = static_cast<int>(rng.below(p.n_users - 1));
      if (to >= old_a) ++to;
      move(a, to);
      const int delta = cov.uncovered() - before;
      if (delta > 0 && rng.uniform() >= std::exp(-delta / temp)) move(a, old_a);
    } else {
      const int b = movable[rng.below(movable.size())];
      const int old_b = own[b];
      if (old_a == old_b) continue;
      move(a, old_b);
      move(b, old_a);
      const int delta = cov.uncovered() - before;
      if (delta > 0 && rng.uniform() >= std::exp(-delta / temp)) {
        move(b, old_b);
        move(a, old_a);
      }
    }
  }
  if (cov.uncovered() > 0) return std::nullopt;
  Owners out(p.n_vertices, -1);
  for (int k = 0; k < n; ++k) out[pool[k]] = own[k];
  if (!all_users_present(p, out)) return std::nullopt;
  return out;
}

std::optional<Owners> refine(const Problem& p, int budget, const SolveOptions& opt) {
  if (budget > p.n_vertices || budget < 1) return std::nullopt;
  struct Candidate {
    int edges;
    int seed;
    std::vector<int> pool;
  };
  std::vector<Candidate> cands;
  std::set<std::vector<int>> seen;
  for (int s = 0; s < p.n_vertices; ++s) {
    auto pool = grow_pool(p, s, budget);
    if (static_cast<int>(pool.size()) != budget || !seen.insert(pool).second) continue;
    cands.push_back({internal_edges(p, pool), s, std::move(pool)});
  }
  std::stable_sort(cands.begin(), cands.end(),
                   [](const Candidate& a, const Candidate& b) { return a.edges > b.edges; });
  const int needed_edges = p.n_users * (p.n_users - 1) / 2;
  int tried = 0;
  for (const auto& c : cands) {
    if (tried >= opt.pools_per_budget) break;
    if (c.edges < needed_edges) break;
    ++tried;
    Rng rng(opt.seed, (static_cast<std::uint64_t>(budget) << 32) | static_cast<std::uint64_t>(c.seed));
    if (auto own = anneal(p, c.pool, opt.anneal_iterations, rng)) {
      prune(p, *own);
      return own;
    }
  }
  return std::nullopt;
}

int total_of(const Owners& own) {
  return static_cast<int>(std::count_if(own.begin(), own.end(), [](int o) { return o >= 0; }));
}

double weight_of(const Problem& p, const Owners& own) {
  double w = 0.0;
  for (int i = 0; i < p.n_vertices; ++i)
    if (own[i] >= 0) w += p.weight[i];
  return w;
}

std::optional<Owners> heuristic(const Problem& p, const SolveOptions& opt) {
  std::optional<Owners> best = construct(p);
  const int lb = p.n_users * p.need;
  int budget = best ? total_of(*best) - 1 : p.n_vertices;
  while (budget >= std::max(lb, 1)) {
    auto r = refine(p, budget, opt);
    if (!r) break;
    if (!best || total_of(*r) < total_of(*best) ||
        (total_of(*r) == total_of(*best) && weight_of(p, *r) < weight_of(p, *best)))
      best = std::move(r);
    budget = total_of(*best) - 1;
  }
  return best;
}

class ExactSearch {
 public:
  ExactSearch(const Problem& p, std::uint64_t node_limit, bool collect)
      : p_(p), limit_(node_limit), collect_(collect), cov_(p.n_users) {}

  // Returns true when a plan with exactly `budget` channels exists. Sets
  // aborted() when the node budget runs out first.
  bool feasible(int budget) {
    budget_ = budget;
    own_ = p_.pin;
    size_.assign(p_.n_users, 0);
    used_ = 0;
    introduced_ = p_.pinned_users;
    cov_ = coverage_of(p_, own_);
    for (int i = 0; i < p_.n_vertices; ++i)
      if (own_[i] >= 0) {
        ++size_[own_[i]];
        ++used_;
      }
    free_after_.assign(p_.n_vertices + 1, 0);
    for (int i = p_.n_vertices - 1; i >= 0; --i)
      free_after_[i] = free_after_[i + 1] + (p_.pin[i] < 0 ? 1 : 0);
    found_ = false;
    try {
      dfs(0);
    } catch (const Abort&) {
      aborted_ = true;
    }
    return found_;
  }

  bool aborted() const { return aborted_; }
  std::uint64_t nodes() const { return nodes_; }
  const Owners& solution() const { return best_; }

 private:
  struct Abort {};

  int required() const {
    int req = (p_.n_users - introduced_) * p_.need;
    for (int u = 0; u < introduced_; ++u) req += std::max(0, p_.need - size_[u]);
    if (p_.max_degree > 0)
      req = std::max(req, (cov_.uncovered() + p_.max_degree - 1) / p_.max_degree);
    return req;
  }

  void assign(int i, int u) {
    own_[i] = u;
    ++size_[u];
    ++used_;
    for (int j : p_.graph.neighbors(i)) cov_.add(u, own_[j]);
  }

  void unassign(int i) {
    const int u = own_[i];
    for (int j : p_.graph.neighbors(i)) cov_.remove(u, own_[j]);
    --size_[u];
    --used_;
    own_[i] = -1;
  }

  bool dfs(int i) {
    if (++nodes_ > limit_) throw Abort{};
    if (cov_.uncovered() == 0 && introduced_ == p_.n_users && used_ == budget_) {
      const double w = weight_of(p_, own_);
      if (!found_ || w < best_weight_) {
        best_ = own_;
        best_weight_ = w;
      }
      found_ = true;
      return !collect_;
    }
    while (i < p_.n_vertices && p_.pin[i] >= 0) ++i;
    if (i >= p_.n_vertices) return false;
    const int rem = budget_ - used_;
    if (rem <= 0) return false;
    const int req = required();
    if (req > rem || free_after_[i] < std::max(req, 1)) return false;

    if (!p_.graph.neighbors(i).empty()) {
      const int top = std::min(introduced_, p_.n_users - 1);
      for (int u = 0; u <= top; ++u) {
        const bool fresh = u == introduced_;
        if (fresh) ++introduced_;
        assign(i, u);
        const bool done = dfs(i + 1);
        unassign(i);
        if (fresh) --introduced_;
        if (done) return true;
      }
    }
    return dfs(i + 1);
  }

  const Problem& p_;
  std::uint64_t limit_;
  bool collect_;
  std::uint64_t nodes_ = 0;
  bool aborted_ = false;
  int budget_ = 0;
  Owners own_;
  std::vector<int> size_;
  int used_ = 0;
  int introduced_ = 0;
  Coverage cov_;
  std::vector<int> free_after_;
  bool found_ = false;
  Owners best_;
  double best_weight_ = 0.0;
};

// Internal users become external indices: pinned users keep theirs, the rest
// are numbered by their lowest channel.
AllocationPlan to_plan(const Problem& p, const Owners& own, const SolveOptions& opt) {
  std::vector<int> first(p.n_users, p.n_vertices);
  for (int i = 0; i < p.n_vertices; ++i)
    if (own[i] >= 0) first[own[i]] = std::min(first[own[i]], i);
  std::vector<int> ext(p.n_users, -1);
  std::vector<char> taken(p.n_users, 0);
  for (int u = 0; u < p.pinned_users; ++u) {
    ext[u] = p.external_of_pinned[u];
    taken[ext[u]] = 1;
  }
  std::vector<int> rest;
  for (int u = p.pinned_users; u < p.n_users; ++u) rest.push_back(u);
  std::stable_sort(rest.begin(), rest.end(), [&](int a, int b) { return first[a] < first[b]; });
  int next = 0;
  for (int u : rest) {
    while (taken[next]) ++next;
    ext[u] = next;
    taken[next] = 1;
  }
  const auto names = opt.names.empty() ? default_user_names(p.n_users) : opt.names;
  std::vector<UserChannels> users(p.n_users);
  for (int u = 0; u < p.n_users; ++u) users[u].name = names[u];
  for (int i = 0; i < p.n_vertices; ++i)
    if (own[i] >= 0) users[ext[own[i]]].channels.push_back(p.graph.vertices()[i]);
  return make_plan(std::move(users), p.graph);
}

int witness_for(const PairingGraph& g, int n_users, const SolveOptions& opt) {
  SolveOptions o = opt;
  o.pinned.clear();
  o.names.clear();
  for (int m = n_users - 1; m >= 2; --m) {
    Problem p = make_problem(g, m, o);
    if (p.max_degree > 0 && heuristic(p, o)) return m;
  }
  return g.size() > 0 ? 1 : 0;
}

}  // namespace

SolveResult solve_allocation(const PairingGraph& graph, int n_users,
                             const SolveOptions& options) {
  if (n_users < 1) throw DomainError("solve_allocation needs N >= 1");
  if (!options.names.empty() && static_cast<int>(options.names.size()) != n_users)
    throw InputError("user name list does not match N");
  if (graph.size() == 0) throw EmptyGraph("pairing graph has no vertices");
  const Problem p = make_problem(graph, n_users, options);

  SolveResult res;
  res.mode = options.mode;
  if (n_users == 1) {
    res.plan = to_plan(p, p.pin, options);
    res.lower_bound = res.plan.total_channels();
    res.optimal = true;
    return res;
  }
  if (p.max_degree == 0)
    throw Infeasible("pairing graph has no edges", graph.size() > 0 ? 1 : 0, true);

  const int lb = std::max<int>(channel_lower_bound(graph, n_users),
                               static_cast<int>(options.pinned.size()));
  std::optional<Owners> incumbent = heuristic(p, options);

  if (options.mode == SolveMode::greedy) {
    if (!incumbent)
      throw Infeasible("no fully connected plan found for " + std::to_string(n_users) + " users",
                       witness_for(graph, n_users, options), false);
    res.plan = to_plan(p, *incumbent, options);
    res.lower_bound = lb;
    res.optimal = res.plan.total_channels() == lb;
    return res;
  }

  const int ub = incumbent ? total_of(*incumbent) : p.n_vertices + 1;
  ExactSearch search(p, options.node_limit, !options.weights.empty());
  int proven = lb;  // every budget below `proven` is infeasible
  std::optional<Owners> found;
  const int last = options.weights.empty() ? ub - 1 : ub;
  for (int b = lb; b <= last && b <= p.n_vertices; ++b) {
    if (search.feasible(b)) {
      found = search.solution();
      break;
    }
    if (search.aborted()) break;
    proven = b + 1;
  }
  res.nodes = search.nodes();
  if (found) {
    res.plan = to_plan(p, *found, options);
    res.lower_bound = res.plan.total_channels();
    res.optimal = true;
    return res;
  }
  if (!incumbent) {
    const bool exhaustive = !search.aborted();
    throw Infeasible("no fully connected plan exists for " + std::to_string(n_users) + " users",
                     witness_for(graph, n_users, options), exhaustive);
  }
  res.plan = to_plan(p, *incumbent, options);
  res.lower_bound = std::min(proven, res.plan.total_channels());
  res.optimal = res.lower_bound == res.plan.total_channels();
  return res;
}

}  // namespace qmux::alloc
