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

#include <algorithm>
#include <set>

#include "qmux/alloc.hpp"
#include "qmux/error.hpp"

namespace qmux::alloc {

PairingGraph::PairingGraph(const grid::FrequencyGrid& grid,
                           const grid::PumpConfig& pumps)
    : grid_(grid::effective_grid(grid, pumps)), pumps_(pumps) {
  vertices_ = grid_.usable_channels();
  adj_.resize(vertices_.size());
  const auto targets = grid::sum_targets(pumps_);
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    const int a = vertices_[i];
    for (const auto& t : targets) {
      const int b = t.value - a;
      if (b <= a || !grid_.usable(b)) continue;
      edge_at_[{a, b}] = edges_.size();
      edges_.push_back({a, b, t.value, t.kind(), t.sources});
    }
  }
  std::sort(edges_.begin(), edges_.end(), [](const Edge& x, const Edge& y) {
    return std::pair(x.a, x.b) < std::pair(y.a, y.b);
  });
  edge_at_.clear();
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    edge_at_[{edges_[e].a, edges_[e].b}] = e;
    const int ia = index_of(edges_[e].a);
    const int ib = index_of(edges_[e].b);
    adj_[ia].push_back(ib);
    adj_[ib].push_back(ia);
  }
  for (auto& n : adj_) std::sort(n.begin(), n.end());
}

int PairingGraph::index_of(int label) const {
  auto it = std::lower_bound(vertices_.begin(), vertices_.end(), label);
  if (it == vertices_.end() || *it != label) return -1;
  return static_cast<int>(it - vertices_.begin());
}

int PairingGraph::degree_of(int label) const {
  const int i = index_of(label);
  return i < 0 ? 0 : static_cast<int>(adj_[i].size());
}

int PairingGraph::max_degree() const {
  std::size_t d = 0;
  for (const auto& n : adj_) d = std::max(d, n.size());
  return static_cast<int>(d);
}

const Edge* PairingGraph::find_edge(int a, int b) const {
  if (a > b) std::swap(a, b);
  auto it = edge_at_.find({a, b});
  return it == edge_at_.end() ? nullptr : &edges_[it->second];
}

PairingGraph build_pairing_graph(const grid::FrequencyGrid& grid,
                                 const grid::PumpConfig& pumps) {
  PairingGraph g(grid, pumps);
  if (g.size() == 0) throw EmptyGraph("no usable channels remain after exclusions");
  return g;
}

int AllocationPlan::total_channels() const {
  int n = 0;
  for (const auto& u : users) n += static_cast<int>(u.channels.size());
  return n;
}

int AllocationPlan::user_index(const std::string& name) const {
  for (std::size_t i = 0; i < users.size(); ++i)
    if (users[i].name == name) return static_cast<int>(i);
  return -1;
}

const Link* AllocationPlan::link(int u, int v) const {
  if (u > v) std::swap(u, v);
  for (const auto& l : links)
    if (l.u == u && l.v == v) return &l;
  return nullptr;
}

AllocationPlan make_plan(std::vector<UserChannels> users, const PairingGraph& graph) {
  AllocationPlan plan;
  for (auto& u : users) std::sort(u.channels.begin(), u.channels.end());
  plan.users = std::move(users);
  const int n = static_cast<int>(plan.users.size());
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      Link link{u, v, {}};
      for (int a : plan.users[u].channels)
        for (int b : plan.users[v].channels)
          if (const Edge* e = graph.find_edge(a, b)) link.edges.push_back(*e);
      std::sort(link.edges.begin(), link.edges.end(), [](const Edge& x, const Edge& y) {
        return std::pair(x.a, x.b) < std::pair(y.a, y.b);
      });
      plan.links.push_back(std::move(link));
    }
  }
  return plan;
}

VerificationReport verify_plan(const AllocationPlan& plan, const PairingGraph& graph,
                               int n_users) {
  VerificationReport r;
  const int n = static_cast<int>(plan.users.size());
  r.user_count_matches = n == n_users;

  std::map<int, int> holder;
  std::set<int> shared;
  for (int u = 0; u < n; ++u) {
    for (int c : plan.users[u].channels) {
      if (graph.index_of(c) < 0) r.unknown_channels.push_back(c);
      auto [it, inserted] = holder.emplace(c, u);
      if (!inserted) shared.insert(c);
    }
  }
  r.shared_channels.assign(shared.begin(), shared.end());

  for (const auto& link : plan.links) {
    if (link.u < 0 || link.v >= n || link.u >= link.v) {
      r.bad_links.push_back("link with invalid user indices");
      continue;
    }
    for (const auto& e : link.edges) {
      const Edge* ge = graph.find_edge(e.a, e.b);
      const auto& su = plan.users[link.u].channels;
      const auto& sv = plan.users[link.v].channels;
      auto has = [](const std::vector<int>& s, int c) {
        return std::find(s.begin(), s.end(), c) != s.end();
      };
      const bool connects = (has(su, e.a) && has(sv, e.b)) || (has(su, e.b) && has(sv, e.a));
      if (!ge || !connects)
        r.bad_links.push_back("edge (" + std::to_string(e.a) + "," + std::to_string(e.b) +
                              ") does not join " + plan.users[link.u].name + " and " +
                              plan.users[link.v].name);
    }
  }

  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      bool connected = false;
      for (int a : plan.users[u].channels) {
        for (int b : plan.users[v].channels)
          if (graph.find_edge(a, b)) {
            connected = true;
            break;
          }
        if (connected) break;
      }
      if (!connected) r.missing_pairs.emplace_back(u, v);
    }
  }

  r.valid = r.user_count_matches && r.shared_channels.empty() && r.unknown_channels.empty() &&
            r.missing_pairs.empty() && r.bad_links.empty();
  return r;
}

int baseline_channel_count(int n_users) {
  if (n_users < 2) throw DomainError("baseline channel count needs N >= 2");
  return n_users * (n_users - 1);
}

int channel_lower_bound(const PairingGraph& graph, int n_users) {
  if (n_users <= 1) return 0;
  const int d = graph.max_degree();
  if (d == 0) return n_users * (n_users - 1);  // unreachable; callers report infeasible
  return n_users * ((n_users - 1 + d - 1) / d);
}

std::vector<std::string> default_user_names(int n_users) {
  std::vector<std::string> out;
  for (int i = 0; i < n_users; ++i)
    out.push_back(i < 26 ? std::string(1, static_cast<char>('A' + i))
                         : "U" + std::to_string(i + 1));
  return out;
}

std::string to_string(SolveMode mode) {
  return mode == SolveMode::exact ? "exact" : "greedy";
}

SolveMode solve_mode_from_string(const std::string& s) {
  if (s == "exact") return SolveMode::exact;
  if (s == "greedy") return SolveMode::greedy;
  throw InputError("unknown solver mode '" + s + "'");
}

}  // namespace qmux::alloc
