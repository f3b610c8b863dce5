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

// Channel-pairing graph and the minimal-channel allocation that fully
// connects N users: disjoint channel sets S_u, minimize sum |S_u|, such that
// every user pair has at least one graph edge between their sets.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qmux/grid.hpp"

namespace qmux::alloc {

struct Edge {
  int a = 0;  // a < b
  int b = 0;
  int target = 0;
  grid::ProcessKind kind = grid::ProcessKind::degenerate;
  std::vector<grid::PumpPair> sources;
};

class PairingGraph {
 public:
  PairingGraph(const grid::FrequencyGrid& grid, const grid::PumpConfig& pumps);

  /// Usable channels, ascending.
  const std::vector<int>& vertices() const { return vertices_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::size_t size() const { return vertices_.size(); }

  /// Position of `label` in vertices(), or -1.
  int index_of(int label) const;
  /// Neighbour positions of vertex `index`, ascending.
  const std::vector<int>& neighbors(int index) const { return adj_[index]; }
  int degree_of(int label) const;
  int max_degree() const;

  const Edge* find_edge(int a, int b) const;
  const grid::FrequencyGrid& grid() const { return grid_; }
  const grid::PumpConfig& pumps() const { return pumps_; }

 private:
  grid::FrequencyGrid grid_;  // with pump and stimulated-line exclusions
  grid::PumpConfig pumps_;
  std::vector<int> vertices_;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> adj_;
  std::map<std::pair<int, int>, std::size_t> edge_at_;
};

/// Throws EmptyGraph when no usable channel remains after exclusions.
PairingGraph build_pairing_graph(const grid::FrequencyGrid& grid,
                                 const grid::PumpConfig& pumps);

struct UserChannels {
  std::string name;
  std::vector<int> channels;  // ascending
};

struct Link {
  int u = 0;  // user indices, u < v
  int v = 0;
  std::vector<Edge> edges;
};

struct AllocationPlan {
  std::vector<UserChannels> users;
  std::vector<Link> links;  // one per user pair, (u, v) lexicographic

  int total_channels() const;
  int user_index(const std::string& name) const;
  const Link* link(int u, int v) const;
};

/// Builds the link map of `users` from the graph: every user pair gets one
/// Link listing all realizing edges (possibly none).
AllocationPlan make_plan(std::vector<UserChannels> users, const PairingGraph& graph);

struct VerificationReport {
  bool valid = true;
  bool user_count_matches = true;
  std::vector<int> shared_channels;            // held by more than one user
  std::vector<int> unknown_channels;           // not vertices of the graph
  std::vector<std::pair<int, int>> missing_pairs;  // user pairs with no edge
  std::vector<std::string> bad_links;          // link entries that do not check out
};

VerificationReport verify_plan(const AllocationPlan& plan, const PairingGraph& graph,
                               int n_users);

enum class SolveMode { exact, greedy };

std::string to_string(SolveMode mode);
SolveMode solve_mode_from_string(const std::string& s);

struct SolveOptions {
  SolveMode mode = SolveMode::exact;
  /// Budget for the exact search, in visited nodes. Deterministic, unlike a
  /// wall-clock limit.
  std::uint64_t node_limit = 50'000'000;
  /// Annealing passes per (budget, pool) in the heuristic stage.
  std::uint64_t anneal_iterations = 400'000;
  int pools_per_budget = 8;
  std::uint64_t seed = 0x5eed'a110c;
  /// Per-channel weights; only break ties among equal-size plans.
  std::map<int, double> weights;
  /// channel label -> user index
  std::map<int, int> pinned;
  std::vector<std::string> names;  // defaults to A, B, C, ...
};

struct SolveResult {
  AllocationPlan plan;
  SolveMode mode = SolveMode::exact;
  int lower_bound = 0;
  bool optimal = false;  // lower_bound == plan.total_channels()
  std::uint64_t nodes = 0;
};

/// Returns a plan that verify_plan accepts, or throws Infeasible.
SolveResult solve_allocation(const PairingGraph& graph, int n_users,
                             const SolveOptions& options = {});

/// Channels needed by the one-state-per-wavelength scheme, N (N - 1).
int baseline_channel_count(int n_users);

/// Every user needs ceil((N - 1) / max_degree) channels.
int channel_lower_bound(const PairingGraph& graph, int n_users);

std::vector<std::string> default_user_names(int n_users);

}  // namespace qmux::alloc
