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

// JSON and CSV forms of plans, reports, power scans, scheme comparisons and
// simulation statistics. Layouts are listed in docs/formats.md.

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qmux/alloc.hpp"
#include "qmux/netplan.hpp"
#include "qmux/sim.hpp"

namespace qmux::serialize {

/// Shortest "%.10g" form; "inf" and "nan" spelled out.
std::string number(double v);

struct PlanMeta {
  std::optional<int> lower_bound;
  std::optional<bool> optimal;
  std::string solver;
  std::string config_hash;
  std::string timestamp;  // omitted when empty
};

nlohmann::json plan_to_json(const alloc::AllocationPlan& plan, const alloc::PairingGraph& graph,
                            const PlanMeta& meta = {});
/// Rebuilds links from the graph. Throws PlanInvalid when the document lists
/// a link that the graph does not realize, InputError on malformed input.
alloc::AllocationPlan plan_from_json(const nlohmann::json& doc, const alloc::PairingGraph& graph);

nlohmann::json report_to_json(const netplan::NetworkReport& report);
/// users,channels,n_sift_hz,visibility,qber,skr_bps,secure,margin; then a Total row.
std::string report_to_csv(const netplan::NetworkReport& report);

/// P_mW, qber and skr per report row, total, objective, feasible.
std::string scan_to_csv(const netplan::OptimizeResult& result);
nlohmann::json optimum_to_json(const netplan::OptimizeResult& result, netplan::Objective objective);

nlohmann::json compare_to_json(const std::vector<netplan::SchemeRow>& rows);
std::string compare_to_csv(const std::vector<netplan::SchemeRow>& rows);

nlohmann::json stats_to_json(const sim::EstimatedStats& est, const sim::TimeTagStream& stream,
                             double window);
nlohmann::json sift_to_json(const qkd::SiftResult& sift, const qkd::KeyRateResult& key);

/// "A&B" and "C50&C30" style labels.
std::string users_label(const netplan::ReportRow& row);
std::string channels_label(const netplan::ReportRow& row);

}  // namespace qmux::serialize
