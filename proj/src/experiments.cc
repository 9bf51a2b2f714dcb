// Copyright 2026 The cafactor Authors.
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

#include "cafactor/experiments.h"

#include <algorithm>
#include <limits>
#include <ostream>
#include <unordered_map>

#include "cafactor/errors.h"
#include "json.hpp"

namespace cafactor {

std::string_view ScenarioName(Scenario s) {
  switch (s) {
    case Scenario::kAggOntoFull:
      return "AggOntoFull";
    case Scenario::kFullOntoAgg:
      return "FullOntoAgg";
    case Scenario::kClusteredAggOntoFull:
      return "ClusteredAggOntoFull";
    case Scenario::kFullOntoClusteredAgg:
      return "FullOntoClusteredAgg";
  }
  return "?";
}

GroupOrdering ParseGroupOrdering(std::string_view name) {
  if (name == "given") return GroupOrdering::kGiven;
  if (name == "factor1") return GroupOrdering::kFactor1;
  throw BoundsError("ordering must be 'given' or 'factor1', got '" +
                    std::string(name) + "'");
}

PlaneCoords ToPlane(const std::vector<std::string>& labels,
                    const Eigen::MatrixXd& coords) {
  PlaneCoords p;
  p.labels = labels;
  p.xy.resize(labels.size(), {0.0, 0.0});
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (Eigen::Index k = 0; k < std::min<Eigen::Index>(2, coords.cols()); ++k) {
      p.xy[i][static_cast<std::size_t>(k)] = coords(static_cast<Eigen::Index>(i), k);
    }
  }
  return p;
}

ComparisonReport SsdPrincipalPlane(const PlaneCoords& a, const PlaneCoords& b,
                                   Scenario scenario) {
  if (a.labels.size() != b.labels.size()) {
    throw AlignmentError("coordinate sets have different sizes");
  }
  std::unordered_map<std::string_view, std::size_t> b_index;
  for (std::size_t i = 0; i < b.labels.size(); ++i) b_index[b.labels[i]] = i;

  // Per-axis sums for the unflipped and flipped B.
  std::array<std::array<double, 2>, 2> axis_sum{};  // [axis][flip]
  for (std::size_t i = 0; i < a.labels.size(); ++i) {
    const auto it = b_index.find(a.labels[i]);
    if (it == b_index.end()) {
      throw AlignmentError("label '" + a.labels[i] + "' missing from second set");
    }
    for (std::size_t k = 0; k < 2; ++k) {
      const double av = a.xy[i][k], bv = b.xy[it->second][k];
      axis_sum[k][0] += (av - bv) * (av - bv);
      axis_sum[k][1] += (av + bv) * (av + bv);
    }
  }
  ComparisonReport report;
  report.scenario = scenario;
  report.n_points = a.labels.size();
  report.ssd = std::numeric_limits<double>::infinity();
  for (int f0 = 0; f0 < 2; ++f0) {
    for (int f1 = 0; f1 < 2; ++f1) {
      const double total = axis_sum[0][f0] + axis_sum[1][f1];
      if (total < report.ssd) {
        report.ssd = total;
        report.flipped = {f0 == 1, f1 == 1};
      }
    }
  }
  return report;
}

AggregationProtocolResult RunAggregationProtocol(const ContingencyTable& table,
                                                 std::size_t group_size,
                                                 GroupOrdering ordering) {
  if (!table.ZeroRows().empty()) {
    throw DataError("aggregation protocol needs every row to have a positive total");
  }
  if (group_size == 0 || table.rows() % group_size != 0) {
    throw DataError(std::to_string(table.rows()) +
                    " rows are not divisible into groups of " +
                    std::to_string(group_size));
  }

  const CorrespondenceModel full = Fit(table);
  ContingencyTable ordered = table;
  if (ordering == GroupOrdering::kFactor1) {
    std::vector<double> scores(table.rows(), 0.0);
    if (full.rank() > 0) {
      for (std::size_t i = 0; i < table.rows(); ++i) {
        scores[i] = full.row_coords(static_cast<Eigen::Index>(i), 0);
      }
    }
    ordered = OrderRowsByScores(table, scores);
  }
  const ContingencyTable aggregated =
      AggregateRows(ordered, RowGrouping::Consecutive(ordered.rows(), group_size));
  const CorrespondenceModel agg = Fit(aggregated);

  AggregationProtocolResult result;
  result.aggregated_active = ToPlane(agg.row_labels, agg.row_coords);
  result.full_active = ToPlane(full.row_labels, full.row_coords);
  const SupplementaryProjection agg_on_full = ProjectSupplementaryRows(full, aggregated);
  const SupplementaryProjection full_on_agg = ProjectSupplementaryRows(agg, table);
  result.aggregated_projected = ToPlane(agg_on_full.labels, agg_on_full.coords);
  result.full_projected = ToPlane(full_on_agg.labels, full_on_agg.coords);

  const bool clustered = ordering == GroupOrdering::kFactor1;
  result.reports.push_back(SsdPrincipalPlane(
      result.aggregated_projected, result.aggregated_active,
      clustered ? Scenario::kClusteredAggOntoFull : Scenario::kAggOntoFull));
  result.reports.push_back(SsdPrincipalPlane(
      result.full_projected, result.full_active,
      clustered ? Scenario::kFullOntoClusteredAgg : Scenario::kFullOntoAgg));
  return result;
}

void WriteProtocolJson(const AggregationProtocolResult& result,
                       std::size_t group_size, GroupOrdering ordering,
                       std::ostream& out) {
  nlohmann::ordered_json j;
  j["group_size"] = group_size;
  j["ordering"] = ordering == GroupOrdering::kGiven ? "given" : "factor1";
  j["reports"] = nlohmann::ordered_json::array();
  for (const auto& r : result.reports) {
    nlohmann::ordered_json e;
    e["scenario"] = ScenarioName(r.scenario);
    e["ssd"] = r.ssd;
    e["n_points"] = r.n_points;
    e["flipped"] = {r.flipped[0], r.flipped[1]};
    j["reports"].push_back(std::move(e));
  }
  out << j.dump(2) << '\n';
}

}  // namespace cafactor
