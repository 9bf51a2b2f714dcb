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

// Aggregation versus projection: how well do factor maps obtained by
// projecting supplementary elements agree with independently fitted ones?
//
// For a table of rows and a grouping of those rows into equal blocks:
//   (1) fit the aggregated (block-summed) table,
//   (2) fit the full table,
//   (3) project the aggregated rows into fit (2),
//   (4) project the full rows into fit (1),
// and compare (3) with (1) and (4) with (2) by the sum of squared Euclidean
// distances in the principal plane, after choosing the sign of each axis.

#ifndef CAFACTOR_EXPERIMENTS_H_
#define CAFACTOR_EXPERIMENTS_H_

#include <array>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "cafactor/ca.h"
#include "cafactor/matrix.h"

namespace cafactor {

enum class Scenario {
  kAggOntoFull,
  kFullOntoAgg,
  kClusteredAggOntoFull,
  kFullOntoClusteredAgg,
};

std::string_view ScenarioName(Scenario s);

enum class GroupOrdering { kGiven, kFactor1 };

GroupOrdering ParseGroupOrdering(std::string_view name);

// Labeled factor-1 / factor-2 coordinates.
struct PlaneCoords {
  std::vector<std::string> labels;
  std::vector<std::array<double, 2>> xy;
};

// First two columns of `coords`; a missing second factor reads as 0.
PlaneCoords ToPlane(const std::vector<std::string>& labels,
                    const Eigen::MatrixXd& coords);

struct ComparisonReport {
  Scenario scenario = Scenario::kAggOntoFull;
  double ssd = 0.0;
  std::size_t n_points = 0;
  // Axis k of B was negated before the comparison.
  std::array<bool, 2> flipped{false, false};
};

// Sum over labels of |a - b|^2, minimized over the four sign choices for
// the axes of B (first minimum in the order ++, +-, -+, --). Label sets must
// agree; order may differ.
ComparisonReport SsdPrincipalPlane(const PlaneCoords& a, const PlaneCoords& b,
                                   Scenario scenario = Scenario::kAggOntoFull);

struct AggregationProtocolResult {
  // Given ordering: {AggOntoFull, FullOntoAgg};
  // Factor1 ordering: {ClusteredAggOntoFull, FullOntoClusteredAgg}.
  std::vector<ComparisonReport> reports;
  PlaneCoords aggregated_active;    // (1)
  PlaneCoords full_active;          // (2)
  PlaneCoords aggregated_projected; // (3)
  PlaneCoords full_projected;       // (4)
};

// Runs the four analyses. With GroupOrdering::kFactor1 the rows are first
// sorted by their factor-1 coordinate in the full fit, so each block holds
// rows that are close on that axis. Every row must have a positive total and
// group_size must divide the row count.
AggregationProtocolResult RunAggregationProtocol(const ContingencyTable& table,
                                                 std::size_t group_size = 100,
                                                 GroupOrdering ordering = GroupOrdering::kGiven);

void WriteProtocolJson(const AggregationProtocolResult& result,
                       std::size_t group_size, GroupOrdering ordering,
                       std::ostream& out);

}  // namespace cafactor

#endif  // CAFACTOR_EXPERIMENTS_H_
