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

// Neighbourhood analytics in factor space. Squared Euclidean distance over
// all retained factors equals the chi-squared distance between profiles, so
// everything here works on principal coordinates.

#ifndef CAFACTOR_NEIGHBORS_H_
#define CAFACTOR_NEIGHBORS_H_

#include <Eigen/Dense>
#include <array>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cafactor/ca.h"

namespace cafactor {

struct LabeledPoints {
  std::vector<std::string> labels;
  Eigen::MatrixXd coords;  // one row per label
};

LabeledPoints RowPoints(const CorrespondenceModel& model);
LabeledPoints ColPoints(const CorrespondenceModel& model);

// Squared distance between two fitted rows over every retained factor.
double FullSpaceSqDist(const CorrespondenceModel& model, std::string_view a,
                       std::string_view b);

struct Neighbor {
  std::string label;
  double sqdist;
};

struct NeighborResult {
  std::string query_label;
  std::vector<Neighbor> matches;  // non-decreasing distance, ties by label
  std::size_t k = 0;
  std::vector<std::string> warnings;
};

// The k nearest points to `label`, excluding itself. k >= n is truncated to
// n - 1 with a warning.
NeighborResult Nearest(const LabeledPoints& points, std::string_view label,
                       std::size_t k);

// Pairs whose members are each other's single nearest neighbour (ties in
// distance resolved by label order). Each pair is ordered (lower index,
// higher index) and pairs are listed by their first member.
std::vector<std::pair<std::string, std::string>> ReciprocalPairs(
    const LabeledPoints& points);

enum class Linkage { kWard, kAverage };

Linkage ParseLinkage(std::string_view name);

// One agglomeration. Cluster ids follow the usual convention: 0..n-1 are
// leaves, n + s is the cluster created by merge s.
struct Merge {
  std::size_t a;
  std::size_t b;
  double height;
  std::size_t size;
};

struct Dendrogram {
  std::vector<std::string> leaves;
  std::vector<Merge> merges;  // n - 1 merges, heights non-decreasing
};

// Nearest-neighbour-chain agglomerative clustering. Ward heights are the
// Lance-Williams Ward criterion on squared Euclidean distances; average
// linkage uses plain Euclidean distances.
Dendrogram NnChainCluster(const LabeledPoints& points, Linkage linkage);

void WriteDendrogramJson(const Dendrogram& d, Linkage linkage, std::ostream& out);

struct PairLink {
  std::string a;
  std::string b;
  double distance = 0.0;
  std::string error;  // non-empty when a label is missing
};

struct PairLinkReport {
  std::vector<PairLink> pairs;
  std::array<std::size_t, 2> plane{1, 2};  // 1-based factors
  std::size_t valid = 0;
  double mean = 0.0;
  double max = 0.0;
};

// Planar distance for each pair on factors `plane` (1-based).
PairLinkReport PairLinks(const LabeledPoints& points,
                         const std::vector<std::pair<std::string, std::string>>& pairs,
                         std::array<std::size_t, 2> plane = {1, 2});

std::vector<std::pair<std::string, std::string>> ReadPairsTsv(std::istream& in);
void WritePairLinksCsv(const PairLinkReport& report, std::ostream& out);

}  // namespace cafactor

#endif  // CAFACTOR_NEIGHBORS_H_
