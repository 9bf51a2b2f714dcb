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

#include "cafactor/neighbors.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>

#include "cafactor/errors.h"
#include "json.hpp"

namespace cafactor {

namespace {

std::size_t IndexOf(const LabeledPoints& points, std::string_view label) {
  const auto it = std::find(points.labels.begin(), points.labels.end(), label);
  if (it == points.labels.end()) {
    throw DataError("unknown label '" + std::string(label) + "'");
  }
  return static_cast<std::size_t>(it - points.labels.begin());
}

double SqDist(const Eigen::MatrixXd& c, std::size_t i, std::size_t j) {
  return (c.row(static_cast<Eigen::Index>(i)) - c.row(static_cast<Eigen::Index>(j)))
      .squaredNorm();
}

// Nearest other point to i; ties resolved toward the smaller label.
std::size_t NearestIndex(const LabeledPoints& p, std::size_t i) {
  std::size_t best = i;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < p.labels.size(); ++j) {
    if (j == i) continue;
    const double d = SqDist(p.coords, i, j);
    if (d < best_d || (d == best_d && p.labels[j] < p.labels[best])) {
      best = j;
      best_d = d;
    }
  }
  return best;
}

std::string FormatDouble(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

}  // namespace

LabeledPoints RowPoints(const CorrespondenceModel& model) {
  return {model.row_labels, model.row_coords};
}

LabeledPoints ColPoints(const CorrespondenceModel& model) {
  return {model.col_labels, model.col_coords};
}

double FullSpaceSqDist(const CorrespondenceModel& model, std::string_view a,
                       std::string_view b) {
  const auto ia = model.FindRow(a);
  const auto ib = model.FindRow(b);
  if (!ia) throw DataError("unknown row label '" + std::string(a) + "'");
  if (!ib) throw DataError("unknown row label '" + std::string(b) + "'");
  return SqDist(model.row_coords, *ia, *ib);
}

NeighborResult Nearest(const LabeledPoints& points, std::string_view label,
                       std::size_t k) {
  if (k < 1) throw BoundsError("k must be at least 1");
  const std::size_t q = IndexOf(points, label);
  const std::size_t n = points.labels.size();
  NeighborResult result;
  result.query_label = std::string(label);
  if (k >= n) {
    result.warnings.push_back("k=" + std::to_string(k) + " truncated to " +
                              std::to_string(n - 1));
    k = n - 1;
  }
  result.k = k;

  std::vector<Neighbor> all;
  all.reserve(n - 1);
  for (std::size_t j = 0; j < n; ++j) {
    if (j != q) all.push_back({points.labels[j], SqDist(points.coords, q, j)});
  }
  const auto by_distance = [](const Neighbor& x, const Neighbor& y) {
    if (x.sqdist != y.sqdist) return x.sqdist < y.sqdist;
    return x.label < y.label;
  };
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k),
                    all.end(), by_distance);
  all.resize(k);
  result.matches = std::move(all);
  return result;
}

std::vector<std::pair<std::string, std::string>> ReciprocalPairs(
    const LabeledPoints& points) {
  const std::size_t n = points.labels.size();
  std::vector<std::pair<std::string, std::string>> pairs;
  if (n < 2) return pairs;
  std::vector<std::size_t> nn(n);
  for (std::size_t i = 0; i < n; ++i) nn[i] = NearestIndex(points, i);
  for (std::size_t i = 0; i < n; ++i) {
    if (nn[i] > i && nn[nn[i]] == i) {
      pairs.emplace_back(points.labels[i], points.labels[nn[i]]);
    }
  }
  return pairs;
}

Linkage ParseLinkage(std::string_view name) {
  if (name == "ward") return Linkage::kWard;
  if (name == "average") return Linkage::kAverage;
  throw BoundsError("linkage must be 'ward' or 'average', got '" +
                    std::string(name) + "'");
}

Dendrogram NnChainCluster(const LabeledPoints& points, Linkage linkage) {
  const std::size_t n = points.labels.size();
  if (n < 2) throw DataError("clustering needs at least 2 points");

  std::vector<double> dist(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double d = SqDist(points.coords, i, j);
      if (linkage == Linkage::kAverage) d = std::sqrt(d);
      dist[i * n + j] = dist[j * n + i] = d;
    }
  }
  auto D = [&](std::size_t i, std::size_t j) -> double& { return dist[i * n + j]; };

  std::vector<std::size_t> size(n, 1);
  std::vector<bool> active(n, true);
  // A leaf from each slot's cluster, used to relabel merges afterwards.
  std::vector<std::size_t> leaf(n);
  std::iota(leaf.begin(), leaf.end(), 0);

  struct RawMerge {
    std::size_t leaf_a, leaf_b;
    double height;
  };
  std::vector<RawMerge> raw;
  raw.reserve(n - 1);
  std::vector<std::size_t> chain;
  std::size_t remaining = n;

  while (remaining > 1) {
    if (chain.empty()) {
      for (std::size_t i = 0; i < n; ++i) {
        if (active[i]) {
          chain.push_back(i);
          break;
        }
      }
    }
    const std::size_t a = chain.back();
    const std::size_t prev = chain.size() >= 2 ? chain[chain.size() - 2] : n;
    std::size_t b = n;
    double best = std::numeric_limits<double>::infinity();
    if (prev != n) {
      b = prev;
      best = D(a, prev);
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (!active[j] || j == a) continue;
      if (D(a, j) < best) {
        best = D(a, j);
        b = j;
      }
    }
    if (b != prev) {
      chain.push_back(b);
      continue;
    }
    // a and b are reciprocal nearest neighbours.
    chain.pop_back();
    chain.pop_back();
    raw.push_back({leaf[a], leaf[b], best});

    const double na = static_cast<double>(size[a]);
    const double nb = static_cast<double>(size[b]);
    for (std::size_t k = 0; k < n; ++k) {
      if (!active[k] || k == a || k == b) continue;
      double d;
      if (linkage == Linkage::kWard) {
        const double nk = static_cast<double>(size[k]);
        d = ((na + nk) * D(a, k) + (nb + nk) * D(b, k) - nk * best) / (na + nb + nk);
      } else {
        d = (na * D(a, k) + nb * D(b, k)) / (na + nb);
      }
      D(b, k) = D(k, b) = d;
    }
    active[a] = false;
    size[b] += size[a];
    --remaining;
  }

  // Order merges by height and relabel with union-find.
  std::stable_sort(raw.begin(), raw.end(), [](const RawMerge& x, const RawMerge& y) {
    return x.height < y.height;
  });
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::vector<std::size_t> cluster_id(n);
  std::iota(cluster_id.begin(), cluster_id.end(), 0);
  std::vector<std::size_t> cluster_size(n, 1);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };

  Dendrogram out;
  out.leaves = points.labels;
  for (std::size_t s = 0; s < raw.size(); ++s) {
    const std::size_t ra = find(raw[s].leaf_a);
    const std::size_t rb = find(raw[s].leaf_b);
    std::size_t ia = cluster_id[ra], ib = cluster_id[rb];
    if (ia > ib) std::swap(ia, ib);
    const std::size_t merged = cluster_size[ra] + cluster_size[rb];
    out.merges.push_back({ia, ib, raw[s].height, merged});
    parent[ra] = rb;
    cluster_id[rb] = n + s;
    cluster_size[rb] = merged;
  }
  return out;
}

void WriteDendrogramJson(const Dendrogram& d, Linkage linkage, std::ostream& out) {
  nlohmann::ordered_json j;
  j["linkage"] = linkage == Linkage::kWard ? "ward" : "average";
  j["leaves"] = d.leaves;
  j["merges"] = nlohmann::ordered_json::array();
  for (const auto& m : d.merges) {
    j["merges"].push_back({{"a", m.a}, {"b", m.b}, {"height", m.height}, {"size", m.size}});
  }
  out << j.dump(2) << '\n';
}

PairLinkReport PairLinks(const LabeledPoints& points,
                         const std::vector<std::pair<std::string, std::string>>& pairs,
                         std::array<std::size_t, 2> plane) {
  const auto dims = static_cast<std::size_t>(points.coords.cols());
  for (const std::size_t f : plane) {
    if (f < 1 || f > dims) {
      throw BoundsError("factor " + std::to_string(f) + " outside 1.." +
                        std::to_string(dims));
    }
  }
  PairLinkReport report;
  report.plane = plane;
  double sum = 0.0;
  for (const auto& [a, b] : pairs) {
    PairLink link{a, b, 0.0, {}};
    const auto ia = std::find(points.labels.begin(), points.labels.end(), a);
    const auto ib = std::find(points.labels.begin(), points.labels.end(), b);
    if (ia == points.labels.end() || ib == points.labels.end()) {
      link.error = "missing label '" + (ia == points.labels.end() ? a : b) + "'";
    } else {
      const auto i = ia - points.labels.begin();
      const auto j = ib - points.labels.begin();
      const auto k0 = static_cast<Eigen::Index>(plane[0] - 1);
      const auto k1 = static_cast<Eigen::Index>(plane[1] - 1);
      link.distance = std::hypot(points.coords(i, k0) - points.coords(j, k0),
                                 points.coords(i, k1) - points.coords(j, k1));
      sum += link.distance;
      report.max = std::max(report.max, link.distance);
      ++report.valid;
    }
    report.pairs.push_back(std::move(link));
  }
  if (report.valid > 0) report.mean = sum / static_cast<double>(report.valid);
  return report;
}

std::vector<std::pair<std::string, std::string>> ReadPairsTsv(std::istream& in) {
  std::vector<std::pair<std::string, std::string>> pairs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.starts_with('#')) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
      throw DataError("pairs line " + std::to_string(line_no) +
                      ": expected labelA<TAB>labelB");
    }
    pairs.emplace_back(line.substr(0, tab), line.substr(tab + 1));
  }
  return pairs;
}

void WritePairLinksCsv(const PairLinkReport& report, std::ostream& out) {
  out << "label_a,label_b,distance,error\n";
  for (const auto& p : report.pairs) {
    out << p.a << ',' << p.b << ','
        << (p.error.empty() ? FormatDouble(p.distance) : std::string()) << ','
        << p.error << '\n';
  }
  out << "#summary,valid=" << report.valid << ",mean=" << FormatDouble(report.mean)
      << ",max=" << FormatDouble(report.max) << '\n';
}

}  // namespace cafactor
