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

// Slow, direct reference implementations for tests. Nothing here calls into
// the library's numerical code; only its plain data types are shared.

#ifndef CAFACTOR_TESTS_ORACLES_H_
#define CAFACTOR_TESTS_ORACLES_H_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cafactor/matrix.h"

namespace cafactor::oracle {

using Dense = std::vector<std::vector<double>>;

inline Dense Zeros(std::size_t n, std::size_t m) {
  return Dense(n, std::vector<double>(m, 0.0));
}

// Random counts with every row and column total positive.
inline std::vector<std::vector<Count>> RandomCounts(std::mt19937_64& rng, std::size_t n,
                                                    std::size_t m, Count max_count = 9) {
  std::uniform_int_distribution<Count> cell(0, max_count);
  std::vector<std::vector<Count>> t(n, std::vector<Count>(m));
  for (auto& row : t) {
    for (auto& c : row) c = cell(rng);
  }
  std::uniform_int_distribution<std::size_t> pick_col(0, m - 1), pick_row(0, n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    Count s = 0;
    for (Count c : t[i]) s += c;
    if (s == 0) t[i][pick_col(rng)] = 1;
  }
  for (std::size_t j = 0; j < m; ++j) {
    Count s = 0;
    for (std::size_t i = 0; i < n; ++i) s += t[i][j];
    if (s == 0) t[pick_row(rng)][j] = 1;
  }
  return t;
}

struct Margins {
  Dense f;  // f_ij
  std::vector<double> r, c;
};

inline Margins MarginsOf(const std::vector<std::vector<Count>>& t) {
  const std::size_t n = t.size(), m = t[0].size();
  double total = 0.0;
  for (const auto& row : t) {
    for (Count v : row) total += static_cast<double>(v);
  }
  Margins out{Zeros(n, m), std::vector<double>(n, 0.0), std::vector<double>(m, 0.0)};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      out.f[i][j] = static_cast<double>(t[i][j]) / total;
      out.r[i] += out.f[i][j];
      out.c[j] += out.f[i][j];
    }
  }
  return out;
}

// Cyclic Jacobi rotations on a symmetric matrix. Returns eigenvalues and
// eigenvectors (as columns of `vectors`) in no particular order.
inline void Jacobi(Dense a, std::vector<double>& values, Dense& vectors) {
  const std::size_t n = a.size();
  vectors = Zeros(n, n);
  for (std::size_t i = 0; i < n; ++i) vectors[i][i] = 1.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    }
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = vectors[k][p], vkq = vectors[k][q];
          vectors[k][p] = c * vkp - s * vkq;
          vectors[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }
  values.resize(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = a[i][i];
}

struct Decomposition {
  std::vector<double> eigenvalues;  // descending, above cutoff
  Dense row_coords;                 // n x rank
  Dense col_coords;                 // m x rank
};

// Eigen-decomposition of the augmented matrix [[0, S], [S^T, 0]] of
// standardized residuals. Its positive eigenvalues are the singular values
// of S and its eigenvectors stack the left and right singular vectors.
inline Decomposition BruteForceCa(const std::vector<std::vector<Count>>& t,
                                  double cutoff = 1e-10) {
  const Margins mg = MarginsOf(t);
  const std::size_t n = t.size(), m = t[0].size();
  Dense aug = Zeros(n + m, n + m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double s = (mg.f[i][j] - mg.r[i] * mg.c[j]) / std::sqrt(mg.r[i] * mg.c[j]);
      aug[i][n + j] = aug[n + j][i] = s;
    }
  }
  std::vector<double> w;
  Dense v;
  Jacobi(aug, w, v);
  std::vector<std::size_t> order(n + m);
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return w[x] > w[y]; });

  Decomposition out;
  for (std::size_t idx : order) {
    const double sigma = w[idx];
    if (sigma * sigma < cutoff) break;
    out.eigenvalues.push_back(sigma * sigma);
  }
  const std::size_t rank = out.eigenvalues.size();
  out.row_coords = Zeros(n, rank);
  out.col_coords = Zeros(m, rank);
  for (std::size_t k = 0; k < rank; ++k) {
    const std::size_t idx = order[k];
    const double sigma = w[idx];
    // Eigenvector halves have norm 1/sqrt(2) each.
    for (std::size_t i = 0; i < n; ++i) {
      out.row_coords[i][k] = std::sqrt(2.0) * v[i][idx] * sigma / std::sqrt(mg.r[i]);
    }
    for (std::size_t j = 0; j < m; ++j) {
      out.col_coords[j][k] = std::sqrt(2.0) * v[n + j][idx] * sigma / std::sqrt(mg.c[j]);
    }
  }
  return out;
}

inline double InertiaFromDefinition(const std::vector<std::vector<Count>>& t) {
  const Margins mg = MarginsOf(t);
  double sum = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    for (std::size_t j = 0; j < t[0].size(); ++j) {
      const double e = mg.r[i] * mg.c[j];
      sum += (mg.f[i][j] - e) * (mg.f[i][j] - e) / e;
    }
  }
  return sum;
}

// Squared chi-squared distance between the profiles of rows a and b.
inline double Chi2RowDistance(const std::vector<std::vector<Count>>& t, std::size_t a,
                              std::size_t b) {
  const Margins mg = MarginsOf(t);
  double d = 0.0;
  for (std::size_t j = 0; j < t[0].size(); ++j) {
    const double diff = mg.f[a][j] / mg.r[a] - mg.f[b][j] / mg.r[b];
    d += diff * diff / mg.c[j];
  }
  return d;
}

inline double SqDist(const Dense& p, std::size_t a, std::size_t b) {
  double d = 0.0;
  for (std::size_t k = 0; k < p[a].size(); ++k) d += (p[a][k] - p[b][k]) * (p[a][k] - p[b][k]);
  return d;
}

// Nearest other point by exhaustive scan, ties to the lower index.
inline std::size_t NearestIndex(const Dense& p, std::size_t a) {
  std::size_t best = p.size();
  double bd = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (j == a) continue;
    const double d = SqDist(p, a, j);
    if (d < bd) {
      bd = d;
      best = j;
    }
  }
  return best;
}

inline std::set<std::pair<std::size_t, std::size_t>> ReciprocalIndexPairs(const Dense& p) {
  std::set<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t a = 0; a < p.size(); ++a) {
    const std::size_t b = NearestIndex(p, a);
    if (a < b && NearestIndex(p, b) == a) out.insert({a, b});
  }
  return out;
}

using Partition = std::set<std::set<std::size_t>>;

// Greedy agglomeration recomputing every inter-cluster distance from the
// points at each step. Ward uses the merge cost 2 na nb / (na + nb) times
// the squared centroid distance; average uses the mean pairwise Euclidean
// distance. Returns the partition after each merge, and the merge heights.
inline std::vector<Partition> NaiveAgglomeration(const Dense& p, bool ward,
                                                 std::vector<double>* heights = nullptr) {
  std::vector<std::vector<std::size_t>> clusters;
  for (std::size_t i = 0; i < p.size(); ++i) clusters.push_back({i});
  const std::size_t dim = p.empty() ? 0 : p[0].size();
  auto linkage = [&](const std::vector<std::size_t>& x, const std::vector<std::size_t>& y) {
    if (ward) {
      double sq = 0.0;
      for (std::size_t k = 0; k < dim; ++k) {
        double cx = 0.0, cy = 0.0;
        for (auto i : x) cx += p[i][k];
        for (auto i : y) cy += p[i][k];
        cx /= static_cast<double>(x.size());
        cy /= static_cast<double>(y.size());
        sq += (cx - cy) * (cx - cy);
      }
      const double nx = static_cast<double>(x.size()), ny = static_cast<double>(y.size());
      return 2.0 * nx * ny / (nx + ny) * sq;
    }
    double sum = 0.0;
    for (auto i : x) {
      for (auto j : y) sum += std::sqrt(SqDist(p, i, j));
    }
    return sum / static_cast<double>(x.size() * y.size());
  };
  std::vector<Partition> seq;
  while (clusters.size() > 1) {
    std::size_t bi = 0, bj = 1;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < clusters.size(); ++i) {
      for (std::size_t j = i + 1; j < clusters.size(); ++j) {
        const double d = linkage(clusters[i], clusters[j]);
        if (d < best) {
          best = d;
          bi = i;
          bj = j;
        }
      }
    }
    if (heights) heights->push_back(best);
    clusters[bi].insert(clusters[bi].end(), clusters[bj].begin(), clusters[bj].end());
    clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bj));
    Partition part;
    for (const auto& c : clusters) part.insert(std::set<std::size_t>(c.begin(), c.end()));
    seq.push_back(std::move(part));
  }
  return seq;
}

// Replays scipy-style merges (new cluster ids n, n+1, ...) into partitions.
template <typename MergeRange>
std::vector<Partition> ReplayMerges(std::size_t n, const MergeRange& merges) {
  std::vector<std::set<std::size_t>> members(n);
  for (std::size_t i = 0; i < n; ++i) members[i] = {i};
  std::set<std::size_t> live;
  for (std::size_t i = 0; i < n; ++i) live.insert(i);
  std::vector<Partition> seq;
  for (const auto& mg : merges) {
    std::set<std::size_t> joined = members.at(mg.a);
    joined.insert(members.at(mg.b).begin(), members.at(mg.b).end());
    live.erase(mg.a);
    live.erase(mg.b);
    members.push_back(std::move(joined));
    live.insert(members.size() - 1);
    Partition part;
    for (auto id : live) part.insert(members[id]);
    seq.push_back(std::move(part));
  }
  return seq;
}

// Ordinary least squares via the 2x2 normal equations.
inline std::pair<double, double> Ols(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return {slope, (sy - slope * sx) / n};
}

}  // namespace cafactor::oracle

#endif  // CAFACTOR_TESTS_ORACLES_H_
