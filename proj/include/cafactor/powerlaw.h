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

// Rank-frequency analysis: least-squares line through (ln rank, ln freq).

#ifndef CAFACTOR_POWERLAW_H_
#define CAFACTOR_POWERLAW_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cafactor/corpus.h"

namespace cafactor {

struct RankPoint {
  std::size_t rank;  // 1-based
  std::uint64_t frequency;
};

struct RankFrequency {
  std::vector<RankPoint> points;  // frequency non-increasing in rank
};

struct RankRange {
  std::size_t min_rank;
  std::size_t max_rank;
};

struct PowerLawFit {
  double slope = 0.0;      // d ln(freq) / d ln(rank)
  double intercept = 0.0;  // natural log
  RankRange fit_range{0, 0};
  double r_squared = 0.0;
  // Exponent of freq ~ rank^-alpha, i.e. -slope. Whether this is the
  // survival-function or the density exponent depends on the reading of
  // the plot; both are reported as the same number.
  double alpha = 0.0;
  std::size_t points_used = 0;
  std::vector<std::string> warnings;
};

RankFrequency RankFrequencyOf(const Vocabulary& vocab);

// Default regime: ranks before the longest run of tied frequencies (the
// tail fan-out), restricted to frequency > 1. Returns nullopt if fewer than
// three points qualify.
std::optional<RankRange> AutoRegime(const RankFrequency& rf);

// Ordinary least squares of ln(freq) on ln(rank) over `regime` (or
// AutoRegime when absent). Zero-frequency points in the regime are skipped
// with a warning; fewer than three usable points is a DataError.
PowerLawFit FitLogLog(const RankFrequency& rf,
                      std::optional<RankRange> regime = std::nullopt);

// "LO:HI"
RankRange ParseRankRange(const std::string& spec);

// fit.json and the ln_rank,ln_freq point file.
void WriteFitJson(const PowerLawFit& fit, std::ostream& out);
void WriteLogLogCsv(const RankFrequency& rf, std::ostream& out);

}  // namespace cafactor

#endif  // CAFACTOR_POWERLAW_H_
