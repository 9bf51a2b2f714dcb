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

#include "cafactor/powerlaw.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>

#include "cafactor/errors.h"
#include "json.hpp"

namespace cafactor {

RankFrequency RankFrequencyOf(const Vocabulary& vocab) {
  if (vocab.empty()) throw DataError("empty vocabulary");
  RankFrequency rf;
  rf.points.reserve(vocab.size());
  for (const auto& e : vocab.entries()) rf.points.push_back({e.rank, e.frequency});
  return rf;
}

std::optional<RankRange> AutoRegime(const RankFrequency& rf) {
  const auto& p = rf.points;
  if (p.empty()) return std::nullopt;

  // Longest run of equal frequencies (length >= 2); later runs win ties.
  std::size_t best_len = 1, best_start = p.size();
  for (std::size_t i = 0; i < p.size();) {
    std::size_t j = i;
    while (j + 1 < p.size() && p[j + 1].frequency == p[i].frequency) ++j;
    const std::size_t len = j - i + 1;
    if (len >= 2 && len >= best_len) {
      best_len = len;
      best_start = i;
    }
    i = j + 1;
  }
  std::size_t end = best_start;  // exclusive index
  while (end > 0 && p[end - 1].frequency <= 1) --end;
  if (end < 3) return std::nullopt;
  return RankRange{p.front().rank, p[end - 1].rank};
}

PowerLawFit FitLogLog(const RankFrequency& rf, std::optional<RankRange> regime) {
  PowerLawFit fit;
  if (!regime) {
    regime = AutoRegime(rf);
    if (!regime) throw DataError("fewer than 3 points in the automatic regime");
  }
  if (regime->min_rank > regime->max_rank) {
    throw BoundsError("empty rank range");
  }
  fit.fit_range = *regime;

  std::vector<double> xs, ys;
  std::size_t zeros = 0;
  for (const auto& pt : rf.points) {
    if (pt.rank < regime->min_rank || pt.rank > regime->max_rank) continue;
    if (pt.frequency == 0) {
      ++zeros;
      continue;
    }
    xs.push_back(std::log(static_cast<double>(pt.rank)));
    ys.push_back(std::log(static_cast<double>(pt.frequency)));
  }
  if (zeros > 0) {
    fit.warnings.push_back(std::to_string(zeros) +
                           " zero-frequency points excluded from the fit");
  }
  if (xs.size() < 3) {
    throw DataError("need at least 3 usable points, got " + std::to_string(xs.size()));
  }

  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0) throw DataError("all points share one rank");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double e = ys[i] - (fit.intercept + fit.slope * xs[i]);
    sse += e * e;
  }
  fit.r_squared = syy > 0 ? std::clamp(1.0 - sse / syy, 0.0, 1.0) : 1.0;
  fit.alpha = -fit.slope;
  fit.points_used = xs.size();
  return fit;
}

RankRange ParseRankRange(const std::string& spec) {
  const auto colon = spec.find(':');
  RankRange r{0, 0};
  auto parse = [&](std::size_t b, std::size_t e, std::size_t& v) {
    const auto [p, ec] = std::from_chars(spec.data() + b, spec.data() + e, v);
    return ec == std::errc() && p == spec.data() + e;
  };
  if (colon == std::string::npos || !parse(0, colon, r.min_rank) ||
      !parse(colon + 1, spec.size(), r.max_rank) || r.min_rank < 1 ||
      r.min_rank > r.max_rank) {
    throw BoundsError("bad rank range '" + spec + "', expected LO:HI");
  }
  return r;
}

void WriteFitJson(const PowerLawFit& fit, std::ostream& out) {
  nlohmann::ordered_json j;
  j["slope"] = fit.slope;
  j["intercept"] = fit.intercept;
  j["alpha"] = fit.alpha;
  j["r_squared"] = fit.r_squared;
  j["fit_range"] = {fit.fit_range.min_rank, fit.fit_range.max_rank};
  j["points_used"] = fit.points_used;
  j["warnings"] = fit.warnings;
  out << j.dump(2) << '\n';
}

void WriteLogLogCsv(const RankFrequency& rf, std::ostream& out) {
  out << "ln_rank,ln_freq\n";
  char buf[64];
  for (const auto& p : rf.points) {
    if (p.frequency == 0) continue;
    auto r = std::to_chars(buf, buf + sizeof(buf), std::log(static_cast<double>(p.rank)));
    out << std::string_view(buf, r.ptr - buf) << ',';
    r = std::to_chars(buf, buf + sizeof(buf), std::log(static_cast<double>(p.frequency)));
    out << std::string_view(buf, r.ptr - buf) << '\n';
  }
}

}  // namespace cafactor
