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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cafactor/ca.h"
#include "cafactor/experiments.h"
#include "cafactor/export_query.h"
#include "cafactor/matrix.h"
#include "cafactor/neighbors.h"
#include "cafactor/pipeline.h"
#include "cafactor/powerlaw.h"
#include "oracles.h"

namespace {

using namespace cafactor;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;
using Table = std::vector<std::vector<Count>>;

struct Outcome {
  bool pass;
  std::string detail;
};

std::string Fmt(const char* fmt, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), fmt, a, b, c);
  return buf;
}

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

// The random tables shared by criteria 1 to 3.
std::vector<Table> SmallTables() {
  std::mt19937_64 rng(20260101);
  std::uniform_int_distribution<std::size_t> rows(2, 12), cols(2, 9);
  std::vector<Table> out;
  for (int t = 0; t < 100; ++t) out.push_back(oracle::RandomCounts(rng, rows(rng), cols(rng)));
  return out;
}

Outcome OracleEquivalence(const std::vector<Table>& tables) {
  const auto start = Clock::now();
  double worst_eig = 0.0, worst_coord = 0.0;
  int rank_mismatch = 0;
  for (const Table& t : tables) {
    const CorrespondenceModel m = Fit(ContingencyTable::FromDense(t));
    const oracle::Decomposition ref = oracle::BruteForceCa(t, 1e-11);
    if (ref.eigenvalues.size() != m.rank()) {
      ++rank_mismatch;
      continue;
    }
    for (std::size_t k = 0; k < m.rank(); ++k) {
      const auto kk = static_cast<Eigen::Index>(k);
      worst_eig = std::max(worst_eig, std::abs(ref.eigenvalues[k] - m.eigenvalues(kk)));
      // Align the oracle's free sign to the fitted one.
      double dot = 0.0;
      for (std::size_t j = 0; j < t[0].size(); ++j) {
        dot += ref.col_coords[j][k] * m.col_coords(static_cast<Eigen::Index>(j), kk);
      }
      const double s = dot < 0 ? -1.0 : 1.0;
      for (std::size_t i = 0; i < t.size(); ++i) {
        worst_coord = std::max(
            worst_coord, std::abs(s * ref.row_coords[i][k] - m.row_coords(static_cast<Eigen::Index>(i), kk)));
      }
      for (std::size_t j = 0; j < t[0].size(); ++j) {
        worst_coord = std::max(
            worst_coord, std::abs(s * ref.col_coords[j][k] - m.col_coords(static_cast<Eigen::Index>(j), kk)));
      }
    }
  }
  const double secs = Seconds(start);
  const bool pass = rank_mismatch == 0 && worst_eig <= 1e-10 && worst_coord <= 1e-10 && secs < 10.0;
  return {pass, Fmt("max |dl|=%.2e, max |dcoord|=%.2e, %.2fs", worst_eig, worst_coord, secs) +
                    ", rank mismatches=" + std::to_string(rank_mismatch)};
}

Outcome InertiaIdentity(const std::vector<Table>& tables) {
  double worst = 0.0;
  for (const Table& t : tables) {
    const CorrespondenceModel m = Fit(ContingencyTable::FromDense(t));
    worst = std::max(worst, std::abs(m.eigenvalues.sum() - oracle::InertiaFromDefinition(t)));
  }
  return {worst <= 1e-10, Fmt("max |sum l - inertia|=%.2e", worst)};
}

Outcome Duality(const std::vector<Table>& tables) {
  double worst = 0.0;
  int rank_mismatch = 0;
  for (const Table& t : tables) {
    const ContingencyTable ct = ContingencyTable::FromDense(t);
    const CorrespondenceModel a = Fit(ct);
    const CorrespondenceModel b = Fit(Transpose(ct));
    if (a.rank() != b.rank()) {
      ++rank_mismatch;
      continue;
    }
    worst = std::max(worst, (a.eigenvalues - b.eigenvalues).cwiseAbs().maxCoeff());
  }
  return {rank_mismatch == 0 && worst <= 1e-10,
          Fmt("max |l(T) - l(T')|=%.2e", worst) + ", rank mismatches=" +
              std::to_string(rank_mismatch)};
}

Outcome CentroidSuite() {
  std::mt19937_64 rng(4242);
  std::uniform_int_distribution<std::size_t> rows(4, 15), cols(3, 10);
  double worst_a = 0.0, worst_b = 0.0, worst_c = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const Table t = oracle::RandomCounts(rng, rows(rng), cols(rng));
    const ContingencyTable ct = ContingencyTable::FromDense(t);
    const CorrespondenceModel m = Fit(ct);
    const std::size_t n = t.size();

    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    const std::size_t twin = pick(rng);
    // Random group of at least two members.
    std::vector<std::size_t> group;
    while (group.size() < 2) {
      group.clear();
      for (std::size_t i = 0; i < n; ++i) {
        if (rng() % 2) group.push_back(i);
      }
    }
    std::vector<Count> colsum(t[0].size(), 0), groupsum(t[0].size(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < t[0].size(); ++j) colsum[j] += t[i][j];
    }
    for (std::size_t i : group) {
      for (std::size_t j = 0; j < t[0].size(); ++j) groupsum[j] += t[i][j];
    }
    const ContingencyTable sup = ContingencyTable::FromDense(
        {"twin", "all", "group"}, ct.col_labels(), {t[twin], colsum, groupsum});
    const SupplementaryProjection p = ProjectSupplementaryRows(m, sup);

    const auto ti = static_cast<Eigen::Index>(twin);
    worst_a = std::max(worst_a, (p.coords.row(0) - m.row_coords.row(ti)).cwiseAbs().maxCoeff());
    worst_b = std::max(worst_b, p.coords.row(1).cwiseAbs().maxCoeff());
    Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(m.rank()));
    double mass = 0.0;
    for (std::size_t i : group) {
      const auto ii = static_cast<Eigen::Index>(i);
      mean += m.row_masses(ii) * m.row_coords.row(ii);
      mass += m.row_masses(ii);
    }
    mean /= mass;
    worst_c = std::max(worst_c, (p.coords.row(2) - mean).cwiseAbs().maxCoeff());
  }
  const bool pass = worst_a <= 1e-10 && worst_b <= 1e-10 && worst_c <= 1e-10;
  return {pass, Fmt("twin %.2e, full-sum %.2e, group mean %.2e", worst_a, worst_b, worst_c)};
}

Outcome Chi2Isometry() {
  std::mt19937_64 rng(555);
  std::uniform_int_distribution<std::size_t> rows(3, 14), cols(3, 10);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const Table t = oracle::RandomCounts(rng, rows(rng), cols(rng));
    const ContingencyTable ct = ContingencyTable::FromDense(t);
    const CorrespondenceModel m = Fit(ct);
    std::uniform_int_distribution<std::size_t> pick(0, t.size() - 1);
    const std::size_t a = pick(rng);
    std::size_t b = pick(rng);
    while (b == a) b = pick(rng);
    const double got = FullSpaceSqDist(m, ct.row_labels()[a], ct.row_labels()[b]);
    worst = std::max(worst, std::abs(got - oracle::Chi2RowDistance(t, a, b)));
  }
  return {worst <= 1e-8, Fmt("max |d2 - chi2|=%.2e", worst)};
}

Outcome PowerLawRecovery() {
  std::string detail;
  bool pass = true;
  for (const double beta : {1.5, 2.0, 2.5}) {
    std::vector<VocabEntry> entries;
    for (std::size_t r = 1; r <= 200; ++r) {
      char term[16];
      std::snprintf(term, sizeof(term), "t%03zu", r);
      const auto f = static_cast<std::uint64_t>(std::llround(1e6 * std::pow(r, -beta)));
      entries.push_back({term, f, r});
    }
    const PowerLawFit fit = FitLogLog(RankFrequencyOf(Vocabulary::FromEntries(entries)));
    const bool ok = std::abs(fit.slope + beta) <= 0.02 && fit.r_squared >= 0.999;
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += Fmt("b=%.1f slope=%.4f R2=%.5f", beta, fit.slope, fit.r_squared);
  }
  return {pass, detail};
}

Outcome AggregationDirection() {
  int wins = 0;
  for (int run = 0; run < 20; ++run) {
    std::mt19937_64 rng(1000 + static_cast<std::uint64_t>(run));
    const Table t = oracle::RandomCounts(rng, 500, 50, 6);
    const AggregationProtocolResult r =
        RunAggregationProtocol(ContingencyTable::FromDense(t), 100, GroupOrdering::kGiven);
    if (r.reports[0].ssd < r.reports[1].ssd) ++wins;
  }
  return {wins >= 15, "AggOntoFull < FullOntoAgg in " + std::to_string(wins) + "/20 runs"};
}

LabeledPoints ToLabeled(const oracle::Dense& p) {
  LabeledPoints out;
  out.coords.resize(static_cast<Eigen::Index>(p.size()), static_cast<Eigen::Index>(p[0].size()));
  for (std::size_t i = 0; i < p.size(); ++i) {
    char label[16];
    std::snprintf(label, sizeof(label), "p%02zu", i);
    out.labels.push_back(label);
    for (std::size_t k = 0; k < p[0].size(); ++k) {
      out.coords(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = p[i][k];
    }
  }
  return out;
}

oracle::Dense RandomPoints(std::mt19937_64& rng, std::size_t n, std::size_t dim) {
  std::normal_distribution<double> g(0.0, 1.0);
  oracle::Dense p(n, std::vector<double>(dim));
  for (auto& row : p) {
    for (auto& v : row) v = g(rng);
  }
  return p;
}

Outcome NnChainCorrectness() {
  const auto start = Clock::now();
  std::mt19937_64 rng(8080);
  int mismatches = 0;
  double worst_height = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const oracle::Dense p = RandomPoints(rng, 40, 3);
    const LabeledPoints lp = ToLabeled(p);
    for (const bool ward : {true, false}) {
      const Dendrogram d = NnChainCluster(lp, ward ? Linkage::kWard : Linkage::kAverage);
      std::vector<double> heights;
      const auto expected = oracle::NaiveAgglomeration(p, ward, &heights);
      if (oracle::ReplayMerges(p.size(), d.merges) != expected) ++mismatches;
      for (std::size_t s = 0; s < heights.size() && s < d.merges.size(); ++s) {
        worst_height = std::max(worst_height, std::abs(heights[s] - d.merges[s].height));
      }
    }
  }
  const double secs = Seconds(start);
  return {mismatches == 0 && worst_height <= 1e-9 && secs < 5.0,
          std::to_string(mismatches) + "/40 partition mismatches" +
              Fmt(", max |dh|=%.2e, %.2fs", worst_height, secs)};
}

Outcome ReciprocalNn() {
  std::mt19937_64 rng(31337);
  std::uniform_int_distribution<std::size_t> size(3, 40);
  int mismatches = 0;
  for (int trial = 0; trial < 30; ++trial) {
    const oracle::Dense p = RandomPoints(rng, size(rng), 2);
    const LabeledPoints lp = ToLabeled(p);
    std::set<std::pair<std::string, std::string>> got, want;
    for (auto [a, b] : ReciprocalPairs(lp)) {
      if (b < a) std::swap(a, b);
      got.insert({a, b});
    }
    for (const auto& [a, b] : oracle::ReciprocalIndexPairs(p)) {
      want.insert({lp.labels[a], lp.labels[b]});
    }
    if (got != want) ++mismatches;
  }
  LabeledPoints fig;
  fig.labels = {"a", "b", "c", "d"};
  fig.coords.resize(4, 1);
  fig.coords << 0.0, 2.0, 3.5, 4.0;
  const auto pairs = ReciprocalPairs(fig);
  const bool fig_ok = pairs.size() == 1 &&
                      ((pairs[0].first == "c" && pairs[0].second == "d") ||
                       (pairs[0].first == "d" && pairs[0].second == "c"));
  return {mismatches == 0 && fig_ok, std::to_string(mismatches) +
                                         "/30 mismatches; a/b/c/d pairs=" +
                                         std::to_string(pairs.size()) +
                                         (fig_ok ? " (c,d)" : " (wrong)")};
}

Outcome XmlGolden() {
  const fs::path golden = fs::path(CAFACTOR_SOURCE_DIR) / "tests/golden/club_rice_pudding.xml";
  std::ifstream in(golden, std::ios::binary);
  if (!in) return {false, "cannot read " + golden.string()};
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string want = ss.str();

  const FactorRecord rec{"mm000001102.txt", "\"21\" Club Rice Pudding", -0.7341409, -0.09961348,
                         "\"21\" Club Rice Pudding\n\n1 c Rice & 4 c milk\n1/2 c Sugar\n"
                         "Bake at 350 < 30 min > 20 min."};
  std::ostringstream first;
  ExportXml(std::span<const FactorRecord>(&rec, 1), first);
  const std::vector<FactorRecord> parsed = ParseXml(first.str());
  std::ostringstream second;
  ExportXml(parsed, second);
  const bool golden_ok = first.str() == want;
  const bool stable = second.str() == first.str() && parsed.size() == 1 && parsed[0] == rec;
  return {golden_ok && stable, std::string("golden ") + (golden_ok ? "identical" : "differs") +
                                   ", round trip " + (stable ? "byte-stable" : "unstable")};
}

Outcome BboxOracle() {
  std::mt19937_64 rng(2468);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<FactorRecord> recs;
  for (int i = 0; i < 100; ++i) {
    char id[16];
    std::snprintf(id, sizeof(id), "doc%03d", 99 - i);
    recs.push_back({id, "", u(rng), u(rng), ""});
  }
  int mismatches = 0;
  for (int b = 0; b < 50; ++b) {
    double x0 = u(rng), x1 = u(rng), y0 = u(rng), y1 = u(rng);
    if (x0 > x1) std::swap(x0, x1);
    if (y0 > y1) std::swap(y0, y1);
    const BoundingBox box = BoundingBox::Make(x0, x1, y0, y1);
    std::vector<std::string> want;
    for (const auto& r : recs) {
      if (x0 <= r.xcoord && r.xcoord <= x1 && y0 <= r.ycoord && r.ycoord <= y1) {
        want.push_back(r.id);
      }
    }
    std::sort(want.begin(), want.end());
    if (BboxQuery(recs, box) != want) ++mismatches;
  }
  // Degenerate box on one record's exact coordinates.
  const FactorRecord& pin = recs[17];
  const auto hit = BboxQuery(recs, BoundingBox::Make(pin.xcoord, pin.xcoord, pin.ycoord, pin.ycoord));
  const bool inclusive = hit == std::vector<std::string>{pin.id};
  return {mismatches == 0 && inclusive, std::to_string(mismatches) + "/50 box mismatches, " +
                                            (inclusive ? "inclusive boundary ok"
                                                       : "inclusive boundary failed")};
}

Outcome EndToEndDeterminism() {
  const auto start = Clock::now();
  const fs::path config_path = fs::path(CAFACTOR_SOURCE_DIR) / "data/toy/pipeline.json";
  const fs::path base = fs::temp_directory_path() / "cafactor_acceptance";
  fs::remove_all(base);
  std::vector<std::string> manifests;
  std::vector<std::vector<ManifestEntry>> files;
  for (int run = 0; run < 2; ++run) {
    PipelineConfig config = PipelineConfig::FromJsonFile(config_path);
    config.output_dir = base / ("run" + std::to_string(run));
    const PipelineResult r = RunPipeline(config);
    std::ifstream in(r.manifest_path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    manifests.push_back(ss.str());
    files.push_back(r.files);
  }
  fs::remove_all(base);
  const double secs = Seconds(start);
  bool same = manifests[0] == manifests[1] && files[0].size() == files[1].size();
  for (std::size_t i = 0; same && i < files[0].size(); ++i) {
    same = files[0][i].sha256 == files[1][i].sha256 && files[0][i].path == files[1][i].path;
  }
  return {same && !files[0].empty() && secs < 30.0,
          std::to_string(files[0].size()) + " files, manifests " +
              (same ? "identical" : "differ") + Fmt(", %.2fs", secs)};
}

}  // namespace

int main() {
  const std::vector<Table> tables = SmallTables();
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"CA oracle equivalence", [&] { return OracleEquivalence(tables); }},
      {"inertia identity", [&] { return InertiaIdentity(tables); }},
      {"row/column duality", [&] { return Duality(tables); }},
      {"centroid and supplementary projection", CentroidSuite},
      {"chi-squared isometry", Chi2Isometry},
      {"power-law recovery", PowerLawRecovery},
      {"aggregation protocol direction", AggregationDirection},
      {"NN-chain vs naive agglomeration", NnChainCorrectness},
      {"reciprocal nearest neighbours", ReciprocalNn},
      {"XML golden and round trip", XmlGolden},
      {"bounding-box query vs linear scan", BboxOracle},
      {"end-to-end determinism", EndToEndDeterminism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str());
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
