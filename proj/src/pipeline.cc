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

#include "cafactor/pipeline.h"

#include <openssl/evp.h>

#include <algorithm>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iterator>
#include <memory>
#include <random>
#include <sstream>

#include "cafactor/export_query.h"
#include "cafactor/matrix.h"
#include "cafactor/powerlaw.h"
#include "json.hpp"

namespace cafactor {

namespace fs = std::filesystem;

namespace {

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Collects output files in creation order.
class OutputDir {
 public:
  explicit OutputDir(fs::path dir) : dir_(std::move(dir)) {}

  template <typename Writer>
  void Write(const std::string& name, Writer&& writer) {
    std::ofstream out(dir_ / name, std::ios::binary);
    if (!out) throw DataError("cannot write '" + (dir_ / name).string() + "'");
    writer(out);
    out.close();
    if (!out) throw DataError("failed writing '" + (dir_ / name).string() + "'");
    names_.push_back(name);
  }

  const fs::path& dir() const { return dir_; }
  const std::vector<std::string>& names() const { return names_; }

 private:
  fs::path dir_;
  std::vector<std::string> names_;
};

template <typename Fn>
auto Stage(const std::string& name, Fn&& fn) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(name, e);
  }
}

std::string StemPrefix(const fs::path& p) { return p.stem().string() + "-"; }

}  // namespace

PipelineConfig PipelineConfig::FromJson(std::string_view text,
                                        const fs::path& base_dir) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("config is not valid JSON: ") + e.what());
  }
  PipelineConfig c;
  auto resolve = [&](const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  };
  try {
    for (const auto& p : j.at("inputs")) c.inputs.push_back(resolve(p.get<std::string>()));
    c.delimiter = j.value("delimiter", c.delimiter);
    c.encoding = ParseEncoding(j.value("encoding", std::string("latin1")));
    c.top_k = j.value("top_k", c.top_k);
    c.min_term_length = j.value("min_term_length", c.min_term_length);
    c.group_size = j.value("group_size", c.group_size);
    if (j.contains("orderings")) {
      c.orderings.clear();
      for (const auto& o : j["orderings"]) {
        c.orderings.push_back(ParseGroupOrdering(o.get<std::string>()));
      }
    }
    c.linkage = ParseLinkage(j.value("linkage", std::string("ward")));
    if (j.contains("fit")) {
      c.fit.relative_cutoff = j["fit"].value("relative_cutoff", c.fit.relative_cutoff);
      c.fit.absolute_cutoff = j["fit"].value("absolute_cutoff", c.fit.absolute_cutoff);
    }
    if (j.contains("stages")) {
      const auto& s = j["stages"];
      c.run_experiment = s.value("experiment", c.run_experiment);
      c.run_neighbors = s.value("neighbors", c.run_neighbors);
      c.run_export = s.value("export", c.run_export);
      c.run_powerlaw = s.value("powerlaw", c.run_powerlaw);
    }
    c.output_dir = resolve(j.value("output_dir", std::string("out")));
    c.seed = j.value("seed", c.seed);
    c.threads = j.value("threads", c.threads);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad config: ") + e.what());
  }
  if (c.inputs.empty()) throw DataError("config lists no inputs");
  if (c.top_k < 1) throw BoundsError("top_k must be at least 1");
  if (c.threads < 1) throw BoundsError("threads must be at least 1");
  return c;
}

PipelineConfig PipelineConfig::FromJsonFile(const fs::path& path) {
  return FromJson(ReadFile(path), path.parent_path());
}

std::string Sha256Hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return hex.str();
}

std::string Sha256File(const fs::path& path) { return Sha256Hex(ReadFile(path)); }

PipelineResult RunPipeline(const PipelineConfig& config) {
  Stage("config", [&] {
    for (const auto& p : config.inputs) {
      if (!fs::is_regular_file(p)) {
        throw DataError("input '" + p.string() + "' does not exist");
      }
    }
    return 0;
  });
  std::error_code ec;
  fs::create_directories(config.output_dir, ec);
  if (ec) {
    throw StageError("config", DataError("cannot create output directory '" +
                                         config.output_dir.string() + "'"));
  }
  const fs::path manifest_path = config.output_dir / "manifest.json";
  fs::remove(manifest_path, ec);

  OutputDir out(config.output_dir);

  const RecordSet records = Stage("ingest", [&] {
    const DelimiterRule rule = DelimiterRule::Parse(config.delimiter);
    RecordSet all;
    for (const auto& p : config.inputs) {
      all.Append(SplitRecords(ReadFile(p), rule, config.encoding, StemPrefix(p),
                              p.filename().string()));
    }
    out.Write("records.jsonl", [&](std::ostream& o) { WriteRecordsJsonl(all, o); });
    return all;
  });

  const auto streams = TokenizeRecords(records, config.threads);
  const Vocabulary vocab = Stage("vocab", [&] {
    Vocabulary v = BuildVocabulary(streams);
    out.Write("vocab.tsv", [&](std::ostream& o) { WriteVocabularyTsv(v, o); });
    return v;
  });

  const ContingencyTable table = Stage("matrix", [&] {
    const Vocabulary filtered = FilterByLength(vocab, config.min_term_length);
    const Vocabulary top = TopTerms(filtered, std::min(config.top_k, filtered.size()));
    BuildResult built = BuildTable(std::span<const TokenStream>(streams), top);
    out.Write("table.tsv", [&](std::ostream& o) { WriteTableTsv(built.table, o); });
    out.Write("empty_records.txt", [&](std::ostream& o) {
      for (const auto& id : built.empty_records) o << id << '\n';
    });
    return built.table;
  });

  const CorrespondenceModel model = Stage("fit", [&] {
    CorrespondenceModel m = Fit(table, config.fit);
    out.Write("model.bin", [&](std::ostream& o) { WriteModel(m, o); });
    out.Write("eig.tsv", [&](std::ostream& o) {
      o << "factor\teigenvalue\tpercent\tcumulative\n";
      for (const auto& r : EigenReport(m)) {
        o << r.factor << '\t' << std::setprecision(17) << r.eigenvalue << '\t'
          << r.percent << '\t' << r.cumulative_percent << '\n';
      }
    });
    out.Write("row_coords.tsv",
              [&](std::ostream& o) { WriteCoordsTsv(m.row_labels, m.row_coords, o); });
    out.Write("col_coords.tsv",
              [&](std::ostream& o) { WriteCoordsTsv(m.col_labels, m.col_coords, o); });
    if (m.rank() > 0) {
      const Contributions ctr = ComputeContributions(m);
      out.Write("contributions.tsv", [&](std::ostream& o) {
        o << "factor\tstrongest_row\trow_ctr\tstrongest_col\tcol_ctr\n";
        for (std::size_t k = 0; k < m.rank(); ++k) {
          const auto kk = static_cast<Eigen::Index>(k);
          const auto ri = static_cast<Eigen::Index>(ctr.row_argmax[k]);
          const auto ci = static_cast<Eigen::Index>(ctr.col_argmax[k]);
          o << k + 1 << '\t' << m.row_labels[ctr.row_argmax[k]] << '\t'
            << std::setprecision(17) << ctr.row_ctr(ri, kk) << '\t'
            << m.col_labels[ctr.col_argmax[k]] << '\t' << ctr.col_ctr(ci, kk) << '\n';
        }
      });
    }
    return m;
  });

  if (config.run_powerlaw) {
    Stage("powerlaw", [&] {
      const RankFrequency rf = RankFrequencyOf(vocab);
      const PowerLawFit fit = FitLogLog(rf);
      out.Write("fit.json", [&](std::ostream& o) { WriteFitJson(fit, o); });
      out.Write("loglog.csv", [&](std::ostream& o) { WriteLogLogCsv(rf, o); });
      return 0;
    });
  }

  if (config.run_experiment) {
    Stage("experiment", [&] {
      // Records without any kept term cannot be profiled.
      const std::vector<Count> totals = table.RowTotals();
      std::vector<std::size_t> nonzero;
      for (std::size_t i = 0; i < totals.size(); ++i) {
        if (totals[i] > 0) nonzero.push_back(i);
      }
      if (config.group_size < 1) throw BoundsError("group_size must be at least 1");
      const std::size_t keep = nonzero.size() - nonzero.size() % config.group_size;
      if (keep < 2 * config.group_size) {
        throw DataError("too few non-empty rows for groups of " +
                        std::to_string(config.group_size));
      }
      std::vector<std::size_t> kept;
      if (keep != nonzero.size()) {
        // Seeded subsample down to a multiple of the group size.
        std::mt19937_64 rng(config.seed);
        std::sample(nonzero.begin(), nonzero.end(), std::back_inserter(kept), keep, rng);
      } else {
        kept = nonzero;
      }
      const ContingencyTable exp_table = table.SelectRows(kept);
      for (const GroupOrdering ordering : config.orderings) {
        const auto result = RunAggregationProtocol(exp_table, config.group_size, ordering);
        const std::string name = ordering == GroupOrdering::kGiven
                                     ? "report_given.json"
                                     : "report_factor1.json";
        out.Write(name, [&](std::ostream& o) {
          WriteProtocolJson(result, config.group_size, ordering, o);
        });
      }
      return 0;
    });
  }

  if (config.run_neighbors) {
    Stage("neighbors", [&] {
      const LabeledPoints points = RowPoints(model);
      out.Write("rnn.tsv", [&](std::ostream& o) {
        for (const auto& [a, b] : ReciprocalPairs(points)) o << a << '\t' << b << '\n';
      });
      const Dendrogram d = NnChainCluster(points, config.linkage);
      out.Write("dendro.json",
                [&](std::ostream& o) { WriteDendrogramJson(d, config.linkage, o); });
      return 0;
    });
  }

  if (config.run_export) {
    Stage("export", [&] {
      const auto docs = MakeFactorRecords(model, records);
      out.Write("corpus.xml", [&](std::ostream& o) { ExportXml(docs, o); });
      return 0;
    });
  }

  PipelineResult result;
  result.manifest_path = manifest_path;
  for (const auto& name : out.names()) {
    const fs::path p = config.output_dir / name;
    result.files.push_back({name, fs::file_size(p), Sha256File(p)});
  }
  nlohmann::ordered_json manifest;
  manifest["threads"] = config.threads;
  manifest["seed"] = config.seed;
  manifest["files"] = nlohmann::ordered_json::array();
  for (const auto& f : result.files) {
    manifest["files"].push_back({{"path", f.path}, {"bytes", f.bytes}, {"sha256", f.sha256}});
  }
  std::ofstream mout(manifest_path, std::ios::binary);
  mout << manifest.dump(2) << '\n';
  if (!mout) throw StageError("manifest", DataError("cannot write manifest"));
  return result;
}

}  // namespace cafactor
