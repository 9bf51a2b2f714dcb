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

// cafactor: command-line front end for the correspondence analysis toolkit.

#include <array>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cafactor/ca.h"
#include "cafactor/corpus.h"
#include "cafactor/errors.h"
#include "cafactor/experiments.h"
#include "cafactor/export_query.h"
#include "cafactor/matrix.h"
#include "cafactor/neighbors.h"
#include "cafactor/pipeline.h"
#include "cafactor/powerlaw.h"

namespace {

using namespace cafactor;

std::string Slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ifstream OpenIn(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  return in;
}

// Writes to `path`, or stdout when path is empty or "-".
template <typename Fn>
void WriteTo(const std::string& path, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  fn(out);
  if (!out) throw DataError("failed writing '" + path + "'");
}

std::string Num(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

std::array<std::size_t, 2> ParsePlane(const std::string& spec) {
  const auto comma = spec.find(',');
  std::array<std::size_t, 2> plane{0, 0};
  const auto parse = [&](std::size_t b, std::size_t e, std::size_t& v) {
    const auto [p, ec] = std::from_chars(spec.data() + b, spec.data() + e, v);
    return ec == std::errc() && p == spec.data() + e;
  };
  if (comma == std::string::npos || !parse(0, comma, plane[0]) ||
      !parse(comma + 1, spec.size(), plane[1]) || plane[0] < 1 || plane[1] < 1) {
    throw BoundsError("plane must be A,B with 1-based factor numbers");
  }
  return plane;
}

LabeledPoints PointsFor(const CorrespondenceModel& model, const std::string& side) {
  if (side == "rows") return RowPoints(model);
  if (side == "cols") return ColPoints(model);
  throw BoundsError("side must be 'rows' or 'cols'");
}

void Require(const std::string& value, const char* flag) {
  if (value.empty()) throw BoundsError(std::string("missing required option ") + flag);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Correspondence analysis of term-document data"};
  app.require_subcommand(1);
  int threads = 1;
  app.add_option("--threads", threads, "Worker threads for tokenization")
      ->check(CLI::PositiveNumber);

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Split raw text files into records");
  std::vector<std::string> ingest_inputs;
  std::string ingest_delim = "-----", ingest_encoding = "latin1", ingest_out;
  ingest->add_option("--input", ingest_inputs, "Input text file(s)")->required();
  ingest->add_option("--delimiter", ingest_delim,
                     "Literal record-separator line, or count:N for N-line records");
  ingest->add_option("--encoding", ingest_encoding, "latin1 or utf8");
  ingest->add_option("--out", ingest_out, "records.jsonl")->required();

  // vocab
  auto* vocab_cmd = app.add_subcommand("vocab", "Ranked vocabulary from records");
  std::string vocab_records, vocab_out;
  vocab_cmd->add_option("--records", vocab_records, "records.jsonl")->required();
  vocab_cmd->add_option("--out", vocab_out, "vocab.tsv")->required();

  // matrix [aggregate]
  auto* matrix_cmd = app.add_subcommand("matrix", "Build or aggregate a contingency table");
  matrix_cmd->require_subcommand(0, 1);
  std::string matrix_records, matrix_vocab, matrix_out, matrix_empty_out;
  std::size_t matrix_top_k = 0, matrix_min_len = 1;
  matrix_cmd->add_option("--records", matrix_records, "records.jsonl");
  matrix_cmd->add_option("--vocab", matrix_vocab, "vocab.tsv");
  matrix_cmd->add_option("--top-k", matrix_top_k, "Keep the K most frequent terms");
  matrix_cmd->add_option("--min-length", matrix_min_len, "Minimum term length");
  matrix_cmd->add_option("--out", matrix_out, "table.tsv");
  matrix_cmd->add_option("--empty-out", matrix_empty_out,
                         "Write ids of records without any vocabulary term");
  auto* aggregate_cmd = matrix_cmd->add_subcommand("aggregate", "Sum row groups");
  std::string agg_table, agg_groups, agg_out;
  std::size_t agg_group_size = 0;
  aggregate_cmd->add_option("--table", agg_table, "table.tsv")->required();
  aggregate_cmd->add_option("--groups", agg_groups, "groups.tsv (group<TAB>row)");
  aggregate_cmd->add_option("--group-size", agg_group_size,
                            "Consecutive blocks instead of a groups file");
  aggregate_cmd->add_option("--out", agg_out, "Output table.tsv");

  // ca fit|project|plot
  auto* ca_cmd = app.add_subcommand("ca", "Correspondence analysis");
  ca_cmd->require_subcommand(1);
  auto* fit_cmd = ca_cmd->add_subcommand("fit", "Fit a model");
  std::string fit_table, fit_out, fit_report;
  fit_cmd->add_option("--table", fit_table, "table.tsv")->required();
  fit_cmd->add_option("--out", fit_out, "model.bin")->required();
  fit_cmd->add_option("--report", fit_report, "eig.tsv");
  auto* project_cmd = ca_cmd->add_subcommand("project", "Project supplementary elements");
  std::string proj_model, proj_sup, proj_out;
  bool proj_cols = false;
  project_cmd->add_option("--model", proj_model, "model.bin")->required();
  project_cmd->add_option("--sup", proj_sup, "Supplementary table.tsv")->required();
  project_cmd->add_option("--out", proj_out, "coords.tsv");
  project_cmd->add_flag("--cols", proj_cols,
                        "Project the columns of --sup instead of its rows");
  auto* plot_cmd = ca_cmd->add_subcommand("plot", "Planar scatter for plotting");
  std::string plot_model, plot_plane = "1,2", plot_out, plot_side = "rows";
  plot_cmd->add_option("--model", plot_model, "model.bin")->required();
  plot_cmd->add_option("--plane", plot_plane, "Factors A,B");
  plot_cmd->add_option("--side", plot_side, "rows or cols");
  plot_cmd->add_option("--out", plot_out, "scatter.csv");

  // powerlaw
  auto* pl_cmd = app.add_subcommand("powerlaw", "Rank-frequency power-law fit");
  std::string pl_vocab, pl_range, pl_out, pl_points;
  pl_cmd->add_option("--vocab", pl_vocab, "vocab.tsv")->required();
  pl_cmd->add_option("--range", pl_range, "Explicit rank regime LO:HI");
  pl_cmd->add_option("--out", pl_out, "fit.json");
  pl_cmd->add_option("--points", pl_points, "loglog.csv");

  // experiment aggregation
  auto* exp_cmd = app.add_subcommand("experiment", "Projection quality experiments");
  exp_cmd->require_subcommand(1);
  auto* exp_agg = exp_cmd->add_subcommand("aggregation", "Aggregate vs full projections");
  std::string exp_table, exp_ordering = "given", exp_out;
  std::size_t exp_group_size = 100;
  exp_agg->add_option("--table", exp_table, "table.tsv")->required();
  exp_agg->add_option("--group-size", exp_group_size, "Rows per group");
  exp_agg->add_option("--ordering", exp_ordering, "given or factor1");
  exp_agg->add_option("--out", exp_out, "report.json");

  // neighbors knn|rnn|cluster|pairs
  auto* nb_cmd = app.add_subcommand("neighbors", "Factor-space neighbours");
  nb_cmd->require_subcommand(1);
  std::string nb_model, nb_side = "rows";
  auto* knn_cmd = nb_cmd->add_subcommand("knn", "k nearest neighbours");
  std::string knn_label;
  std::size_t knn_k = 3;
  knn_cmd->add_option("--model", nb_model, "model.bin")->required();
  knn_cmd->add_option("--label", knn_label, "Query label")->required();
  knn_cmd->add_option("--k", knn_k, "Neighbours to report");
  knn_cmd->add_option("--side", nb_side, "rows or cols");
  auto* rnn_cmd = nb_cmd->add_subcommand("rnn", "Reciprocal nearest neighbour pairs");
  rnn_cmd->add_option("--model", nb_model, "model.bin")->required();
  rnn_cmd->add_option("--side", nb_side, "rows or cols");
  auto* cluster_cmd = nb_cmd->add_subcommand("cluster", "NN-chain hierarchical clustering");
  std::string cluster_linkage = "ward", cluster_out;
  cluster_cmd->add_option("--model", nb_model, "model.bin")->required();
  cluster_cmd->add_option("--linkage", cluster_linkage, "ward or average");
  cluster_cmd->add_option("--out", cluster_out, "dendro.json");
  cluster_cmd->add_option("--side", nb_side, "rows or cols");
  auto* pairs_cmd = nb_cmd->add_subcommand("pairs", "Planar distances of labeled pairs");
  std::string pairs_file, pairs_plane = "1,2", pairs_out, pairs_side = "cols";
  pairs_cmd->add_option("--model", nb_model, "model.bin")->required();
  pairs_cmd->add_option("--pairs", pairs_file, "pairs.tsv (labelA<TAB>labelB)")->required();
  pairs_cmd->add_option("--plane", pairs_plane, "Factors A,B");
  pairs_cmd->add_option("--side", pairs_side, "rows or cols");
  pairs_cmd->add_option("--out", pairs_out, "links.csv");

  // export xml
  auto* export_cmd = app.add_subcommand("export", "Export factor-annotated documents");
  export_cmd->require_subcommand(1);
  auto* xml_cmd = export_cmd->add_subcommand("xml", "Search-index XML");
  std::string xml_model, xml_records, xml_out;
  xml_cmd->add_option("--model", xml_model, "model.bin")->required();
  xml_cmd->add_option("--records", xml_records, "records.jsonl")->required();
  xml_cmd->add_option("--out", xml_out, "corpus.xml");

  // query bbox|around
  auto* query_cmd = app.add_subcommand("query", "Bounding-box queries");
  query_cmd->require_subcommand(1);
  auto* bbox_cmd = query_cmd->add_subcommand("bbox", "Documents inside a box");
  std::string q_xml, q_box;
  bbox_cmd->add_option("--xml", q_xml, "corpus.xml")->required();
  bbox_cmd->add_option("--box", q_box, "XMIN,XMAX,YMIN,YMAX")->required();
  auto* around_cmd = query_cmd->add_subcommand("around", "Documents near a term");
  std::string q_model, q_label;
  double q_dx = 0.1, q_dy = 0.1;
  around_cmd->add_option("--model", q_model, "model.bin")->required();
  around_cmd->add_option("--xml", q_xml, "corpus.xml")->required();
  around_cmd->add_option("--label", q_label, "Column (term) label")->required();
  around_cmd->add_option("--dx", q_dx, "Half width");
  around_cmd->add_option("--dy", q_dy, "Half height");

  // run
  auto* run_cmd = app.add_subcommand("run", "Run the whole pipeline from a config file");
  std::string run_config, run_out_dir;
  std::uint64_t run_seed = 0;
  run_cmd->add_option("--config", run_config, "pipeline.json")->required();
  run_cmd->add_option("--out-dir", run_out_dir, "Override output_dir");
  auto* seed_opt = run_cmd->add_option("--seed", run_seed, "Override seed");
  auto* run_threads_opt = run_cmd->add_option("--threads", threads, "Override threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ExitCode::kUsage);
  }

  try {
    if (*ingest) {
      const DelimiterRule rule = DelimiterRule::Parse(ingest_delim);
      const Encoding enc = ParseEncoding(ingest_encoding);
      RecordSet all;
      for (const auto& path : ingest_inputs) {
        const std::filesystem::path p(path);
        all.Append(SplitRecords(Slurp(path), rule, enc, p.stem().string() + "-",
                                p.filename().string()));
      }
      WriteTo(ingest_out, [&](std::ostream& o) { WriteRecordsJsonl(all, o); });
      std::cerr << all.size() << " records\n";
    } else if (*vocab_cmd) {
      auto in = OpenIn(vocab_records);
      const RecordSet records = ReadRecordsJsonl(in);
      const auto streams = TokenizeRecords(records, threads);
      const Vocabulary v = BuildVocabulary(streams);
      WriteTo(vocab_out, [&](std::ostream& o) { WriteVocabularyTsv(v, o); });
      std::cerr << v.size() << " terms\n";
    } else if (*matrix_cmd && !*aggregate_cmd) {
      Require(matrix_records, "--records");
      Require(matrix_vocab, "--vocab");
      Require(matrix_out, "--out");
      auto rin = OpenIn(matrix_records);
      auto vin = OpenIn(matrix_vocab);
      const RecordSet records = ReadRecordsJsonl(rin);
      Vocabulary v = FilterByLength(ReadVocabularyTsv(vin), matrix_min_len);
      if (matrix_top_k > 0) v = TopTerms(v, matrix_top_k);
      const BuildResult built = BuildTable(records, v, threads);
      WriteTo(matrix_out, [&](std::ostream& o) { WriteTableTsv(built.table, o); });
      if (!matrix_empty_out.empty()) {
        WriteTo(matrix_empty_out, [&](std::ostream& o) {
          for (const auto& id : built.empty_records) o << id << '\n';
        });
      }
      std::cerr << built.table.rows() << "x" << built.table.cols() << " table, "
                << built.empty_records.size() << " records without vocabulary terms\n";
    } else if (*aggregate_cmd) {
      auto in = OpenIn(agg_table);
      const ContingencyTable table = ReadTableTsv(in);
      RowGrouping grouping;
      if (!agg_groups.empty()) {
        auto gin = OpenIn(agg_groups);
        grouping = ReadGroupsTsv(gin, table);
      } else if (agg_group_size > 0) {
        grouping = RowGrouping::Consecutive(table.rows(), agg_group_size);
      } else {
        throw BoundsError("matrix aggregate needs --groups or --group-size");
      }
      const ContingencyTable agg = AggregateRows(table, grouping);
      WriteTo(agg_out, [&](std::ostream& o) { WriteTableTsv(agg, o); });
    } else if (*fit_cmd) {
      auto in = OpenIn(fit_table);
      const CorrespondenceModel model = Fit(ReadTableTsv(in));
      WriteTo(fit_out, [&](std::ostream& o) { WriteModel(model, o); });
      const auto report = EigenReport(model);
      auto write_report = [&](std::ostream& o) {
        o << "factor\teigenvalue\tpercent\tcumulative\n";
        for (const auto& r : report) {
          o << r.factor << '\t' << Num(r.eigenvalue) << '\t' << Num(r.percent) << '\t'
            << Num(r.cumulative_percent) << '\n';
        }
      };
      if (!fit_report.empty()) WriteTo(fit_report, write_report);
      std::cerr << "rank " << model.rank() << ", total inertia "
                << Num(model.total_inertia) << '\n';
    } else if (*project_cmd) {
      auto min = OpenIn(proj_model);
      auto sin = OpenIn(proj_sup);
      const CorrespondenceModel model = ReadModel(min);
      const ContingencyTable sup = ReadTableTsv(sin);
      const SupplementaryProjection proj = proj_cols ? ProjectSupplementaryCols(model, sup)
                                                     : ProjectSupplementaryRows(model, sup);
      WriteTo(proj_out, [&](std::ostream& o) { WriteCoordsTsv(proj.labels, proj.coords, o); });
      for (const auto& e : proj.errors) {
        std::cerr << "warning: " << e.label << ": " << e.message << '\n';
      }
    } else if (*plot_cmd) {
      auto in = OpenIn(plot_model);
      const CorrespondenceModel model = ReadModel(in);
      const auto plane = ParsePlane(plot_plane);
      if (plane[0] > model.rank() || plane[1] > model.rank()) {
        throw DegenerateError("model has only " + std::to_string(model.rank()) + " factors");
      }
      const Contributions ctr = ComputeContributions(model);
      const bool rows = plot_side == "rows";
      if (!rows && plot_side != "cols") throw BoundsError("side must be 'rows' or 'cols'");
      const auto& labels = rows ? model.row_labels : model.col_labels;
      const auto& coords = rows ? model.row_coords : model.col_coords;
      const auto& masses = rows ? model.row_masses : model.col_masses;
      const auto& c = rows ? ctr.row_ctr : ctr.col_ctr;
      const auto k0 = static_cast<Eigen::Index>(plane[0] - 1);
      const auto k1 = static_cast<Eigen::Index>(plane[1] - 1);
      WriteTo(plot_out, [&](std::ostream& o) {
        o << "label,x,y,mass,ctr1,ctr2\n";
        for (std::size_t i = 0; i < labels.size(); ++i) {
          const auto ii = static_cast<Eigen::Index>(i);
          o << labels[i] << ',' << Num(coords(ii, k0)) << ',' << Num(coords(ii, k1)) << ','
            << Num(masses(ii)) << ',' << Num(c(ii, k0)) << ',' << Num(c(ii, k1)) << '\n';
        }
      });
    } else if (*pl_cmd) {
      auto in = OpenIn(pl_vocab);
      const RankFrequency rf = RankFrequencyOf(ReadVocabularyTsv(in));
      const PowerLawFit fit =
          pl_range.empty() ? FitLogLog(rf) : FitLogLog(rf, ParseRankRange(pl_range));
      WriteTo(pl_out, [&](std::ostream& o) { WriteFitJson(fit, o); });
      if (!pl_points.empty()) {
        WriteTo(pl_points, [&](std::ostream& o) { WriteLogLogCsv(rf, o); });
      }
    } else if (*exp_agg) {
      auto in = OpenIn(exp_table);
      const ContingencyTable table = ReadTableTsv(in);
      const GroupOrdering ordering = ParseGroupOrdering(exp_ordering);
      const auto result = RunAggregationProtocol(table, exp_group_size, ordering);
      WriteTo(exp_out, [&](std::ostream& o) {
        WriteProtocolJson(result, exp_group_size, ordering, o);
      });
    } else if (*knn_cmd) {
      auto in = OpenIn(nb_model);
      const CorrespondenceModel model = ReadModel(in);
      const NeighborResult r = Nearest(PointsFor(model, nb_side), knn_label, knn_k);
      for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
      for (const auto& m : r.matches) std::cout << m.label << '\t' << Num(m.sqdist) << '\n';
    } else if (*rnn_cmd) {
      auto in = OpenIn(nb_model);
      const CorrespondenceModel model = ReadModel(in);
      for (const auto& [a, b] : ReciprocalPairs(PointsFor(model, nb_side))) {
        std::cout << a << '\t' << b << '\n';
      }
    } else if (*cluster_cmd) {
      auto in = OpenIn(nb_model);
      const CorrespondenceModel model = ReadModel(in);
      const Linkage linkage = ParseLinkage(cluster_linkage);
      const Dendrogram d = NnChainCluster(PointsFor(model, nb_side), linkage);
      WriteTo(cluster_out, [&](std::ostream& o) { WriteDendrogramJson(d, linkage, o); });
    } else if (*pairs_cmd) {
      auto in = OpenIn(nb_model);
      auto pin = OpenIn(pairs_file);
      const CorrespondenceModel model = ReadModel(in);
      const PairLinkReport report =
          PairLinks(PointsFor(model, pairs_side), ReadPairsTsv(pin), ParsePlane(pairs_plane));
      WriteTo(pairs_out, [&](std::ostream& o) { WritePairLinksCsv(report, o); });
    } else if (*xml_cmd) {
      auto min = OpenIn(xml_model);
      auto rin = OpenIn(xml_records);
      const CorrespondenceModel model = ReadModel(min);
      const auto docs = MakeFactorRecords(model, ReadRecordsJsonl(rin));
      std::size_t n = 0;
      WriteTo(xml_out, [&](std::ostream& o) { n = ExportXml(docs, o); });
      std::cerr << n << " documents\n";
    } else if (*bbox_cmd) {
      const auto docs = ParseXml(Slurp(q_xml));
      for (const auto& id : BboxQuery(docs, BoundingBox::Parse(q_box))) {
        std::cout << id << '\n';
      }
    } else if (*around_cmd) {
      auto in = OpenIn(q_model);
      const CorrespondenceModel model = ReadModel(in);
      const BoundingBox box = CenterBox(model, q_label, q_dx, q_dy);
      const auto docs = ParseXml(Slurp(q_xml));
      std::cerr << "box " << Num(box.x_min) << ',' << Num(box.x_max) << ','
                << Num(box.y_min) << ',' << Num(box.y_max) << '\n';
      for (const auto& id : BboxQuery(docs, box)) std::cout << id << '\n';
    } else if (*run_cmd) {
      PipelineConfig config = PipelineConfig::FromJsonFile(run_config);
      if (!run_out_dir.empty()) config.output_dir = run_out_dir;
      if (*seed_opt) config.seed = run_seed;
      if (*run_threads_opt || app.count("--threads") > 0) config.threads = threads;
      const PipelineResult result = RunPipeline(config);
      for (const auto& f : result.files) {
        std::cout << f.sha256 << "  " << f.path << '\n';
      }
      std::cerr << "manifest: " << result.manifest_path.string() << '\n';
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::kData);
  }
  return 0;
}
