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

// End-to-end pipeline driven by a single JSON configuration file.

#ifndef CAFACTOR_PIPELINE_H_
#define CAFACTOR_PIPELINE_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "cafactor/ca.h"
#include "cafactor/corpus.h"
#include "cafactor/errors.h"
#include "cafactor/experiments.h"
#include "cafactor/neighbors.h"

namespace cafactor {

struct PipelineConfig {
  std::vector<std::filesystem::path> inputs;
  std::string delimiter = "-----";
  Encoding encoding = Encoding::kLatin1;
  std::size_t top_k = 1000;         // clipped to the vocabulary size
  std::size_t min_term_length = 1;  // e.g. 3 keeps terms longer than two
  std::size_t group_size = 100;
  std::vector<GroupOrdering> orderings = {GroupOrdering::kGiven,
                                          GroupOrdering::kFactor1};
  Linkage linkage = Linkage::kWard;
  FitOptions fit;
  bool run_experiment = true;
  bool run_neighbors = true;
  bool run_export = true;
  bool run_powerlaw = true;
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 0;
  int threads = 1;

  // Relative paths in the file resolve against the file's directory.
  static PipelineConfig FromJsonFile(const std::filesystem::path& path);
  static PipelineConfig FromJson(std::string_view json,
                                 const std::filesystem::path& base_dir);
};

// An error raised inside a pipeline stage, tagged with the stage name.
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& inner)
      : Error("[" + stage + "] " + inner.what(), inner.code()),
        stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct ManifestEntry {
  std::string path;  // relative to the output directory
  std::uint64_t bytes = 0;
  std::string sha256;
};

struct PipelineResult {
  std::filesystem::path manifest_path;
  std::vector<ManifestEntry> files;
};

// Runs ingest -> vocab -> matrix -> fit, then the enabled analysis stages,
// and finally writes manifest.json listing every produced file with its
// SHA-256. The manifest is written only when every stage succeeded.
PipelineResult RunPipeline(const PipelineConfig& config);

std::string Sha256Hex(std::string_view data);
std::string Sha256File(const std::filesystem::path& path);

}  // namespace cafactor

#endif  // CAFACTOR_PIPELINE_H_
