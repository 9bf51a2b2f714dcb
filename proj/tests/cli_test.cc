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

// Drives the cafactor binary end to end through each subcommand.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = fs::temp_directory_path() / "cafactor_cli_test";
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  static void TearDownTestSuite() { fs::remove_all(dir_); }

  // Runs the binary with `args`, stdout to `out` under the work dir.
  static int Run(const std::string& args, const std::string& out = "stdout.txt") {
    const std::string cmd = std::string(CAFACTOR_CLI) + " " + args + " > " +
                            (dir_ / out).string() + " 2> " + (dir_ / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }
  static std::string Path(const std::string& name) { return (dir_ / name).string(); }
  static std::string Slurp(const std::string& name) {
    std::ifstream in(dir_ / name);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  static long Lines(const std::string& name) {
    const std::string text = Slurp(name);
    return std::count(text.begin(), text.end(), '\n');
  }

  static fs::path dir_;
};

fs::path CliTest::dir_;

const std::string kCorpus = std::string(CAFACTOR_SOURCE_DIR) + "/data/toy/recipes.txt";

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(Run("--help"), 0);
  EXPECT_EQ(Run(""), 1);
  EXPECT_EQ(Run("ingest --bogus"), 1);
  EXPECT_EQ(Run("ingest --input /nonexistent/file --out " + Path("r.jsonl")), 2);
  EXPECT_EQ(Run("ingest --input " + kCorpus + " --encoding klingon --out " + Path("r.jsonl")), 1);
}

TEST_F(CliTest, HelpListsSubcommands) {
  ASSERT_EQ(Run("--help", "help.txt"), 0);
  const std::string help = Slurp("help.txt");
  for (const char* cmd : {"ingest", "vocab", "matrix", "ca", "powerlaw", "experiment",
                          "neighbors", "export", "query", "run"}) {
    EXPECT_NE(help.find(cmd), std::string::npos) << cmd;
  }
}

TEST_F(CliTest, StepByStepWorkflow) {
  ASSERT_EQ(Run("ingest --input " + kCorpus + " --out " + Path("records.jsonl")), 0);
  ASSERT_EQ(Run("vocab --records " + Path("records.jsonl") + " --out " + Path("vocab.tsv")), 0);
  ASSERT_EQ(Run("matrix --records " + Path("records.jsonl") + " --vocab " + Path("vocab.tsv") +
                " --top-k 40 --min-length 2 --out " + Path("table.tsv")),
            0);
  ASSERT_EQ(Run("ca fit --table " + Path("table.tsv") + " --out " + Path("model.bin") +
                " --report " + Path("eig.tsv")),
            0);
  EXPECT_EQ(Slurp("eig.tsv").rfind("factor\teigenvalue", 0), 0u);

  ASSERT_EQ(Run("ca plot --model " + Path("model.bin") + " --side cols", "plot.csv"), 0);
  EXPECT_EQ(Slurp("plot.csv").rfind("label,x,y,mass,ctr1,ctr2\n", 0), 0u);
  EXPECT_EQ(Run("ca plot --model " + Path("model.bin") + " --plane 1,999"), 3);

  ASSERT_EQ(Run("matrix aggregate --table " + Path("table.tsv") + " --group-size 10 --out " +
                Path("agg.tsv")),
            0);
  ASSERT_EQ(Run("ca project --model " + Path("model.bin") + " --sup " + Path("agg.tsv"),
                "proj.tsv"),
            0);
  EXPECT_EQ(Slurp("proj.tsv").rfind("label\tF1", 0), 0u);

  EXPECT_EQ(Run("powerlaw --vocab " + Path("vocab.tsv") + " --out " + Path("fit.json")), 0);
  EXPECT_EQ(Run("experiment aggregation --table " + Path("table.tsv") +
                " --group-size 10 --ordering factor1 --out " + Path("rep.json")),
            0);
  EXPECT_EQ(Run("experiment aggregation --table " + Path("table.tsv") + " --group-size 7"), 2);

  ASSERT_EQ(Run("neighbors knn --model " + Path("model.bin") + " --label salt --k 3 --side cols",
                "knn.txt"),
            0);
  EXPECT_EQ(Lines("knn.txt"), 3);
  EXPECT_EQ(Run("neighbors rnn --model " + Path("model.bin")), 0);
  EXPECT_EQ(Run("neighbors cluster --model " + Path("model.bin") + " --linkage average --out " +
                Path("dendro.json")),
            0);
  {
    std::ofstream pairs(dir_ / "pairs.tsv");
    pairs << "salt\tpepper\nflour\tsugar\n";
  }
  EXPECT_EQ(Run("neighbors pairs --model " + Path("model.bin") + " --pairs " + Path("pairs.tsv") +
                " --out " + Path("links.csv")),
            0);

  ASSERT_EQ(Run("export xml --model " + Path("model.bin") + " --records " +
                Path("records.jsonl") + " --out " + Path("corpus.xml")),
            0);
  ASSERT_EQ(Run("query bbox --xml " + Path("corpus.xml") + " --box -100,100,-100,100", "all.txt"),
            0);
  EXPECT_EQ(Lines("all.txt"), 50);
  EXPECT_EQ(Run("query around --model " + Path("model.bin") + " --xml " + Path("corpus.xml") +
                " --label flour --dx 0.5 --dy 0.5"),
            0);
  EXPECT_EQ(Run("query bbox --xml " + Path("corpus.xml") + " --box 1,0,0,1"), 1);
}

TEST_F(CliTest, RunSubcommand) {
  const std::string config = std::string(CAFACTOR_SOURCE_DIR) + "/data/toy/pipeline.json";
  ASSERT_EQ(Run("run --config " + config + " --out-dir " + Path("run1") + " --seed 3"), 0);
  EXPECT_TRUE(fs::exists(dir_ / "run1/manifest.json"));
  EXPECT_NE(Slurp("run1/manifest.json").find("\"seed\": 3"), std::string::npos);
  EXPECT_EQ(Run("run --config /nonexistent.json"), 2);
}

}  // namespace
