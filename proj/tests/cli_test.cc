// Copyright 2026 The Levdex Authors.
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

#include "cli.h"

#include <filesystem>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "levdex/binary_io.h"

namespace levdex::cli {
namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("levdex_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    WriteStringToFile(Path("tiny.json"),
                      R"({"synth": {"n_train": 20, "n_test": 5},
                          "encoder": {"epochs": 2, "dim": 8},
                          "seq2seq": {"epochs": 1, "emb": 8, "hidden": 8, "dec": 8, "att": 8}})");
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string Path(const std::string& name) const { return (dir_ / name).string(); }

  int Quiet(const std::vector<std::string>& args) {
    ::testing::internal::CaptureStdout();
    ::testing::internal::CaptureStderr();
    const int code = levdex::cli::Run(args);
    ::testing::internal::GetCapturedStdout();
    stderr_ = ::testing::internal::GetCapturedStderr();
    return code;
  }

  fs::path dir_;
  std::string stderr_;
};

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(Quiet({}), kExitUsage);
  EXPECT_EQ(Quiet({"train-dst", "--out", Path("o"), "--no-such-flag"}), kExitUsage);
  EXPECT_NE(stderr_.find("Usage"), std::string::npos);
  EXPECT_EQ(Quiet({"synth"}), kExitUsage);  // --out missing
  EXPECT_EQ(Quiet({"ablate", "--grid", "table7", "--out", Path("o")}), kExitUsage);
}

TEST_F(CliTest, ExitCodes) {
  WriteStringToFile(Path("bad.json"), R"({"seq2seq": {"layers": 2}})");
  EXPECT_EQ(Quiet({"train-dst", "--config", Path("bad.json"), "--out", Path("o")}), kExitConfig);
  EXPECT_NE(stderr_.find("seq2seq.layers"), std::string::npos);
  WriteStringToFile(Path("broken.json"), "{");
  EXPECT_EQ(Quiet({"train-dst", "--config", Path("broken.json"), "--out", Path("o")}),
            kExitConfig);
  WriteStringToFile(Path("bad.jsonl"), "{\"id\": \"a\", \"turns\": [{\"system\": \"hi\"}]}\n");
  EXPECT_EQ(Quiet({"ingest", "--input", Path("bad.jsonl"), "--out", Path("o")}), kExitConfig);
  EXPECT_EQ(Quiet({"ingest", "--input", Path("missing.jsonl"), "--out", Path("o")}), kExitIo);
  WriteStringToFile(Path("junk.bin"), "not an encoder");
  EXPECT_EQ(Quiet({"build-index", "--config", Path("tiny.json"), "--encoder", Path("junk.bin"),
                   "--out", Path("o")}),
            kExitConfig);
  EXPECT_EQ(ExitCodeFor(ErrorCode::kNonFinite), kExitNonFinite);
  EXPECT_EQ(ExitCodeFor(ErrorCode::kEmptyIndex), kExitFailure);
}

TEST_F(CliTest, SynthWritesManifestAndReplays) {
  ASSERT_EQ(Quiet({"synth", "--config", Path("tiny.json"), "--out", Path("s")}), kExitOk);
  EXPECT_TRUE(fs::exists(Path("s/corpus.jsonl")));
  const auto manifest = nlohmann::json::parse(ReadFileToString(Path("s/manifest.json")));
  EXPECT_EQ(manifest["command"], "synth");
  EXPECT_TRUE(manifest["inputs"].contains(Path("tiny.json")));
  EXPECT_EQ(manifest["outputs"]["corpus.jsonl"], HashFile(Path("s/corpus.jsonl")));

  ASSERT_EQ(Quiet({"replay", "--manifest", Path("s/manifest.json"), "--out", Path("s2")}), kExitOk);
  EXPECT_EQ(ReadFileToString(Path("s/corpus.jsonl")), ReadFileToString(Path("s2/corpus.jsonl")));
  EXPECT_EQ(Quiet({"replay", "--manifest", Path("s/manifest.json"), "--out", Path("s")}),
            kExitUsage);
}

TEST_F(CliTest, ReplayRefusesChangedInputs) {
  ASSERT_EQ(Quiet({"synth", "--config", Path("tiny.json"), "--out", Path("s")}), kExitOk);
  WriteStringToFile(Path("tiny.json"), R"({"synth": {"n_train": 21}})");
  EXPECT_EQ(Quiet({"replay", "--manifest", Path("s/manifest.json"), "--out", Path("s2")}),
            kExitIo);
}

TEST_F(CliTest, StagedRetrievalMatchesPipeline) {
  const std::string cfg = Path("tiny.json");
  ASSERT_EQ(Quiet({"synth", "--config", cfg, "--out", Path("train")}), kExitOk);
  ASSERT_EQ(Quiet({"mine-pairs", "--config", cfg, "--out", Path("m")}), kExitOk);
  ASSERT_EQ(Quiet({"train-encoder", "--config", cfg, "--corpus", Path("train/corpus.jsonl"),
                   "--pairs", Path("m/pairs.jsonl"), "--out", Path("e")}),
            kExitOk);
  ASSERT_EQ(Quiet({"build-index", "--config", cfg, "--encoder", Path("e/encoder.bin"), "--out",
                   Path("i")}),
            kExitOk);
  ASSERT_EQ(Quiet({"train-dst", "--config", cfg, "--out", Path("t")}), kExitOk);
  // The staged encoder and index are the ones the pipeline fits in one go.
  EXPECT_EQ(HashFile(Path("e/encoder.bin")), HashFile(Path("t/encoder.bin")));
  EXPECT_EQ(HashFile(Path("i/index.bin")), HashFile(Path("t/index.bin")));

  ASSERT_EQ(Quiet({"retrieve", "--config", cfg, "--index", Path("i/index.bin"), "--encoder",
                   Path("e/encoder.bin"), "--k", "3", "--out", Path("r")}),
            kExitOk);
  EXPECT_EQ(stderr_.find("FINGERPRINT_MISMATCH"), std::string::npos);
  ASSERT_EQ(Quiet({"train-encoder", "--config", cfg, "--untrained", "--out", Path("u")}), kExitOk);
  ASSERT_EQ(Quiet({"retrieve", "--config", cfg, "--index", Path("i/index.bin"), "--encoder",
                   Path("u/encoder.bin"), "--out", Path("r2")}),
            kExitOk);
  EXPECT_NE(stderr_.find("FINGERPRINT_MISMATCH"), std::string::npos);
}

TEST_F(CliTest, EvaluateTrainedModelMatchesFreshFit) {
  const std::string cfg = Path("tiny.json");
  ASSERT_EQ(Quiet({"train-dst", "--config", cfg, "--out", Path("t")}), kExitOk);
  ASSERT_EQ(Quiet({"evaluate", "--model", Path("t"), "--out", Path("a")}), kExitOk);
  ASSERT_EQ(Quiet({"evaluate", "--config", cfg, "--out", Path("b")}), kExitOk);
  for (const char* name : {"report-propagated.json", "report-ground-truth-prev.json", "table.txt"}) {
    EXPECT_EQ(ReadFileToString(Path(std::string("a/") + name)),
              ReadFileToString(Path(std::string("b/") + name)))
        << name;
  }
}

TEST_F(CliTest, SeedFromEnvironment) {
  setenv("LEVDEX_SEED", "5", 1);
  const int code = Quiet({"train-dst", "--config", Path("tiny.json"), "--generator", "oracle",
                          "--out", Path("t")});
  unsetenv("LEVDEX_SEED");
  ASSERT_EQ(code, kExitOk);
  const auto config = nlohmann::json::parse(ReadFileToString(Path("t/config.json")));
  EXPECT_EQ(config["seed"], 5);
  const auto manifest = nlohmann::json::parse(ReadFileToString(Path("t/manifest.json")));
  EXPECT_EQ(manifest["levdex_seed"], "5");
  // Replay restores the recorded seed even though it is unset now.
  ASSERT_EQ(Quiet({"replay", "--manifest", Path("t/manifest.json"), "--out", Path("t2")}), kExitOk);
  EXPECT_EQ(HashFile(Path("t/encoder.bin")), HashFile(Path("t2/encoder.bin")));
}

TEST_F(CliTest, AblateTable5HasTwoRows) {
  ASSERT_EQ(Quiet({"ablate", "--grid", "table5", "--config", Path("tiny.json"), "--seeds", "1,2",
                   "--out", Path("a")}),
            kExitOk);
  const auto j = nlohmann::json::parse(ReadFileToString(Path("a/ablate.json")));
  ASSERT_EQ(j["cells"].size(), 2u);
  EXPECT_EQ(j["cells"][0]["per_seed"].size(), 2u);
  EXPECT_EQ(j["cells"][0]["data_hash"], j["cells"][1]["data_hash"]);
}

}  // namespace
}  // namespace levdex::cli
