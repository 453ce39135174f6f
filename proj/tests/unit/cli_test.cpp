/*
 * Copyright 2026 The kgad Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "kgad/corruption.hpp"
#include "test_support.hpp"

namespace kgad {
namespace {

struct Result {
  int code = -1;
  std::string out;
};

// Runs the CLI through the shell; stderr is folded into the output.
Result run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + std::string(KGAD_CLI_PATH) + " " + args + " 2>&1";
  Result r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

const std::string kKinship = std::string(KGAD_DATA_DIR) + "/kinship.tsv";

class Cli : public ::testing::Test {
 protected:
  test::TempDir dir{"cli"};
  std::string at(const std::string& name) const { return (dir / name).string(); }

  // A small labeled corpus on disk.
  std::string corpus() const {
    const LabeledCorpus c = test::toy_corpus(60, 0.1, 61);
    save_labeled_corpus(c, dir / "toy.tsv");
    return at("toy.tsv");
  }
};

TEST_F(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run("inject --input " + kKinship + " --ratio 1.5 --output " + at("x.tsv")).code, 2);
  EXPECT_EQ(run("baseline --method foo --corpus " + corpus()).code, 2);
  EXPECT_EQ(run("no-such-command").code, 2);
  EXPECT_EQ(run("train").code, 2);
  const Result r = run("config --set dimension=4");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("valid keys"), std::string::npos) << r.out;
}

TEST_F(Cli, RuntimeErrorsExitOne) {
  const Result r = run("inject --input " + at("missing.tsv") + " --output " + at("x.tsv"));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("missing.tsv"), std::string::npos) << r.out;
  EXPECT_EQ(run("eval --corpus " + corpus() + " --checkpoints " + at("none.ckpt")).code, 1);
}

TEST_F(Cli, HelpExitsZero) { EXPECT_EQ(run("--help").code, 0); }

TEST_F(Cli, GradcheckPasses) {
  const Result r = run("gradcheck");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("PASS"), std::string::npos);
}

TEST_F(Cli, InjectOnKinshipIsDeterministic) {
  const Result a = run("inject --input " + kKinship + " --ratio 0.05 --seed 7 --output " + at("a.tsv"));
  ASSERT_EQ(a.code, 0) << a.out;
  ASSERT_EQ(run("inject --input " + kKinship + " --ratio 0.05 --seed 7 --output " + at("b.tsv")).code, 0);
  EXPECT_EQ(read_file(dir / "a.tsv"), read_file(dir / "b.tsv"));
  const LabeledCorpus c = load_labeled_corpus(dir / "a.tsv");
  EXPECT_EQ(c.graph.size(), 11220u);
  EXPECT_EQ(c.labels.anomaly_count(), 534u);
  EXPECT_TRUE(std::filesystem::exists(dir / "a.tsv.manifest.json"));
}

TEST_F(Cli, InjectSeedFromEnvironment) {
  const std::string in = " --input " + kKinship + " --ratio 0.05 --output ";
  ASSERT_EQ(run("inject" + in + at("e.tsv"), "KGAD_SEED=7").code, 0);
  ASSERT_EQ(run("inject --seed 7" + in + at("f.tsv")).code, 0);
  ASSERT_EQ(run("inject" + in + at("g.tsv"), "KGAD_SEED=8").code, 0);
  EXPECT_EQ(read_file(dir / "e.tsv"), read_file(dir / "f.tsv"));
  EXPECT_NE(read_file(dir / "e.tsv"), read_file(dir / "g.tsv"));
}

TEST_F(Cli, TrainThenEval) {
  const std::string c = corpus();
  const Result t = run("train --corpus " + c + " --runs 2 --epochs 1 --dim 4 --out-dir " + at("runs"));
  ASSERT_EQ(t.code, 0) << t.out;
  for (const char* f : {"run0.ckpt", "run1.ckpt", "run0.history.json", "run0.ckpt.manifest.json"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / "runs" / f)) << f;
  }
  const Result e = run("eval --corpus " + c + " --checkpoints " + at("runs") + " --out " + at("m.json") +
                       " --csv " + at("m.csv"));
  ASSERT_EQ(e.code, 0) << e.out;
  const auto doc = nlohmann::json::parse(read_file(dir / "m.json"));
  for (const char* k : {"precision_at", "recall_at", "auc", "runs", "mean"}) EXPECT_TRUE(doc.contains(k)) << k;
  EXPECT_EQ(doc["runs"].size(), 2u);
  EXPECT_NE(read_file(dir / "m.csv").find("method,run,k_percent"), std::string::npos);
}

TEST_F(Cli, ZeroEpochTrainWritesCheckpoint) {
  const Result t = run("train --corpus " + corpus() + " --runs 1 --epochs 0 --dim 4 --out-dir " + at("r"));
  ASSERT_EQ(t.code, 0) << t.out;
  EXPECT_TRUE(std::filesystem::exists(dir / "r" / "run0.ckpt"));
  const auto hist = nlohmann::json::parse(read_file(dir / "r" / "run0.history.json"));
  EXPECT_EQ(hist["epochs"].size(), 0u);
}

TEST_F(Cli, ConfigEchoAndPrecedence) {
  const Result d = run("config", "env -u KGAD_SEED");
  ASSERT_EQ(d.code, 0) << d.out;
  for (const char* line : {"dim = 100\n", "lr = 0.01\n", "alpha = 0.9\n", "beta = 0.3\n", "gamma = 0.5\n",
                           "seed = 42\n", "epochs = 100\n"}) {
    EXPECT_NE(d.out.find(line), std::string::npos) << line << d.out;
  }
  {
    std::ofstream f(dir / "c.conf");
    f << "seed = 5\ndim = 8\n";
  }
  EXPECT_NE(run("config", "KGAD_SEED=77").out.find("seed = 77\n"), std::string::npos);
  const Result p = run("config --config " + at("c.conf"), "KGAD_SEED=77");
  EXPECT_NE(p.out.find("seed = 5\n"), std::string::npos) << p.out;
  const Result s = run("config --config " + at("c.conf") + " --set dim=16 --seed 3");
  EXPECT_NE(s.out.find("dim = 16\n"), std::string::npos) << s.out;
  EXPECT_NE(s.out.find("seed = 3\n"), std::string::npos) << s.out;
}

TEST_F(Cli, BaselineWritesReport) {
  const Result r = run("baseline --method transe --corpus " + corpus() +
                       " --runs 1 --epochs 2 --dim 4 --out " + at("b.json"));
  ASSERT_EQ(r.code, 0) << r.out;
  const auto doc = nlohmann::json::parse(read_file(dir / "b.json"));
  EXPECT_EQ(doc["mean"]["method"], "transe");
}

}  // namespace
}  // namespace kgad
