// Copyright 2026 The Int2Plan Authors
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


// Drives the built command-line tool end to end on generated data.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "json.hpp"

namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path & p)
{
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

class Pipeline : public ::testing::Test
{
protected:
  static void SetUpTestSuite()
  {
    root_ = fs::temp_directory_path() / "int2plan_pipeline";
    fs::remove_all(root_);
    fs::create_directories(root_);
    std::ofstream(root_ / "cfg.json")
      << R"({"profile": "micro", "epochs": 4, "t_h": 6, "t_f": 20, "dim": 16, "heads": 2, "n_q": 8, "k": 2})";
  }
  static void TearDownTestSuite() { fs::remove_all(root_); }

  static int cli(const std::string & args, const std::string & log = "cli.log")
  {
    const std::string cmd = std::string("\"") + INT2PLAN_CLI_PATH + "\" " + args + " > \"" + (root_ / log).string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }
  static std::string p(const std::string & name) { return "\"" + (root_ / name).string() + "\""; }

  static inline fs::path root_;
};

TEST_F(Pipeline, GenerateTrainEvaluateSimulate)
{
  ASSERT_EQ(cli("--seed 4 gen-synthetic --kind all --count 8 --th 6 --tf 20 --out " + p("data")), 0);
  ASSERT_EQ(cli("--seed 4 --config " + p("cfg.json") + " train --data " + p("data") + " --out " + p("m.ckpt")), 0)
    << slurp(root_ / "cli.log");
  const auto log = slurp(root_ / "m.ckpt.log.csv");
  EXPECT_EQ(log.rfind("# config=", 0), 0u);
  EXPECT_NE(log.find("epoch,steps,train_loss,val_loss,lr"), std::string::npos);

  ASSERT_EQ(cli("--config " + p("cfg.json") + " eval --ckpt " + p("m.ckpt") + " --data " + p("data") + " --csv " + p("e.csv")), 0)
    << slurp(root_ / "cli.log");
  std::istringstream csv(slurp(root_ / "e.csv"));
  std::string line;
  int rows = 0;
  while (std::getline(csv, line)) ++rows;
  EXPECT_EQ(rows, 1 + 8 + 1);  // header, scenes, mean

  const auto scene = fs::directory_iterator(root_ / "data")->path().string();
  for (const char * mode : {"open", "nonreactive", "reactive"}) {
    const std::string out = std::string("r_") + mode + ".json";
    ASSERT_EQ(cli("simulate --scenario \"" + scene + "\" --mode " + mode + " --planner model --ckpt " + p("m.ckpt") +
                  " --postprocess on --horizon 2 --out " + p(out)),
              0)
      << slurp(root_ / "cli.log");
    const auto j = nlohmann::json::parse(slurp(root_ / out));
    EXPECT_FALSE(j.at("aborted").get<bool>());
    EXPECT_GT(j.at("ego").size(), 1u);
  }
  ASSERT_EQ(cli("metrics export --data " + p("data") + " --csv " + p("m.csv") +
                " --planner model --ckpt " + p("m.ckpt") + " --modes nonreactive,reactive --horizon 2"),
            0)
    << slurp(root_ / "cli.log");
  EXPECT_NE(slurp(root_ / "m.csv").find("mean,all,"), std::string::npos);
}

TEST_F(Pipeline, RepeatedRunsAreBitIdentical)
{
  ASSERT_EQ(cli("--seed 9 gen-synthetic --kind straight --count 3 --th 6 --tf 20 --out " + p("det")), 0);
  for (const char * tag : {"a", "b"}) {
    const std::string t(tag);
    ASSERT_EQ(cli("--seed 9 --config " + p("cfg.json") + " train --data " + p("det") + " --out " + p(t + ".ckpt")), 0);
    ASSERT_EQ(cli("--config " + p("cfg.json") + " eval --ckpt " + p(t + ".ckpt") + " --data " + p("det") + " --csv " + p(t + ".csv")), 0);
    const auto scene = (root_ / "det" / "straight-9.json").string();
    ASSERT_TRUE(fs::exists(scene));
    ASSERT_EQ(cli("simulate --scenario \"" + scene + "\" --mode reactive --planner model --ckpt " + p(t + ".ckpt") +
                  " --postprocess on --horizon 2 --out " + p(t + ".json")),
              0);
  }
  EXPECT_EQ(slurp(root_ / "a.ckpt"), slurp(root_ / "b.ckpt"));
  EXPECT_EQ(slurp(root_ / "a.csv"), slurp(root_ / "b.csv"));
  EXPECT_EQ(slurp(root_ / "a.json"), slurp(root_ / "b.json"));
}

TEST_F(Pipeline, RuntimeErrorsCarryModulePrefix)
{
  EXPECT_EQ(cli("simulate --scenario " + p("nowhere.json") + " --out " + p("x.json"), "err.log"), 2);
  EXPECT_EQ(slurp(root_ / "err.log").rfind("error[", 0), 0u) << slurp(root_ / "err.log");
  EXPECT_EQ(cli("", "usage.log"), 1);
}

}  // namespace
