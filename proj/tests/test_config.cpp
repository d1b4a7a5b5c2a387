// Copyright 2026 The mubqkd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include "mubqkd/config.hpp"
#include "mubqkd/errors.hpp"
#include "mubqkd/fileio.hpp"
#include "mubqkd/state.hpp"

namespace mubqkd {
namespace {

TEST(RunConfig, ParsesAllKeys) {
  const RunConfig rc = parse_run_config(R"(
# a comment
mode = pm
dim = 5            # trailing comment
rounds = 1000
flip_prob = 0.1
bias = uniform
alpha_sq = 0.5
chi = 0.02
seed = 42
workers = 4
sample_fraction = 0.2
out = counts.csv
log = rounds.jsonl
exact = false
)");
  EXPECT_EQ(rc.mode, Mode::kPrepareMeasure);
  EXPECT_EQ(rc.dim, 5);
  EXPECT_EQ(rc.rounds, 1000u);
  EXPECT_DOUBLE_EQ(rc.flip_prob.value(), 0.1);
  EXPECT_EQ(rc.bias, "uniform");
  EXPECT_EQ(rc.seed, 42u);
  EXPECT_EQ(rc.workers, 4);
  EXPECT_EQ(rc.out->string(), "counts.csv");
  EXPECT_EQ(rc.exact, false);
}

TEST(RunConfig, RejectsUnknownAndRepeatedKeys) {
  EXPECT_THROW(parse_run_config("dim = 3\ncolour = red\n"), ConfigError);
  EXPECT_THROW(parse_run_config("dim = 3\ndim = 4\n"), ConfigError);
}

TEST(RunConfig, SyntaxErrorsCarryLineNumbers) {
  try {
    parse_run_config("dim = 3\n\nrounds = many\n", "run.cfg");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(parse_run_config("just words\n"), ParseError);
  EXPECT_THROW(parse_run_config("mode = qkd\n"), ParseError);
  EXPECT_THROW(parse_run_config("exact = maybe\n"), ParseError);
}

TEST(RunConfig, OverrideTakesSetFieldsOnly) {
  RunConfig base = parse_run_config("dim = 3\nrounds = 10\nseed = 1\n");
  RunConfig cli;
  cli.seed = 9;
  cli.workers = 2;
  base.override_with(cli);
  EXPECT_EQ(base.dim, 3);
  EXPECT_EQ(base.rounds, 10u);
  EXPECT_EQ(base.seed, 9u);
  EXPECT_EQ(base.workers, 2);
}

TEST(RunConfig, TargetQberSetsVisibilityOrFlip) {
  RunConfig rc = parse_run_config("dim = 4\nrounds = 10\ntarget_qber = 0.088\n");
  ProtocolConfig cfg = to_protocol_config(rc);
  EXPECT_NEAR(isotropic_qber(4, cfg.visibility), 0.088, 1e-15);
  rc.mode = Mode::kPrepareMeasure;
  cfg = to_protocol_config(rc);
  EXPECT_DOUBLE_EQ(cfg.flip_prob, 0.088);
  rc.visibility = 0.9;
  EXPECT_THROW(to_protocol_config(rc), ConfigError);
}

TEST(RunConfig, RequiredFieldsAndValidation) {
  EXPECT_THROW(to_protocol_config(parse_run_config("rounds = 10\n")), ConfigError);
  EXPECT_THROW(to_protocol_config(parse_run_config("dim = 3\n")), ConfigError);
  EXPECT_THROW(to_protocol_config(parse_run_config("dim = 3\nrounds = 5\nchi = 0.5\n")), ConfigError);
  EXPECT_THROW(to_protocol_config(parse_run_config("dim = 3\nrounds = 5\nbias = 0.5, 0.5\n")), ConfigError);
  const ProtocolConfig cfg = to_protocol_config(parse_run_config("dim = 3\nrounds = 5\n"));
  EXPECT_EQ(cfg.resolved_bias(), default_basis_bias(3));
  EXPECT_FALSE(cfg.record_rounds);
}

TEST(RunConfig, EfficiencyFileIsRead) {
  const auto path = std::filesystem::temp_directory_path() / "mubqkd_cfg_eta.txt";
  write_efficiency_table(EfficiencyTable::uniform(2, 0.25, 0.5), path);
  RunConfig rc = parse_run_config("dim = 2\nrounds = 5\n");
  rc.eta_file = path;
  const ProtocolConfig cfg = to_protocol_config(rc);
  ASSERT_TRUE(cfg.efficiencies);
  EXPECT_DOUBLE_EQ(cfg.efficiencies->at(Arm::B, {2, 1}), 0.5);
  std::filesystem::remove(path);
}

TEST(ParseBias, Forms) {
  EXPECT_EQ(parse_bias("default", 2), default_basis_bias(2));
  EXPECT_EQ(parse_bias(" uniform ", 2), uniform_basis_bias(2));
  const auto b = parse_bias("0.5, 0.25,0.25", 2);
  EXPECT_DOUBLE_EQ(b[1], 0.25);
  EXPECT_THROW(parse_bias("0.5,0.5", 2), ConfigError);
  EXPECT_THROW(parse_bias("0.5,x,0.5", 2), ConfigError);
}

}  // namespace
}  // namespace mubqkd
