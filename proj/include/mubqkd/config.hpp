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

// Run configuration for the simulate command.
//
// The file format is one "key = value" per line; '#' starts a comment.
// Keys mirror the command-line flags with dashes replaced by underscores:
//
//   mode = eb
//   dim = 3
//   rounds = 1000000
//   target_qber = 0.04
//   bias = 0.9, 0.025, 0.025, 0.025, 0.025
//   seed = 7
//   out = counts.csv
//
// Unknown keys and repeated keys are rejected.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mubqkd/protocol.hpp"

namespace mubqkd {

struct RunConfig {
  std::optional<Mode> mode;
  std::optional<int> dim;
  std::optional<std::uint64_t> rounds;
  std::optional<double> visibility;
  std::optional<double> target_qber;
  std::optional<double> flip_prob;
  /// Explicit weights, or "default" / "uniform".
  std::optional<std::string> bias;
  std::optional<std::filesystem::path> eta_file;
  std::optional<double> alpha_sq;
  std::optional<double> chi;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<double> sample_fraction;
  std::optional<std::filesystem::path> out;
  /// JSON-lines round log.
  std::optional<std::filesystem::path> log;
  std::optional<bool> exact;

  /// Fields set in `other` replace those here.
  void override_with(const RunConfig& other);
};

/// Throws ParseError (with line number) on syntax errors and ConfigError on
/// unknown or repeated keys.
RunConfig parse_run_config(const std::string& text, const std::string& source = "<config>");
RunConfig load_run_config(const std::filesystem::path& path);

Mode parse_mode(const std::string& s);
std::string mode_name(Mode m);

/// "default", "uniform" or a comma-separated list of d+1 weights.
std::vector<double> parse_bias(const std::string& s, int d);

/// Resolves the run configuration into a validated protocol configuration.
/// Requires dim and rounds; visibility and target_qber are mutually
/// exclusive (in PM mode target_qber sets the flip probability). Reads the
/// efficiency table if one is named.
ProtocolConfig to_protocol_config(const RunConfig& rc);

}  // namespace mubqkd
