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

// Text format for basis sets:
//
//   # optional comment lines
//   dim <d>
//   basis <label>
//   <d rows, each holding d space-separated "re,im" pairs>
//   basis <label>
//   ...
//
// Row i of a basis block lists component i of every basis vector, so the
// vectors are the columns. Numbers are written with 17 significant digits.

#pragma once

#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include "mubqkd/mub.hpp"

namespace mubqkd {

std::string format_bases(const MubSet& set);

/// Parses bases without checking orthonormality or unbiasedness.
/// Throws ParseError on malformed input.
std::vector<Basis> parse_bases(std::istream& in, const std::string& source = "<input>");

/// Parses and validates a complete set (d+1 bases, unbiased within 1e-10).
MubSet read_mub_set(const std::filesystem::path& path);

void write_mub_set(const MubSet& set, const std::filesystem::path& path);

}  // namespace mubqkd
