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

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace mubqkd {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitNumeric = 2;

/// Runs one command line. `args` excludes the program name.
///
///   gen-bases   --dim D [--out FILE]
///   simulate    --dim D --rounds N [--mode eb|pm] [--visibility V | --target-qber Q]
///               [--bias W,...] [--eta-file FILE] [--alpha-sq A] [--chi C] [--flip-prob F]
///               [--seed S] [--workers K] [--exact] [--verbose | --log FILE]
///               [--config FILE] --out FILE
///   analyze     --counts FILE [--dim D] [--prob] [--partial] [--report FILE] [--csv FILE]
///   efficiency  --counts FILE [--dim D] [--out FILE]
///   efficiency  --synthesize ETA_FILE --out FILE [--pulses N] [--alpha-sq A] [--chi C]
///               [--poisson --seed S]
///   keyrate     --dim D (--qber Q | --sweep LO:HI:STEP | --qmax)
///
/// Returns 0 on success, 1 on validation or usage errors, 2 on numeric
/// failures.
int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mubqkd
