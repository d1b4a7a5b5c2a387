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

// Count matrices and the counts CSV.
//
// The CSV has a required header with exactly these columns:
//
//   basis_a,elem_a,basis_b,elem_b,singles_a,singles_b,coincidences
//
// Bases are 0-indexed with 0 the standard basis; elements are 0-indexed in
// the canonical vector order of the basis set. Comment lines beginning with
// '#' may precede the header and carry metadata as "# key: value":
//
//   # dim: 3
//   # values: counts | probabilities
//   # partial: true
//   # integration_period_s: 10

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mubqkd/photonics.hpp"
#include "mubqkd/state.hpp"

namespace mubqkd {

inline constexpr const char* kCountsHeader = "basis_a,elem_a,basis_b,elem_b,singles_a,singles_b,coincidences";

/// Count records keyed by setting pair over the (d+1)^2 d^2 grid.
class CountMatrix {
 public:
  /// Empty grid; records are added with insert() or accumulate().
  explicit CountMatrix(int d);

  /// Complete grid of zero records.
  static CountMatrix zeros(int d);

  int dim() const { return d_; }
  std::size_t size() const { return count_; }
  bool complete() const { return count_ == present_.size(); }

  bool has(const Setting& a, const Setting& b) const { return present_[index(a, b)]; }
  /// Throws CountsError if the pair is absent.
  const CountRecord& at(const Setting& a, const Setting& b) const;

  /// Validates the record and its settings; rejects duplicates.
  void insert(const CountRecord& r);

  /// Adds to an existing record, creating a zero record first if needed.
  void accumulate(const Setting& a, const Setting& b, double singles_a, double singles_b, double coincidences);

  /// Present records in canonical order (Alice setting major).
  std::vector<CountRecord> records() const;

  /// Sum of coincidences over the (basis_a, basis_b) block.
  double block_coincidences(int basis_a, int basis_b) const;

  bool partial = false;
  bool probabilities = false;
  std::optional<double> integration_period_s;
  std::string source_file;

 private:
  std::size_t index(const Setting& a, const Setting& b) const;

  int d_;
  std::vector<CountRecord> records_;
  std::vector<bool> present_;
  std::size_t count_ = 0;
};

struct LoadOptions {
  std::optional<int> dim;
  bool allow_partial = false;
  /// Accept non-integral values (probabilities or intensities).
  bool probabilities = false;
};

/// Throws ParseError (with line number) on malformed text and CountsError
/// naming the offending row on invariant violations.
CountMatrix parse_counts(const std::string& text, const std::string& source = "<input>",
                         const LoadOptions& options = {});
CountMatrix load_counts(const std::filesystem::path& path, const LoadOptions& options = {});

std::string format_counts(const CountMatrix& c);
void write_counts(const CountMatrix& c, const std::filesystem::path& path);

/// Within each (basis_a, basis_b) block, p = coincidences / block total.
/// Blocks with zero total are flagged unavailable and left at zero.
JointProbMatrix normalize_blocks(const CountMatrix& c);

/// Probability table as a count matrix: coincidences carry p, singles carry
/// the block marginals.
CountMatrix to_count_matrix(const JointProbMatrix& p);

}  // namespace mubqkd
