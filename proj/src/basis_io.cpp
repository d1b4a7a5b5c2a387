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

#include "mubqkd/basis_io.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "mubqkd/errors.hpp"
#include "mubqkd/fileio.hpp"

namespace mubqkd {

std::string format_bases(const MubSet& set) {
  const int d = set.dim();
  std::string out = fmt::format("dim {}\n", d);
  for (const auto& basis : set.bases()) {
    out += fmt::format("basis {}\n", basis.label());
    for (int row = 0; row < d; ++row) {
      for (int col = 0; col < d; ++col) {
        const Complex z = basis[col][row];
        if (col > 0) out += ' ';
        out += fmt::format("{:.17g},{:.17g}", z.real(), z.imag());
      }
      out += '\n';
    }
  }
  return out;
}

namespace {

struct LineReader {
  std::istream& in;
  const std::string& source;
  std::size_t line_no = 0;

  // Next non-blank, non-comment line; false at end of input.
  bool next(std::string& line) {
    while (std::getline(in, line)) {
      ++line_no;
      const auto t = trim(line);
      if (t.empty() || t.front() == '#') continue;
      line = std::string(t);
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(source, line_no, what); }
};

int parse_keyword_int(LineReader& r, const std::string& line, const std::string& keyword) {
  std::istringstream ss(line);
  std::string kw;
  int value = 0;
  std::string extra;
  if (!(ss >> kw >> value) || kw != keyword || (ss >> extra)) {
    r.fail(fmt::format("expected '{} <integer>', got '{}'", keyword, line));
  }
  return value;
}

Complex parse_pair(LineReader& r, const std::string& token) {
  const auto comma = token.find(',');
  double re = 0.0;
  double im = 0.0;
  if (comma == std::string::npos || !parse_double(std::string_view(token).substr(0, comma), re) ||
      !parse_double(std::string_view(token).substr(comma + 1), im)) {
    r.fail(fmt::format("malformed complex entry '{}' (expected re,im)", token));
  }
  return {re, im};
}

}  // namespace

std::vector<Basis> parse_bases(std::istream& in, const std::string& source) {
  LineReader reader{in, source};
  std::string line;
  if (!reader.next(line)) reader.fail("empty basis file");
  const int d = parse_keyword_int(reader, line, "dim");
  if (d < 2) reader.fail(fmt::format("dimension must be at least 2, got {}", d));

  std::vector<Basis> bases;
  while (reader.next(line)) {
    const int label = parse_keyword_int(reader, line, "basis");
    CMatrix m(d, d);
    for (int row = 0; row < d; ++row) {
      if (!reader.next(line)) reader.fail(fmt::format("basis {} ends after {} of {} rows", label, row, d));
      std::istringstream ss(line);
      std::string token;
      int col = 0;
      while (ss >> token) {
        if (col == d) reader.fail(fmt::format("row has more than {} entries", d));
        m(row, col++) = parse_pair(reader, token);
      }
      if (col != d) reader.fail(fmt::format("row has {} entries, expected {}", col, d));
    }
    std::vector<Ket> vectors;
    try {
      for (int k = 0; k < d; ++k) vectors.emplace_back(m.col(k));
    } catch (const ValidationError& e) {
      reader.fail(fmt::format("basis {}: {}", label, e.what()));
    }
    bases.push_back(Basis::unchecked(label, std::move(vectors)));
  }
  return bases;
}

MubSet read_mub_set(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  auto bases = parse_bases(in, path.string());
  if (bases.empty()) throw ShapeError(path.string() + ": no bases found");
  return MubSet(std::move(bases));
}

void write_mub_set(const MubSet& set, const std::filesystem::path& path) {
  write_file_atomic(path, format_bases(set));
}

}  // namespace mubqkd
