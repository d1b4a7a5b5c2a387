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

#include "mubqkd/counts.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include <fmt/format.h>

#include "mubqkd/errors.hpp"
#include "mubqkd/fileio.hpp"

namespace mubqkd {

CountMatrix::CountMatrix(int d) : d_(d) {
  if (d < 2) throw InvalidDimensionError(fmt::format("dimension must be at least 2, got {}", d));
  const auto n = static_cast<std::size_t>(num_settings(d)) * num_settings(d);
  records_.resize(n);
  present_.assign(n, false);
}

CountMatrix CountMatrix::zeros(int d) {
  CountMatrix c(d);
  for (int i = 0; i < num_settings(d); ++i) {
    for (int j = 0; j < num_settings(d); ++j) c.insert(CountRecord{setting_at(d, i), setting_at(d, j)});
  }
  return c;
}

std::size_t CountMatrix::index(const Setting& a, const Setting& b) const {
  for (const Setting& s : {a, b}) {
    if (s.basis < 0 || s.basis > d_ || s.element < 0 || s.element >= d_) {
      throw CountsError(fmt::format("setting (basis {}, element {}) out of range for d = {}", s.basis, s.element, d_));
    }
  }
  return static_cast<std::size_t>(setting_index(d_, a)) * num_settings(d_) + setting_index(d_, b);
}

const CountRecord& CountMatrix::at(const Setting& a, const Setting& b) const {
  const auto i = index(a, b);
  if (!present_[i]) {
    throw CountsError(fmt::format("no record for setting pair ({}, {}) / ({}, {})", a.basis, a.element, b.basis,
                                  b.element));
  }
  return records_[i];
}

void CountMatrix::insert(const CountRecord& r) {
  const auto i = index(r.setting_a, r.setting_b);
  r.validate();
  if (present_[i]) throw CountsError(fmt::format("{}: duplicate setting pair", describe(r)));
  records_[i] = r;
  present_[i] = true;
  ++count_;
}

void CountMatrix::accumulate(const Setting& a, const Setting& b, double singles_a, double singles_b,
                             double coincidences) {
  const auto i = index(a, b);
  if (!present_[i]) {
    records_[i] = CountRecord{a, b};
    present_[i] = true;
    ++count_;
  }
  auto& r = records_[i];
  r.singles_a += singles_a;
  r.singles_b += singles_b;
  r.coincidences += coincidences;
}

std::vector<CountRecord> CountMatrix::records() const {
  std::vector<CountRecord> out;
  out.reserve(count_);
  for (std::size_t i = 0; i < records_.size(); ++i) {
    if (present_[i]) out.push_back(records_[i]);
  }
  return out;
}

double CountMatrix::block_coincidences(int basis_a, int basis_b) const {
  double total = 0.0;
  for (int ka = 0; ka < d_; ++ka) {
    for (int kb = 0; kb < d_; ++kb) {
      const Setting a{basis_a, ka};
      const Setting b{basis_b, kb};
      if (has(a, b)) total += at(a, b).coincidences;
    }
  }
  return total;
}

// ----------------------------------------------------------------------------

namespace {

struct RawRow {
  std::size_t line;
  int fields[4];
  double values[3];
};

bool parse_int(std::string_view s, int& out) {
  s = trim(s);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return !s.empty() && ec == std::errc{} && ptr == s.data() + s.size();
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

CountMatrix parse_counts(const std::string& text, const std::string& source, const LoadOptions& options) {
  std::optional<int> meta_dim;
  bool meta_partial = false;
  bool meta_probabilities = false;
  std::optional<double> meta_period;

  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::vector<RawRow> rows;

  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      if (header_seen) continue;
      const auto body = trim(t.substr(1));
      const auto colon = body.find(':');
      if (colon == std::string_view::npos) continue;
      const auto key = trim(body.substr(0, colon));
      const auto value = trim(body.substr(colon + 1));
      if (key == "dim") {
        int d = 0;
        if (!parse_int(value, d)) throw ParseError(source, line_no, "bad dim metadata");
        meta_dim = d;
      } else if (key == "values") {
        if (value == "probabilities") {
          meta_probabilities = true;
        } else if (value != "counts") {
          throw ParseError(source, line_no, fmt::format("unknown values kind '{}'", value));
        }
      } else if (key == "partial") {
        meta_partial = (value == "true");
      } else if (key == "integration_period_s") {
        double p = 0.0;
        if (!parse_double(value, p)) throw ParseError(source, line_no, "bad integration_period_s metadata");
        meta_period = p;
      }
      continue;
    }
    if (!header_seen) {
      if (t != kCountsHeader) {
        throw ParseError(source, line_no, fmt::format("expected header '{}'", kCountsHeader));
      }
      header_seen = true;
      continue;
    }
    const auto fields = split_commas(t);
    if (fields.size() != 7) {
      throw ParseError(source, line_no, fmt::format("expected 7 fields, got {}", fields.size()));
    }
    RawRow row{line_no, {}, {}};
    for (int f = 0; f < 4; ++f) {
      if (!parse_int(fields[f], row.fields[f])) {
        throw ParseError(source, line_no, fmt::format("field {} is not an integer: '{}'", f + 1, fields[f]));
      }
    }
    for (int f = 0; f < 3; ++f) {
      if (!parse_double(fields[4 + f], row.values[f])) {
        throw ParseError(source, line_no, fmt::format("field {} is not a number: '{}'", f + 5, fields[4 + f]));
      }
    }
    rows.push_back(row);
  }
  if (!header_seen) throw ParseError(source, line_no, "missing header line");

  if (options.dim && meta_dim && *options.dim != *meta_dim) {
    throw CountsError(fmt::format("{}: file declares dim {} but {} was requested", source, *meta_dim, *options.dim));
  }
  int d = options.dim.value_or(meta_dim.value_or(0));
  if (d == 0) {
    for (const auto& r : rows) d = std::max({d, r.fields[0], r.fields[2]});
  }
  if (d < 2) throw CountsError(fmt::format("{}: cannot determine a dimension of at least 2", source));

  CountMatrix c(d);
  c.partial = options.allow_partial || meta_partial;
  c.probabilities = options.probabilities || meta_probabilities;
  c.integration_period_s = meta_period;
  c.source_file = source;

  for (const auto& row : rows) {
    CountRecord rec{{row.fields[0], row.fields[1]}, {row.fields[2], row.fields[3]}, row.values[0], row.values[1],
                    row.values[2]};
    try {
      if (!c.probabilities) {
        for (double v : row.values) {
          if (v != std::floor(v)) throw CountsError(fmt::format("{}: counts must be integers", describe(rec)));
        }
      }
      c.insert(rec);
    } catch (const CountsError& e) {
      throw CountsError(fmt::format("{}:{}: {}", source, row.line, e.what()));
    }
  }

  if (!c.partial && !c.complete()) {
    for (int i = 0; i < num_settings(d); ++i) {
      for (int j = 0; j < num_settings(d); ++j) {
        const Setting a = setting_at(d, i);
        const Setting b = setting_at(d, j);
        if (!c.has(a, b)) {
          throw CountsError(fmt::format(
              "{}: incomplete grid, missing setting pair ({}, {}) / ({}, {}); {} of {} present (mark partial to accept)",
              source, a.basis, a.element, b.basis, b.element, c.size(),
              static_cast<std::size_t>(num_settings(d)) * num_settings(d)));
        }
      }
    }
  }
  return c;
}

CountMatrix load_counts(const std::filesystem::path& path, const LoadOptions& options) {
  return parse_counts(read_file(path), path.string(), options);
}

std::string format_counts(const CountMatrix& c) {
  std::string out = fmt::format("# dim: {}\n# values: {}\n", c.dim(), c.probabilities ? "probabilities" : "counts");
  if (c.partial) out += "# partial: true\n";
  if (c.integration_period_s) out += fmt::format("# integration_period_s: {}\n", format_double(*c.integration_period_s));
  out += kCountsHeader;
  out += '\n';
  for (const auto& r : c.records()) {
    out += fmt::format("{},{},{},{},{},{},{}\n", r.setting_a.basis, r.setting_a.element, r.setting_b.basis,
                       r.setting_b.element, format_double(r.singles_a), format_double(r.singles_b),
                       format_double(r.coincidences));
  }
  return out;
}

void write_counts(const CountMatrix& c, const std::filesystem::path& path) { write_file_atomic(path, format_counts(c)); }

JointProbMatrix normalize_blocks(const CountMatrix& c) {
  const int d = c.dim();
  JointProbMatrix p(d);
  for (int ba = 0; ba <= d; ++ba) {
    for (int bb = 0; bb <= d; ++bb) {
      const double total = c.block_coincidences(ba, bb);
      if (!(total > 0.0)) {
        p.set_block_available(ba, bb, false);
        continue;
      }
      for (int ka = 0; ka < d; ++ka) {
        for (int kb = 0; kb < d; ++kb) {
          const Setting a{ba, ka};
          const Setting b{bb, kb};
          if (c.has(a, b)) p.set(a, b, c.at(a, b).coincidences / total);
        }
      }
    }
  }
  return p;
}

CountMatrix to_count_matrix(const JointProbMatrix& p) {
  const int d = p.dim();
  CountMatrix c(d);
  c.probabilities = true;
  for (int i = 0; i < num_settings(d); ++i) {
    for (int j = 0; j < num_settings(d); ++j) {
      const Setting a = setting_at(d, i);
      const Setting b = setting_at(d, j);
      double marginal_a = 0.0;
      double marginal_b = 0.0;
      for (int k = 0; k < d; ++k) {
        marginal_a += p.at(a, {b.basis, k});
        marginal_b += p.at({a.basis, k}, b);
      }
      c.insert(CountRecord{a, b, marginal_a, marginal_b, p.at(a, b)});
    }
  }
  return c;
}

}  // namespace mubqkd
