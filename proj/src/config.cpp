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

#include "mubqkd/config.hpp"

#include <charconv>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "mubqkd/errors.hpp"
#include "mubqkd/fileio.hpp"
#include "mubqkd/state.hpp"

namespace mubqkd {

void RunConfig::override_with(const RunConfig& o) {
  auto take = [](auto& dst, const auto& src) {
    if (src) dst = src;
  };
  take(mode, o.mode);
  take(dim, o.dim);
  take(rounds, o.rounds);
  take(visibility, o.visibility);
  take(target_qber, o.target_qber);
  take(flip_prob, o.flip_prob);
  take(bias, o.bias);
  take(eta_file, o.eta_file);
  take(alpha_sq, o.alpha_sq);
  take(chi, o.chi);
  take(seed, o.seed);
  take(workers, o.workers);
  take(sample_fraction, o.sample_fraction);
  take(out, o.out);
  take(log, o.log);
  take(exact, o.exact);
}

Mode parse_mode(const std::string& s) {
  if (s == "eb") return Mode::kEntanglement;
  if (s == "pm") return Mode::kPrepareMeasure;
  throw ConfigError(fmt::format("mode must be 'eb' or 'pm', got '{}'", s));
}

std::string mode_name(Mode m) { return m == Mode::kEntanglement ? "eb" : "pm"; }

std::vector<double> parse_bias(const std::string& s, int d) {
  const auto t = trim(s);
  if (t == "default") return default_basis_bias(d);
  if (t == "uniform") return uniform_basis_bias(d);
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= t.size()) {
    const auto comma = t.find(',', start);
    const auto piece = t.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    double v = 0.0;
    if (!parse_double(trim(piece), v)) throw ConfigError(fmt::format("bad bias weight '{}'", trim(piece)));
    out.push_back(v);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (static_cast<int>(out.size()) != d + 1) {
    throw ConfigError(fmt::format("bias needs {} weights for d = {}, got {}", d + 1, d, out.size()));
  }
  return out;
}

namespace {

template <typename T>
T parse_integer(std::string_view v, const std::string& source, std::size_t line, std::string_view key) {
  T out{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc{} || ptr != v.data() + v.size()) {
    throw ParseError(source, line, fmt::format("{} must be an integer, got '{}'", key, v));
  }
  return out;
}

double parse_real(std::string_view v, const std::string& source, std::size_t line, std::string_view key) {
  double out = 0.0;
  if (!parse_double(v, out)) throw ParseError(source, line, fmt::format("{} must be a number, got '{}'", key, v));
  return out;
}

bool parse_flag(std::string_view v, const std::string& source, std::size_t line, std::string_view key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ParseError(source, line, fmt::format("{} must be true or false, got '{}'", key, v));
}

}  // namespace

RunConfig parse_run_config(const std::string& text, const std::string& source) {
  RunConfig rc;
  std::set<std::string, std::less<>> seen;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(source, line_no, "expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError(source, line_no, "empty key");
    if (!seen.insert(key).second) throw ConfigError(fmt::format("{}:{}: key '{}' repeated", source, line_no, key));

    if (key == "mode") {
      try {
        rc.mode = parse_mode(std::string(value));
      } catch (const ConfigError& e) {
        throw ParseError(source, line_no, e.what());
      }
    } else if (key == "dim") {
      rc.dim = parse_integer<int>(value, source, line_no, key);
    } else if (key == "rounds") {
      rc.rounds = parse_integer<std::uint64_t>(value, source, line_no, key);
    } else if (key == "visibility") {
      rc.visibility = parse_real(value, source, line_no, key);
    } else if (key == "target_qber") {
      rc.target_qber = parse_real(value, source, line_no, key);
    } else if (key == "flip_prob") {
      rc.flip_prob = parse_real(value, source, line_no, key);
    } else if (key == "bias") {
      rc.bias = std::string(value);
    } else if (key == "eta_file") {
      rc.eta_file = std::filesystem::path(std::string(value));
    } else if (key == "alpha_sq") {
      rc.alpha_sq = parse_real(value, source, line_no, key);
    } else if (key == "chi") {
      rc.chi = parse_real(value, source, line_no, key);
    } else if (key == "seed") {
      rc.seed = parse_integer<std::uint64_t>(value, source, line_no, key);
    } else if (key == "workers") {
      rc.workers = parse_integer<int>(value, source, line_no, key);
    } else if (key == "sample_fraction") {
      rc.sample_fraction = parse_real(value, source, line_no, key);
    } else if (key == "out") {
      rc.out = std::filesystem::path(std::string(value));
    } else if (key == "log") {
      rc.log = std::filesystem::path(std::string(value));
    } else if (key == "exact") {
      rc.exact = parse_flag(value, source, line_no, key);
    } else {
      throw ConfigError(fmt::format("{}:{}: unknown key '{}'", source, line_no, key));
    }
  }
  return rc;
}

RunConfig load_run_config(const std::filesystem::path& path) { return parse_run_config(read_file(path), path.string()); }

ProtocolConfig to_protocol_config(const RunConfig& rc) {
  if (!rc.dim) throw ConfigError("dim is required");
  if (!rc.rounds) throw ConfigError("rounds is required");
  if (rc.visibility && rc.target_qber) throw ConfigError("visibility and target_qber are mutually exclusive");

  ProtocolConfig cfg;
  cfg.dim = *rc.dim;
  cfg.mode = rc.mode.value_or(Mode::kEntanglement);
  cfg.rounds = *rc.rounds;
  if (rc.bias) cfg.basis_bias = parse_bias(*rc.bias, cfg.dim);
  if (rc.visibility) cfg.visibility = *rc.visibility;
  if (rc.flip_prob) cfg.flip_prob = *rc.flip_prob;
  if (rc.target_qber) {
    if (cfg.mode == Mode::kEntanglement) {
      cfg.visibility = visibility_for_qber(cfg.dim, *rc.target_qber);
    } else {
      if (rc.flip_prob) throw ConfigError("flip_prob and target_qber are mutually exclusive");
      cfg.flip_prob = *rc.target_qber;
    }
  }
  if (rc.alpha_sq) cfg.source.alpha_sq = *rc.alpha_sq;
  if (rc.chi) cfg.source.chi = *rc.chi;
  if (rc.seed) cfg.seed = *rc.seed;
  if (rc.workers) cfg.workers = *rc.workers;
  if (rc.sample_fraction) cfg.sample_fraction = *rc.sample_fraction;
  if (rc.eta_file) cfg.efficiencies = read_efficiency_table(*rc.eta_file);
  cfg.record_rounds = rc.log.has_value();
  cfg.validate();
  return cfg;
}

}  // namespace mubqkd
