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

#include "mubqkd/cli.hpp"

#include <algorithm>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "mubqkd/basis_io.hpp"
#include "mubqkd/config.hpp"
#include "mubqkd/counts.hpp"
#include "mubqkd/errors.hpp"
#include "mubqkd/fileio.hpp"
#include "mubqkd/mub.hpp"
#include "mubqkd/photonics.hpp"
#include "mubqkd/protocol.hpp"
#include "mubqkd/security.hpp"

namespace mubqkd {
namespace {

constexpr std::uint64_t kLogWarnRounds = 10'000'000;

const char* routing_name(Routing r) {
  switch (r) {
    case Routing::kNoPair:
      return "none";
    case Routing::kSplit:
      return "split";
    case Routing::kBothA:
      return "both_a";
    case Routing::kBothB:
      return "both_b";
  }
  return "?";
}

std::string format_round_log(const SessionRecord& s) {
  std::string out;
  for (const auto& ev : s.events) {
    nlohmann::ordered_json j;
    j["round"] = ev.round;
    j["basis_a"] = ev.basis_a;
    j["elem_a"] = ev.elem_a;
    j["basis_b"] = ev.basis_b;
    j["elem_b"] = ev.elem_b;
    j["routing"] = routing_name(ev.routing);
    j["click_a"] = ev.click_a;
    j["click_b"] = ev.click_b;
    j["coincidence"] = ev.coincidence;
    out += j.dump();
    out += '\n';
  }
  return out;
}

struct SimulateFlags {
  std::string mode;
  int dim = 0;
  std::uint64_t rounds = 0;
  double visibility = 1.0;
  double target_qber = 0.0;
  double flip_prob = 0.0;
  std::string bias;
  std::string eta_file;
  double alpha_sq = 1.0;
  double chi = 0.01;
  std::uint64_t seed = 0;
  int workers = 1;
  double sample_fraction = kDefaultSampleFraction;
  std::string out;
  std::string log;
  std::string config;
  bool exact = false;
  bool verbose = false;
};

template <typename T>
void set_if(const CLI::Option* opt, std::optional<T>& dst, const T& value) {
  if (opt->count() > 0) dst = value;
}

int run_gen_bases(int dim, const std::string& path, std::ostream& out) {
  const MubSet set = mub_set(dim);
  const UnbiasednessReport rep = unbiasedness_report(set);
  if (path.empty()) {
    out << format_bases(set);
  } else {
    write_mub_set(set, path);
    out << fmt::format("wrote {} bases for d = {} to {}\n", set.size(), dim, path);
  }
  out << fmt::format("# max unbiasedness deviation {:.3e}, max orthonormality defect {:.3e}\n", rep.max_deviation,
                     rep.max_orthonormality_defect);
  return kExitOk;
}

int run_simulate(const SimulateFlags& f, const CLI::App& cmd, std::ostream& out, std::ostream& err) {
  RunConfig rc;
  if (!f.config.empty()) rc = load_run_config(f.config);
  RunConfig cli;
  if (cmd.get_option("--mode")->count() > 0) cli.mode = parse_mode(f.mode);
  set_if(cmd.get_option("--dim"), cli.dim, f.dim);
  set_if(cmd.get_option("--rounds"), cli.rounds, f.rounds);
  set_if(cmd.get_option("--visibility"), cli.visibility, f.visibility);
  set_if(cmd.get_option("--target-qber"), cli.target_qber, f.target_qber);
  set_if(cmd.get_option("--flip-prob"), cli.flip_prob, f.flip_prob);
  set_if(cmd.get_option("--bias"), cli.bias, f.bias);
  if (cmd.get_option("--eta-file")->count() > 0) cli.eta_file = f.eta_file;
  set_if(cmd.get_option("--alpha-sq"), cli.alpha_sq, f.alpha_sq);
  set_if(cmd.get_option("--chi"), cli.chi, f.chi);
  set_if(cmd.get_option("--seed"), cli.seed, f.seed);
  set_if(cmd.get_option("--workers"), cli.workers, f.workers);
  set_if(cmd.get_option("--sample-fraction"), cli.sample_fraction, f.sample_fraction);
  if (cmd.get_option("--out")->count() > 0) cli.out = f.out;
  if (cmd.get_option("--log")->count() > 0) cli.log = f.log;
  if (f.exact) cli.exact = true;
  // A command-line target replaces a visibility from the file and vice versa.
  if (cli.visibility) rc.target_qber.reset();
  if (cli.target_qber) rc.visibility.reset();
  rc.override_with(cli);

  if (!rc.out) throw ConfigError("an output path is required (--out or 'out' in the config file)");
  if (f.verbose && !rc.log) rc.log = std::filesystem::path(rc.out->string() + ".rounds.jsonl");
  const bool exact = rc.exact.value_or(false);
  if (exact && rc.log) throw ConfigError("an exact (expectation) run has no rounds to log");

  const ProtocolConfig cfg = to_protocol_config(rc);
  const MubSet set = mub_set(cfg.dim);

  if (exact) {
    const CountMatrix counts = expected_session_counts(cfg, set);
    write_counts(counts, *rc.out);
    out << fmt::format("wrote expected counts for {} rounds (d = {}, {}) to {}\n", cfg.rounds, cfg.dim,
                       mode_name(cfg.mode), rc.out->string());
    return kExitOk;
  }

  if (rc.log && cfg.rounds >= kLogWarnRounds) {
    err << fmt::format("warning: round log for {} rounds will be large\n", cfg.rounds);
  }
  const SessionRecord session = run_session(cfg, set);
  write_counts(session.counts, *rc.out);

  double coincidences = 0.0;
  double sifted = 0.0;
  for (int ba = 0; ba <= cfg.dim; ++ba) {
    for (int bb = 0; bb <= cfg.dim; ++bb) {
      const double c = session.counts.block_coincidences(ba, bb);
      coincidences += c;
      if (ba == bb) sifted += c;
    }
  }
  out << fmt::format("rounds {}  coincidences {}  sifted {}\n", cfg.rounds, format_double(coincidences),
                     format_double(sifted));
  const EmpiricalQber eq = empirical_qber(session.counts);
  if (eq.qber) out << fmt::format("Q = {:.6f} +/- {:.6f}\n", *eq.qber, eq.qber_std_error.value_or(0.0));
  if (rc.log) {
    write_file_atomic(*rc.log, format_round_log(session));
    const SiftedData sd = sift(session);
    if (!sd.entries.empty()) {
      const ParameterEstimate est = estimate_parameters(sd, cfg.sample_fraction, cfg.seed);
      if (est.qber) {
        out << fmt::format("sampled Q = {:.6f} from {} of {} sifted rounds; {} key symbols remain\n", *est.qber,
                           sd.entries.size() - est.key_material.entries.size(), sd.entries.size(),
                           est.key_material.entries.size());
      }
    }
    out << fmt::format("round log written to {}\n", rc.log->string());
  }
  out << fmt::format("counts written to {}\n", rc.out->string());
  return kExitOk;
}

int run_analyze(const std::string& counts_path, const CLI::Option* dim_opt, int dim, bool prob, bool partial,
                const std::string& report_path, const std::string& csv_path, std::ostream& out, std::ostream& err) {
  LoadOptions opts;
  if (dim_opt->count() > 0) opts.dim = dim;
  opts.probabilities = prob;
  opts.allow_partial = partial;
  const CountMatrix counts = load_counts(counts_path, opts);
  const SecurityReport report = make_report(counts);
  const std::string text = format_report(report);
  const std::string csv = fmt::format("{}\n{}\n", kReportCsvHeader, report_csv_row(report));
  for (const auto& w : report.warnings) err << "warning: " << w << '\n';
  if (!report_path.empty()) write_file_atomic(report_path, text);
  if (!csv_path.empty()) write_file_atomic(csv_path, csv);
  out << text << csv;
  return kExitOk;
}

int run_efficiency(const std::string& counts_path, const CLI::Option* dim_opt, int dim, const std::string& synth,
                   double pulses, double alpha_sq, double chi, bool poisson, std::uint64_t seed,
                   const std::string& out_path, std::ostream& out) {
  if (!synth.empty()) {
    if (out_path.empty()) throw ConfigError("--synthesize needs --out for the counts file");
    const EfficiencyTable t = read_efficiency_table(synth);
    SourceParams p;
    p.pulses = pulses;
    p.alpha_sq = alpha_sq;
    p.chi = chi;
    p.validate();
    const auto records = synthesize_counts(p, t, poisson ? Synthesis::kPoisson : Synthesis::kExpectation, seed);
    CountMatrix c(t.dim());
    c.partial = true;
    c.probabilities = !poisson;
    for (const auto& r : records) c.insert(r);
    write_counts(c, out_path);
    out << fmt::format("wrote {} partner records to {}\n", records.size(), out_path);
    return kExitOk;
  }
  if (counts_path.empty()) throw ConfigError("efficiency needs --counts or --synthesize");
  LoadOptions opts;
  if (dim_opt->count() > 0) opts.dim = dim;
  opts.allow_partial = true;
  opts.probabilities = true;
  const CountMatrix c = load_counts(counts_path, opts);
  const auto records = c.records();
  const EfficiencyTable t = estimate_efficiency(records, c.dim());
  if (!out_path.empty()) write_efficiency_table(t, out_path);
  out << format_efficiency_table(t);
  const UniformityReport u = efficiency_uniformity(t);
  out << "# relative spread per basis (arm A, arm B)\n";
  for (int b = 0; b <= c.dim(); ++b) {
    out << fmt::format("# basis {}: {:.4f} {:.4f}\n", b, u.at(Arm::A, b), u.at(Arm::B, b));
  }
  return kExitOk;
}

int run_keyrate(int dim, const CLI::Option* qber_opt, double qber, const std::string& sweep, bool qmax,
                std::ostream& out) {
  if (qmax) out << fmt::format("Q_max = {:.6f}\n", q_max(dim));
  if (qber_opt->count() > 0) out << fmt::format("r_min = {:.4f}\n", key_rate(dim, qber));
  if (!sweep.empty()) {
    const auto c1 = sweep.find(':');
    const auto c2 = c1 == std::string::npos ? std::string::npos : sweep.find(':', c1 + 1);
    double lo = 0.0;
    double hi = 0.0;
    double step = 0.0;
    if (c2 == std::string::npos || !parse_double(sweep.substr(0, c1), lo) ||
        !parse_double(sweep.substr(c1 + 1, c2 - c1 - 1), hi) || !parse_double(sweep.substr(c2 + 1), step)) {
      throw ConfigError(fmt::format("--sweep expects LO:HI:STEP, got '{}'", sweep));
    }
    if (!(step > 0.0) || !(hi >= lo)) throw RangeError("--sweep needs step > 0 and HI >= LO");
    const auto n = static_cast<long long>(std::floor((hi - lo) / step + 1e-9));
    out << "Q,r_min\n";
    for (long long i = 0; i <= n; ++i) {
      const double q = lo + static_cast<double>(i) * step;
      out << fmt::format("{},{}\n", format_double(q), format_double(key_rate(dim, q)));
    }
  }
  if (!qmax && qber_opt->count() == 0 && sweep.empty()) throw ConfigError("keyrate needs --qber, --sweep or --qmax");
  return kExitOk;
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulator and analysis toolkit for MUB-based qudit key distribution"};
  app.name("mubqkd");
  app.require_subcommand(1);

  int gb_dim = 0;
  std::string gb_out;
  auto* gen = app.add_subcommand("gen-bases", "Write a complete set of mutually unbiased bases");
  gen->add_option("--dim", gb_dim, "Dimension (2, 3, 4, 5 or 7)")->required();
  gen->add_option("--out", gb_out, "Output file (stdout if omitted)");

  SimulateFlags sf;
  auto* sim = app.add_subcommand("simulate", "Run a Monte Carlo protocol session and write its counts");
  sim->add_option("--mode", sf.mode, "eb or pm")->check(CLI::IsMember({"eb", "pm"}));
  sim->add_option("--dim", sf.dim, "Dimension");
  sim->add_option("--rounds", sf.rounds, "Pump events (EB) or prepared pulses (PM)");
  auto* vis = sim->add_option("--visibility", sf.visibility, "Isotropic visibility");
  auto* tq = sim->add_option("--target-qber", sf.target_qber, "Error rate to calibrate the noise to");
  vis->excludes(tq);
  sim->add_option("--flip-prob", sf.flip_prob, "PM symmetric flip probability");
  sim->add_option("--bias", sf.bias, "Basis weights: default, uniform or w0,w1,...");
  sim->add_option("--eta-file", sf.eta_file, "Detector efficiency table");
  sim->add_option("--alpha-sq", sf.alpha_sq, "Mean pump amplitude squared");
  sim->add_option("--chi", sf.chi, "Pair creation probability");
  sim->add_option("--seed", sf.seed, "Random seed");
  sim->add_option("--workers", sf.workers, "Worker threads");
  sim->add_option("--sample-fraction", sf.sample_fraction, "Sifted fraction sacrificed for estimation");
  sim->add_option("--out", sf.out, "Counts CSV output");
  auto* log_opt = sim->add_option("--log", sf.log, "Round log output (JSON lines)");
  sim->add_flag("--verbose", sf.verbose, "Write the round log next to the counts file")->excludes(log_opt);
  sim->add_flag("--exact", sf.exact, "Write expected counts instead of sampling");
  sim->add_option("--config", sf.config, "Key-value configuration file");

  std::string an_counts;
  int an_dim = 0;
  bool an_prob = false;
  bool an_partial = false;
  std::string an_report;
  std::string an_csv;
  auto* ana = app.add_subcommand("analyze", "Security report from a counts file");
  ana->add_option("--counts", an_counts, "Counts CSV")->required();
  auto* an_dim_opt = ana->add_option("--dim", an_dim, "Dimension");
  ana->add_flag("--prob", an_prob, "Values are probabilities or intensities");
  ana->add_flag("--partial", an_partial, "Accept an incomplete grid");
  ana->add_option("--report", an_report, "Text report output");
  ana->add_option("--csv", an_csv, "CSV row output");

  std::string ef_counts;
  int ef_dim = 0;
  std::string ef_synth;
  double ef_pulses = 1e8;
  double ef_alpha = 1.0;
  double ef_chi = 0.01;
  bool ef_poisson = false;
  std::uint64_t ef_seed = 0;
  std::string ef_out;
  auto* eff = app.add_subcommand("efficiency", "Estimate detector efficiencies, or synthesize partner counts");
  auto* ef_counts_opt = eff->add_option("--counts", ef_counts, "Counts CSV with partner records");
  auto* ef_dim_opt = eff->add_option("--dim", ef_dim, "Dimension");
  eff->add_option("--synthesize", ef_synth, "Efficiency table to generate counts from")->excludes(ef_counts_opt);
  eff->add_option("--pulses", ef_pulses, "Pump events per setting pair");
  eff->add_option("--alpha-sq", ef_alpha, "Mean pump amplitude squared");
  eff->add_option("--chi", ef_chi, "Pair creation probability");
  eff->add_flag("--poisson", ef_poisson, "Sample Poisson counts instead of expectations");
  eff->add_option("--seed", ef_seed, "Random seed for --poisson");
  eff->add_option("--out", ef_out, "Output file");

  int kr_dim = 0;
  double kr_qber = 0.0;
  std::string kr_sweep;
  bool kr_qmax = false;
  auto* kr = app.add_subcommand("keyrate", "Evaluate the secret key rate bound");
  kr->add_option("--dim", kr_dim, "Dimension")->required()->check(CLI::Range(2, 1 << 20));
  auto* kr_qber_opt = kr->add_option("--qber", kr_qber, "Error rate");
  kr->add_option("--sweep", kr_sweep, "LO:HI:STEP");
  kr->add_flag("--qmax", kr_qmax, "Print the maximum tolerable error rate");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (gen->parsed()) return run_gen_bases(gb_dim, gb_out, out);
    if (sim->parsed()) return run_simulate(sf, *sim, out, err);
    if (ana->parsed()) {
      return run_analyze(an_counts, an_dim_opt, an_dim, an_prob, an_partial, an_report, an_csv, out, err);
    }
    if (eff->parsed()) {
      return run_efficiency(ef_counts, ef_dim_opt, ef_dim, ef_synth, ef_pulses, ef_alpha, ef_chi, ef_poisson, ef_seed,
                            ef_out, out);
    }
    if (kr->parsed()) return run_keyrate(kr_dim, kr_qber_opt, kr_qber, kr_sweep, kr_qmax, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  err << app.help();
  return kExitValidation;
}

}  // namespace mubqkd
