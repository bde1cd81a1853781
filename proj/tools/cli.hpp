#pragma once

// qrecover command line. run_command() is kept separate from main() so the
// tests can drive it in-process with string streams.

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qrecover/channelbank.hpp"
#include "qrecover/conditions.hpp"
#include "qrecover/csv.hpp"
#include "qrecover/mc_harness.hpp"
#include "qrecover/mixed_recovery.hpp"
#include "qrecover/plot.hpp"
#include "qrecover/pure_recovery.hpp"
#include "qrecover/validation.hpp"

namespace qrecover::cli {

enum Exit : int { kOk = 0, kUsage = 1, kInfeasible = 2, kValidation = 3, kIo = 4 };

inline constexpr double kInputTolerance = 1e-9;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline int exit_code_for(Errc code) {
  switch (code) {
    case Errc::Infeasible:
    case Errc::ZeroStrength:
    case Errc::DegenerateTotal:
      return kInfeasible;
    case Errc::Io:
    case Errc::Parse:
    case Errc::EmptyInput:
      return kIo;
    default:
      return kUsage;
  }
}

struct Config {
  // run
  std::string state = "bell";
  std::vector<double> amplitudes;
  std::string density_path;
  std::optional<double> p;
  std::string q;  // number or "complete"
  std::optional<double> r;
  // sweep
  std::string q_mode = "grid";
  std::string mode = "all";
  std::string ensemble = "pure";
  std::size_t n = 10000;
  std::uint64_t seed = 1;
  std::string p_grid, q_grid, r_grid;
  std::string p_preset = "grid";
  std::string baseline_out;
  unsigned threads = 0;
  // files
  std::string in;
  std::string out;
  int bins = 50;
  // plot
  std::string kind = "auto";
  std::string x, y, z;
};

namespace detail {

inline TrajectoryMode parse_mode(const std::string& s) {
  return s == "nojump" ? TrajectoryMode::NoJumpOnly : TrajectoryMode::All;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(Errc::Io, "cannot write '" + path + "'");
  return f;
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(Errc::Io, "cannot read '" + path + "'");
  return f;
}

// 16 real entries, or 32 numbers as (re, im) pairs, row-major. Separators are
// whitespace or commas; '#' starts a comment.
inline DensityMatrix read_density_file(const std::string& path) {
  auto in = open_in(path);
  std::vector<double> nums;
  std::string line;
  while (std::getline(in, line)) {
    line = line.substr(0, line.find('#'));
    for (char& c : line)
      if (c == ',') c = ' ';
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) {
      char* end = nullptr;
      const double v = std::strtod(tok.c_str(), &end);
      if (end != tok.c_str() + tok.size()) throw Error(Errc::Parse, "bad number '" + tok + "' in " + path);
      nums.push_back(v);
    }
  }
  Matrix4c m;
  if (nums.size() == 16) {
    for (std::size_t k = 0; k < 16; ++k) m.data[k] = nums[k];
  } else if (nums.size() == 32) {
    for (std::size_t k = 0; k < 16; ++k) m.data[k] = Complex(nums[2 * k], nums[2 * k + 1]);
  } else {
    throw Error(Errc::Parse, path + ": expected 16 or 32 numbers, got " + std::to_string(nums.size()));
  }
  return DensityMatrix(m, kInputTolerance);
}

inline TwoQubitPure preset_state(const std::string& name) {
  const double s = 1.0 / std::sqrt(2.0);
  if (name == "bell") return TwoQubitPure(s, 0.0, 0.0, s);
  if (name == "ground") return TwoQubitPure(1.0, 0.0, 0.0, 0.0);
  if (name == "w-like") return TwoQubitPure(0.0, s, s, 0.0);
  throw UsageError("unknown state '" + name + "' (bell, ground, w-like)");
}

inline void print_run(std::ostream& out, const RunResult& res, const RecoveryParams& params, double baseline) {
  out << "p=" << format_real(params.p) << " q=" << format_real(params.q) << " r=" << format_real(params.r) << '\n';
  for (const auto& b : res.per_branch) {
    out << "branch " << to_string(b.branch) << ": g=" << format_real(b.g_fin)
        << " fid=" << (b.fidelity ? format_real(*b.fidelity) : std::string("n/a")) << '\n';
  }
  out << "fid_total=" << format_real(res.fid_total) << " g_total=" << format_real(res.g_total) << '\n';
  out << "baseline_fid=" << format_real(baseline) << '\n';
}

inline int cmd_run(const Config& c, std::ostream& out, std::ostream& err) {
  if (!c.p || !c.r) throw UsageError("run needs --p and --r");
  const bool complete = c.q == "complete" || c.q_mode == "complete";
  if (c.q_mode == "complete" && !c.q.empty() && c.q != "complete")
    throw UsageError("--q and --q-mode complete are exclusive");
  if (!complete && c.q.empty()) throw UsageError("run needs --q (a value or 'complete')");

  const Strength p(*c.p);
  const Strength r(*c.r);
  Strength q;
  if (complete) {
    try {
      q = complete_recovery_q(p, r);
    } catch (const Error&) {
      err << "infeasible: complete recovery needs 0 < p and p >= (1-r)/(2-r) = "
          << format_real(min_pre_strength(r)) << " (got p=" << format_real(p) << ")\n";
      return kInfeasible;
    }
  } else {
    char* end = nullptr;
    const double v = std::strtod(c.q.c_str(), &end);
    if (end != c.q.c_str() + c.q.size()) throw UsageError("--q must be a number or 'complete'");
    q = Strength(v);
  }
  const RecoveryParams params(p, q, r);
  const TrajectoryMode mode = parse_mode(c.mode);
  if (general_success(params) < kDegenerateProbability) {
    err << "infeasible: success probability (pq+qr-pqr-1)^2 vanishes at these parameters\n";
    return kInfeasible;
  }

  if (!c.density_path.empty()) {
    const DensityMatrix rho = read_density_file(c.density_path);
    out << "state: " << c.density_path << " (mixed, purity " << format_real(rho.purity()) << ")\n";
    print_run(out, run_total_mixed(rho, params, mode), params, baseline_damped(rho, r));
    return kOk;
  }
  std::optional<TwoQubitPure> psi;
  if (!c.amplitudes.empty()) {
    if (c.amplitudes.size() != 8) throw UsageError("--amplitudes takes 8 numbers (re, im per component)");
    Vector4c v;
    for (std::size_t k = 0; k < 4; ++k) v[k] = Complex(c.amplitudes[2 * k], c.amplitudes[2 * k + 1]);
    psi.emplace(v, kInputTolerance);
    out << "state: amplitudes (pure)\n";
  } else {
    psi.emplace(preset_state(c.state));
    out << "state: " << c.state << " (pure)\n";
  }
  print_run(out, run_total(*psi, params, mode), params, baseline_damped(*psi, r));
  return kOk;
}

inline int cmd_sweep(const Config& c, std::ostream& out, std::ostream& err) {
  SweepSpec spec;
  spec.q_mode = c.q_mode == "complete" ? QMode::CompleteRecovery : QMode::Grid;
  spec.mode = parse_mode(c.mode);
  spec.ensemble = {c.ensemble == "mixed" ? EnsembleKind::Mixed : EnsembleKind::Pure, c.n, c.seed};
  spec.threads = c.threads;
  if (!c.r_grid.empty() && c.r) throw UsageError("--r and --r-grid are exclusive");
  spec.r_grid = !c.r_grid.empty() ? parse_grid(c.r_grid) : GridRange::single(c.r.value_or(0.5));
  // one swept variable -> step 0.01, a (p, q) surface -> step 0.02
  const bool two_d = spec.q_mode == QMode::Grid;
  spec.p_grid = !c.p_grid.empty() ? parse_grid(c.p_grid) : GridRange{0.0, 1.0, two_d ? 0.02 : 0.01};
  spec.q_grid = !c.q_grid.empty() ? parse_grid(c.q_grid) : GridRange{0.0, 1.0, 0.02};
  if (spec.q_mode == QMode::CompleteRecovery && !c.q_grid.empty())
    throw UsageError("--q-grid and --q-mode complete are exclusive");
  if (c.p_preset == "max-success")
    spec.p_preset = PPreset::MaxSuccess;
  else if (c.p_preset == "max-fidelity")
    spec.p_preset = PPreset::MaxFidelity;
  if (spec.p_preset != PPreset::FromGrid && spec.q_mode != QMode::CompleteRecovery)
    throw UsageError("--p-preset needs --q-mode complete");

  const Ensemble ensemble = make_ensemble(spec.ensemble);
  const auto rows = sweep(spec, ensemble);
  {
    auto f = open_out(c.out);
    write_sweep_metadata(f, spec);
    write_sweep_csv(f, rows);
    if (!f) throw Error(Errc::Io, "write failed for '" + c.out + "'");
  }

  const SweepRow* best = nullptr;
  std::size_t feasible = 0;
  for (const auto& row : rows) {
    if (!row.feasible) continue;
    ++feasible;
    if (best == nullptr || row.fid_mean > best->fid_mean) best = &row;
  }
  out << "wrote " << rows.size() << " rows (" << feasible << " feasible) to " << c.out << '\n';
  if (best)
    out << "max fid_mean=" << format_real(best->fid_mean) << " at r=" << format_real(best->r)
        << " p=" << format_real(best->p) << " q=" << format_real(best->q) << " (g_mean=" << format_real(best->g_mean)
        << ")\n";
  else
    err << "warning: no feasible cell in the sweep\n";

  if (!c.baseline_out.empty()) {
    auto f = open_out(c.baseline_out);
    f << "r,fid_mean,fid_std,n_states\n";
    for (const auto& b : baseline_sweep(spec.r_grid, ensemble))
      f << format_real(b.r) << ',' << format_real(b.fidelity.mean) << ',' << format_real(b.fidelity.std) << ','
        << b.n_states << '\n';
    out << "wrote baseline to " << c.baseline_out << '\n';
  }
  return kOk;
}

inline int cmd_pareto(const Config& c, std::ostream& out) {
  auto in = open_in(c.in);
  auto rows = read_sweep_csv(in);
  if (c.r) {
    std::erase_if(rows, [&](const SweepRow& row) { return std::abs(row.r - *c.r) > 1e-9; });
  } else {
    std::set<double> rs;
    for (const auto& row : rows) rs.insert(row.r);
    if (rs.size() > 1) throw UsageError("input has several r values; pick one with --r");
  }
  const auto boundary = pareto(rows, c.bins);
  auto f = open_out(c.out);
  write_pareto_csv(f, boundary);
  out << "wrote " << boundary.size() << " boundary points to " << c.out << '\n';
  return kOk;
}

inline int cmd_validate(std::ostream& out) {
  const auto results = run_validation_suite();
  std::size_t passed = 0;
  for (const auto& r : results) {
    out << (r.passed ? "PASS " : "FAIL ") << r.name << " - " << r.detail << '\n';
    passed += r.passed ? 1 : 0;
  }
  out << passed << "/" << results.size() << " checks passed\n";
  return passed == results.size() ? kOk : kValidation;
}

inline std::vector<std::string> split_names(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!tok.empty()) out.push_back(tok);
  return out;
}

inline std::size_t distinct(const std::vector<double>& v) {
  std::set<double> s;
  for (double x : v)
    if (std::isfinite(x)) s.insert(x);
  return s.size();
}

inline bool has_column(const NumericTable& t, const std::string& name) {
  return std::find(t.header.begin(), t.header.end(), name) != t.header.end();
}

inline int cmd_plot(const Config& c, std::ostream& out) {
  auto in = open_in(c.in);
  const NumericTable t = read_numeric_csv(in);
  std::string kind = c.kind;
  std::string x = c.x, y = c.y, z = c.z;

  if (kind == "auto") {
    if (has_column(t, "fidelity") && has_column(t, "success")) {
      kind = "line";
      if (x.empty()) x = "fidelity";
      if (y.empty()) y = "success";
    } else if (has_column(t, "p") && has_column(t, "q") && distinct(t.column("p")) > 1 &&
               distinct(t.column("q")) > 1 && (!has_column(t, "r") || distinct(t.column("r")) == 1) &&
               t.column("p").size() == distinct(t.column("p")) * distinct(t.column("q"))) {
      kind = "heatmap";
      if (x.empty()) x = "p";
      if (y.empty()) y = "q";
      if (z.empty()) z = "fid_mean";
    } else {
      kind = "line";
      if (x.empty()) x = has_column(t, "p") && distinct(t.column("p")) > 1 ? "p" : "r";
      if (y.empty()) y = has_column(t, "g_mean") ? "fid_mean,g_mean" : "fid_mean";
    }
  }

  auto f = open_out(c.out);
  if (kind == "heatmap") {
    if (x.empty() || y.empty() || z.empty()) throw UsageError("heatmap needs --x, --y and --z");
    write_heatmap_svg(f, t.column(x), t.column(y), t.column(z), x, y, z);
  } else if (kind == "line") {
    if (x.empty() || y.empty()) throw UsageError("line plot needs --x and --y");
    std::vector<Series> series;
    for (const auto& name : split_names(y)) series.push_back({name, t.column(x), t.column(name)});
    write_line_svg(f, series, x, y, c.in);
  } else {
    throw UsageError("unknown plot kind '" + kind + "'");
  }
  out << "wrote " << kind << " plot to " << c.out << '\n';
  return kOk;
}

}  // namespace detail

inline int run_command(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Config c;
  CLI::App app{"Two-qubit amplitude-damping recovery by weak measurement and feed-forward", "qrecover"};
  app.require_subcommand(1);

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--mode", c.mode, "trajectory mode")->check(CLI::IsMember({"all", "nojump"}));
  };
  auto strength = CLI::Range(0.0, 1.0);

  auto* run = app.add_subcommand("run", "one state: per-branch and total fidelity/success");
  run->add_option("--p", c.p, "pre-measurement strength")->check(strength);
  run->add_option("--q", c.q, "post-measurement strength or 'complete'");
  run->add_option("--r", c.r, "damping rate")->check(strength);
  run->add_option("--q-mode", c.q_mode)->check(CLI::IsMember({"grid", "complete"}));
  auto* state_opt = run->add_option("--state", c.state, "bell | ground | w-like")
                        ->check(CLI::IsMember({"bell", "ground", "w-like"}));
  auto* amp_opt = run->add_option("--amplitudes", c.amplitudes, "8 reals: re/im of a00 a01 a10 a11")->expected(8);
  auto* dens_opt = run->add_option("--density", c.density_path, "file with 16 complex entries, row-major");
  state_opt->excludes(amp_opt)->excludes(dens_opt);
  amp_opt->excludes(dens_opt);
  add_common(run);

  auto* sw = app.add_subcommand("sweep", "ensemble average over an (r, p, q) grid, CSV out");
  sw->add_option("--r", c.r, "single damping rate (default 0.5)")->check(strength);
  sw->add_option("--r-grid", c.r_grid, "a:b:step");
  sw->add_option("--p-grid", c.p_grid, "a:b:step");
  sw->add_option("--q-grid", c.q_grid, "a:b:step");
  sw->add_option("--q-mode", c.q_mode)->check(CLI::IsMember({"grid", "complete"}));
  sw->add_option("--p-preset", c.p_preset, "grid | max-success | max-fidelity (complete mode)")
      ->check(CLI::IsMember({"grid", "max-success", "max-fidelity"}));
  sw->add_option("--ensemble", c.ensemble)->check(CLI::IsMember({"pure", "mixed"}));
  sw->add_option("--n", c.n, "states in the ensemble")->check(CLI::PositiveNumber);
  sw->add_option("--seed", c.seed);
  sw->add_option("--threads", c.threads, "worker threads (0 = auto)");
  sw->add_option("--baseline-out", c.baseline_out, "also write the no-control fidelity per r");
  sw->add_option("--out", c.out, "CSV path (default sweep.csv)");
  add_common(sw);

  auto* pa = app.add_subcommand("pareto", "fidelity/success boundary of a sweep CSV");
  pa->add_option("--in", c.in, "default sweep.csv");
  pa->add_option("--out", c.out, "default pareto.csv");
  pa->add_option("--bins", c.bins, "default 50");
  pa->add_option("--r", c.r, "keep rows with this r");

  auto* va = app.add_subcommand("validate", "run the invariant checks");

  auto* pl = app.add_subcommand("plot", "SVG from a sweep or pareto CSV");
  pl->add_option("--in", c.in, "default pareto.csv");
  pl->add_option("--out", c.out, "default plot.svg");
  pl->add_option("--kind", c.kind)->check(CLI::IsMember({"auto", "line", "heatmap"}));
  pl->add_option("--x", c.x);
  pl->add_option("--y", c.y, "comma-separated for several lines");
  pl->add_option("--z", c.z, "heatmap value column");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  // Subcommands share Config fields, so file defaults are filled in here.
  auto fill = [](std::string& field, const char* value) {
    if (field.empty()) field = value;
  };
  if (sw->parsed()) fill(c.out, "sweep.csv");
  if (pa->parsed()) {
    fill(c.in, "sweep.csv");
    fill(c.out, "pareto.csv");
  }
  if (pl->parsed()) {
    fill(c.in, "pareto.csv");
    fill(c.out, "plot.svg");
  }

  try {
    if (run->parsed()) return detail::cmd_run(c, out, err);
    if (sw->parsed()) return detail::cmd_sweep(c, out, err);
    if (pa->parsed()) return detail::cmd_pareto(c, out);
    if (va->parsed()) return detail::cmd_validate(out);
    if (pl->parsed()) return detail::cmd_plot(c, out);
  } catch (const UsageError& e) {
    err << "usage: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

}  // namespace qrecover::cli
