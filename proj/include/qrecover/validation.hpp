#pragma once

// Quick self-check of the library's invariants, run by `qrecover validate`.
// Each check is small enough that the whole suite finishes in about a second.

#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "qrecover/channelbank.hpp"
#include "qrecover/conditions.hpp"
#include "qrecover/csv.hpp"
#include "qrecover/mc_harness.hpp"
#include "qrecover/mixed_recovery.hpp"
#include "qrecover/pure_recovery.hpp"
#include "qrecover/qmath.hpp"

namespace qrecover {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;  // worst deviation or the exception text
};

namespace detail {

inline std::vector<double> unit_grid(int steps) {
  std::vector<double> g;
  for (int k = 0; k <= steps; ++k) g.push_back(static_cast<double>(k) / steps);
  return g;
}

inline std::string sci(double v) {
  std::ostringstream s;
  s.precision(3);
  s << std::scientific << v;
  return s.str();
}

inline CheckResult tolerance_check(std::string name, double worst, double tol) {
  return {std::move(name), worst <= tol, "max deviation " + sci(worst) + " (tol " + sci(tol) + ")"};
}

inline CheckResult check_povm_completeness() {
  double worst = 0.0;
  for (double p : unit_grid(10)) {
    Matrix4c sum;
    for (BranchId b : kAllBranches) {
      const Matrix4c m = pre_measurement(Strength(p), b);
      sum += adjoint(m) * m;
    }
    worst = std::max(worst, max_abs_diff(sum, Matrix4c::identity()));
  }
  return tolerance_check("pre-measurement completeness", worst, 1e-12);
}

inline CheckResult check_kraus_completeness() {
  double worst = 0.0;
  for (double r : unit_grid(10)) {
    Matrix4c sum;
    for (const Matrix4c& e : damping_kraus(Strength(r))) sum += adjoint(e) * e;
    worst = std::max(worst, max_abs_diff(sum, Matrix4c::identity()));
  }
  return tolerance_check("damping Kraus completeness", worst, 1e-12);
}

inline CheckResult check_feed_forward() {
  double worst = 0.0;
  for (BranchId b : kAllBranches) {
    const Matrix4c f = feed_forward(b);
    worst = std::max(worst, max_abs_diff(adjoint(f) * f, Matrix4c::identity()));
    worst = std::max(worst, max_abs_diff(f * f, Matrix4c::identity()));
  }
  return tolerance_check("feed-forward unitary and self-inverse", worst, 1e-15);
}

inline CheckResult check_exact_no_jump(Rng& rng) {
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const auto psi = sample_pure(rng);
    const double r = rng.uniform();
    const double p_min = min_pre_strength(Strength(r));
    const double p = p_min + (1.0 - p_min) * (0.05 + 0.9 * rng.uniform());
    const auto params = complete_recovery_params(Strength(p), Strength(r));
    const double c2 = std::pow((1.0 - p) * (1.0 - r), 2);
    for (BranchId b : kAllBranches) {
      const auto t = trajectory(psi, params, b, JumpId::k00);
      const double fid = std::norm(inner(psi.amplitudes(), t.unnormalized_state)) / t.probability;
      worst = std::max({worst, 1.0 - fid, std::abs(t.probability - c2)});
    }
  }
  return tolerance_check("no-jump trajectory restores the input", worst, 1e-10);
}

inline CheckResult check_success_closed_form(Rng& rng) {
  double worst = 0.0;
  const std::vector<double> grid{0.0, 0.35, 0.8};
  for (int k = 0; k < 5; ++k) {
    const auto psi = sample_pure(rng);
    const auto rho = sample_mixed(rng);
    for (double p : grid)
      for (double q : grid)
        for (double r : grid) {
          const RecoveryParams params(p, q, r);
          const double expected = general_success(params);
          if (expected < kDegenerateProbability) continue;
          worst = std::max(worst, std::abs(run_total(psi, params).g_total - expected));
          worst = std::max(worst, std::abs(run_total_mixed(rho, params).g_total - expected));
        }
  }
  worst = std::max(worst, std::abs(complete_recovery_success(Strength(0.5), Strength(0.5)) - 0.390625));
  return tolerance_check("success probability closed form", worst, 1e-10);
}

inline CheckResult check_pipelines_agree(Rng& rng) {
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const auto psi = sample_pure(rng);
    const RecoveryParams params(rng.uniform(), rng.uniform(), rng.uniform());
    for (BranchId b : kAllBranches) {
      const auto mix = unravel_branch(psi, params, b, TrajectoryMode::All);
      const Matrix4c mapped = apply_branch_map(psi.density().matrix(), params, b);
      worst = std::max(worst, max_abs_diff(mix.unnormalized, mapped));
    }
  }
  return tolerance_check("trajectory mixture equals channel map", worst, 1e-12);
}

inline CheckResult check_fidelity_properties(Rng& rng) {
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const auto a = sample_mixed(rng);
    const auto b = sample_mixed(rng);
    const double fab = uhlmann_fidelity(a, b);
    const double fba = uhlmann_fidelity(b, a);
    worst = std::max(worst, std::abs(fab - fba));
    if (fab < 0.0 || fab > 1.0) worst = std::max(worst, 1.0);
    worst = std::max(worst, std::abs(uhlmann_fidelity(a, a) - 1.0));
  }
  return tolerance_check("fidelity symmetric, bounded, self-fidelity 1", worst, 1e-9);
}

inline CheckResult check_baseline() {
  double worst = 0.0;
  const TwoQubitPure eleven(0.0, 0.0, 0.0, 1.0);
  for (double r : unit_grid(10)) worst = std::max(worst, std::abs(baseline_damped(eleven, Strength(r)) - (1 - r) * (1 - r)));
  const double s = 1.0 / std::sqrt(2.0);
  worst = std::max(worst, std::abs(baseline_damped(TwoQubitPure(s, 0.0, 0.0, s), Strength(0.5)) - 0.625));
  return tolerance_check("no-control baseline", worst, 1e-12);
}

inline CheckResult check_branch_sum_without_post(Rng& rng) {
  // With q = 0 nothing is discarded: the four branches exhaust the probability.
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const auto rho = sample_mixed(rng);
    const RecoveryParams params(rng.uniform(), 0.0, rng.uniform());
    worst = std::max(worst, std::abs(run_total_mixed(rho, params).g_total - 1.0));
  }
  return tolerance_check("branch probabilities sum to 1 at q = 0", worst, 1e-12);
}

inline CheckResult check_sweep_determinism() {
  SweepSpec spec;
  spec.r_grid = GridRange::single(0.6);
  spec.p_grid = {0.5, 0.9, 0.2};
  spec.q_grid = {0.0, 0.8, 0.4};
  spec.ensemble = {EnsembleKind::Mixed, 20, 7};
  std::ostringstream a, b;
  write_sweep_csv(a, sweep(spec));
  spec.threads = 2;
  write_sweep_csv(b, sweep(spec));
  return {"sweep output independent of run and thread count", a.str() == b.str(), "compared CSV bytes"};
}

}  // namespace detail

inline std::vector<CheckResult> run_validation_suite(std::uint64_t seed = 20240607) {
  Rng rng(seed);
  std::vector<std::function<CheckResult()>> checks{
      detail::check_povm_completeness,
      detail::check_kraus_completeness,
      detail::check_feed_forward,
      [&] { return detail::check_exact_no_jump(rng); },
      [&] { return detail::check_success_closed_form(rng); },
      [&] { return detail::check_pipelines_agree(rng); },
      [&] { return detail::check_fidelity_properties(rng); },
      detail::check_baseline,
      [&] { return detail::check_branch_sum_without_post(rng); },
      detail::check_sweep_determinism,
  };
  std::vector<CheckResult> out;
  for (std::size_t k = 0; k < checks.size(); ++k) {
    try {
      out.push_back(checks[k]());
    } catch (const std::exception& e) {
      out.push_back({"check " + std::to_string(k + 1), false, e.what()});
    }
  }
  return out;
}

}  // namespace qrecover
