#pragma once

// Pure-state protocol via trajectory unravelling: every (branch, jump) pair
// is followed as one unnormalized state vector through
//   M_b -> F_b -> e_j -> F_b -> N_b
// and the branch output is the normalized mixture over jumps.

#include <array>
#include <cmath>
#include <optional>
#include <string>

#include "qrecover/channelbank.hpp"
#include "qrecover/conditions.hpp"
#include "qrecover/error.hpp"
#include "qrecover/qmath.hpp"

namespace qrecover {

// Probability mass below which a branch (or the whole run) is treated as
// never occurring.
inline constexpr double kDegenerateProbability = 1e-14;

enum class TrajectoryMode { All, NoJumpOnly };

constexpr std::string_view to_string(TrajectoryMode mode) {
  return mode == TrajectoryMode::All ? "all" : "nojump";
}

constexpr bool jump_enabled(TrajectoryMode mode, JumpId j) {
  return mode == TrajectoryMode::All || j == JumpId::k00;
}

// alpha|00> + beta|01> + gamma|10> + delta|11>, unit norm.
class TwoQubitPure {
 public:
  static constexpr double kDefaultTolerance = 1e-12;

  explicit TwoQubitPure(const Vector4c& amplitudes, double tol = kDefaultTolerance)
      : amplitudes_(amplitudes) {
    for (const auto& c : amplitudes)
      if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
        throw Error(Errc::OutOfRange, "amplitude is not finite");
    const double norm2 = squared_norm(amplitudes);
    if (std::abs(norm2 - 1.0) > tol)
      throw Error(Errc::NotNormalized, "squared norm is " + std::to_string(norm2));
  }

  TwoQubitPure(Complex alpha, Complex beta, Complex gamma, Complex delta,
               double tol = kDefaultTolerance)
      : TwoQubitPure(Vector4c{alpha, beta, gamma, delta}, tol) {}

  const Vector4c& amplitudes() const { return amplitudes_; }
  Complex operator[](std::size_t k) const { return amplitudes_[k]; }

  DensityMatrix density() const { return DensityMatrix::from_pure(amplitudes_, 1e-10); }

 private:
  Vector4c amplitudes_;
};

struct Trajectory {
  BranchId branch;
  JumpId jump;
  Vector4c unnormalized_state{};
  double probability = 0.0;
};

struct BranchResult {
  BranchId branch;
  Matrix4c rho_fin;  // normalized
  double g_fin = 0.0;
  double fidelity = 0.0;
};

// Per-branch summary shared by the pure and mixed pipelines. A branch whose
// probability is below kDegenerateProbability has no fidelity and carries no
// weight in the totals.
struct BranchSummary {
  BranchId branch = BranchId::k00;
  double g_fin = 0.0;
  std::optional<double> fidelity;
};

struct RunResult {
  std::array<BranchSummary, 4> per_branch{};
  double fid_total = 0.0;
  double g_total = 0.0;
};

inline Trajectory trajectory(const TwoQubitPure& psi, const RecoveryParams& params, BranchId b,
                             JumpId j, TrajectoryMode mode = TrajectoryMode::All) {
  Trajectory t{b, j, {}, 0.0};
  if (!jump_enabled(mode, j)) return t;

  const Matrix4c f = feed_forward(b);
  Vector4c v = pre_measurement(params.p, b) * psi.amplitudes();
  v = f * v;
  v = damping_kraus(params.r)[index(j)] * v;
  v = f * v;
  v = post_measurement(params.q, b) * v;

  t.unnormalized_state = v;
  t.probability = squared_norm(v);
  return t;
}

namespace detail {

struct BranchMixture {
  Matrix4c unnormalized;
  double probability = 0.0;
};

inline BranchMixture unravel_branch(const TwoQubitPure& psi, const RecoveryParams& params,
                                    BranchId b, TrajectoryMode mode) {
  BranchMixture mix;
  for (JumpId j : kAllJumps) {
    const Trajectory t = trajectory(psi, params, b, j, mode);
    if (t.probability == 0.0) continue;
    mix.unnormalized += outer(t.unnormalized_state, t.unnormalized_state);
    mix.probability += t.probability;
  }
  return mix;
}

inline BranchResult finish_branch(const TwoQubitPure& psi, BranchId b, const BranchMixture& mix) {
  if (mix.probability < kDegenerateProbability)
    throw Error(Errc::DegenerateBranch, "branch " + std::string(to_string(b)) +
                                            " has probability " + std::to_string(mix.probability));
  BranchResult out{b, (1.0 / mix.probability) * mix.unnormalized, mix.probability, 0.0};
  out.fidelity = clamp_fidelity(expectation(out.rho_fin, psi.amplitudes()).real());
  return out;
}

// Weighted total over branches; degenerate branches contribute probability
// but no fidelity.
inline RunResult aggregate(const std::array<BranchSummary, 4>& branches) {
  RunResult out;
  out.per_branch = branches;
  double weighted = 0.0;
  double weight = 0.0;
  for (const auto& s : branches) {
    out.g_total += s.g_fin;
    if (!s.fidelity) continue;
    weighted += s.g_fin * *s.fidelity;
    weight += s.g_fin;
  }
  if (out.g_total < kDegenerateProbability || weight <= 0.0)
    throw Error(Errc::DegenerateTotal, "total success probability " + std::to_string(out.g_total));
  out.fid_total = clamp_fidelity(weighted / weight);
  return out;
}

}  // namespace detail

inline BranchResult run_branch(const TwoQubitPure& psi, const RecoveryParams& params, BranchId b,
                               TrajectoryMode mode = TrajectoryMode::All) {
  return detail::finish_branch(psi, b, detail::unravel_branch(psi, params, b, mode));
}

inline RunResult run_total(const TwoQubitPure& psi, const RecoveryParams& params,
                           TrajectoryMode mode = TrajectoryMode::All) {
  std::array<BranchSummary, 4> branches{};
  for (BranchId b : kAllBranches) {
    BranchSummary& s = branches[index(b)];
    s.branch = b;
    const auto mix = detail::unravel_branch(psi, params, b, mode);
    s.g_fin = mix.probability;
    if (mix.probability >= kDegenerateProbability) s.fidelity = detail::finish_branch(psi, b, mix).fidelity;
  }
  return detail::aggregate(branches);
}

}  // namespace qrecover
