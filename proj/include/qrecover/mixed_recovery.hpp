#pragma once

// Mixed-state protocol: each branch is the completely positive map
//   rho -> sum_j K_{b,j} rho K_{b,j}^dag,  K_{b,j} = N_b F_b e_j F_b M_b,
// scored against the input with the Uhlmann fidelity.

#include <array>
#include <string>

#include "qrecover/channelbank.hpp"
#include "qrecover/conditions.hpp"
#include "qrecover/error.hpp"
#include "qrecover/pure_recovery.hpp"
#include "qrecover/qmath.hpp"

namespace qrecover {

struct MixedBranchResult {
  BranchId branch;
  Matrix4c rho_unnorm;
  double g_fin = 0.0;
  DensityMatrix rho_fin;
  double fidelity = 0.0;
};

// Unnormalized branch output for a precomputed operator table.
inline Matrix4c apply_branch_map(const Matrix4c& rho, const ProtocolKrausTable& table, BranchId b,
                                 TrajectoryMode mode = TrajectoryMode::All) {
  Matrix4c out;
  for (JumpId j : kAllJumps) {
    if (!jump_enabled(mode, j)) continue;
    const Matrix4c& k = table[index(b)][index(j)];
    out += k * rho * adjoint(k);
  }
  return out;
}

inline Matrix4c apply_branch_map(const Matrix4c& rho, const RecoveryParams& params, BranchId b,
                                 TrajectoryMode mode = TrajectoryMode::All) {
  return apply_branch_map(rho, protocol_kraus_table(params.p, params.q, params.r), b, mode);
}

inline MixedBranchResult recover_branch(const DensityMatrix& rho_in, const RecoveryParams& params,
                                        BranchId b, TrajectoryMode mode = TrajectoryMode::All) {
  const Matrix4c unnorm = apply_branch_map(rho_in.matrix(), params, b, mode);
  const double g = trace(unnorm).real();
  if (g < kDegenerateProbability)
    throw Error(Errc::DegenerateBranch,
                "branch " + std::string(to_string(b)) + " has probability " + std::to_string(g));
  DensityMatrix rho_fin((1.0 / g) * unnorm, 1e-10);
  const double fid = uhlmann_fidelity(rho_in, rho_fin);
  return MixedBranchResult{b, unnorm, g, rho_fin, fid};
}

inline RunResult run_total_mixed(const DensityMatrix& rho_in, const RecoveryParams& params,
                                 TrajectoryMode mode = TrajectoryMode::All) {
  const ProtocolKrausTable table = protocol_kraus_table(params.p, params.q, params.r);
  const Matrix4c sqrt_in = psd_sqrt(rho_in.matrix());
  std::array<BranchSummary, 4> branches{};
  for (BranchId b : kAllBranches) {
    BranchSummary& s = branches[index(b)];
    s.branch = b;
    const Matrix4c unnorm = apply_branch_map(rho_in.matrix(), table, b, mode);
    s.g_fin = trace(unnorm).real();
    if (s.g_fin < kDegenerateProbability) continue;
    s.fidelity = detail::fidelity_from_sqrt(sqrt_in, (1.0 / s.g_fin) * unnorm);
  }
  return detail::aggregate(branches);
}

}  // namespace qrecover
