// Push one state through the protocol at the complete-recovery point and
// compare with doing nothing.

#include <cmath>
#include <cstdio>

#include "qrecover/conditions.hpp"
#include "qrecover/mc_harness.hpp"
#include "qrecover/pure_recovery.hpp"

using namespace qrecover;

int main() {
  const double s = 1.0 / std::sqrt(2.0);
  const TwoQubitPure bell(s, 0.0, 0.0, s);
  const Strength r(0.5);

  std::printf("  p        q        fid_total  g_total    no control\n");
  for (double p : {0.34, 0.5, 0.7, 0.9, 0.99}) {
    const auto params = complete_recovery_params(Strength(p), r);
    const RunResult res = run_total(bell, params);
    std::printf("  %.2f     %.4f   %.6f   %.6f   %.6f\n", p, params.q.value(), res.fid_total, res.g_total,
                baseline_damped(bell, r));
  }
}
