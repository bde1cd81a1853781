// A coarse (p, q) sweep over a small random ensemble, written as CSV to
// stdout, followed by its fidelity/success boundary.

#include <iostream>

#include "qrecover/csv.hpp"
#include "qrecover/mc_harness.hpp"

using namespace qrecover;

int main() {
  SweepSpec spec;
  spec.r_grid = GridRange::single(0.6);
  spec.p_grid = {0.0, 1.0, 0.1};
  spec.q_grid = {0.0, 1.0, 0.1};
  spec.ensemble = {EnsembleKind::Pure, 500, 42};

  const auto rows = sweep(spec);
  write_sweep_metadata(std::cout, spec);
  write_sweep_csv(std::cout, rows);
  std::cout << '\n';
  write_pareto_csv(std::cout, pareto(rows, 10));
}
