#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "qrecover/csv.hpp"
#include "qrecover/mc_harness.hpp"
#include "qrecover/validation.hpp"
#include "test_support.hpp"

using namespace qrecover;
using Catch::Approx;

namespace {
Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return Errc::Io;
}

SweepRow row(double fid, double g, double p = 0.5, double q = 0.5, double r = 0.5) {
  SweepRow out;
  out.r = r;
  out.p = p;
  out.q = q;
  out.fid_mean = fid;
  out.g_mean = g;
  out.n_states = 1;
  out.feasible = true;
  return out;
}
}  // namespace

TEST_CASE("rng is reproducible and uniform in [0,1)", "[mc]") {
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int k = 0; k < 1000; ++k) {
    const double x = a.uniform();
    CHECK(x == b.uniform());
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
    differs |= x != c.uniform();
  }
  CHECK(differs);

  Rng n(5);
  std::vector<double> xs;
  for (int k = 0; k < 200000; ++k) xs.push_back(n.normal());
  const auto s = summarize(xs);
  CHECK(s.mean == Approx(0.0).margin(0.01));
  CHECK(s.std == Approx(1.0).margin(0.01));
}

TEST_CASE("pure sampler: normalized, |alpha|^2 averages to 1/4", "[mc]") {
  Rng rng(2024);
  std::vector<double> first;
  for (int k = 0; k < 100000; ++k) {
    const auto psi = sample_pure(rng);
    REQUIRE(std::abs(squared_norm(psi.amplitudes()) - 1.0) < 1e-12);
    first.push_back(std::norm(psi[0]));
  }
  CHECK(summarize(first).mean == Approx(0.25).margin(0.005));
}

TEST_CASE("mixed sampler: valid density matrices, purity averages to 8/17", "[mc]") {
  Rng rng(99);
  std::vector<double> purity;
  for (int k = 0; k < 100000; ++k) {
    const auto rho = sample_mixed(rng);
    if (k < 200) {
      CHECK(is_hermitian(rho.matrix(), 1e-12));
      CHECK(std::abs(trace(rho.matrix()).real() - 1.0) < 1e-12);
      const auto ev = hermitian_eigenvalues(rho.matrix());
      CHECK(ev[0] > -1e-12);
      CHECK(std::abs(ev[0] + ev[1] + ev[2] + ev[3] - 1.0) < 1e-12);
    }
    purity.push_back(rho.purity());
  }
  CHECK(summarize(purity).mean == Approx(8.0 / 17.0).margin(0.005));
}

TEST_CASE("ensembles are reproducible from the seed", "[mc]") {
  const auto a = make_ensemble({EnsembleKind::Pure, 50, 11});
  const auto b = make_ensemble({EnsembleKind::Pure, 50, 11});
  const auto c = make_ensemble({EnsembleKind::Pure, 50, 12});
  for (std::size_t k = 0; k < 50; ++k) CHECK(max_abs_diff(a.pure[k].amplitudes(), b.pure[k].amplitudes()) == 0.0);
  CHECK(max_abs_diff(a.pure[0].amplitudes(), c.pure[0].amplitudes()) > 0.0);
  CHECK(code_of([] { make_ensemble({EnsembleKind::Mixed, 0, 1}); }) == Errc::InvalidArgument);
}

TEST_CASE("baseline_damped", "[mc]") {
  const TwoQubitPure ground(1.0, 0.0, 0.0, 0.0);
  const TwoQubitPure eleven(0.0, 0.0, 0.0, 1.0);
  const double s = 1.0 / std::sqrt(2.0);
  const TwoQubitPure bell(s, 0.0, 0.0, s);
  for (double r : {0.0, 0.2, 0.5, 0.9, 1.0}) {
    CHECK(baseline_damped(ground, Strength(r)) == Approx(1.0).margin(1e-12));
    CHECK(baseline_damped(eleven, Strength(r)) == Approx((1 - r) * (1 - r)).margin(1e-12));
    CHECK(baseline_damped(bell, Strength(r)) == Approx(std::pow((2 - r) / 2, 2) + std::pow(r / 2, 2)).margin(1e-12));
    // mixed overload agrees on pure inputs
    CHECK(baseline_damped(bell.density(), Strength(r)) == Approx(baseline_damped(bell, Strength(r))).margin(1e-9));
  }
  CHECK(baseline_damped(bell, Strength(0.5)) == Approx(0.625).margin(1e-12));
}

TEST_CASE("grid ranges", "[mc]") {
  const auto v = GridRange{0.0, 1.0, 0.02}.values();
  REQUIRE(v.size() == 51);
  CHECK(v.front() == 0.0);
  CHECK(v.back() == 1.0);
  CHECK(v[3] == 0.06);
  CHECK(GridRange{0.1, 0.9, 0.4}.values() == std::vector<double>{0.1, 0.5, 0.9});
  CHECK(GridRange::single(0.3).values() == std::vector<double>{0.3});
  CHECK(GridRange{0.0, 0.95, 0.1}.values().back() == 0.9);

  const auto g = parse_grid("0.2:0.8:0.3");
  CHECK(g.start == 0.2);
  CHECK(g.stop == 0.8);
  CHECK(g.step == 0.3);
  CHECK(parse_grid("0.4").values() == std::vector<double>{0.4});

  CHECK(code_of([] { GridRange{0.5, 0.4, 0.1}.values(); }) == Errc::EmptyGrid);
  CHECK(code_of([] { GridRange{0.0, 1.0, 0.0}.values(); }) == Errc::InvalidArgument);
  CHECK(code_of([] { GridRange{-0.1, 1.0, 0.1}.values(); }) == Errc::OutOfRange);
  CHECK(code_of([] { GridRange{0.0, 1.5, 0.1}.values(); }) == Errc::OutOfRange);
  CHECK(code_of([] { parse_grid("0:1"); }) == Errc::Parse);
  CHECK(code_of([] { parse_grid("a:1:0.1"); }) == Errc::Parse);
}

TEST_CASE("fast scorers agree with the full pipelines", "[mc]") {
  Rng rng(8);
  for (int k = 0; k < 30; ++k) {
    const auto psi = sample_pure(rng);
    const auto rho = sample_mixed(rng);
    const Matrix4c sq = psd_sqrt(rho.matrix());
    for (auto mode : {TrajectoryMode::All, TrajectoryMode::NoJumpOnly}) {
      const RecoveryParams params(rng.uniform(), rng.uniform(), rng.uniform());
      const auto table = protocol_kraus_table(params.p, params.q, params.r);
      const auto sp = score_pure(psi, table, mode);
      const auto rp = run_total(psi, params, mode);
      REQUIRE(sp.valid);
      CHECK(sp.fidelity == Approx(rp.fid_total).margin(1e-12));
      CHECK(sp.success == Approx(rp.g_total).margin(1e-12));
      const auto sm = score_mixed(rho, sq, table, mode);
      const auto rm = run_total_mixed(rho, params, mode);
      REQUIRE(sm.valid);
      CHECK(sm.fidelity == Approx(rm.fid_total).margin(1e-12));
      CHECK(sm.success == Approx(rm.g_total).margin(1e-12));
    }
  }
}

TEST_CASE("sweep, complete recovery: success is the closed form, gaps below p_min", "[mc]") {
  for (auto kind : {EnsembleKind::Pure, EnsembleKind::Mixed}) {
    SweepSpec spec;
    spec.r_grid = {0.1, 0.9, 0.4};
    spec.p_grid = {0.0, 1.0, 0.05};
    spec.q_mode = QMode::CompleteRecovery;
    spec.ensemble = {kind, 40, 3};
    const auto rows = sweep(spec);
    REQUIRE(rows.size() == 3 * 21);
    for (const auto& row : rows) {
      const double p_min = (1 - row.r) / (2 - row.r);
      const bool should_be_feasible = row.p > 0.0 && row.p >= p_min - 1e-12 && row.p < 1.0;
      CHECK(row.feasible == should_be_feasible);
      if (!row.feasible) {
        CHECK(row.n_states == 0);
        continue;
      }
      CHECK(row.g_mean == Approx(complete_recovery_success(Strength(row.p), Strength(row.r))).margin(1e-10));
      CHECK(row.g_std < 1e-10);
      CHECK(row.fid_mean >= 0.0);
      CHECK(row.fid_mean <= 1.0);
      CHECK(row.n_states == 40);
    }
  }
}

TEST_CASE("sweep, grid mode: r = 0 and q = 0 leaves success at 1", "[mc]") {
  SweepSpec spec;
  spec.r_grid = GridRange::single(0.0);
  spec.p_grid = {0.0, 1.0, 0.25};
  spec.q_grid = GridRange::single(0.0);
  spec.ensemble = {EnsembleKind::Pure, 200, 4};
  for (const auto& row : sweep(spec)) {
    REQUIRE(row.feasible);
    CHECK(row.g_mean == Approx(1.0).margin(1e-12));
    // every outcome of the p = 1/2 pre-measurement is proportional to I
    if (row.p == 0.5) CHECK(row.fid_mean == Approx(1.0).margin(1e-12));
  }
}

TEST_CASE("sweep: degenerate cells are reported infeasible", "[mc]") {
  SweepSpec spec;
  spec.r_grid = GridRange::single(0.4);
  spec.p_grid = GridRange::single(1.0);
  spec.q_grid = GridRange::single(1.0);
  spec.ensemble = {EnsembleKind::Pure, 5, 1};
  const auto rows = sweep(spec);
  REQUIRE(rows.size() == 1);
  CHECK_FALSE(rows[0].feasible);
}

TEST_CASE("sweep presets pick one p per r", "[mc]") {
  SweepSpec spec;
  spec.r_grid = {0.1, 0.9, 0.4};
  spec.p_grid = {0.0, 1.0, 0.01};
  spec.q_mode = QMode::CompleteRecovery;
  spec.ensemble = {EnsembleKind::Pure, 20, 3};
  spec.p_preset = PPreset::MaxSuccess;
  auto rows = sweep(spec);
  REQUIRE(rows.size() == 3);
  for (const auto& r : rows) {
    CHECK(r.feasible);
    CHECK(r.p == Approx((1 - r.r) / (2 - r.r)));
    CHECK(r.q == Approx(0.0).margin(1e-12));
  }
  spec.p_preset = PPreset::MaxFidelity;
  rows = sweep(spec);
  REQUIRE(rows.size() == 3);
  for (const auto& r : rows) CHECK(r.p == 0.99);
}

TEST_CASE("sweep CSV is byte-identical across runs and thread counts", "[mc]") {
  SweepSpec spec;
  spec.r_grid = GridRange::single(0.6);
  spec.p_grid = {0.0, 1.0, 0.25};
  spec.q_grid = {0.0, 1.0, 0.25};
  spec.ensemble = {EnsembleKind::Pure, 300, 77};
  std::ostringstream a, b, c;
  spec.threads = 1;
  write_sweep_csv(a, sweep(spec));
  write_sweep_csv(b, sweep(spec));
  spec.threads = 3;
  write_sweep_csv(c, sweep(spec));
  CHECK(a.str() == b.str());
  CHECK(a.str() == c.str());
}

TEST_CASE("sweep CSV round trip", "[mc]") {
  SweepSpec spec;
  spec.r_grid = GridRange::single(0.5);
  spec.p_grid = {0.0, 1.0, 0.1};
  spec.q_mode = QMode::CompleteRecovery;
  spec.ensemble = {EnsembleKind::Mixed, 10, 5};
  const auto rows = sweep(spec);
  std::stringstream buf;
  write_sweep_metadata(buf, spec);
  write_sweep_csv(buf, rows);
  const std::string text = buf.str();
  CHECK(text.rfind("# rng=mt19937_64+box-muller", 0) == 0);
  CHECK(text.find(std::string(kSweepHeader)) != std::string::npos);

  const auto back = read_sweep_csv(buf);
  REQUIRE(back.size() == rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    CHECK(back[k].feasible == rows[k].feasible);
    CHECK(back[k].p == Approx(rows[k].p).margin(1e-12));
    CHECK(back[k].fid_mean == Approx(rows[k].fid_mean).margin(1e-11));
    CHECK(back[k].g_mean == Approx(rows[k].g_mean).margin(1e-11));
    CHECK(back[k].ensemble == EnsembleKind::Mixed);
    CHECK(back[k].seed == 5);
  }

  std::istringstream bad("r,p\n0.1,0.2,0.3\n");
  CHECK(code_of([&] { read_sweep_csv(bad); }) == Errc::Parse);
}

TEST_CASE("pareto: examples", "[mc]") {
  std::vector<SweepRow> same(5, row(0.7, 0.3));
  CHECK(pareto(same, 10).size() == 1);

  std::vector<SweepRow> pair{row(0.4, 0.9, 0.1), row(0.4, 0.2, 0.2)};
  const auto b = pareto(pair, 4);
  REQUIRE(b.size() == 1);
  CHECK(b[0].success == 0.9);
  CHECK(b[0].p == 0.1);

  std::vector<SweepRow> none{row(0.5, 0.5)};
  none[0].feasible = false;
  CHECK(code_of([&] { pareto(none, 4); }) == Errc::EmptyInput);
  CHECK(code_of([&] { pareto(std::vector<SweepRow>{}, 4); }) == Errc::EmptyInput);
  CHECK(code_of([&] { pareto(same, 1); }) == Errc::InvalidArgument);
  std::vector<SweepRow> mixed_r{row(0.5, 0.5, 0.5, 0.5, 0.1), row(0.6, 0.4, 0.5, 0.5, 0.2)};
  CHECK(code_of([&] { pareto(mixed_r, 4); }) == Errc::InvalidArgument);
}

TEST_CASE("pareto: boundary trades success for fidelity", "[mc]") {
  SweepSpec spec;
  spec.r_grid = GridRange::single(0.5);
  spec.p_grid = {0.0, 1.0, 0.05};
  spec.q_grid = {0.0, 1.0, 0.05};
  spec.ensemble = {EnsembleKind::Pure, 200, 9};
  const auto rows = sweep(spec);
  const auto boundary = pareto(rows, 20);
  REQUIRE(boundary.size() >= 3);
  for (std::size_t k = 1; k < boundary.size(); ++k) {
    CHECK(boundary[k].fidelity > boundary[k - 1].fidelity);
    CHECK(boundary[k].success < boundary[k - 1].success);
  }
  // no row beats a boundary point in both coordinates
  for (const auto& pt : boundary)
    for (const auto& r : rows)
      if (r.feasible) CHECK_FALSE((r.fid_mean > pt.fidelity + 1e-12 && r.g_mean > pt.success + 1e-12 &&
                                  r.fid_mean - pt.fidelity > (boundary.back().fidelity - boundary.front().fidelity) / 20));
}

TEST_CASE("validation suite passes", "[mc]") {
  for (const auto& c : run_validation_suite()) {
    INFO(c.name << ": " << c.detail);
    CHECK(c.passed);
  }
}
