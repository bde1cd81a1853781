#pragma once

// Monte-Carlo harness: seeded state ensembles, (r, p, q) sweeps, the
// no-control baseline and Pareto-boundary extraction.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <variant>
#include <vector>

#include "qrecover/channelbank.hpp"
#include "qrecover/conditions.hpp"
#include "qrecover/error.hpp"
#include "qrecover/mixed_recovery.hpp"
#include "qrecover/pure_recovery.hpp"
#include "qrecover/qmath.hpp"

namespace qrecover {

// 64-bit Mersenne Twister with Box-Muller normals. Both pieces are fully
// specified (unlike std::normal_distribution), so a seed pins the sequence on
// every standard library.
class Rng {
 public:
  static constexpr std::string_view kAlgorithm = "mt19937_64+box-muller";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double normal() {
    if (spare_) {
      const double v = *spare_;
      spare_.reset();
      return v;
    }
    double u1 = 0.0;
    while (u1 == 0.0) u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    return radius * std::cos(angle);
  }

  Complex complex_normal() {
    const double re = normal();
    const double im = normal();
    return {re, im};
  }

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

// Haar-random pure state: normalized vector of i.i.d. complex Gaussians.
inline TwoQubitPure sample_pure(Rng& rng) {
  Vector4c v;
  for (auto& c : v) c = rng.complex_normal();
  const double n = std::sqrt(squared_norm(v));
  for (auto& c : v) c /= n;
  return TwoQubitPure(v, 1e-12);
}

// Hilbert-Schmidt (Ginibre) random density matrix G G^dag / Tr(G G^dag).
inline DensityMatrix sample_mixed(Rng& rng) {
  Matrix4c g;
  for (auto& c : g.data) c = rng.complex_normal();
  Matrix4c rho = g * adjoint(g);
  rho = (1.0 / trace(rho).real()) * rho;
  // G G^dag is Hermitian only up to rounding in the off-diagonal products.
  rho = detail::symmetrized(rho);
  return DensityMatrix(rho);
}

enum class EnsembleKind { Pure, Mixed };

constexpr std::string_view to_string(EnsembleKind k) { return k == EnsembleKind::Pure ? "pure" : "mixed"; }

struct EnsembleSpec {
  EnsembleKind kind = EnsembleKind::Pure;
  std::size_t count = 10000;
  std::uint64_t seed = 1;
};

struct Ensemble {
  EnsembleKind kind = EnsembleKind::Pure;
  std::vector<TwoQubitPure> pure;
  std::vector<DensityMatrix> mixed;
  std::vector<Matrix4c> mixed_sqrt;  // cached sqrt(rho) for the fidelity

  std::size_t size() const { return kind == EnsembleKind::Pure ? pure.size() : mixed.size(); }
};

inline Ensemble make_ensemble(const EnsembleSpec& spec) {
  if (spec.count == 0) throw Error(Errc::InvalidArgument, "ensemble count must be >= 1");
  Ensemble e;
  e.kind = spec.kind;
  Rng rng(spec.seed);
  if (spec.kind == EnsembleKind::Pure) {
    e.pure.reserve(spec.count);
    for (std::size_t k = 0; k < spec.count; ++k) e.pure.push_back(sample_pure(rng));
  } else {
    e.mixed.reserve(spec.count);
    e.mixed_sqrt.reserve(spec.count);
    for (std::size_t k = 0; k < spec.count; ++k) {
      e.mixed.push_back(sample_mixed(rng));
      e.mixed_sqrt.push_back(psd_sqrt(e.mixed.back().matrix()));
    }
  }
  return e;
}

// Fidelity between the input and the damped state with no control at all.
inline double baseline_damped(const TwoQubitPure& psi, Strength r) {
  double f = 0.0;
  for (const Matrix4c& e : damping_kraus(r)) f += std::norm(expectation(e, psi.amplitudes()));
  return detail::clamp_fidelity(f);
}

inline double baseline_damped(const DensityMatrix& rho, Strength r) {
  Matrix4c damped;
  for (const Matrix4c& e : damping_kraus(r)) damped += e * rho.matrix() * adjoint(e);
  return uhlmann_fidelity(rho, DensityMatrix(damped, 1e-10));
}

// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      carry_ += (sum_ - t) + x;
    else
      carry_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

struct SampleStats {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
};

inline SampleStats summarize(std::span<const double> xs) {
  if (xs.empty()) return {};
  CompensatedSum s;
  for (double x : xs) s.add(x);
  const double mean = s.value() / static_cast<double>(xs.size());
  CompensatedSum v;
  for (double x : xs) v.add((x - mean) * (x - mean));
  return {mean, std::sqrt(v.value() / static_cast<double>(xs.size()))};
}

// Inclusive range start:stop:step.
struct GridRange {
  double start = 0.0;
  double stop = 1.0;
  double step = 0.02;

  static GridRange single(double v) { return {v, v, 1.0}; }

  std::vector<double> values() const {
    if (!(step > 0.0)) throw Error(Errc::InvalidArgument, "grid step must be > 0");
    if (!(start >= 0.0 && stop <= 1.0))
      throw Error(Errc::OutOfRange, "grid bounds must lie within [0, 1]");
    if (start > stop) throw Error(Errc::EmptyGrid, "grid start exceeds stop");
    const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    std::vector<double> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      double v = start + static_cast<double>(i) * step;
      v = std::round(v * 1e12) / 1e12;
      out.push_back(std::min(v, stop));
    }
    return out;
  }
};

// Parses "a:b:step" or a single value "a".
inline GridRange parse_grid(std::string_view text) {
  auto to_double = [&](std::string_view s) {
    std::string owned(s);
    char* end = nullptr;
    const double v = std::strtod(owned.c_str(), &end);
    if (owned.empty() || end != owned.c_str() + owned.size())
      throw Error(Errc::Parse, "bad number '" + owned + "' in grid '" + std::string(text) + "'");
    return v;
  };
  const auto first = text.find(':');
  if (first == std::string_view::npos) return GridRange::single(to_double(text));
  const auto second = text.find(':', first + 1);
  if (second == std::string_view::npos)
    throw Error(Errc::Parse, "grid must be start:stop:step, got '" + std::string(text) + "'");
  return {to_double(text.substr(0, first)), to_double(text.substr(first + 1, second - first - 1)),
          to_double(text.substr(second + 1))};
}

enum class QMode { Grid, CompleteRecovery };

constexpr std::string_view to_string(QMode m) { return m == QMode::Grid ? "grid" : "complete"; }

// How p is chosen per r when sweeping r alone under complete recovery.
//   FromGrid    every value of the p grid
//   MaxSuccess  p = p_min(r), the weakest feasible pre-measurement
//   MaxFidelity the largest p-grid value below 1 (p = 1 leaves no success)
enum class PPreset { FromGrid, MaxSuccess, MaxFidelity };

struct SweepSpec {
  GridRange r_grid = GridRange::single(0.5);
  GridRange p_grid{0.0, 1.0, 0.02};
  GridRange q_grid{0.0, 1.0, 0.02};
  QMode q_mode = QMode::Grid;
  PPreset p_preset = PPreset::FromGrid;
  TrajectoryMode mode = TrajectoryMode::All;
  EnsembleSpec ensemble;
  unsigned threads = 0;  // 0: QRECOVER_THREADS or hardware concurrency
};

struct SweepRow {
  double r = 0.0;
  double p = 0.0;
  double q = 0.0;  // for infeasible complete-recovery cells: the (negative) formula value
  EnsembleKind ensemble = EnsembleKind::Pure;
  std::size_t n_states = 0;
  double fid_mean = 0.0;
  double fid_std = 0.0;
  double g_mean = 0.0;
  double g_std = 0.0;
  bool feasible = false;
  std::uint64_t seed = 0;
};

inline unsigned harness_threads(unsigned requested = 0) {
  if (requested > 0) return requested;
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("QRECOVER_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap > 0) hw = std::min(hw, static_cast<unsigned>(cap));
  }
  return hw;
}

struct StateScore {
  double fidelity = 0.0;
  double success = 0.0;
  bool valid = false;  // false when every branch is degenerate
};

// Same weighting as run_total, specialised to a precomputed operator table.
// For a pure input g_b * Fid_b = sum_j |<psi|K_bj|psi>|^2.
inline StateScore score_pure(const TwoQubitPure& psi, const ProtocolKrausTable& table, TrajectoryMode mode) {
  StateScore s;
  double weighted = 0.0;
  double weight = 0.0;
  const Vector4c& v = psi.amplitudes();
  for (BranchId b : kAllBranches) {
    double g = 0.0;
    double overlap = 0.0;
    for (JumpId j : kAllJumps) {
      if (!jump_enabled(mode, j)) continue;
      const Vector4c kv = table[index(b)][index(j)] * v;
      g += squared_norm(kv);
      overlap += std::norm(inner(v, kv));
    }
    s.success += g;
    if (g < kDegenerateProbability) continue;
    weighted += overlap;
    weight += g;
  }
  if (s.success < kDegenerateProbability || weight <= 0.0) return s;
  s.fidelity = detail::clamp_fidelity(weighted / weight);
  s.valid = true;
  return s;
}

inline StateScore score_mixed(const DensityMatrix& rho, const Matrix4c& sqrt_rho,
                              const ProtocolKrausTable& table, TrajectoryMode mode) {
  StateScore s;
  double weighted = 0.0;
  double weight = 0.0;
  for (BranchId b : kAllBranches) {
    const Matrix4c unnorm = apply_branch_map(rho.matrix(), table, b, mode);
    const double g = trace(unnorm).real();
    s.success += g;
    if (g < kDegenerateProbability) continue;
    weighted += g * detail::fidelity_from_sqrt(sqrt_rho, (1.0 / g) * unnorm);
    weight += g;
  }
  if (s.success < kDegenerateProbability || weight <= 0.0) return s;
  s.fidelity = detail::clamp_fidelity(weighted / weight);
  s.valid = true;
  return s;
}

namespace detail {

struct Cell {
  double r = 0.0;
  double p = 0.0;
  double q = 0.0;
  bool feasible = false;
};

inline void push_complete_recovery_cell(std::vector<Cell>& cells, double r, double p) {
  const double p_min = min_pre_strength(Strength(r));
  if (p == 0.0 || p < p_min - kFeasibilitySlack) {
    const double raw_q = p == 0.0 ? 0.0 : 1.0 - (1.0 - p) * (1.0 - r) / p;
    cells.push_back({r, p, raw_q, false});
    return;
  }
  const double q = complete_recovery_q(Strength(p), Strength(r));
  cells.push_back({r, p, q, general_success(Strength(p), Strength(q), Strength(r)) >= kDegenerateProbability});
}

inline std::vector<Cell> enumerate_cells(const SweepSpec& spec) {
  const auto rs = spec.r_grid.values();
  const auto ps = spec.p_grid.values();
  std::vector<Cell> cells;
  for (double r : rs) {
    if (spec.q_mode == QMode::CompleteRecovery) {
      switch (spec.p_preset) {
        case PPreset::FromGrid:
          for (double p : ps) push_complete_recovery_cell(cells, r, p);
          break;
        case PPreset::MaxSuccess: {
          // Smallest p with q >= 0; p = 0 only reachable at r = 1.
          double p = min_pre_strength(Strength(r));
          if (p == 0.0) p = ps.front() > 0.0 ? ps.front() : (ps.size() > 1 ? ps[1] : 1.0);
          push_complete_recovery_cell(cells, r, p);
          break;
        }
        case PPreset::MaxFidelity: {
          double best = -1.0;
          for (double p : ps)
            if (p < 1.0) best = std::max(best, p);
          if (best < 0.0) throw Error(Errc::EmptyGrid, "p grid has no value below 1");
          push_complete_recovery_cell(cells, r, best);
          break;
        }
      }
    } else {
      const auto qs = spec.q_grid.values();
      for (double p : ps)
        for (double q : qs)
          cells.push_back({r, p, q, general_success(Strength(p), Strength(q), Strength(r)) >= kDegenerateProbability});
    }
  }
  if (cells.empty()) throw Error(Errc::EmptyGrid, "sweep has no cells");
  return cells;
}

inline SweepRow evaluate_cell(const Cell& cell, const Ensemble& ensemble, const SweepSpec& spec) {
  SweepRow row;
  row.r = cell.r;
  row.p = cell.p;
  row.q = cell.q;
  row.ensemble = ensemble.kind;
  row.seed = spec.ensemble.seed;
  row.feasible = cell.feasible;
  if (!cell.feasible) return row;

  const auto table = protocol_kraus_table(Strength(cell.p), Strength(cell.q), Strength(cell.r));
  std::vector<double> fid;
  std::vector<double> succ;
  fid.reserve(ensemble.size());
  succ.reserve(ensemble.size());
  for (std::size_t k = 0; k < ensemble.size(); ++k) {
    const StateScore s = ensemble.kind == EnsembleKind::Pure
                             ? score_pure(ensemble.pure[k], table, spec.mode)
                             : score_mixed(ensemble.mixed[k], ensemble.mixed_sqrt[k], table, spec.mode);
    if (!s.valid) continue;
    fid.push_back(s.fidelity);
    succ.push_back(s.success);
  }
  row.n_states = fid.size();
  if (fid.empty()) {
    row.feasible = false;
    return row;
  }
  const auto fs = summarize(fid);
  const auto gs = summarize(succ);
  row.fid_mean = fs.mean;
  row.fid_std = fs.std;
  row.g_mean = gs.mean;
  row.g_std = gs.std;
  return row;
}

}  // namespace detail

// Cells are distributed over worker threads; each cell is reduced by a single
// thread in state order, so the output does not depend on the thread count.
inline std::vector<SweepRow> sweep(const SweepSpec& spec, const Ensemble& ensemble) {
  const auto cells = detail::enumerate_cells(spec);
  std::vector<SweepRow> rows(cells.size());

  const unsigned n_threads = std::min<unsigned>(harness_threads(spec.threads), static_cast<unsigned>(cells.size()));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    try {
      for (std::size_t i = next++; i < cells.size(); i = next++)
        rows[i] = detail::evaluate_cell(cells[i], ensemble, spec);
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next = cells.size();
    }
  };

  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return rows;
}

inline std::vector<SweepRow> sweep(const SweepSpec& spec) {
  return sweep(spec, make_ensemble(spec.ensemble));
}

struct BaselineRow {
  double r = 0.0;
  SampleStats fidelity;
  std::size_t n_states = 0;
};

// Ensemble-averaged no-control fidelity for each r.
inline std::vector<BaselineRow> baseline_sweep(const GridRange& r_grid, const Ensemble& ensemble) {
  std::vector<BaselineRow> out;
  for (double r : r_grid.values()) {
    std::vector<double> f;
    f.reserve(ensemble.size());
    for (std::size_t k = 0; k < ensemble.size(); ++k)
      f.push_back(ensemble.kind == EnsembleKind::Pure ? baseline_damped(ensemble.pure[k], Strength(r))
                                                      : baseline_damped(ensemble.mixed[k], Strength(r)));
    out.push_back({r, summarize(f), f.size()});
  }
  return out;
}

struct ParetoPoint {
  double fidelity = 0.0;
  double success = 0.0;
  double p = 0.0;
  double q = 0.0;
};

// Boundary of the (fidelity, success) cloud: bin the fidelity range, keep the
// highest-success row per bin, then drop points dominated by a point of
// higher fidelity. The result is sorted by fidelity with success
// non-increasing.
inline std::vector<ParetoPoint> pareto(std::span<const SweepRow> rows, int bins) {
  if (bins < 2) throw Error(Errc::InvalidArgument, "pareto needs at least 2 bins");
  std::vector<const SweepRow*> usable;
  for (const auto& row : rows)
    if (row.feasible && row.n_states > 0) usable.push_back(&row);
  if (usable.empty()) throw Error(Errc::EmptyInput, "no feasible rows to build a boundary from");
  for (const auto* row : usable)
    if (std::abs(row->r - usable.front()->r) > 1e-12)
      throw Error(Errc::InvalidArgument, "pareto rows must share one r value");

  auto [lo_it, hi_it] = std::minmax_element(usable.begin(), usable.end(), [](const auto* a, const auto* b) {
    return a->fid_mean < b->fid_mean;
  });
  const double lo = (*lo_it)->fid_mean;
  const double span = (*hi_it)->fid_mean - lo;

  auto better = [](const SweepRow* a, const SweepRow* b) {
    if (a->g_mean != b->g_mean) return a->g_mean > b->g_mean;
    if (a->fid_mean != b->fid_mean) return a->fid_mean > b->fid_mean;
    if (a->p != b->p) return a->p < b->p;
    return a->q < b->q;
  };

  std::vector<const SweepRow*> best(static_cast<std::size_t>(bins), nullptr);
  for (const auto* row : usable) {
    std::size_t bin = 0;
    if (span > 1e-15)
      bin = std::min<std::size_t>(static_cast<std::size_t>(bins - 1),
                                  static_cast<std::size_t>((row->fid_mean - lo) / span * bins));
    if (best[bin] == nullptr || better(row, best[bin])) best[bin] = row;
  }

  std::vector<ParetoPoint> candidates;
  for (const auto* row : best)
    if (row != nullptr) candidates.push_back({row->fid_mean, row->g_mean, row->p, row->q});
  std::sort(candidates.begin(), candidates.end(),
            [](const ParetoPoint& a, const ParetoPoint& b) { return a.fidelity < b.fidelity; });

  // Success values that agree to rounding (e.g. several cells at g = 1) count
  // as equal, so the lower-fidelity one is dominated.
  constexpr double kTie = 1e-12;
  std::vector<ParetoPoint> boundary;
  double best_success = -1.0;
  for (auto it = candidates.rbegin(); it != candidates.rend(); ++it) {
    if (it->success > best_success + kTie) {
      boundary.push_back(*it);
      best_success = it->success;
    }
  }
  std::reverse(boundary.begin(), boundary.end());
  return boundary;
}

}  // namespace qrecover
