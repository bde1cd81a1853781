#pragma once

// Protocol operators: pre-measurements M_b, feed-forward flips F_b,
// post-measurements N_b and the two-qubit amplitude-damping Kraus set e_j.

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>

#include "qrecover/error.hpp"
#include "qrecover/qmath.hpp"

namespace qrecover {

// Pre-measurement outcome ij; also selects F_ij and N_ij.
enum class BranchId : std::uint8_t { k00 = 0, k01 = 1, k10 = 2, k11 = 3 };

// Kraus outcome mn: 0 = no jump, 1 = jump, first digit is the first qubit.
enum class JumpId : std::uint8_t { k00 = 0, k01 = 1, k10 = 2, k11 = 3 };

inline constexpr std::array<BranchId, 4> kAllBranches{BranchId::k00, BranchId::k01, BranchId::k10,
                                                      BranchId::k11};
inline constexpr std::array<JumpId, 4> kAllJumps{JumpId::k00, JumpId::k01, JumpId::k10, JumpId::k11};

constexpr std::size_t index(BranchId b) { return static_cast<std::size_t>(b); }
constexpr std::size_t index(JumpId j) { return static_cast<std::size_t>(j); }

constexpr std::string_view to_string(BranchId b) {
  constexpr std::array<std::string_view, 4> names{"00", "01", "10", "11"};
  return names[index(b)];
}

constexpr std::string_view to_string(JumpId j) {
  constexpr std::array<std::string_view, 4> names{"00", "01", "10", "11"};
  return names[index(j)];
}

// A probability-like parameter in [0, 1]: measurement strengths p, q and the
// damping rate r.
class Strength {
 public:
  Strength() = default;
  explicit Strength(double value) : value_(value) {
    if (!(value >= 0.0 && value <= 1.0))
      throw Error(Errc::OutOfRange, "strength " + std::to_string(value) + " outside [0, 1]");
  }

  double value() const { return value_; }
  operator double() const { return value_; }

 private:
  double value_ = 0.0;
};

namespace detail {

// Diagonal of M_00 permuted for the other outcomes: the strong weight p sits on
// the basis state |ij>, the weak weight 1-p on its bitwise complement.
inline std::array<double, 4> pre_measurement_diagonal(double p, BranchId b) {
  const double w = std::sqrt(p) * std::sqrt(1.0 - p);
  std::array<double, 4> d{};
  const std::size_t strong = index(b);
  const std::size_t weak = 3 - strong;
  for (std::size_t k = 0; k < 4; ++k) d[k] = w;
  d[strong] = p;
  d[weak] = 1.0 - p;
  return d;
}

inline std::array<double, 4> post_measurement_diagonal(double q, BranchId b) {
  const double w = std::sqrt(1.0 - q);
  std::array<double, 4> d{};
  const std::size_t strong = index(b);
  const std::size_t weak = 3 - strong;
  for (std::size_t k = 0; k < 4; ++k) d[k] = w;
  d[strong] = 1.0 - q;
  d[weak] = 1.0;
  return d;
}

}  // namespace detail

inline Matrix4c pre_measurement(Strength p, BranchId b) {
  return Matrix4c::diagonal(detail::pre_measurement_diagonal(p, b));
}

inline Matrix2c pauli_x() { return Matrix2c::from_rows({{0.0, 1.0}, {1.0, 0.0}}); }

// F_00 = I, F_01 = I (x) X, F_10 = X (x) I, F_11 = X (x) X.
inline Matrix4c feed_forward(BranchId b) {
  const Matrix2c id = Matrix2c::identity();
  const Matrix2c x = pauli_x();
  switch (b) {
    case BranchId::k00: return Matrix4c::identity();
    case BranchId::k01: return kron2(id, x);
    case BranchId::k10: return kron2(x, id);
    case BranchId::k11: return kron2(x, x);
  }
  return Matrix4c::identity();
}

inline Matrix4c post_measurement(Strength q, BranchId b) {
  return Matrix4c::diagonal(detail::post_measurement_diagonal(q, b));
}

// Single-qubit damping: e0 = diag(1, sqrt(1-r)), e1 = sqrt(r)|0><1|.
inline Matrix2c damping_no_jump(Strength r) {
  return Matrix2c::from_rows({{1.0, 0.0}, {0.0, std::sqrt(1.0 - r)}});
}

inline Matrix2c damping_jump(Strength r) {
  return Matrix2c::from_rows({{0.0, std::sqrt(r.value())}, {0.0, 0.0}});
}

using KrausSet = std::array<Matrix4c, 4>;

// e_mn = e_m (x) e_n, indexed by JumpId.
inline KrausSet damping_kraus(Strength r) {
  const Matrix2c e0 = damping_no_jump(r);
  const Matrix2c e1 = damping_jump(r);
  return {kron2(e0, e0), kron2(e0, e1), kron2(e1, e0), kron2(e1, e1)};
}

// K_{b,j} = N_b F_b e_j F_b M_b for all 16 (branch, jump) pairs.
using ProtocolKrausTable = std::array<KrausSet, 4>;

inline ProtocolKrausTable protocol_kraus_table(Strength p, Strength q, Strength r) {
  const KrausSet e = damping_kraus(r);
  ProtocolKrausTable table;
  for (BranchId b : kAllBranches) {
    const Matrix4c m = pre_measurement(p, b);
    const Matrix4c f = feed_forward(b);
    const Matrix4c n = post_measurement(q, b);
    for (JumpId j : kAllJumps) table[index(b)][index(j)] = n * f * e[index(j)] * f * m;
  }
  return table;
}

}  // namespace qrecover
