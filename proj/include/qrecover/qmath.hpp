#pragma once

// Dense fixed-size complex linear algebra for two-qubit work.
//
// Matrices are stored row-major and every 4x4 object uses the basis order
// (|00>, |01>, |10>, |11>).

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <string>

#include "qrecover/error.hpp"

namespace qrecover {

using Complex = std::complex<double>;

template <std::size_t N>
using Vector = std::array<Complex, N>;

using Vector2c = Vector<2>;
using Vector4c = Vector<4>;

template <std::size_t N>
struct Matrix {
  std::array<Complex, N * N> data{};

  static constexpr std::size_t size() { return N; }

  constexpr Complex& operator()(std::size_t row, std::size_t col) { return data[row * N + col]; }
  constexpr const Complex& operator()(std::size_t row, std::size_t col) const {
    return data[row * N + col];
  }

  static constexpr Matrix zero() { return Matrix{}; }

  static constexpr Matrix identity() {
    Matrix m;
    for (std::size_t i = 0; i < N; ++i) m(i, i) = 1.0;
    return m;
  }

  static constexpr Matrix diagonal(const std::array<double, N>& d) {
    Matrix m;
    for (std::size_t i = 0; i < N; ++i) m(i, i) = d[i];
    return m;
  }

  // Row-major literal, e.g. Matrix<2>::from_rows({{0, 1}, {1, 0}}).
  static Matrix from_rows(std::initializer_list<std::initializer_list<Complex>> rows) {
    Matrix m;
    std::size_t i = 0;
    for (const auto& row : rows) {
      std::size_t j = 0;
      for (const auto& v : row) {
        if (i < N && j < N) m(i, j) = v;
        ++j;
      }
      ++i;
    }
    return m;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

using Matrix2c = Matrix<2>;
using Matrix4c = Matrix<4>;

template <std::size_t N>
constexpr Matrix<N> operator+(const Matrix<N>& a, const Matrix<N>& b) {
  Matrix<N> out;
  for (std::size_t k = 0; k < N * N; ++k) out.data[k] = a.data[k] + b.data[k];
  return out;
}

template <std::size_t N>
constexpr Matrix<N>& operator+=(Matrix<N>& a, const Matrix<N>& b) {
  for (std::size_t k = 0; k < N * N; ++k) a.data[k] += b.data[k];
  return a;
}

template <std::size_t N>
constexpr Matrix<N> operator-(const Matrix<N>& a, const Matrix<N>& b) {
  Matrix<N> out;
  for (std::size_t k = 0; k < N * N; ++k) out.data[k] = a.data[k] - b.data[k];
  return out;
}

template <std::size_t N>
constexpr Matrix<N> operator*(Complex s, const Matrix<N>& a) {
  Matrix<N> out;
  for (std::size_t k = 0; k < N * N; ++k) out.data[k] = s * a.data[k];
  return out;
}

template <std::size_t N>
constexpr Matrix<N> operator*(const Matrix<N>& a, const Matrix<N>& b) {
  Matrix<N> out;
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t k = 0; k < N; ++k) {
      const Complex aik = a(i, k);
      if (aik == Complex{}) continue;
      for (std::size_t j = 0; j < N; ++j) out(i, j) += aik * b(k, j);
    }
  }
  return out;
}

template <std::size_t N>
constexpr Vector<N> operator*(const Matrix<N>& a, const Vector<N>& v) {
  Vector<N> out{};
  for (std::size_t i = 0; i < N; ++i) {
    Complex acc{};
    for (std::size_t j = 0; j < N; ++j) acc += a(i, j) * v[j];
    out[i] = acc;
  }
  return out;
}

template <std::size_t N>
constexpr Matrix<N> adjoint(const Matrix<N>& a) {
  Matrix<N> out;
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j) out(j, i) = std::conj(a(i, j));
  return out;
}

template <std::size_t N>
constexpr Complex trace(const Matrix<N>& a) {
  Complex t{};
  for (std::size_t i = 0; i < N; ++i) t += a(i, i);
  return t;
}

template <std::size_t N>
Complex inner(const Vector<N>& a, const Vector<N>& b) {
  Complex acc{};
  for (std::size_t i = 0; i < N; ++i) acc += std::conj(a[i]) * b[i];
  return acc;
}

template <std::size_t N>
double squared_norm(const Vector<N>& v) {
  double acc = 0.0;
  for (const auto& c : v) acc += std::norm(c);
  return acc;
}

// |a><b|
template <std::size_t N>
Matrix<N> outer(const Vector<N>& a, const Vector<N>& b) {
  Matrix<N> out;
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j) out(i, j) = a[i] * std::conj(b[j]);
  return out;
}

// <v|A|v>
template <std::size_t N>
Complex expectation(const Matrix<N>& a, const Vector<N>& v) {
  return inner(v, a * v);
}

template <std::size_t N>
double max_abs_diff(const Matrix<N>& a, const Matrix<N>& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < N * N; ++k) m = std::max(m, std::abs(a.data[k] - b.data[k]));
  return m;
}

template <std::size_t N>
double max_abs_diff(const Vector<N>& a, const Vector<N>& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < N; ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

template <std::size_t N>
double frobenius_norm(const Matrix<N>& a) {
  double acc = 0.0;
  for (const auto& c : a.data) acc += std::norm(c);
  return std::sqrt(acc);
}

template <std::size_t N>
double off_diagonal_norm(const Matrix<N>& a) {
  double acc = 0.0;
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j)
      if (i != j) acc += std::norm(a(i, j));
  return std::sqrt(acc);
}

template <std::size_t N>
bool is_hermitian(const Matrix<N>& a, double tol) {
  return max_abs_diff(a, adjoint(a)) <= tol;
}

template <std::size_t N>
bool is_finite(const Matrix<N>& a) {
  return std::all_of(a.data.begin(), a.data.end(), [](const Complex& c) {
    return std::isfinite(c.real()) && std::isfinite(c.imag());
  });
}

inline Matrix4c kron2(const Matrix2c& a, const Matrix2c& b) {
  Matrix4c out;
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j)
      for (std::size_t k = 0; k < 2; ++k)
        for (std::size_t l = 0; l < 2; ++l) out(2 * i + k, 2 * j + l) = a(i, j) * b(k, l);
  return out;
}

struct EigenDecomposition {
  std::array<double, 4> eigenvalues{};  // ascending
  Matrix4c eigenvectors;                // columns, unitary
};

inline constexpr int kJacobiMaxSweeps = 200;
inline constexpr double kJacobiTolerance = 1e-13;
inline constexpr double kNegativeEigenvalueTolerance = 1e-10;
// Eigenvalues below this fraction of the largest one are floating-point
// noise around an exact zero; keeping them would put O(sqrt(eps)) errors into
// matrix square roots of rank-deficient states.
inline constexpr double kRelativeZeroEigenvalue = 1e-13;

namespace detail {

// Cyclic complex Jacobi. On return `a` is diagonal to within the tolerance;
// when `v` is non-null it accumulates the rotations (columns = eigenvectors).
inline void jacobi_diagonalize(Matrix4c& a, Matrix4c* v) {
  constexpr std::size_t n = 4;
  const double scale = std::max(1.0, frobenius_norm(a));
  const double target = kJacobiTolerance * scale;

  for (int sweep = 0; sweep < kJacobiMaxSweeps; ++sweep) {
    if (off_diagonal_norm(a) <= target) return;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const Complex apq = a(p, q);
        const double mag = std::abs(apq);
        if (mag <= 1e-300) continue;
        const Complex phase = apq / mag;
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();

        // Real rotation on the phase-stripped 2x2 block.
        const double theta = (aqq - app) / (2.0 * mag);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        // U = [[c, s*phase], [-s*conj(phase), c]] on (p, q); A <- U^dag A U.
        const Complex upq = s * phase;
        const Complex uqp = -s * std::conj(phase);

        for (std::size_t k = 0; k < n; ++k) {
          const Complex akp = a(k, p);
          const Complex akq = a(k, q);
          a(k, p) = akp * c + akq * uqp;
          a(k, q) = akp * upq + akq * c;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const Complex apk = a(p, k);
          const Complex aqk = a(q, k);
          a(p, k) = c * apk + std::conj(uqp) * aqk;
          a(q, k) = std::conj(upq) * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = a(p, p).real();
        a(q, q) = a(q, q).real();

        if (v != nullptr) {
          for (std::size_t k = 0; k < n; ++k) {
            const Complex vkp = (*v)(k, p);
            const Complex vkq = (*v)(k, q);
            (*v)(k, p) = vkp * c + vkq * uqp;
            (*v)(k, q) = vkp * upq + vkq * c;
          }
        }
      }
    }
  }
  if (off_diagonal_norm(a) > target)
    throw Error(Errc::NonConvergence, "Jacobi iteration did not converge in " +
                                          std::to_string(kJacobiMaxSweeps) + " sweeps");
}

inline Matrix4c symmetrized(const Matrix4c& h) {
  Matrix4c s = 0.5 * (h + adjoint(h));
  for (std::size_t i = 0; i < 4; ++i) s(i, i) = s(i, i).real();
  return s;
}

inline void check_hermitian_input(const Matrix4c& h) {
  if (!is_finite(h)) throw Error(Errc::OutOfRange, "matrix has non-finite entries");
  const double tol = 1e-10 * std::max(1.0, frobenius_norm(h));
  if (!is_hermitian(h, tol)) throw Error(Errc::NotHermitian, "matrix is not Hermitian to 1e-10");
}

// Applies the PSD policy: reject below -1e-10, zero out noise, keep the rest.
inline std::array<double, 4> clamp_psd_spectrum(std::array<double, 4> lambda) {
  const double top = *std::max_element(lambda.begin(), lambda.end());
  for (double& l : lambda) {
    if (l < -kNegativeEigenvalueTolerance)
      throw Error(Errc::NotPSD, "eigenvalue " + std::to_string(l) + " below -1e-10");
    if (l <= kRelativeZeroEigenvalue * std::max(top, 0.0)) l = 0.0;
  }
  return lambda;
}

}  // namespace detail

inline EigenDecomposition hermitian_eig(const Matrix4c& h) {
  detail::check_hermitian_input(h);
  Matrix4c a = detail::symmetrized(h);
  Matrix4c v = Matrix4c::identity();
  detail::jacobi_diagonalize(a, &v);

  std::array<std::size_t, 4> order{0, 1, 2, 3};
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return a(i, i).real() < a(j, j).real(); });

  EigenDecomposition out;
  for (std::size_t k = 0; k < 4; ++k) {
    out.eigenvalues[k] = a(order[k], order[k]).real();
    for (std::size_t row = 0; row < 4; ++row) out.eigenvectors(row, k) = v(row, order[k]);
  }
  return out;
}

// Eigenvalues only (ascending); skips the eigenvector accumulation.
inline std::array<double, 4> hermitian_eigenvalues(const Matrix4c& h) {
  detail::check_hermitian_input(h);
  Matrix4c a = detail::symmetrized(h);
  detail::jacobi_diagonalize(a, nullptr);
  std::array<double, 4> out{};
  for (std::size_t k = 0; k < 4; ++k) out[k] = a(k, k).real();
  std::sort(out.begin(), out.end());
  return out;
}

inline Matrix4c reconstruct(const EigenDecomposition& e) {
  Matrix4c d = Matrix4c::diagonal(e.eigenvalues);
  return e.eigenvectors * d * adjoint(e.eigenvectors);
}

inline Matrix4c psd_sqrt(const Matrix4c& rho) {
  EigenDecomposition e = hermitian_eig(rho);
  std::array<double, 4> lambda = detail::clamp_psd_spectrum(e.eigenvalues);
  for (double& l : lambda) l = std::sqrt(l);
  return e.eigenvectors * Matrix4c::diagonal(lambda) * adjoint(e.eigenvectors);
}

// Hermitian, PSD, unit-trace 4x4 matrix. Construction validates; nothing is
// silently symmetrized or renormalized.
class DensityMatrix {
 public:
  static constexpr double kDefaultTolerance = 1e-12;

  explicit DensityMatrix(const Matrix4c& m, double tol = kDefaultTolerance) : m_(m) {
    if (!is_finite(m)) throw Error(Errc::OutOfRange, "density matrix has non-finite entries");
    if (!is_hermitian(m, tol)) throw Error(Errc::NotHermitian, "density matrix is not Hermitian");
    const Complex tr = trace(m);
    if (std::abs(tr - 1.0) > tol)
      throw Error(Errc::NotNormalized, "density matrix trace is " + std::to_string(tr.real()));
    const auto lambda = hermitian_eigenvalues(m);
    if (lambda.front() < -kNegativeEigenvalueTolerance)
      throw Error(Errc::NotPSD, "density matrix has eigenvalue " + std::to_string(lambda.front()));
  }

  static DensityMatrix from_pure(const Vector4c& psi, double tol = kDefaultTolerance) {
    return DensityMatrix(outer(psi, psi), tol);
  }

  const Matrix4c& matrix() const { return m_; }
  Complex operator()(std::size_t i, std::size_t j) const { return m_(i, j); }

  double purity() const { return trace(m_ * m_).real(); }

 private:
  Matrix4c m_;
};

namespace detail {

inline double clamp_fidelity(double f) {
  constexpr double slack = 1e-9;
  if (f < 0.0 && f >= -slack) return 0.0;
  if (f > 1.0 && f <= 1.0 + slack) return 1.0;
  if (f < 0.0 || f > 1.0)
    throw Error(Errc::OutOfRange, "fidelity " + std::to_string(f) + " outside [0, 1]");
  return f;
}

// [Tr sqrt(S sigma S)]^2 with S = sqrt(rho) supplied by the caller so that it
// can be reused across many sigma.
inline double fidelity_from_sqrt(const Matrix4c& sqrt_rho, const Matrix4c& sigma) {
  const Matrix4c inner_product = sqrt_rho * sigma * sqrt_rho;
  const auto lambda = clamp_psd_spectrum(hermitian_eigenvalues(inner_product));
  double tr = 0.0;
  for (double l : lambda) tr += std::sqrt(l);
  return clamp_fidelity(tr * tr);
}

}  // namespace detail

inline double uhlmann_fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  return detail::fidelity_from_sqrt(psd_sqrt(rho.matrix()), sigma.matrix());
}

}  // namespace qrecover
