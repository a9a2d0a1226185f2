#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace ringmps {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

// Bad or inconsistent user input (CLI exit code 2).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A computation failed beyond its stated tolerances (CLI exit code 3).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A run was refused because it exceeds a configured budget (CLI exit code 4).
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

constexpr double kPi = 3.14159265358979323846;

/// e^{-i 2 pi k m / n}: the phase attached to the m-th network when
/// assembling a momentum-k quantity.
inline Complex momentum_phase(int k, int m, int n) {
  double arg = -2.0 * kPi * static_cast<double>(k) * static_cast<double>(m) /
               static_cast<double>(n);
  return Complex(std::cos(arg), std::sin(arg));
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Largest |m(i,j) - conj(m(j,i))| over all entries.
inline double hermitian_asymmetry(const Matrix& m) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j <= i; ++j)
      worst = std::max(worst, std::abs(m(i, j) - std::conj(m(j, i))));
  return worst;
}

inline double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

/// Runs body(i) for i in [0, count) on up to `threads` workers. Results must
/// not depend on execution order; each index writes only its own slots.
void parallel_for(std::size_t count, int threads,
                  const std::function<void(std::size_t)>& body);

std::uint64_t fnv1a(const void* data, std::size_t size,
                    std::uint64_t seed = 1469598103934665603ull);
std::uint64_t hash_bytes(const std::string& s, std::uint64_t seed);
std::uint64_t hash_matrix(const Matrix& m, std::uint64_t seed);

/// Fixed 17-significant-digit formatting used by every serialized number so
/// that repeat runs are byte-identical.
std::string format_g17(double x);

}  // namespace ringmps
