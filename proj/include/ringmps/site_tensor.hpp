#pragma once

#include <random>

#include "ringmps/common.hpp"

namespace ringmps {

/// One rank-3 MPS site tensor: phys_dim matrices of size bond_dim x bond_dim.
/// Vectorized layout is fixed across the whole project:
///   flat index = i * D^2 + alpha * D + beta
/// for physical index i, left bond alpha (matrix row), right bond beta
/// (matrix column).
struct SiteTensor {
  int phys_dim = 0;
  int bond_dim = 0;
  std::vector<Matrix> site;  // site[i] is the D x D matrix of physical index i

  SiteTensor() = default;
  SiteTensor(int d, int D)
      : phys_dim(d), bond_dim(D), site(d, Matrix::Zero(D, D)) {
    if (d < 1 || D < 1)
      throw ValidationError("SiteTensor: dimensions must be >= 1");
  }

  int vec_size() const { return phys_dim * bond_dim * bond_dim; }

  Vector to_vector() const;
  static SiteTensor from_vector(int d, int D, const Vector& v);
  static SiteTensor random_gaussian(int d, int D, std::mt19937_64& rng);

  std::uint64_t content_hash() const;
};

/// E = sum_i A_i (x) conj(A_i), the D^2 x D^2 object whose ring powers
/// contract every expectation value in this project.
Matrix transfer_matrix(const SiteTensor& a);

/// Mixed version with distinct ket/bra tensors and an optional single-site
/// operator: E_O = sum_{c,y} O(c,y) ket_y (x) conj(bra_c). Passing op =
/// nullptr means the identity.
Matrix transfer_matrix(const SiteTensor& ket, const SiteTensor& bra,
                       const Matrix* op);

double dominant_transfer_magnitude(const Matrix& e);

/// Rescales the tensor so the dominant eigenvalue magnitude of its transfer
/// matrix is 1, keeping Tr(E^N) and all network entries representable.
SiteTensor normalized(const SiteTensor& a);

Matrix exact_matrix_power(const Matrix& e, int p);

struct PowerApprox {
  Matrix matrix;
  bool exact_fallback = false;  // set when E was too far from diagonalizable
};

/// E^p rebuilt from the `rank` largest-magnitude eigenpairs; exact when
/// rank = D^2. Falls back to the exact power (with the flag set) when the
/// eigenbasis is too ill-conditioned to trust.
PowerApprox transfer_power_approx(const Matrix& e, int p, int rank);

}  // namespace ringmps
