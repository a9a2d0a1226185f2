#pragma once

#include "ringmps/common.hpp"

namespace ringmps {

struct EigenSystem {
  RealVector values;  // ascending
  Matrix vectors;     // orthonormal columns, aligned with values
};

/// Full spectrum of a Hermitian matrix, ascending, with orthonormal
/// eigenvectors. Rejects input whose asymmetry max|m_ij - conj(m_ji)|
/// exceeds tol relative to the largest entry.
EigenSystem hermitian_eig(const Matrix& m, double hermiticity_tol = 1e-12);

struct GevSolution {
  RealVector values;        // ascending, one per kept direction
  Matrix vectors;           // columns, mapped back to the full space
  RealVector metric_norms;  // measured v^dag n v per column (should be 1)
  int discarded = 0;        // directions of n below the cutoff
};

/// Solves h v = E n v for Hermitian h and positive semidefinite n by
/// projecting onto the eigenvectors of n with eigenvalue > eps * lambda_max
/// and whitening the metric there. Directions at or below the cutoff are
/// discarded and counted; vectors come back normalized to v^dag n v = 1.
///
/// Throws NumericalError when every direction is below the cutoff ("fully
/// singular metric") or when n has an eigenvalue below -psd_tol * |n|.
GevSolution gev_regularized(const Matrix& h, const Matrix& n,
                            double eps = 1e-11, double psd_tol = 1e-10);

struct SvdResult {
  Matrix u;                   // orthonormal columns
  RealVector singular_values; // descending
  Matrix v;                   // orthonormal columns, m = u * S * v^dag
};

SvdResult svd(const Matrix& m);

}  // namespace ringmps
