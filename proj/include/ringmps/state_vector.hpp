#pragma once

#include "ringmps/site_tensor.hpp"

namespace ringmps {

// Dense-vector machinery for verification at small N. Basis ordering is
// site-major with site 0 slowest: index = sum_s i_s * d^(N-1-s).

/// d^N, guarded so dense storage stays reasonable (d^N <= 2^16).
std::size_t dense_dimension(int d, int n_sites);

/// Coefficients Tr(A_{i0} A_{i1} ... A_{i(N-1)}) of the uniform ring state.
Vector ti_mps_state_vector(const SiteTensor& a, int n_sites);

/// Coefficients Tr(B_{i0} A_{i1} ... A_{i(N-1)}) of the single-impurity state.
Vector impurity_state_vector(const SiteTensor& a, const SiteTensor& b,
                             int n_sites);

/// Permutation p with T|c> = |p(c)> for the right-shift translation
/// T|i0 i1 ... > = |i(N-1) i0 i1 ...>.
std::vector<std::size_t> translation_permutation(int d, int n_sites);

Vector apply_translation(const Vector& v, int d, int n_sites, int power = 1);

/// (1/sqrt(N)) sum_n e^{i 2 pi k n / N} T^n |phi_A(B)>; an exact eigenvector
/// of T with eigenvalue e^{-i 2 pi k / N}.
Vector bloch_state_vector(const SiteTensor& a, const SiteTensor& b, int k,
                          int n_sites);

/// Applies the product operator prod_s o_s to a dense state.
Vector apply_product_operator(const Vector& v, const Matrix& o, int d,
                              int n_sites);

/// Applies a two-site operator h (d^2 x d^2, row index = slow site n) acting
/// on sites (n, n+1 mod N).
Vector apply_two_site_operator(const Vector& v, const Matrix& h, int n, int d,
                               int n_sites);

}  // namespace ringmps
