#include "ringmps/state_vector.hpp"

#include <sstream>

namespace ringmps {

namespace {

constexpr std::size_t kDenseGuard = 1u << 16;

}  // namespace

std::size_t dense_dimension(int d, int n_sites) {
  if (n_sites < 1) throw ValidationError("dense_dimension: n_sites must be >= 1");
  std::size_t dim = 1;
  for (int s = 0; s < n_sites; ++s) {
    dim *= static_cast<std::size_t>(d);
    if (dim > kDenseGuard) {
      std::ostringstream msg;
      msg << "dense guard: d^N = " << d << "^" << n_sites << " exceeds "
          << kDenseGuard;
      throw ValidationError(msg.str());
    }
  }
  return dim;
}

Vector impurity_state_vector(const SiteTensor& a, const SiteTensor& b,
                             int n_sites) {
  if (a.phys_dim != b.phys_dim || a.bond_dim != b.bond_dim)
    throw ValidationError("impurity_state_vector: tensor dimensions differ");
  const int d = a.phys_dim;
  const std::size_t dim = dense_dimension(d, n_sites);
  Vector out(dim);
  // Partial products over the A-tail are shared between configurations that
  // agree on a prefix; a simple stack of running products does it.
  std::vector<Matrix> prefix(n_sites + 1);
  std::vector<int> dig(n_sites, 0);
  prefix[0] = Matrix::Identity(a.bond_dim, a.bond_dim);
  std::size_t index = 0;
  int level = 0;
  while (true) {
    while (level < n_sites) {
      const Matrix& m = (level == 0 ? b.site[dig[level]] : a.site[dig[level]]);
      prefix[level + 1] = prefix[level] * m;
      ++level;
    }
    out(index) = prefix[n_sites].trace();
    ++index;
    // Advance the odometer.
    int s = n_sites - 1;
    while (s >= 0 && dig[s] == d - 1) {
      dig[s] = 0;
      --s;
    }
    if (s < 0) break;
    ++dig[s];
    level = s;
  }
  return out;
}

Vector ti_mps_state_vector(const SiteTensor& a, int n_sites) {
  return impurity_state_vector(a, a, n_sites);
}

std::vector<std::size_t> translation_permutation(int d, int n_sites) {
  const std::size_t dim = dense_dimension(d, n_sites);
  std::vector<std::size_t> perm(dim);
  const std::size_t tail = dim / d;
  for (std::size_t c = 0; c < dim; ++c) {
    // T moves the last digit to the front.
    std::size_t last = c % d;
    perm[c] = last * tail + c / d;
  }
  return perm;
}

Vector apply_translation(const Vector& v, int d, int n_sites, int power) {
  auto perm = translation_permutation(d, n_sites);
  Vector cur = v;
  int steps = ((power % n_sites) + n_sites) % n_sites;
  for (int t = 0; t < steps; ++t) {
    Vector next(cur.size());
    for (std::size_t c = 0; c < perm.size(); ++c) next(perm[c]) = cur(c);
    cur.swap(next);
  }
  return cur;
}

Vector bloch_state_vector(const SiteTensor& a, const SiteTensor& b, int k,
                          int n_sites) {
  if (k < 0 || k >= n_sites)
    throw ValidationError("bloch_state_vector: momentum index out of range");
  Vector phi = impurity_state_vector(a, b, n_sites);
  auto perm = translation_permutation(a.phys_dim, n_sites);
  Vector out = Vector::Zero(phi.size());
  Vector shifted = phi;
  for (int n = 0; n < n_sites; ++n) {
    out += momentum_phase(k, -n, n_sites) * shifted;  // e^{+i 2 pi k n / N}
    if (n + 1 < n_sites) {
      Vector next(shifted.size());
      for (std::size_t c = 0; c < perm.size(); ++c) next(perm[c]) = shifted(c);
      shifted.swap(next);
    }
  }
  return out / std::sqrt(static_cast<double>(n_sites));
}

Vector apply_product_operator(const Vector& v, const Matrix& o, int d,
                              int n_sites) {
  if (o.rows() != d || o.cols() != d)
    throw ValidationError("apply_product_operator: operator dimension mismatch");
  const std::size_t dim = dense_dimension(d, n_sites);
  if (static_cast<std::size_t>(v.size()) != dim)
    throw ValidationError("apply_product_operator: state dimension mismatch");
  Vector cur = v;
  std::size_t stride = dim / d;
  for (int s = 0; s < n_sites; ++s) {
    Vector next = Vector::Zero(dim);
    for (std::size_t c = 0; c < dim; ++c) {
      int is = static_cast<int>((c / stride) % d);
      std::size_t base = c - static_cast<std::size_t>(is) * stride;
      for (int js = 0; js < d; ++js) {
        Complex w = o(js, is);
        if (w != Complex(0, 0))
          next(base + static_cast<std::size_t>(js) * stride) += w * cur(c);
      }
    }
    cur.swap(next);
    stride /= d;
  }
  return cur;
}

Vector apply_two_site_operator(const Vector& v, const Matrix& h, int n, int d,
                               int n_sites) {
  if (h.rows() != d * d || h.cols() != d * d)
    throw ValidationError("apply_two_site_operator: operator must be d^2 x d^2");
  const std::size_t dim = dense_dimension(d, n_sites);
  if (static_cast<std::size_t>(v.size()) != dim)
    throw ValidationError("apply_two_site_operator: state dimension mismatch");
  int s1 = ((n % n_sites) + n_sites) % n_sites;
  int s2 = (s1 + 1) % n_sites;
  std::size_t stride1 = 1, stride2 = 1;
  for (int s = s1 + 1; s < n_sites; ++s) stride1 *= d;
  for (int s = s2 + 1; s < n_sites; ++s) stride2 *= d;
  Vector out = Vector::Zero(dim);
  for (std::size_t c = 0; c < dim; ++c) {
    int i1 = static_cast<int>((c / stride1) % d);
    int i2 = static_cast<int>((c / stride2) % d);
    std::size_t base = c - static_cast<std::size_t>(i1) * stride1 -
                       static_cast<std::size_t>(i2) * stride2;
    int col = i1 * d + i2;
    for (int j1 = 0; j1 < d; ++j1)
      for (int j2 = 0; j2 < d; ++j2) {
        Complex w = h(j1 * d + j2, col);
        if (w != Complex(0, 0))
          out(base + static_cast<std::size_t>(j1) * stride1 +
              static_cast<std::size_t>(j2) * stride2) += w * v(c);
      }
  }
  return out;
}

}  // namespace ringmps
