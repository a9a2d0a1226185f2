#include "ringmps/site_tensor.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <sstream>

namespace ringmps {

Vector SiteTensor::to_vector() const {
  const int D = bond_dim;
  Vector v(vec_size());
  for (int i = 0; i < phys_dim; ++i)
    for (int alpha = 0; alpha < D; ++alpha)
      for (int beta = 0; beta < D; ++beta)
        v(i * D * D + alpha * D + beta) = site[i](alpha, beta);
  return v;
}

SiteTensor SiteTensor::from_vector(int d, int D, const Vector& v) {
  if (v.size() != static_cast<Eigen::Index>(d) * D * D)
    throw ValidationError("SiteTensor::from_vector: size mismatch");
  SiteTensor a(d, D);
  for (int i = 0; i < d; ++i)
    for (int alpha = 0; alpha < D; ++alpha)
      for (int beta = 0; beta < D; ++beta)
        a.site[i](alpha, beta) = v(i * D * D + alpha * D + beta);
  return a;
}

SiteTensor SiteTensor::random_gaussian(int d, int D, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  SiteTensor a(d, D);
  for (int i = 0; i < d; ++i)
    for (int alpha = 0; alpha < D; ++alpha)
      for (int beta = 0; beta < D; ++beta)
        a.site[i](alpha, beta) = Complex(normal(rng), normal(rng));
  return a;
}

std::uint64_t SiteTensor::content_hash() const {
  std::string repr = std::to_string(phys_dim) + "|" +
                     std::to_string(bond_dim) + "|";
  std::uint64_t h = hash_bytes(repr, 1469598103934665603ull);
  for (const auto& m : site) h = hash_matrix(m, h);
  return h;
}

Matrix transfer_matrix(const SiteTensor& a) {
  return transfer_matrix(a, a, nullptr);
}

Matrix transfer_matrix(const SiteTensor& ket, const SiteTensor& bra,
                       const Matrix* op) {
  if (ket.phys_dim != bra.phys_dim || ket.bond_dim != bra.bond_dim)
    throw ValidationError("transfer_matrix: ket/bra dimensions differ");
  const int d = ket.phys_dim;
  if (op && (op->rows() != d || op->cols() != d)) {
    std::ostringstream msg;
    msg << "transfer_matrix: operator is " << op->rows() << "x" << op->cols()
        << " but physical dimension is " << d;
    throw ValidationError(msg.str());
  }
  const int D = ket.bond_dim;
  Matrix e = Matrix::Zero(D * D, D * D);
  if (!op) {
    for (int i = 0; i < d; ++i)
      e += kron(ket.site[i], bra.site[i].conjugate());
  } else {
    for (int c = 0; c < d; ++c)
      for (int y = 0; y < d; ++y) {
        Complex w = (*op)(c, y);
        if (w == Complex(0, 0)) continue;
        e += w * kron(ket.site[y], bra.site[c].conjugate());
      }
  }
  return e;
}

double dominant_transfer_magnitude(const Matrix& e) {
  Eigen::ComplexEigenSolver<Matrix> solver(e, false);
  if (solver.info() != Eigen::Success)
    throw NumericalError("dominant_transfer_magnitude: eigensolver failed");
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

SiteTensor normalized(const SiteTensor& a) {
  double lambda = dominant_transfer_magnitude(transfer_matrix(a));
  if (lambda < 1e-300)
    throw NumericalError("normalized: transfer matrix is numerically zero");
  SiteTensor out = a;
  double scale = 1.0 / std::sqrt(lambda);
  for (auto& m : out.site) m *= scale;
  return out;
}

Matrix exact_matrix_power(const Matrix& e, int p) {
  if (p < 0) throw ValidationError("exact_matrix_power: negative power");
  Matrix result = Matrix::Identity(e.rows(), e.cols());
  Matrix base = e;
  int left = p;
  while (left > 0) {
    if (left & 1) result = result * base;
    left >>= 1;
    if (left) base = base * base;
  }
  return result;
}

PowerApprox transfer_power_approx(const Matrix& e, int p, int rank) {
  const Eigen::Index dim = e.rows();
  if (rank < 1 || rank > dim)
    throw ValidationError("transfer_power_approx: rank out of range");
  if (p == 0) return {Matrix::Identity(dim, dim), false};

  Eigen::ComplexEigenSolver<Matrix> solver(e, true);
  bool usable = solver.info() == Eigen::Success;
  Matrix vecs, inv;
  if (usable) {
    vecs = solver.eigenvectors();
    Eigen::FullPivLU<Matrix> lu(vecs);
    // Defective (non-diagonalizable) transfer matrices show up as a nearly
    // singular eigenvector basis.
    usable = lu.isInvertible() &&
             lu.rcond() > 1e-12;
    if (usable) inv = lu.inverse();
  }
  if (usable) {
    // Reconstruction check: V diag(lambda) V^-1 must reproduce e.
    Matrix rebuilt = vecs * solver.eigenvalues().asDiagonal() * inv;
    if ((rebuilt - e).cwiseAbs().maxCoeff() >
        1e-8 * std::max(max_abs(e), 1e-300))
      usable = false;
  }
  if (!usable) return {exact_matrix_power(e, p), true};

  std::vector<Eigen::Index> order(dim);
  for (Eigen::Index i = 0; i < dim; ++i) order[i] = i;
  const Vector& lambda = solver.eigenvalues();
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index l, Eigen::Index r) {
                     return std::abs(lambda(l)) > std::abs(lambda(r));
                   });
  Matrix out = Matrix::Zero(dim, dim);
  for (int r = 0; r < rank; ++r) {
    Eigen::Index idx = order[r];
    out += std::pow(lambda(idx), p) * vecs.col(idx) * inv.row(idx);
  }
  return {out, false};
}

}  // namespace ringmps
