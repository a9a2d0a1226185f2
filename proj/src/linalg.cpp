#include "ringmps/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <sstream>

namespace ringmps {

namespace {

void require_square(const Matrix& m, const char* who) {
  if (m.rows() != m.cols()) {
    std::ostringstream msg;
    msg << who << ": matrix is " << m.rows() << "x" << m.cols()
        << ", expected square";
    throw ValidationError(msg.str());
  }
}

void require_hermitian(const Matrix& m, double tol, const char* who) {
  double scale = std::max(max_abs(m), 1e-300);
  double asym = hermitian_asymmetry(m);
  if (asym > tol * scale) {
    std::ostringstream msg;
    msg << who << ": matrix is not Hermitian, asymmetry " << asym
        << " exceeds " << tol << " * " << scale;
    throw NumericalError(msg.str());
  }
}

}  // namespace

EigenSystem hermitian_eig(const Matrix& m, double hermiticity_tol) {
  require_square(m, "hermitian_eig");
  require_hermitian(m, hermiticity_tol, "hermitian_eig");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (m + m.adjoint()));
  if (solver.info() != Eigen::Success)
    throw NumericalError("hermitian_eig: eigensolver did not converge");
  return EigenSystem{solver.eigenvalues(), solver.eigenvectors()};
}

GevSolution gev_regularized(const Matrix& h, const Matrix& n, double eps,
                            double psd_tol) {
  require_square(h, "gev_regularized");
  if (h.rows() != n.rows() || h.cols() != n.cols())
    throw ValidationError("gev_regularized: h and n dimensions differ");
  require_hermitian(h, 1e-10, "gev_regularized(h)");
  require_hermitian(n, 1e-10, "gev_regularized(n)");

  const Matrix hs = 0.5 * (h + h.adjoint());
  const Matrix ns = 0.5 * (n + n.adjoint());
  EigenSystem metric = hermitian_eig(ns, 1e-10);
  const Eigen::Index dim = n.rows();
  double lambda_max = metric.values(dim - 1);
  double norm_n = metric.values.cwiseAbs().maxCoeff();
  if (metric.values(0) < -psd_tol * std::max(norm_n, 1e-300)) {
    std::ostringstream msg;
    msg << "gev_regularized: metric not positive semidefinite, smallest "
           "eigenvalue "
        << metric.values(0);
    throw NumericalError(msg.str());
  }

  // A direction is singular iff its metric eigenvalue is <= eps * lambda_max;
  // ties are discarded to protect conditioning.
  double cutoff = eps * lambda_max;
  std::vector<Eigen::Index> kept;
  for (Eigen::Index i = 0; i < dim; ++i)
    if (metric.values(i) > cutoff) kept.push_back(i);
  if (kept.empty())
    throw NumericalError(
        "gev_regularized: fully singular metric, every eigenvalue below the "
        "cutoff");

  const Eigen::Index r = static_cast<Eigen::Index>(kept.size());
  Matrix whitener(dim, r);  // columns u_i / sqrt(lambda_i)
  for (Eigen::Index c = 0; c < r; ++c)
    whitener.col(c) =
        metric.vectors.col(kept[c]) / std::sqrt(metric.values(kept[c]));

  Matrix h_reduced = whitener.adjoint() * hs * whitener;
  EigenSystem reduced = hermitian_eig(h_reduced, 1e-8);

  GevSolution out;
  out.values = reduced.values;
  out.vectors = whitener * reduced.vectors;
  out.discarded = static_cast<int>(dim - r);
  out.metric_norms.resize(r);
  for (Eigen::Index c = 0; c < r; ++c)
    out.metric_norms(c) =
        (out.vectors.col(c).adjoint() * ns * out.vectors.col(c))(0).real();
  return out;
}

SvdResult svd(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> solver(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return SvdResult{solver.matrixU(), solver.singularValues(), solver.matrixV()};
}

}  // namespace ringmps
