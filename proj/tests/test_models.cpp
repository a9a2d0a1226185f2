#include <doctest.h>

#include <random>

#include "ringmps/exact.hpp"
#include "ringmps/linalg.hpp"

using namespace ringmps;

namespace {

RealVector sorted_spectrum(const ModelSpec& model, int n_sites) {
  Matrix h = dense_hamiltonian(model, n_sites);
  return hermitian_eig(h).values;
}

Matrix dense_translation(int d, int n_sites) {
  auto perm = translation_permutation(d, n_sites);
  Matrix t = Matrix::Zero(perm.size(), perm.size());
  for (std::size_t c = 0; c < perm.size(); ++c) t(perm[c], c) = 1.0;
  return t;
}

Matrix dense_product_operator(const Matrix& o, int d, int n_sites) {
  std::size_t dim = dense_dimension(d, n_sites);
  Matrix p = Matrix::Zero(dim, dim);
  for (std::size_t c = 0; c < dim; ++c) {
    Vector e = Vector::Zero(dim);
    e(c) = 1.0;
    p.col(c) = apply_product_operator(e, o, d, n_sites);
  }
  return p;
}

}  // namespace

TEST_SUITE("models") {

TEST_CASE("classical Ising two-site term is diagonal -ZZ") {
  ModelSpec m = ising_model(0.0);
  Matrix expect = Matrix::Zero(4, 4);
  expect(0, 0) = -1;
  expect(1, 1) = 1;
  expect(2, 2) = 1;
  expect(3, 3) = -1;
  CHECK((m.h01 - expect).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("Ising N=2 dense expansion") {
  Matrix h = dense_hamiltonian(ising_model(1.0), 2);
  Matrix expect = -2.0 * kron(pauli_z(), pauli_z()) -
                  kron(pauli_x(), identity2()) -
                  kron(identity2(), pauli_x());
  CHECK((h - expect).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("asymmetric and symmetric field splits give the same Hamiltonian") {
  Matrix h1 = dense_hamiltonian(ising_model(0.7), 6);
  Matrix h2 = dense_hamiltonian(ising_model(0.7, true), 6);
  CHECK((h1 - h2).cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("both Ising variants share their spectrum") {
  for (double g : {0.0, 0.9, 2.0}) {
    RealVector e1 = sorted_spectrum(ising_model(g), 6);
    RealVector e2 = sorted_spectrum(ising_model_xbasis(g), 6);
    CHECK((e1 - e2).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("x-basis Ising N=2 matches direct construction") {
  Matrix h = dense_hamiltonian(ising_model_xbasis(2.0), 2);
  Matrix expect = -2.0 * kron(pauli_x(), pauli_x()) -
                  2.0 * (kron(pauli_z(), identity2()) +
                         kron(identity2(), pauli_z()));
  CHECK((h - expect).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("Heisenberg two-site eigenvalues are singlet/triplet") {
  ModelSpec m = heisenberg_model();
  RealVector vals = hermitian_eig(m.h01).values;
  CHECK(vals(0) == doctest::Approx(-0.75).epsilon(1e-14));
  for (int i = 1; i < 4; ++i)
    CHECK(vals(i) == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("Heisenberg N=2 spectrum") {
  RealVector vals = sorted_spectrum(heisenberg_model(), 2);
  CHECK(vals(0) == doctest::Approx(-1.5).epsilon(1e-14));
  for (int i = 1; i < 4; ++i)
    CHECK(vals(i) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("Heisenberg N=4 ground energy is -2") {
  RealVector vals = sorted_spectrum(heisenberg_model(), 4);
  CHECK(vals(0) == doctest::Approx(-2.0).epsilon(1e-13));
}

TEST_CASE("transformed Heisenberg at lambda=0 is isospectral to the original") {
  RealVector e1 = sorted_spectrum(heisenberg_model(), 8);
  RealVector e2 = sorted_spectrum(heisenberg_transformed(0.0, -1), 8);
  CHECK((e1 - e2).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("unitary equivalence: sigma^y on odd sites maps H_HB to H'") {
  int n_sites = 6;
  Matrix h_orig = dense_hamiltonian(heisenberg_model(), n_sites);
  Matrix h_prime = dense_hamiltonian(heisenberg_transformed(0.0, -1), n_sites);
  std::size_t dim = dense_dimension(2, n_sites);
  // sigma^y gates on 1-based odd sites = 0-based even positions.
  Matrix u = Matrix::Identity(dim, dim);
  Matrix y = pauli_y();
  for (int s = 0; s < n_sites; s += 2) {
    Matrix gate = Matrix::Zero(dim, dim);
    std::size_t stride = 1;
    for (int t = s + 1; t < n_sites; ++t) stride *= 2;
    for (std::size_t idx = 0; idx < dim; ++idx) {
      int bit = static_cast<int>((idx / stride) % 2);
      std::size_t flipped = bit ? idx - stride : idx + stride;
      gate(flipped, idx) = y(1 - bit, bit);
    }
    u = gate * u;
  }
  Matrix mapped = u.adjoint() * h_orig * u;
  CHECK((mapped - h_prime).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("low eigenstates of H- have parity +1") {
  int n_sites = 8;
  double lambda = 0.1 * n_sites;
  ExactSpectrum spec = ed_spectrum(heisenberg_transformed(lambda, -1), n_sites);
  for (int i = 0; i < 8; ++i) {
    CHECK(spec.levels[i].parity == 1);
    CHECK(spec.levels[i].parity_residual <= 1e-8);
  }
}

TEST_CASE("parity operator squares to the identity") {
  Matrix y = pauli_y();
  CHECK((y * y - identity2()).cwiseAbs().maxCoeff() <= 1e-15);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(64);
  for (int i = 0; i < 64; ++i) v(i) = Complex(normal(rng), normal(rng));
  Vector twice =
      apply_product_operator(apply_product_operator(v, y, 2, 6), y, 2, 6);
  CHECK((twice - v).norm() <= 1e-13 * v.norm());
}

TEST_CASE("every model commutes with translation") {
  std::vector<ModelSpec> models = {ising_model(1.3), ising_model_xbasis(0.4),
                                   heisenberg_model(),
                                   heisenberg_transformed(0.8, +1)};
  for (const auto& model : models) {
    int n_sites = 6;
    Matrix h = dense_hamiltonian(model, n_sites);
    Matrix t = dense_translation(2, n_sites);
    Matrix comm = h * t - t * h;
    CHECK(comm.cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, max_abs(h)));
  }
}

TEST_CASE("transformed Heisenberg commutes with the parity operator") {
  int n_sites = 6;
  Matrix h = dense_hamiltonian(heisenberg_transformed(0.0, -1), n_sites);
  Matrix p = dense_product_operator(pauli_y(), 2, n_sites);
  CHECK((h * p - p * h).cwiseAbs().maxCoeff() <=
        1e-12 * std::max(1.0, max_abs(h)));
  CHECK((p * p - Matrix::Identity(p.rows(), p.cols())).cwiseAbs().maxCoeff() <=
        1e-12);
}

TEST_CASE("model hash distinguishes parameters") {
  CHECK(ising_model(1.0).hash() != ising_model(1.1).hash());
  CHECK(heisenberg_transformed(0.8, +1).hash() !=
        heisenberg_transformed(0.8, -1).hash());
}

}
