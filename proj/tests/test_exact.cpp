#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "ringmps/exact.hpp"
#include "ringmps/linalg.hpp"

using namespace ringmps;

namespace {

// Multiset of momentum labels inside each degenerate energy shell must agree
// between two spectra whose sorted energies already agree.
void check_label_equivalence(const std::vector<LabeledLevel>& lhs,
                             const std::vector<LabeledLevel>& rhs,
                             double energy_tol, std::size_t max_levels) {
  REQUIRE(lhs.size() == rhs.size());
  std::size_t count = std::min(max_levels, lhs.size());
  std::size_t lo = 0;
  while (lo < count) {
    std::size_t hi = lo + 1;
    while (hi < lhs.size() &&
           lhs[hi].energy - lhs[hi - 1].energy <= energy_tol)
      ++hi;
    std::multiset<int> k1, k2;
    for (std::size_t i = lo; i < hi; ++i) {
      k1.insert(lhs[i].momentum);
      k2.insert(rhs[i].momentum);
    }
    CHECK(k1 == k2);
    lo = hi;
  }
}

Vector basis_state(std::size_t index, std::size_t dim) {
  Vector v = Vector::Zero(dim);
  v(index) = 1.0;
  return v;
}

}  // namespace

TEST_SUITE("exact") {

TEST_CASE("ed Heisenberg N=2 levels") {
  ExactSpectrum spec = ed_spectrum(heisenberg_model(), 2);
  REQUIRE(spec.levels.size() == 4);
  CHECK(spec.levels[0].energy == doctest::Approx(-1.5).epsilon(1e-13));
  CHECK(spec.levels[0].degeneracy == 1);
  // The singlet is odd under the two-site swap: <T> = -1, so k = 1.
  CHECK(spec.levels[0].momentum == 1);
  for (int i = 1; i < 4; ++i) {
    CHECK(spec.levels[i].energy == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(spec.levels[i].degeneracy == 3);
  }
}

TEST_CASE("ed classical Ising N=4 ground pair") {
  ExactSpectrum spec = ed_spectrum(ising_model(0.0), 4);
  CHECK(spec.levels[0].energy == doctest::Approx(-4.0).epsilon(1e-13));
  CHECK(spec.levels[1].energy == doctest::Approx(-4.0).epsilon(1e-13));
  CHECK(spec.levels[0].degeneracy == 2);
  // both classical ground states are translation invariant
  CHECK(spec.levels[0].momentum == 0);
  CHECK(spec.levels[1].momentum == 0);
}

TEST_CASE("momentum_of_state basics") {
  auto [k0, r0] = momentum_of_state(basis_state(0, 16), 2, 4);
  CHECK(k0 == 0);
  CHECK(r0 <= 1e-14);

  // (|01> - |10>)/sqrt(2) has <T> = -1 at N=2.
  Vector v = Vector::Zero(4);
  v(1) = 1.0 / std::sqrt(2.0);
  v(2) = -1.0 / std::sqrt(2.0);
  auto [k1, r1] = momentum_of_state(v, 2, 2);
  CHECK(k1 == 1);
  CHECK(r1 <= 1e-14);
}

TEST_CASE("momentum_of_state flags non-eigenstates") {
  Vector v = Vector::Zero(4);
  v(0) = 1.0;
  v(1) = 1.0;
  v.normalize();  // |00> + |01> mixes momenta
  auto [k, residual] = momentum_of_state(v, 2, 2);
  (void)k;
  CHECK(residual > 1e-6);
}

TEST_CASE("bloch construction carries its momentum label") {
  std::mt19937_64 rng(11);
  SiteTensor a = normalized(SiteTensor::random_gaussian(2, 2, rng));
  SiteTensor b = SiteTensor::random_gaussian(2, 2, rng);
  Vector psi = bloch_state_vector(a, b, 3, 8);
  psi.normalize();
  auto [k, residual] = momentum_of_state(psi, 2, 8);
  CHECK(k == 3);
  CHECK(residual <= 1e-12);
}

TEST_CASE("parity_of_state on two-site cat states") {
  Vector plus = Vector::Zero(4), minus = Vector::Zero(4);
  plus(0) = plus(3) = 1.0 / std::sqrt(2.0);   // |00> + |11>
  minus(0) = 1.0 / std::sqrt(2.0);
  minus(3) = -1.0 / std::sqrt(2.0);           // |00> - |11>
  auto [p1, r1] = parity_of_state(plus, pauli_y(), 2, 2);
  auto [p2, r2] = parity_of_state(minus, pauli_y(), 2, 2);
  CHECK(r1 <= 1e-13);
  CHECK(r2 <= 1e-13);
  CHECK(p1 * p2 == -1);
}

TEST_CASE("ed parity labels are sharp for the transformed chain") {
  ExactSpectrum spec = ed_spectrum(heisenberg_transformed(0.0, -1), 6);
  for (const auto& level : spec.levels) {
    CHECK(level.parity != 0);
    CHECK(level.parity_residual <= 1e-8);
    CHECK(level.momentum_residual <= 1e-8);
  }
}

TEST_CASE("ising mode energy at criticality") {
  // epsilon(theta) = 4 |sin(theta/2)| at g=1; epsilon(pi) = 4.
  double g = 1.0;
  auto eps = [&](double theta) {
    return 2.0 * std::sqrt(1.0 + g * g - 2.0 * g * std::cos(theta));
  };
  CHECK(eps(kPi) == doctest::Approx(4.0).epsilon(1e-14));
  for (double theta : {0.3, 1.1, 2.5})
    CHECK(eps(theta) ==
          doctest::Approx(4.0 * std::abs(std::sin(theta / 2))).epsilon(1e-13));
}

TEST_CASE("ising oracle equals ED at N=8 for three fields") {
  for (double g : {0.5, 1.0, 1.5}) {
    CAPTURE(g);
    ExactSpectrum oracle = ising_exact_spectrum(g, 8);
    ExactSpectrum ed = ed_spectrum(ising_model(g), 8);
    REQUIRE(oracle.levels.size() == 256);
    REQUIRE(ed.levels.size() == 256);
    for (std::size_t i = 0; i < 256; ++i)
      CHECK(std::abs(oracle.levels[i].energy - ed.levels[i].energy) <= 1e-9);
    check_label_equivalence(oracle.levels, ed.levels, 1e-8, 256);
  }
}

TEST_CASE("ising oracle momentum labels match ED for the lowest 20 levels") {
  ExactSpectrum oracle = ising_exact_spectrum(1.0, 8);
  ExactSpectrum ed = ed_spectrum(ising_model(1.0), 8);
  check_label_equivalence(oracle.levels, ed.levels, 1e-8, 20);
}

TEST_CASE("ising oracle momentum equals mode sum mod N") {
  ExactSpectrum oracle = ising_exact_spectrum(0.9, 6);
  for (const auto& level : oracle.levels) {
    double sum = 0.0;
    for (double q : level.modes) sum += q;
    long rounded = std::llround(sum);
    CHECK(level.momentum == ((rounded % 6) + 6) % 6);
  }
}

TEST_CASE("ising oracle rejects odd rings") {
  CHECK_THROWS_AS(ising_exact_spectrum(1.0, 5), ValidationError);
}

TEST_CASE("ising oracle window truncation") {
  SpectrumWindow window;
  window.max_levels = 10;
  ExactSpectrum spec = ising_exact_spectrum(1.0, 8, window);
  CHECK(spec.levels.size() == 10);
  SpectrumWindow ewindow;
  ewindow.max_energy = spec.levels[4].energy;
  ExactSpectrum espec = ising_exact_spectrum(1.0, 8, ewindow);
  for (const auto& level : espec.levels)
    CHECK(level.energy <= *ewindow.max_energy + 1e-12);
}

TEST_CASE("multiplet grouping basics") {
  // Heisenberg N=2: one singlet and one triplet.
  ExactSpectrum spec = ed_spectrum(heisenberg_model(), 2);
  std::vector<std::pair<int, double>> ke;
  for (const auto& level : spec.levels)
    ke.emplace_back(level.momentum, level.energy);
  auto groups = multiplet_grouping(ke, 1e-8);
  REQUIRE(groups.size() == 2);
  std::multiset<std::string> names = {groups[0].name, groups[1].name};
  CHECK(names == std::multiset<std::string>{"singlet", "triplet"});

  // zero tolerance on distinct energies: all singleton groups
  auto lonely = multiplet_grouping({{0, 1.0}, {0, 2.0}, {1, 2.0}}, 0.0);
  CHECK(lonely.size() == 3);
  for (const auto& g : lonely) CHECK(g.size == 1);
}

TEST_CASE("Heisenberg N=8 lowest excitation is the k=4 triplet") {
  ExactSpectrum spec = ed_spectrum(heisenberg_model(), 8);
  double e0 = spec.levels[0].energy;
  // first level above the ground state
  std::size_t idx = 1;
  while (idx < spec.levels.size() && spec.levels[idx].energy - e0 <= 1e-10)
    ++idx;
  CHECK(spec.levels[idx].degeneracy == 3);
  CHECK(spec.levels[idx].momentum == 4);
}

TEST_CASE("canonical angle of identical and orthogonal subspaces") {
  Matrix u = Matrix::Zero(4, 1), v = Matrix::Zero(4, 1);
  u(0, 0) = 1.0;
  v(1, 0) = 1.0;
  CHECK(canonical_angle_distance(u, u) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(canonical_angle_distance(u, v) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("canonical angle against the projector-difference oracle") {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto random_basis = [&](int dim, int cols) {
    Matrix m(dim, cols);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < cols; ++j) m(i, j) = Complex(normal(rng), normal(rng));
    Eigen::HouseholderQR<Matrix> qr(m);
    return Matrix(qr.householderQ() * Matrix::Identity(dim, cols));
  };
  for (int trial = 0; trial < 5; ++trial) {
    Matrix u = random_basis(6, 2);
    Matrix v = random_basis(6, 2);
    double direct = canonical_angle_distance(u, v);
    // Independent route: || P_u - P_v ||_2 equals sin(theta_max) for
    // equal-dimensional subspaces.
    Matrix diff = u * u.adjoint() - v * v.adjoint();
    RealVector eigs = hermitian_eig(diff).values;
    double oracle = std::max(std::abs(eigs(0)), std::abs(eigs(eigs.size() - 1)));
    CHECK(direct == doctest::Approx(oracle).epsilon(1e-10));
    // symmetry + unitary invariance
    CHECK(canonical_angle_distance(v, u) ==
          doctest::Approx(direct).epsilon(1e-10));
    Matrix phase = Matrix::Zero(2, 2);
    phase(0, 1) = Complex(0, 1);
    phase(1, 0) = Complex(0, -1);  // a unitary re-basing
    CHECK(canonical_angle_distance(u * phase, v) ==
          doctest::Approx(direct).epsilon(1e-10));
  }
}

TEST_CASE("canonical angle rejects sloppy bases") {
  Matrix u = Matrix::Zero(4, 2);
  u(0, 0) = 1.0;
  u(0, 1) = 1.0;  // columns not orthogonal
  u(1, 1) = 1.0;
  CHECK_THROWS_AS(canonical_angle_distance(u, u), ValidationError);
}

TEST_CASE("relative precision definition") {
  RelPrecision rel = relative_precision(-9.99, -10.0);
  CHECK(rel.value == doctest::Approx(1e-3).epsilon(1e-10));
  CHECK_FALSE(rel.zero_denominator);
  CHECK(relative_precision(5.0, 5.0).value == 0.0);
  RelPrecision zero = relative_precision(0.25, 0.0);
  CHECK(zero.zero_denominator);
  CHECK(zero.value == doctest::Approx(0.25));
  // hand-computed cross-check on one pair
  CHECK(relative_precision(-3.14, -3.0).value ==
        doctest::Approx(0.14 / 3.0).epsilon(1e-12));
}

}
