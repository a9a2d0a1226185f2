#include <doctest.h>

#include <random>

#include "ringmps/excitations.hpp"
#include "ringmps/exact.hpp"
#include "ringmps/ground.hpp"

using namespace ringmps;

namespace {

NetworkSet quick_set(const SiteTensor& a, const ModelSpec& model,
                     int n_sites) {
  NetworkKey key;
  key.model_hash = model.hash();
  key.tensor_hash = a.content_hash();
  const Matrix* parity = model.perturbation ? &model.perturbation->op : nullptr;
  return build_network_set(a, n_sites, model.h01, parity, key);
}

// Lowest exact level in every momentum sector.
std::vector<double> sector_minima(const ExactSpectrum& spec) {
  std::vector<double> minima(spec.n_sites,
                             std::numeric_limits<double>::infinity());
  for (const auto& level : spec.levels)
    minima[level.momentum] = std::min(minima[level.momentum], level.energy);
  return minima;
}

}  // namespace

TEST_SUITE("excitations") {

TEST_CASE("identity Hamiltonian gives H_eff = N * N_eff") {
  std::mt19937_64 rng(71);
  int n_sites = 5;
  SiteTensor a = normalized(SiteTensor::random_gaussian(2, 2, rng));
  ModelSpec model = ising_model(1.0);
  model.h01 = Matrix::Identity(4, 4);
  NetworkSet set = quick_set(a, model, n_sites);
  for (int k = 0; k < n_sites; ++k) {
    EffectivePair pair = assemble_effective(set, k);
    CHECK((pair.h_eff - double(n_sites) * pair.n_eff).cwiseAbs().maxCoeff() <=
          1e-10 * std::max(1.0, max_abs(pair.h_eff)));
  }
}

TEST_CASE("assembled forms match dense Bloch expectation values") {
  std::mt19937_64 rng(73);
  int n_sites = 6;
  SiteTensor a = normalized(SiteTensor::random_gaussian(2, 2, rng));
  SiteTensor b = SiteTensor::random_gaussian(2, 2, rng);
  Vector bvec = b.to_vector();
  for (const ModelSpec& model : {ising_model(1.0), heisenberg_model()}) {
    NetworkSet set = quick_set(a, model, n_sites);
    Matrix h = dense_hamiltonian(model, n_sites);
    for (int k = 0; k < n_sites; ++k) {
      EffectivePair pair = assemble_effective(set, k);
      Vector psi = bloch_state_vector(a, b, k, n_sites);
      Complex n_net = (bvec.adjoint() * pair.n_eff * bvec)(0);
      Complex h_net = (bvec.adjoint() * pair.h_eff * bvec)(0);
      double n_dense = psi.squaredNorm();
      Complex h_dense = (psi.adjoint() * h * psi)(0);
      CHECK(std::abs(n_net - Complex(n_dense, 0)) <=
            1e-9 * std::max(1.0, n_dense));
      CHECK(std::abs(h_net - h_dense) <=
            1e-9 * std::max(1.0, std::abs(h_dense)));
    }
  }
}

TEST_CASE("momentum conjugation for a real backbone tensor") {
  std::mt19937_64 rng(79);
  int n_sites = 6;
  SiteTensor a = SiteTensor::random_gaussian(2, 2, rng);
  for (auto& m : a.site) m = m.real().cast<Complex>();
  a = normalized(a);
  NetworkSet set = quick_set(a, ising_model(1.1), n_sites);
  for (int k = 1; k < n_sites; ++k) {
    EffectivePair pk = assemble_effective(set, k);
    EffectivePair pc = assemble_effective(set, n_sites - k);
    CHECK((pc.n_eff - pk.n_eff.conjugate()).cwiseAbs().maxCoeff() <=
          1e-10 * std::max(1.0, max_abs(pk.n_eff)));
    CHECK((pc.h_eff - pk.h_eff.conjugate()).cwiseAbs().maxCoeff() <=
          1e-10 * std::max(1.0, max_abs(pk.h_eff)));
  }
}

TEST_CASE("null-space law at d=2 D=2") {
  GroundOptions gopts;
  gopts.seed = 83;
  int n_sites = 8;
  ModelSpec model = ising_model(1.0);
  GroundResult ground = optimize_ground_tensor(model, 2, n_sites, gopts);
  NetworkSet set = quick_set(ground.a, model, n_sites);
  EffectivePair p1 = assemble_effective(set, 1);
  MomentumBranches b1 = solve_fixed_momentum(p1, 1e-11);
  CHECK(b1.discarded == 4);  // D^2 (d-1)
  CHECK_FALSE(b1.null_count_mismatch);
  EffectivePair p0 = assemble_effective(set, 0);
  MomentumBranches b0 = solve_fixed_momentum(p0, 1e-11);
  CHECK(b0.discarded == 5);  // D^2 (d-1) + 1
  CHECK_FALSE(b0.null_count_mismatch);
}

TEST_CASE("variational bound per momentum sector at N=8 D=3") {
  GroundOptions gopts;
  gopts.seed = 89;
  int n_sites = 8;
  ModelSpec model = ising_model(1.0);
  GroundResult ground = optimize_ground_tensor(model, 3, n_sites, gopts);
  DispersionOptions opts;
  opts.branch_count = 3;
  DispersionResult result = dispersion(model, ground.a, n_sites, opts);
  ExactSpectrum ed = ed_spectrum(model, n_sites);
  auto minima = sector_minima(ed);
  for (int k = 0; k < n_sites; ++k)
    CHECK(result.momenta[k].energies[0] >= minima[k] - 1e-10);
}

TEST_CASE("ground sanity: the k=0 branch dips to the Rayleigh energy") {
  GroundOptions gopts;
  gopts.seed = 97;
  ModelSpec model = ising_model(1.1);
  GroundResult ground = optimize_ground_tensor(model, 3, 8, gopts);
  DispersionOptions opts;
  opts.branch_count = 2;
  DispersionResult result = dispersion(model, ground.a, 8, opts);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& mb : result.momenta) best = std::min(best, mb.energies[0]);
  CHECK(best <= result.backbone_energy + 1e-9);
}

TEST_CASE("returned vectors are n_eff-orthonormal and exact T eigenvectors") {
  std::mt19937_64 rng(101);
  GroundOptions gopts;
  gopts.seed = 101;
  int n_sites = 6;
  ModelSpec model = heisenberg_model();
  GroundResult ground = optimize_ground_tensor(model, 2, n_sites, gopts);
  const SiteTensor& a = ground.a;
  NetworkSet set = quick_set(a, model, n_sites);
  for (int k = 0; k < n_sites; ++k) {
    EffectivePair pair = assemble_effective(set, k);
    MomentumBranches mb = solve_fixed_momentum(pair, 1e-11, 3);
    Matrix gram = mb.vectors.adjoint() * pair.n_eff * mb.vectors;
    CHECK((gram - Matrix::Identity(gram.rows(), gram.cols()))
              .cwiseAbs()
              .maxCoeff() <= 1e-8);
    for (Eigen::Index c = 0; c < mb.vectors.cols(); ++c) {
      SiteTensor b = SiteTensor::from_vector(2, 2, mb.vectors.col(c));
      Vector psi = bloch_state_vector(a, b, k, n_sites);
      REQUIRE(psi.norm() > 1e-6);
      Vector shifted = apply_translation(psi, 2, n_sites, 1);
      Complex tau = momentum_phase(k, 1, n_sites);
      CHECK((shifted - tau * psi).norm() <= 1e-12 * psi.norm());
    }
  }
}

TEST_CASE("branch energies are physical Rayleigh quotients of bloch states") {
  GroundOptions gopts;
  gopts.seed = 103;
  int n_sites = 6;
  ModelSpec model = ising_model(0.9);
  GroundResult ground = optimize_ground_tensor(model, 2, n_sites, gopts);
  DispersionOptions opts;
  opts.branch_count = 3;
  DispersionResult result = dispersion(model, ground.a, n_sites, opts);
  Matrix h = dense_hamiltonian(model, n_sites);
  for (int k = 0; k < n_sites; ++k) {
    const MomentumBranches& mb = result.momenta[k];
    for (std::size_t i = 0; i < mb.energies.size(); ++i) {
      SiteTensor b = SiteTensor::from_vector(
          2, 2, mb.vectors.col(static_cast<Eigen::Index>(i)));
      Vector psi = bloch_state_vector(result.backbone, b, k, n_sites);
      double quotient =
          ((psi.adjoint() * h * psi)(0) / psi.squaredNorm()).real();
      CHECK(quotient == doctest::Approx(mb.energies[i]).epsilon(1e-8));
    }
  }
}

TEST_CASE("relabeling rule and its involution") {
  CHECK(relabel_momentum(3, -1, 16) == 11);
  for (int k = 0; k < 16; ++k) {
    CHECK(relabel_momentum(k, 1, 16) == k);
    CHECK(relabel_momentum(relabel_momentum(k, -1, 16), -1, 16) == k);
  }
}

TEST_CASE("lambda shift exactness on definite-parity ED states") {
  int n_sites = 8;
  double lambda = 0.8;
  ExactSpectrum base = ed_spectrum(heisenberg_transformed(0.0, -1), n_sites);
  ExactSpectrum minus = ed_spectrum(heisenberg_transformed(lambda, -1), n_sites);
  ExactSpectrum plus = ed_spectrum(heisenberg_transformed(lambda, +1), n_sites);
  // E(H+-) = E(H') -+ lambda * parity: compare sorted multisets.
  std::vector<double> predicted_minus, predicted_plus;
  for (const auto& level : base.levels) {
    predicted_minus.push_back(level.energy - lambda * level.parity);
    predicted_plus.push_back(level.energy + lambda * level.parity);
  }
  std::sort(predicted_minus.begin(), predicted_minus.end());
  std::sort(predicted_plus.begin(), predicted_plus.end());
  for (std::size_t i = 0; i < base.levels.size(); ++i) {
    CHECK(std::abs(predicted_minus[i] - minus.levels[i].energy) <= 1e-10);
    CHECK(std::abs(predicted_plus[i] - plus.levels[i].energy) <= 1e-10);
  }
}

TEST_CASE("split workflow reproduces the low Heisenberg spectrum at N=8") {
  // lambda must be large enough that the b kept branches of each run stay in
  // one parity sector at every momentum; 0.1 * N covers b = 3 here.
  int n_sites = 8;
  double lambda = 0.1 * n_sites;
  GroundOptions gopts;
  gopts.seed = 107;
  GroundResult gm =
      optimize_ground_tensor(heisenberg_transformed(lambda, -1), 4, n_sites, gopts);
  GroundResult gp =
      optimize_ground_tensor(heisenberg_transformed(lambda, +1), 4, n_sites, gopts);
  DispersionOptions opts;
  opts.branch_count = 3;
  DispersionResult merged =
      heisenberg_split_dispersion(gm.a, gp.a, lambda, n_sites, opts);
  REQUIRE(static_cast<int>(merged.momenta.size()) == n_sites);

  ExactSpectrum ed = ed_spectrum(heisenberg_model(), n_sites);
  // Exact levels per (momentum, parity) sector, ascending.
  std::map<std::pair<int, int>, std::vector<double>> exact_sector;
  for (const auto& level : ed.levels)
    exact_sector[{level.momentum, level.parity}].push_back(level.energy);
  for (auto& [key, levels] : exact_sector)
    std::sort(levels.begin(), levels.end());

  for (int k = 0; k < n_sites; ++k) {
    const MomentumBranches& mb = merged.momenta[k];
    REQUIRE(mb.energies.size() == 6);  // 2b branches
    for (std::size_t i = 0; i < mb.energies.size(); ++i) {
      CHECK_FALSE(mb.parity_flagged[i]);
      CHECK(std::abs(mb.parity_values[i] - mb.parity[i]) <= 0.01);
    }
    for (int parity : {+1, -1}) {
      std::vector<double> sector;
      for (std::size_t i = 0; i < mb.energies.size(); ++i)
        if (mb.parity[i] == parity) sector.push_back(mb.energies[i]);
      std::sort(sector.begin(), sector.end());
      const auto& exact_levels = exact_sector[{k, parity}];
      REQUIRE_FALSE(exact_levels.empty());
      // lowest level per sector: variational and close
      CHECK(sector[0] >= exact_levels[0] - 1e-9);
      CHECK(relative_precision(sector[0], exact_levels[0]).value <= 2e-2);
    }
  }

  // Cross-check the network parity measurement against the dense operator
  // for one momentum.
  const MomentumBranches& mb0 = merged.momenta[0];
  for (std::size_t i = 0; i < mb0.energies.size(); ++i) {
    const SiteTensor& backbone =
        mb0.parity[i] > 0 ? merged.backbone : merged.backbone_plus;
    SiteTensor b = SiteTensor::from_vector(
        2, 4, mb0.vectors.col(static_cast<Eigen::Index>(i)));
    Vector psi =
        bloch_state_vector(backbone, b, mb0.k_original[i], n_sites);
    psi.normalize();
    auto [p_dense, residual] = parity_of_state(psi, pauli_y(), 2, n_sites);
    CHECK(p_dense == mb0.parity[i]);
    CHECK(residual <= 1e-6);
  }
}

TEST_CASE("streaming assembly agrees with the in-memory path") {
  GroundOptions gopts;
  gopts.seed = 109;
  int n_sites = 6;
  ModelSpec model = ising_model(1.0);
  GroundResult ground = optimize_ground_tensor(model, 2, n_sites, gopts);
  DispersionOptions in_memory;
  in_memory.branch_count = 3;
  DispersionOptions streaming = in_memory;
  streaming.streaming = true;
  DispersionResult r1 = dispersion(model, ground.a, n_sites, in_memory);
  DispersionResult r2 = dispersion(model, ground.a, n_sites, streaming);
  for (int k = 0; k < n_sites; ++k)
    for (std::size_t i = 0; i < r1.momenta[k].energies.size(); ++i)
      CHECK(r1.momenta[k].energies[i] ==
            doctest::Approx(r2.momenta[k].energies[i]).epsilon(1e-12));
}

TEST_CASE("memory budget refusal carries the requirement") {
  std::mt19937_64 rng(113);
  SiteTensor a = normalized(SiteTensor::random_gaussian(2, 2, rng));
  DispersionOptions opts;
  opts.branch_count = 2;
  opts.memory_budget_bytes = 100;
  CHECK_THROWS_AS(dispersion(ising_model(1.0), a, 6, opts), ResourceError);
}

TEST_CASE("branch count precondition") {
  std::mt19937_64 rng(127);
  SiteTensor a = normalized(SiteTensor::random_gaussian(2, 2, rng));
  DispersionOptions opts;
  opts.branch_count = 4;  // dD^2 - null = 8 - 5 = 3 at k=0
  CHECK_THROWS_AS(dispersion(ising_model(1.0), a, 6, opts), ValidationError);
}

TEST_CASE("dispersion cache round trip skips the build") {
  GroundOptions gopts;
  gopts.seed = 131;
  int n_sites = 5;
  ModelSpec model = ising_model(1.0);
  GroundResult ground = optimize_ground_tensor(model, 2, n_sites, gopts);
  DispersionOptions opts;
  opts.branch_count = 2;
  opts.cache_path = "test_dispersion_cache.bin";
  DispersionResult cold = dispersion(model, ground.a, n_sites, opts);
  CHECK_FALSE(cold.used_cache);
  DispersionResult warm = dispersion(model, ground.a, n_sites, opts);
  CHECK(warm.used_cache);
  for (int k = 0; k < n_sites; ++k)
    CHECK(warm.momenta[k].energies[0] ==
          doctest::Approx(cold.momenta[k].energies[0]).epsilon(1e-14));
  std::remove(opts.cache_path.c_str());
}

}
