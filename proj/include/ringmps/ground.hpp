#pragma once

#include "ringmps/models.hpp"
#include "ringmps/site_tensor.hpp"

namespace ringmps {

/// <phi_A|H|phi_A> / <phi_A|phi_A> for the uniform ring state, computed
/// through transfer matrices (N * <h01> by translation invariance, plus the
/// product term when the model carries one).
double rayleigh_energy(const SiteTensor& a, const ModelSpec& model,
                       int n_sites);

/// Energy together with the Wirtinger gradient d E / d conj(A); descending
/// along -gradient is steepest descent in the real parametrization.
std::pair<double, SiteTensor> rayleigh_energy_gradient(const SiteTensor& a,
                                                       const ModelSpec& model,
                                                       int n_sites);

struct GroundOptions {
  int max_iters = 8000;
  double grad_tol = 1e-8;
  int restarts = 5;
  std::uint64_t seed = 1;
  int threads = 1;
  bool real_symmetric = false;  // restrict A_i to real symmetric matrices
};

struct GroundResult {
  SiteTensor a;
  double energy = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Minimizes the Rayleigh quotient over one site tensor by gradient descent
/// with a Barzilai-Borwein step and Armijo backtracking; best of `restarts`
/// independent seeded starts. Deterministic for a fixed seed.
GroundResult optimize_ground_tensor(const ModelSpec& model, int bond_dim,
                                    int n_sites,
                                    const GroundOptions& opts = {});

}  // namespace ringmps
