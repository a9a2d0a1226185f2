#pragma once

#include "ringmps/linalg.hpp"
#include "ringmps/models.hpp"
#include "ringmps/networks.hpp"

namespace ringmps {

/// The momentum-k quadratic forms H_eff(k), N_eff(k) (and P_eff(k) when the
/// model carries a product term; the strength is already folded into h_eff).
struct EffectivePair {
  int k = 0;
  int phys_dim = 0;
  int bond_dim = 0;
  Matrix h_eff;
  Matrix n_eff;
  Matrix p_eff;  // bare parity form (strength not applied); empty if none
  double h_asymmetry = 0.0;  // recorded before Hermitization
  double n_asymmetry = 0.0;
};

/// Phase-weighted sums over the cached network set. Throws NumericalError
/// when the pre-Hermitization asymmetry exceeds 1e-8 relative (that signals
/// a contraction bug, not roundoff).
EffectivePair assemble_effective(const NetworkSet& set, int k,
                                 double perturbation_strength = 0.0);

struct MomentumBranches {
  int k = 0;
  std::vector<double> energies;       // ascending
  Matrix vectors;                     // dD^2 x n_branches, v^dag N_eff v = 1
  std::vector<double> metric_norms;
  int discarded = 0;
  int expected_null = 0;              // D^2 (d-1), +1 at k = 0
  bool null_count_mismatch = false;
  std::vector<int> parity;            // +-1 when tagged, 0 otherwise
  std::vector<double> parity_values;  // measured <P_y>
  std::vector<bool> parity_flagged;   // contamination beyond 0.01
  std::vector<int> k_original;        // pre-relabeling momentum (split runs)
};

/// Regularized generalized eigenvalue solve at fixed momentum. Keeps at most
/// `max_branches` lowest branches (all when <= 0). The discarded-direction
/// count is compared against the null-space law and mismatches are flagged,
/// not fatal: near-singular directions can blur the boundary.
MomentumBranches solve_fixed_momentum(const EffectivePair& pair, double eps,
                                      int max_branches = -1);

struct DispersionOptions {
  double eps = 1e-11;
  int branch_count = 4;
  int threads = 1;
  std::size_t memory_budget_bytes = std::size_t(4) << 30;
  std::string cache_path;  // load/store the network set here when set
  bool streaming = false;  // never hold the ham set: accumulate H_eff(k)
                           // row by row (no cache file in this mode)
};

struct DispersionResult {
  std::string model_name;
  std::map<std::string, double> model_params;
  int n_sites = 0;
  int phys_dim = 0;
  int bond_dim = 0;
  double eps = 1e-11;
  std::uint64_t tensor_hash = 0;
  std::uint64_t model_hash = 0;
  double backbone_energy = 0.0;  // Rayleigh energy of the fixed tensor A
  SiteTensor backbone;  // the normalized tensor the coefficients pair with
  SiteTensor backbone_plus;  // second-sector backbone (split runs only)
  std::vector<MomentumBranches> momenta;  // indexed by k
  double network_seconds = 0.0;
  double solve_seconds = 0.0;
  bool used_cache = false;
};

/// Full run for one model and one fixed backbone tensor: builds (or loads)
/// the network set once, then assembles and solves all N momenta.
DispersionResult dispersion(const ModelSpec& model, const SiteTensor& a,
                            int n_sites, DispersionOptions opts = {});

/// Momentum relabeling under the sigma^y-product transformation: parity +1
/// keeps k, parity -1 shifts by N/2 (mod N). An involution.
int relabel_momentum(int k_prime, int parity, int n_sites);

/// The two-run parity-splitting workflow: dispersion of H' - lambda P_y
/// (parity +1 states, momentum kept) and of H' + lambda P_y (parity -1,
/// momentum shifted by N/2), energies un-shifted by +lambda each (exact for
/// definite-parity states), merged into 2b branches per momentum labeled for
/// the untransformed chain.
DispersionResult heisenberg_split_dispersion(const SiteTensor& a_minus,
                                             const SiteTensor& a_plus,
                                             double lambda, int n_sites,
                                             DispersionOptions opts = {});

}  // namespace ringmps
