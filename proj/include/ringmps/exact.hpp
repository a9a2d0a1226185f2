#pragma once

#include "ringmps/models.hpp"
#include "ringmps/state_vector.hpp"

namespace ringmps {

/// Dense Hamiltonian sum_l T^l h01 T^{-l} (+ strength * prod_s o_s).
Matrix dense_hamiltonian(const ModelSpec& model, int n_sites);

struct LabeledLevel {
  double energy = 0.0;
  int momentum = 0;
  double momentum_residual = 0.0;
  int parity = 0;  // +1 / -1, 0 when not labeled
  double parity_residual = 0.0;
  int degeneracy = 1;
  int sector = 0;             // Ising oracle: +1 even, -1 odd
  std::vector<double> modes;  // Ising oracle: occupied mode indices
};

struct ExactSpectrum {
  std::string model_name;
  std::map<std::string, double> params;
  int n_sites = 0;
  std::vector<LabeledLevel> levels;  // ascending
  bool has_vectors = false;
  Matrix vectors;  // columns aligned with levels when has_vectors
};

struct EdOptions {
  bool want_vectors = false;
  bool label_parity = true;   // uses model.parity_label_op when present
  double group_tol = 1e-8;    // absolute degeneracy grouping tolerance
};

/// Full dense diagonalization with momentum labels. Degenerate blocks are
/// first rotated into the translation eigenbasis (Schur of the projected T),
/// then into the parity eigenbasis inside each momentum subblock, so every
/// reported state carries sharp quantum numbers.
ExactSpectrum ed_spectrum(const ModelSpec& model, int n_sites,
                          const EdOptions& opts = {});

/// <v|T|v> snapped to the nearest root of unity e^{-i 2 pi k / N}; the
/// residual is the distance to that root (> 1e-6 means not a T eigenstate).
std::pair<int, double> momentum_of_state(const Vector& v, int d, int n_sites);

/// <v| prod_s o_s |v> snapped to +-1, with the distance as residual.
std::pair<int, double> parity_of_state(const Vector& v, const Matrix& o,
                                       int d, int n_sites);

struct SpectrumWindow {
  std::optional<int> max_levels;
  std::optional<double> max_energy;
};

/// Analytic finite-chain solution of the transverse-field Ising model in
/// both fermion-parity sectors: half-integer modes 2 pi (q + 1/2) / N in the
/// even sector (even occupation counts), integer modes 2 pi q / N in the odd
/// sector (odd occupation counts), mode energy 2 sqrt(1 + g^2 - 2 g cos
/// theta) with the unpaired theta = 0 and theta = pi modes carrying signed
/// energies 2(g - 1) and 2(g + 1). Total momentum is the mode-index sum mod
/// N. Requires even n_sites.
ExactSpectrum ising_exact_spectrum(double g, int n_sites,
                                   const SpectrumWindow& window = {});

struct MultipletGroup {
  int momentum = 0;
  double energy = 0.0;  // representative (lowest) energy in the group
  int size = 1;
  std::string name;  // singlet / triplet / quintuplet / septuplet / m<size>
};

/// Groups levels that agree in momentum and (within tol) energy.
std::vector<MultipletGroup> multiplet_grouping(
    const std::vector<std::pair<int, double>>& momentum_energy, double tol);

/// sin of the largest canonical angle between two equal-dimensional
/// subspaces given by orthonormal-column bases (1 when dimensions differ).
double canonical_angle_distance(const Matrix& u, const Matrix& v);

struct RelPrecision {
  double value = 0.0;
  bool zero_denominator = false;
};

/// |e_mps - e_exact| / |e_exact|; falls back to the absolute difference
/// (flagged) when the exact value is zero.
RelPrecision relative_precision(double e_mps, double e_exact);

}  // namespace ringmps
