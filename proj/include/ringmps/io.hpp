#pragma once

#include "ringmps/exact.hpp"
#include "ringmps/excitations.hpp"
#include "ringmps/ground.hpp"

namespace ringmps {

// File layer. Every output embeds the artifact version and the config hash;
// all floating point is written with 17 significant digits so repeat runs
// are byte-identical.

inline constexpr int kArtifactVersion = 1;

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

/// Versioned, self-describing tensor file (JSON): d, D, the documented
/// vec layout string, entries as [re, im] pairs, free-form metadata.
void save_tensor(const std::string& path, const SiteTensor& a,
                 const std::map<std::string, std::string>& metadata = {});

struct LoadedTensor {
  SiteTensor a;
  std::map<std::string, std::string> metadata;
};
LoadedTensor load_tensor(const std::string& path);

std::string dispersion_to_json(const DispersionResult& result,
                               std::uint64_t config_hash,
                               bool include_states = false);
/// Columns: k,branch,energy,discarded,parity,k_relabel. k is the momentum
/// of the solver run that produced the row; k_relabel the momentum the state
/// is reported at (equal unless a split run relabeled it); branch indexes
/// rows within one k_relabel group, by ascending energy.
std::string dispersion_to_csv(const DispersionResult& result,
                              std::uint64_t config_hash);
DispersionResult dispersion_from_json(const std::string& text);

std::string exact_to_json(const ExactSpectrum& spec, std::uint64_t config_hash,
                          bool include_vectors = false);
/// Columns: energy,k,parity,degeneracy,modes (modes '|'-joined).
std::string exact_to_csv(const ExactSpectrum& spec, std::uint64_t config_hash);
ExactSpectrum exact_from_json(const std::string& text);

/// One reproducible run: a single JSON document, flags override file values.
struct RunConfig {
  std::string model_name = "ising";  // ising | ising_x | heisenberg |
                                     // heisenberg_transformed
  double g = 1.0;
  double lambda = 0.0;  // 0 means the 0.1 * N default where one is needed
  int sign = -1;
  bool symmetric_field = false;

  int n_sites = 8;
  int bond_dim = 2;
  int branches = 3;
  double eps = 1e-11;
  std::uint64_t seed = 1;

  int max_iters = 8000;
  double grad_tol = 1e-8;
  int restarts = 5;
  bool real_symmetric = false;

  std::string tensor_in;
  std::string tensor_in_plus;  // second backbone for split runs
  std::string tensor_out;
  std::string cache_path;
  std::string results_dir = ".";

  double memory_budget_mb = 4096;
  int threads = 1;
  bool split = false;
  bool streaming = false;

  std::string method = "ed";  // exact subcommand: ed | ising-analytic
  int window_levels = 0;      // 0 = no truncation
  double window_energy = 0;   // used when window_levels < 0... see validate
  bool has_window_energy = false;
  bool keep_vectors = false;

  std::uint64_t hash() const;
  std::string to_json() const;
  static RunConfig from_json(const std::string& text);
};

/// Field-level validation; throws ValidationError naming the bad field.
void validate_config(const RunConfig& config, const std::string& command);

ModelSpec model_from_config(const RunConfig& config);

}  // namespace ringmps
