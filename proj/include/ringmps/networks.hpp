#pragma once

#include <map>
#include <optional>

#include "ringmps/site_tensor.hpp"

namespace ringmps {

// Ring networks with two open tensor slots. Every network here is the
// dD^2 x dD^2 matrix M of a quadratic form
//
//   vec(B)^dag M vec(B) = <phi_A(B)| T^{-m} (insertions) |phi_A(B)>
//
// over the single impurity tensor B, where |phi_A(B)> carries B on site 0 and
// A everywhere else. Written as one trace around the ring, the bra impurity
// sits on site 0 and the ket impurity on site (N - m) mod N; the remaining
// sites contribute plain (or operator-inserted) transfer matrices. Exact
// contraction costs O(N D^6) per network standalone and amortized O(D^6)
// when the whole set shares the cached powers below.

/// Cached powers background^t for t = 0..n_sites.
struct TransferPowers {
  std::vector<Matrix> pow;
  static TransferPowers build(const Matrix& background, int n_sites);
};

/// The generic two-slot ring contraction. `ket_slot` = (N - m) mod N;
/// `extra_ops` inserts single-site operators (ham networks); `global_op`
/// applies one operator on every site (parity networks). The two options are
/// mutually exclusive. `powers` must be powers of the matching background
/// transfer matrix (plain, or operator-inserted for global_op).
Matrix ring_network(const SiteTensor& a, int n_sites, int ket_slot,
                    const std::map<int, Matrix>& extra_ops,
                    const Matrix* global_op, const TransferPowers& powers);

/// N_{0m}: vec(B)^dag M vec(B) = <phi_A(B)| T^{-m} |phi_A(B)>.
Matrix norm_network(const SiteTensor& a, int m, int n_sites);

/// H_{0nm}: vec(B)^dag M vec(B) = <phi_A(B)| T^{-m} h_{n,n+1} |phi_A(B)>
/// with the two-site operator h acting on sites (n, n+1 mod N).
Matrix ham_network(const SiteTensor& a, const Matrix& h, int n, int m,
                   int n_sites);

/// Same, sharing pre-split operator factors and cached plain powers so a
/// whole set costs O(D^6) per network instead of O(N D^6).
Matrix ham_network_cached(const SiteTensor& a, int n, int m, int n_sites,
                          const std::vector<std::pair<Matrix, Matrix>>& factors,
                          const TransferPowers& powers);

/// P_{0m}: vec(B)^dag M vec(B) = <phi_A(B)| T^{-m} prod_s o_s |phi_A(B)>
/// with the single-site operator o inserted on every site.
Matrix parity_network(const SiteTensor& a, const Matrix& o, int m,
                      int n_sites);

/// Splits a two-site operator into a minimal sum of single-site factor pairs
/// h = sum_r P_r (x) Q_r (operator Schmidt decomposition).
std::vector<std::pair<Matrix, Matrix>> two_site_factors(const Matrix& h,
                                                        int d);

struct NetworkKey {
  std::uint64_t model_hash = 0;
  std::uint64_t tensor_hash = 0;
  int n_sites = 0;
  int phys_dim = 0;
  int bond_dim = 0;
  bool has_parity = false;
  bool operator==(const NetworkKey&) const = default;
};

/// The full cached set {N_0m}, {H_0nm} (and {P_0m} when a parity operator is
/// given), indexed m and n * N + m.
struct NetworkSet {
  NetworkKey key;
  std::vector<Matrix> norm;
  std::vector<Matrix> ham;
  std::vector<Matrix> parity;
};

struct NetworkBuildOptions {
  int threads = 1;
  // Guard on N^2 (d D^2)^2 complex entries for the ham set.
  std::size_t memory_budget_bytes = std::size_t(4) << 30;
};

std::size_t network_set_bytes(int n_sites, int d, int D, bool has_parity);

/// Builds the whole set. Throws ResourceError when the set exceeds the
/// memory budget (use the streaming path in excitations.hpp instead).
NetworkSet build_network_set(const SiteTensor& a, int n_sites,
                             const Matrix& h01, const Matrix* parity_op,
                             const NetworkKey& key,
                             const NetworkBuildOptions& opts = {});

/// Binary cache of a NetworkSet, keyed so a run can resume. Layout
/// (little-endian): magic "RMPSNET1", the key fields, then raw column-major
/// complex entries for norm[0..N), ham[0..N^2) and parity[0..N) in order.
void save_network_set(const std::string& path, const NetworkSet& set);
std::optional<NetworkSet> load_network_set(const std::string& path,
                                           const NetworkKey& expected);

}  // namespace ringmps
