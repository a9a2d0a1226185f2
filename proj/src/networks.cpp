#include "ringmps/networks.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include "ringmps/linalg.hpp"

namespace ringmps {

namespace {

void check_site_index(int value, int n_sites, const char* who) {
  if (value < 0 || value >= n_sites) {
    std::ostringstream msg;
    msg << who << ": index " << value << " out of range [0, " << n_sites
        << ")";
    throw ValidationError(msg.str());
  }
}

// Ket matrices of site 0 (bra slot): the physical index left open couples to
// conj(B), so an operator O on that site turns A into sum_y O(i,y) A_y.
std::vector<Matrix> bra_slot_matrices(const SiteTensor& a, const Matrix* op) {
  if (!op) return a.site;
  std::vector<Matrix> out(a.phys_dim, Matrix::Zero(a.bond_dim, a.bond_dim));
  for (int i = 0; i < a.phys_dim; ++i)
    for (int y = 0; y < a.phys_dim; ++y) out[i] += (*op)(i, y) * a.site[y];
  return out;
}

// Bra matrices of the ket slot: the open index couples to B itself, so an
// operator O there turns A into sum_c conj(O(c,j)) A_c (conjugated later).
std::vector<Matrix> ket_slot_matrices(const SiteTensor& a, const Matrix* op) {
  if (!op) return a.site;
  std::vector<Matrix> out(a.phys_dim, Matrix::Zero(a.bond_dim, a.bond_dim));
  for (int j = 0; j < a.phys_dim; ++j)
    for (int c = 0; c < a.phys_dim; ++c)
      out[j] += std::conj((*op)(c, j)) * a.site[c];
  return out;
}

// Ordered product of site transfer matrices over sites [lo, hi], none of
// which is a slot. Runs of unmodified sites use the cached powers.
Matrix chain_product(const SiteTensor& a, int lo, int hi,
                     const std::map<int, Matrix>& extra_ops,
                     const Matrix* global_op, const TransferPowers& powers) {
  const int dsq = a.bond_dim * a.bond_dim;
  Matrix acc = Matrix::Identity(dsq, dsq);
  int run = 0;
  for (int s = lo; s <= hi; ++s) {
    auto it = extra_ops.find(s);
    if (it == extra_ops.end()) {
      ++run;
      continue;
    }
    if (run > 0) acc = acc * powers.pow[run];
    run = 0;
    acc = acc * transfer_matrix(a, a, &it->second);
  }
  if (run > 0) acc = acc * powers.pow[run];
  (void)global_op;  // already folded into `powers`
  return acc;
}

}  // namespace

TransferPowers TransferPowers::build(const Matrix& background, int n_sites) {
  TransferPowers p;
  p.pow.resize(n_sites + 1);
  p.pow[0] = Matrix::Identity(background.rows(), background.cols());
  for (int t = 1; t <= n_sites; ++t) p.pow[t] = p.pow[t - 1] * background;
  return p;
}

Matrix ring_network(const SiteTensor& a, int n_sites, int ket_slot,
                    const std::map<int, Matrix>& extra_ops,
                    const Matrix* global_op, const TransferPowers& powers) {
  if (n_sites < 2) throw ValidationError("ring_network: need n_sites >= 2");
  check_site_index(ket_slot, n_sites, "ring_network(ket_slot)");
  if (global_op && !extra_ops.empty())
    throw ValidationError("ring_network: global and extra ops are exclusive");
  const int d = a.phys_dim;
  const int D = a.bond_dim;
  const int dsq = D * D;
  const int dim = d * dsq;

  auto op_at = [&](int s) -> const Matrix* {
    auto it = extra_ops.find(s);
    if (it != extra_ops.end()) return &it->second;
    return global_op;
  };

  Matrix m(dim, dim);

  if (ket_slot == 0) {
    // Both slots on site 0: M[(i,ab),(j,gd)] = O0(i,j) * W[(d,b),(g,a)].
    Matrix w = chain_product(a, 1, n_sites - 1, extra_ops, global_op, powers);
    const Matrix* op0 = op_at(0);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        Complex w0 = op0 ? (*op0)(i, j) : (i == j ? Complex(1, 0) : Complex(0, 0));
        for (int albar = 0; albar < D; ++albar)
          for (int bebar = 0; bebar < D; ++bebar)
            for (int ga = 0; ga < D; ++ga)
              for (int de = 0; de < D; ++de)
                m(i * dsq + albar * D + bebar, j * dsq + ga * D + de) =
                    w0 * w(de * D + bebar, ga * D + albar);
      }
    return m;
  }

  const int p = ket_slot;
  Matrix w1 = chain_product(a, 1, p - 1, extra_ops, global_op, powers);
  Matrix w2 = chain_product(a, p + 1, n_sites - 1, extra_ops, global_op, powers);
  std::vector<Matrix> at = bra_slot_matrices(a, op_at(0));   // site 0
  std::vector<Matrix> ah = ket_slot_matrices(a, op_at(p));   // site p

  // W2 reshuffled so the innermost contraction is one (D^2 x D^2) * vector
  // product: w2r[(al,de),(aa,dd)] = w2[(de,dd),(aa,al)].
  Matrix w2r(dsq, dsq);
  for (int al = 0; al < D; ++al)
    for (int de = 0; de < D; ++de)
      for (int aa = 0; aa < D; ++aa)
        for (int dd = 0; dd < D; ++dd)
          w2r(al * D + de, aa * D + dd) = w2(de * D + dd, aa * D + al);

  Matrix x(dsq, dsq), z(dsq, dsq);
  Vector zv(dsq), mv(dsq);
  for (int i = 0; i < d; ++i) {
    // x[(aa,bb),(g,cc)] = sum_b at_i(aa,b) w1[(b,bb),(g,cc)]
    x.setZero();
    for (int aa = 0; aa < D; ++aa)
      for (int b = 0; b < D; ++b) {
        Complex coef = at[i](aa, b);
        if (coef == Complex(0, 0)) continue;
        for (int bb = 0; bb < D; ++bb)
          x.row(aa * D + bb) += coef * w1.row(b * D + bb);
      }
    for (int j = 0; j < d; ++j) {
      // z[(aa,bb),(g,dd)] = sum_cc x[(aa,bb),(g,cc)] conj(ah_j)(cc,dd)
      for (int g = 0; g < D; ++g)
        z.middleCols(g * D, D) =
            x.middleCols(g * D, D) * ah[j].conjugate();
      for (int bb = 0; bb < D; ++bb)
        for (int g = 0; g < D; ++g) {
          for (int aa = 0; aa < D; ++aa)
            for (int dd = 0; dd < D; ++dd)
              zv(aa * D + dd) = z(aa * D + bb, g * D + dd);
          mv.noalias() = w2r * zv;
          for (int al = 0; al < D; ++al)
            for (int de = 0; de < D; ++de)
              m(i * dsq + al * D + bb, j * dsq + g * D + de) =
                  mv(al * D + de);
        }
    }
  }
  return m;
}

Matrix norm_network(const SiteTensor& a, int m, int n_sites) {
  check_site_index(m, n_sites, "norm_network(m)");
  TransferPowers powers = TransferPowers::build(transfer_matrix(a), n_sites);
  int ket_slot = (n_sites - m) % n_sites;
  return ring_network(a, n_sites, ket_slot, {}, nullptr, powers);
}

std::vector<std::pair<Matrix, Matrix>> two_site_factors(const Matrix& h,
                                                        int d) {
  if (h.rows() != d * d || h.cols() != d * d)
    throw ValidationError("two_site_factors: operator must be d^2 x d^2");
  Matrix shuffled(d * d, d * d);
  for (int c1 = 0; c1 < d; ++c1)
    for (int c2 = 0; c2 < d; ++c2)
      for (int y1 = 0; y1 < d; ++y1)
        for (int y2 = 0; y2 < d; ++y2)
          shuffled(c1 * d + y1, c2 * d + y2) = h(c1 * d + c2, y1 * d + y2);
  SvdResult decomp = svd(shuffled);
  std::vector<std::pair<Matrix, Matrix>> factors;
  double cut = 1e-14 * std::max(decomp.singular_values(0), 1e-300);
  for (Eigen::Index r = 0; r < decomp.singular_values.size(); ++r) {
    double s = decomp.singular_values(r);
    if (s <= cut) break;
    double root = std::sqrt(s);
    Matrix p(d, d), q(d, d);
    for (int c = 0; c < d; ++c)
      for (int y = 0; y < d; ++y) {
        p(c, y) = root * decomp.u(c * d + y, r);
        q(c, y) = root * std::conj(decomp.v(c * d + y, r));
      }
    factors.emplace_back(std::move(p), std::move(q));
  }
  return factors;
}

Matrix ham_network_cached(const SiteTensor& a, int n, int m, int n_sites,
                          const std::vector<std::pair<Matrix, Matrix>>& factors,
                          const TransferPowers& powers) {
  const int ket_slot = (n_sites - m) % n_sites;
  const int u = ((n - m) % n_sites + n_sites) % n_sites;
  const int u2 = (u + 1) % n_sites;
  Matrix out;
  for (const auto& [p_op, q_op] : factors) {
    std::map<int, Matrix> ops;
    ops.emplace(u, p_op);
    ops.emplace(u2, q_op);
    Matrix term = ring_network(a, n_sites, ket_slot, ops, nullptr, powers);
    if (out.size() == 0)
      out = std::move(term);
    else
      out += term;
  }
  return out;
}

Matrix ham_network(const SiteTensor& a, const Matrix& h, int n, int m,
                   int n_sites) {
  check_site_index(m, n_sites, "ham_network(m)");
  check_site_index(n, n_sites, "ham_network(n)");
  auto factors = two_site_factors(h, a.phys_dim);
  TransferPowers powers = TransferPowers::build(transfer_matrix(a), n_sites);
  return ham_network_cached(a, n, m, n_sites, factors, powers);
}

Matrix parity_network(const SiteTensor& a, const Matrix& o, int m,
                      int n_sites) {
  check_site_index(m, n_sites, "parity_network(m)");
  TransferPowers powers =
      TransferPowers::build(transfer_matrix(a, a, &o), n_sites);
  int ket_slot = (n_sites - m) % n_sites;
  return ring_network(a, n_sites, ket_slot, {}, &o, powers);
}

std::size_t network_set_bytes(int n_sites, int d, int D, bool has_parity) {
  std::size_t dim = static_cast<std::size_t>(d) * D * D;
  std::size_t per_matrix = dim * dim * sizeof(Complex);
  std::size_t count = static_cast<std::size_t>(n_sites) * n_sites +  // ham
                      static_cast<std::size_t>(n_sites) *
                          (has_parity ? 2 : 1);  // norm (+ parity)
  return per_matrix * count;
}

NetworkSet build_network_set(const SiteTensor& a, int n_sites,
                             const Matrix& h01, const Matrix* parity_op,
                             const NetworkKey& key,
                             const NetworkBuildOptions& opts) {
  std::size_t need =
      network_set_bytes(n_sites, a.phys_dim, a.bond_dim, parity_op != nullptr);
  if (need > opts.memory_budget_bytes) {
    std::ostringstream msg;
    msg << "network set needs " << need << " bytes, budget is "
        << opts.memory_budget_bytes
        << " (raise the budget or use the streaming path)";
    throw ResourceError(msg.str());
  }

  NetworkSet set;
  set.key = key;
  set.key.n_sites = n_sites;
  set.key.phys_dim = a.phys_dim;
  set.key.bond_dim = a.bond_dim;
  set.key.has_parity = parity_op != nullptr;

  TransferPowers plain = TransferPowers::build(transfer_matrix(a), n_sites);
  auto factors = two_site_factors(h01, a.phys_dim);

  set.norm.resize(n_sites);
  parallel_for(n_sites, opts.threads, [&](std::size_t m) {
    int ket_slot = (n_sites - static_cast<int>(m)) % n_sites;
    set.norm[m] = ring_network(a, n_sites, ket_slot, {}, nullptr, plain);
  });

  set.ham.resize(static_cast<std::size_t>(n_sites) * n_sites);
  parallel_for(set.ham.size(), opts.threads, [&](std::size_t idx) {
    int n = static_cast<int>(idx) / n_sites;
    int m = static_cast<int>(idx) % n_sites;
    set.ham[idx] = ham_network_cached(a, n, m, n_sites, factors, plain);
  });

  if (parity_op) {
    TransferPowers dressed =
        TransferPowers::build(transfer_matrix(a, a, parity_op), n_sites);
    set.parity.resize(n_sites);
    parallel_for(n_sites, opts.threads, [&](std::size_t m) {
      int ket_slot = (n_sites - static_cast<int>(m)) % n_sites;
      set.parity[m] =
          ring_network(a, n_sites, ket_slot, {}, parity_op, dressed);
    });
  }
  return set;
}

namespace {

constexpr char kMagic[8] = {'R', 'M', 'P', 'S', 'N', 'E', 'T', '1'};

void write_matrix(std::ofstream& out, const Matrix& m) {
  out.write(reinterpret_cast<const char*>(m.data()),
            static_cast<std::streamsize>(sizeof(Complex) * m.size()));
}

bool read_matrix(std::ifstream& in, Matrix& m) {
  in.read(reinterpret_cast<char*>(m.data()),
          static_cast<std::streamsize>(sizeof(Complex) * m.size()));
  return bool(in);
}

}  // namespace

void save_network_set(const std::string& path, const NetworkSet& set) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("save_network_set: cannot open " + path);
  out.write(kMagic, sizeof(kMagic));
  auto put_u64 = [&](std::uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
  };
  auto put_i32 = [&](std::int32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
  };
  put_u64(set.key.model_hash);
  put_u64(set.key.tensor_hash);
  put_i32(set.key.n_sites);
  put_i32(set.key.phys_dim);
  put_i32(set.key.bond_dim);
  put_i32(set.key.has_parity ? 1 : 0);
  for (const auto& m : set.norm) write_matrix(out, m);
  for (const auto& m : set.ham) write_matrix(out, m);
  for (const auto& m : set.parity) write_matrix(out, m);
  if (!out) throw ValidationError("save_network_set: write failed: " + path);
}

std::optional<NetworkSet> load_network_set(const std::string& path,
                                           const NetworkKey& expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    return std::nullopt;
  NetworkSet set;
  auto get_u64 = [&](std::uint64_t& v) {
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
  };
  std::int32_t n_sites = 0, d = 0, D = 0, has_parity = 0;
  get_u64(set.key.model_hash);
  get_u64(set.key.tensor_hash);
  in.read(reinterpret_cast<char*>(&n_sites), sizeof(n_sites));
  in.read(reinterpret_cast<char*>(&d), sizeof(d));
  in.read(reinterpret_cast<char*>(&D), sizeof(D));
  in.read(reinterpret_cast<char*>(&has_parity), sizeof(has_parity));
  if (!in) return std::nullopt;
  set.key.n_sites = n_sites;
  set.key.phys_dim = d;
  set.key.bond_dim = D;
  set.key.has_parity = has_parity != 0;
  if (!(set.key == expected)) return std::nullopt;

  const int dim = d * D * D;
  set.norm.assign(n_sites, Matrix(dim, dim));
  set.ham.assign(static_cast<std::size_t>(n_sites) * n_sites,
                 Matrix(dim, dim));
  if (set.key.has_parity) set.parity.assign(n_sites, Matrix(dim, dim));
  for (auto& m : set.norm)
    if (!read_matrix(in, m)) return std::nullopt;
  for (auto& m : set.ham)
    if (!read_matrix(in, m)) return std::nullopt;
  for (auto& m : set.parity)
    if (!read_matrix(in, m)) return std::nullopt;
  return set;
}

}  // namespace ringmps
