#include "ringmps/excitations.hpp"

#include "ringmps/ground.hpp"

#include <chrono>
#include <sstream>

namespace ringmps {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

Matrix hermitized(const Matrix& m, double* asymmetry, const char* label) {
  double asym = hermitian_asymmetry(m);
  double scale = std::max(max_abs(m), 1e-300);
  if (asym > 1e-8 * scale) {
    std::ostringstream msg;
    msg << label << " assembly asymmetry " << asym << " exceeds 1e-8 * "
        << scale << "; contraction is inconsistent";
    throw NumericalError(msg.str());
  }
  if (asymmetry) *asymmetry = asym;
  return 0.5 * (m + m.adjoint());
}

}  // namespace

EffectivePair assemble_effective(const NetworkSet& set, int k,
                                 double perturbation_strength) {
  const int n = set.key.n_sites;
  if (k < 0 || k >= n)
    throw ValidationError("assemble_effective: momentum out of range");
  if (static_cast<int>(set.norm.size()) != n ||
      static_cast<int>(set.ham.size()) != n * n)
    throw ValidationError("assemble_effective: incomplete network set");
  if (perturbation_strength != 0.0 && set.parity.empty())
    throw ValidationError(
        "assemble_effective: perturbation requested but no parity networks");

  EffectivePair pair;
  pair.k = k;
  pair.phys_dim = set.key.phys_dim;
  pair.bond_dim = set.key.bond_dim;

  const Eigen::Index dim = set.norm[0].rows();
  Matrix n_eff = Matrix::Zero(dim, dim);
  for (int m = 0; m < n; ++m) n_eff += momentum_phase(k, m, n) * set.norm[m];

  Matrix h_eff = Matrix::Zero(dim, dim);
  for (int nn = 0; nn < n; ++nn)
    for (int m = 0; m < n; ++m)
      h_eff += momentum_phase(k, m, n) * set.ham[nn * n + m];

  if (!set.parity.empty()) {
    Matrix p_eff = Matrix::Zero(dim, dim);
    for (int m = 0; m < n; ++m)
      p_eff += momentum_phase(k, m, n) * set.parity[m];
    pair.p_eff = hermitized(p_eff, nullptr, "P_eff");
    if (perturbation_strength != 0.0)
      h_eff += perturbation_strength * pair.p_eff;
  }

  pair.n_eff = hermitized(n_eff, &pair.n_asymmetry, "N_eff");
  pair.h_eff = hermitized(h_eff, &pair.h_asymmetry, "H_eff");
  return pair;
}

MomentumBranches solve_fixed_momentum(const EffectivePair& pair, double eps,
                                      int max_branches) {
  GevSolution solution = gev_regularized(pair.h_eff, pair.n_eff, eps);
  MomentumBranches out;
  out.k = pair.k;
  out.discarded = solution.discarded;
  out.expected_null = pair.bond_dim * pair.bond_dim * (pair.phys_dim - 1) +
                      (pair.k == 0 ? 1 : 0);
  out.null_count_mismatch = out.discarded != out.expected_null;

  int available = static_cast<int>(solution.values.size());
  int keep = max_branches > 0 ? std::min(max_branches, available) : available;
  out.energies.assign(solution.values.data(), solution.values.data() + keep);
  out.vectors = solution.vectors.leftCols(keep);
  out.metric_norms.assign(solution.metric_norms.data(),
                          solution.metric_norms.data() + keep);
  return out;
}

namespace {

// Row-streamed assembly: the ham set is never held; each row n of networks
// {H_0nm} is computed, folded into the per-k accumulators with its phases,
// and dropped. Memory is N + 1 matrices of size (d D^2)^2 per kind.
std::vector<EffectivePair> assemble_streaming(const SiteTensor& a, int n_sites,
                                              const ModelSpec& model,
                                              const NetworkKey& key,
                                              const DispersionOptions& opts) {
  const int d = a.phys_dim;
  const int D = a.bond_dim;
  const int dim = d * D * D;
  std::size_t accumulators =
      static_cast<std::size_t>(n_sites) * (key.has_parity ? 3 : 2) + n_sites;
  std::size_t need = accumulators * static_cast<std::size_t>(dim) * dim *
                     sizeof(Complex);
  if (need > opts.memory_budget_bytes) {
    std::ostringstream msg;
    msg << "streaming assembly still needs " << need << " bytes, budget is "
        << opts.memory_budget_bytes;
    throw ResourceError(msg.str());
  }

  TransferPowers plain = TransferPowers::build(transfer_matrix(a), n_sites);
  auto factors = two_site_factors(model.h01, d);

  std::vector<Matrix> norm(n_sites);
  parallel_for(n_sites, opts.threads, [&](std::size_t m) {
    int ket_slot = (n_sites - static_cast<int>(m)) % n_sites;
    norm[m] = ring_network(a, n_sites, ket_slot, {}, nullptr, plain);
  });

  std::vector<Matrix> h_acc(n_sites, Matrix::Zero(dim, dim));
  std::vector<Matrix> row(n_sites);
  for (int n = 0; n < n_sites; ++n) {
    parallel_for(n_sites, opts.threads, [&](std::size_t m) {
      row[m] =
          ham_network_cached(a, n, static_cast<int>(m), n_sites, factors, plain);
    });
    for (int k = 0; k < n_sites; ++k)
      for (int m = 0; m < n_sites; ++m)
        h_acc[k] += momentum_phase(k, m, n_sites) * row[m];
  }

  std::vector<Matrix> parity;
  if (model.perturbation) {
    const Matrix& op = model.perturbation->op;
    TransferPowers dressed =
        TransferPowers::build(transfer_matrix(a, a, &op), n_sites);
    parity.resize(n_sites);
    parallel_for(n_sites, opts.threads, [&](std::size_t m) {
      int ket_slot = (n_sites - static_cast<int>(m)) % n_sites;
      parity[m] = ring_network(a, n_sites, ket_slot, {}, &op, dressed);
    });
  }

  double strength = model.perturbation ? model.perturbation->strength : 0.0;
  std::vector<EffectivePair> pairs(n_sites);
  for (int k = 0; k < n_sites; ++k) {
    EffectivePair& pair = pairs[k];
    pair.k = k;
    pair.phys_dim = d;
    pair.bond_dim = D;
    Matrix n_eff = Matrix::Zero(dim, dim);
    for (int m = 0; m < n_sites; ++m)
      n_eff += momentum_phase(k, m, n_sites) * norm[m];
    Matrix h_eff = std::move(h_acc[k]);
    if (!parity.empty()) {
      Matrix p_eff = Matrix::Zero(dim, dim);
      for (int m = 0; m < n_sites; ++m)
        p_eff += momentum_phase(k, m, n_sites) * parity[m];
      pair.p_eff = hermitized(p_eff, nullptr, "P_eff");
      if (strength != 0.0) h_eff += strength * pair.p_eff;
    }
    pair.n_eff = hermitized(n_eff, &pair.n_asymmetry, "N_eff");
    pair.h_eff = hermitized(h_eff, &pair.h_asymmetry, "H_eff");
  }
  return pairs;
}

}  // namespace

DispersionResult dispersion(const ModelSpec& model, const SiteTensor& a,
                            int n_sites, DispersionOptions opts) {
  if (n_sites < 2) throw ValidationError("dispersion: need n_sites >= 2");
  const int d = a.phys_dim;
  const int D = a.bond_dim;
  if (model.phys_dim != d)
    throw ValidationError("dispersion: model and tensor physical dims differ");
  int null_dim = D * D * (d - 1) + 1;
  if (opts.branch_count > d * D * D - null_dim) {
    std::ostringstream msg;
    msg << "dispersion: branch count " << opts.branch_count
        << " exceeds the nonsingular dimension " << d * D * D - null_dim;
    throw ValidationError(msg.str());
  }

  SiteTensor backbone = normalized(a);
  const Matrix* parity_op =
      model.perturbation ? &model.perturbation->op : nullptr;
  double strength = model.perturbation ? model.perturbation->strength : 0.0;

  NetworkKey key;
  key.model_hash = model.hash();
  key.tensor_hash = backbone.content_hash();
  key.n_sites = n_sites;
  key.phys_dim = d;
  key.bond_dim = D;
  key.has_parity = parity_op != nullptr;

  DispersionResult result;
  result.model_name = model.name;
  result.model_params = model.params;
  result.n_sites = n_sites;
  result.phys_dim = d;
  result.bond_dim = D;
  result.eps = opts.eps;
  result.tensor_hash = key.tensor_hash;
  result.model_hash = key.model_hash;
  result.backbone_energy = rayleigh_energy(backbone, model, n_sites);

  result.backbone = backbone;

  auto t0 = std::chrono::steady_clock::now();
  std::vector<EffectivePair> pairs(n_sites);
  if (opts.streaming) {
    pairs = assemble_streaming(backbone, n_sites, model, key, opts);
    result.network_seconds = seconds_since(t0);
  } else {
    NetworkSet set;
    bool have_set = false;
    if (!opts.cache_path.empty()) {
      if (auto loaded = load_network_set(opts.cache_path, key)) {
        set = std::move(*loaded);
        have_set = true;
        result.used_cache = true;
      }
    }
    if (!have_set) {
      NetworkBuildOptions build_opts;
      build_opts.threads = opts.threads;
      build_opts.memory_budget_bytes = opts.memory_budget_bytes;
      set = build_network_set(backbone, n_sites, model.h01, parity_op, key,
                              build_opts);
      if (!opts.cache_path.empty()) save_network_set(opts.cache_path, set);
    }
    result.network_seconds = seconds_since(t0);
    parallel_for(n_sites, opts.threads, [&](std::size_t k) {
      pairs[k] = assemble_effective(set, static_cast<int>(k), strength);
    });
  }

  auto t1 = std::chrono::steady_clock::now();
  result.momenta.resize(n_sites);
  parallel_for(n_sites, opts.threads, [&](std::size_t k) {
    const EffectivePair& pair = pairs[k];
    MomentumBranches branches =
        solve_fixed_momentum(pair, opts.eps, opts.branch_count);
    if (pair.p_eff.size() > 0) {
      // Measured <P_y> per returned state; vectors are N_eff-normalized so
      // the quadratic form is already the physical expectation value.
      int count = static_cast<int>(branches.energies.size());
      branches.parity_values.resize(count);
      for (int i = 0; i < count; ++i)
        branches.parity_values[i] =
            (branches.vectors.col(i).adjoint() * pair.p_eff *
             branches.vectors.col(i))(0)
                .real();
    }
    result.momenta[k] = std::move(branches);
  });
  result.solve_seconds = seconds_since(t1);
  return result;
}

int relabel_momentum(int k_prime, int parity, int n_sites) {
  if (parity != 1 && parity != -1)
    throw ValidationError("relabel_momentum: parity must be +1 or -1");
  if (n_sites % 2 != 0)
    throw ValidationError("relabel_momentum: needs even n_sites");
  if (parity == 1) return ((k_prime % n_sites) + n_sites) % n_sites;
  return ((k_prime + n_sites / 2) % n_sites + n_sites) % n_sites;
}

DispersionResult heisenberg_split_dispersion(const SiteTensor& a_minus,
                                             const SiteTensor& a_plus,
                                             double lambda, int n_sites,
                                             DispersionOptions opts) {
  if (n_sites % 2 != 0)
    throw ValidationError("heisenberg_split_dispersion: needs even n_sites");
  if (lambda <= 0)
    throw ValidationError("heisenberg_split_dispersion: lambda must be > 0");

  ModelSpec minus = heisenberg_transformed(lambda, -1);
  ModelSpec plus = heisenberg_transformed(lambda, +1);

  DispersionOptions run_opts = opts;
  // Separate cache files per sector when caching is on.
  if (!opts.cache_path.empty()) run_opts.cache_path = opts.cache_path + ".minus";
  DispersionResult res_minus = dispersion(minus, a_minus, n_sites, run_opts);
  if (!opts.cache_path.empty()) run_opts.cache_path = opts.cache_path + ".plus";
  DispersionResult res_plus = dispersion(plus, a_plus, n_sites, run_opts);

  DispersionResult merged;
  merged.model_name = "heisenberg_split";
  merged.model_params["lambda"] = lambda;
  merged.n_sites = n_sites;
  merged.phys_dim = res_minus.phys_dim;
  merged.bond_dim = res_minus.bond_dim;
  merged.eps = opts.eps;
  merged.tensor_hash = res_minus.tensor_hash ^ res_plus.tensor_hash;
  merged.model_hash = minus.hash() ^ plus.hash();
  merged.backbone_energy = res_minus.backbone_energy;
  merged.backbone = res_minus.backbone;
  merged.backbone_plus = res_plus.backbone;
  merged.network_seconds = res_minus.network_seconds + res_plus.network_seconds;
  merged.solve_seconds = res_minus.solve_seconds + res_plus.solve_seconds;
  merged.used_cache = res_minus.used_cache && res_plus.used_cache;
  merged.momenta.resize(n_sites);

  struct Entry {
    double energy;
    Vector vec;
    double metric_norm;
    int parity;
    double parity_value;
    bool flagged;
    int k_original;
  };

  for (int k = 0; k < n_sites; ++k) merged.momenta[k].k = k;

  // A state is snapped to its measured parity: the relabeling rule and the
  // perturbation un-shift depend only on <P_y>, so a sharp state from the
  // "wrong" sector still lands at the right H_HB energy and momentum. The
  // flag records any deviation from the sector the run was meant to deliver.
  auto feed = [&](const DispersionResult& run, int run_sign) {
    int expected_parity = -run_sign;
    for (int kp = 0; kp < n_sites; ++kp) {
      const MomentumBranches& src = run.momenta[kp];
      for (std::size_t i = 0; i < src.energies.size(); ++i) {
        double measured = src.parity_values.empty()
                              ? static_cast<double>(expected_parity)
                              : src.parity_values[i];
        int snapped = measured >= 0 ? 1 : -1;
        bool flagged = std::abs(measured - expected_parity) > 0.01;
        int k_new = relabel_momentum(kp, snapped, n_sites);
        MomentumBranches& dst = merged.momenta[k_new];
        // H^{+-} = H' +- lambda P_y: subtract the exact shift of a
        // definite-parity state.
        dst.energies.push_back(src.energies[i] - run_sign * lambda * snapped);
        dst.metric_norms.push_back(src.metric_norms[i]);
        dst.parity.push_back(snapped);
        dst.parity_values.push_back(measured);
        dst.parity_flagged.push_back(flagged);
        dst.k_original.push_back(kp);
        if (dst.vectors.size() == 0)
          dst.vectors.resize(src.vectors.rows(), 0);
        dst.vectors.conservativeResize(Eigen::NoChange,
                                       dst.vectors.cols() + 1);
        dst.vectors.col(dst.vectors.cols() - 1) = src.vectors.col(i);
        dst.discarded = src.discarded;  // per-sector counts coincide
        dst.expected_null = src.expected_null;
      }
    }
  };
  feed(res_minus, -1);
  feed(res_plus, +1);

  // Sort each momentum's merged branches by energy, keeping tags aligned.
  for (int k = 0; k < n_sites; ++k) {
    MomentumBranches& mb = merged.momenta[k];
    std::vector<int> order(mb.energies.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::stable_sort(order.begin(), order.end(), [&](int l, int r) {
      return mb.energies[l] < mb.energies[r];
    });
    MomentumBranches sorted;
    sorted.k = mb.k;
    sorted.discarded = mb.discarded;
    sorted.expected_null = mb.expected_null;
    sorted.vectors.resize(mb.vectors.rows(), mb.vectors.cols());
    for (std::size_t i = 0; i < order.size(); ++i) {
      int src = order[i];
      sorted.energies.push_back(mb.energies[src]);
      sorted.metric_norms.push_back(mb.metric_norms[src]);
      sorted.parity.push_back(mb.parity[src]);
      sorted.parity_values.push_back(mb.parity_values[src]);
      sorted.parity_flagged.push_back(mb.parity_flagged[src]);
      sorted.k_original.push_back(mb.k_original[src]);
      sorted.vectors.col(static_cast<Eigen::Index>(i)) = mb.vectors.col(src);
    }
    merged.momenta[k] = std::move(sorted);
  }
  return merged;
}

}  // namespace ringmps
