#include "ringmps/exact.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <sstream>

#include "ringmps/linalg.hpp"

namespace ringmps {

Matrix dense_hamiltonian(const ModelSpec& model, int n_sites) {
  const int d = model.phys_dim;
  const std::size_t dim = dense_dimension(d, n_sites);
  Matrix h = Matrix::Zero(dim, dim);
  // Column-by-column application of each bond term.
  for (int bond = 0; bond < n_sites; ++bond) {
    int s1 = bond;
    int s2 = (bond + 1) % n_sites;
    std::size_t stride1 = 1, stride2 = 1;
    for (int s = s1 + 1; s < n_sites; ++s) stride1 *= d;
    for (int s = s2 + 1; s < n_sites; ++s) stride2 *= d;
    for (std::size_t c = 0; c < dim; ++c) {
      int i1 = static_cast<int>((c / stride1) % d);
      int i2 = static_cast<int>((c / stride2) % d);
      std::size_t base = c - static_cast<std::size_t>(i1) * stride1 -
                         static_cast<std::size_t>(i2) * stride2;
      int col = i1 * d + i2;
      for (int j1 = 0; j1 < d; ++j1)
        for (int j2 = 0; j2 < d; ++j2) {
          Complex w = model.h01(j1 * d + j2, col);
          if (w != Complex(0, 0))
            h(base + static_cast<std::size_t>(j1) * stride1 +
                  static_cast<std::size_t>(j2) * stride2,
              c) += w;
        }
    }
  }
  if (model.perturbation) {
    const Matrix& o = model.perturbation->op;
    for (std::size_t c = 0; c < dim; ++c) {
      Vector e = Vector::Zero(dim);
      e(c) = 1.0;
      h.col(c) += model.perturbation->strength *
                  apply_product_operator(e, o, d, n_sites);
    }
  }
  return h;
}

std::pair<int, double> momentum_of_state(const Vector& v, int d,
                                         int n_sites) {
  Vector tv = apply_translation(v, d, n_sites, 1);
  Complex tau = v.dot(tv);  // Eigen's dot conjugates the left argument
  double k_float = -std::arg(tau) * n_sites / (2.0 * kPi);
  int k = static_cast<int>(std::llround(k_float));
  k = ((k % n_sites) + n_sites) % n_sites;
  double residual = std::abs(tau - momentum_phase(k, 1, n_sites));
  return {k, residual};
}

std::pair<int, double> parity_of_state(const Vector& v, const Matrix& o,
                                       int d, int n_sites) {
  Vector pv = apply_product_operator(v, o, d, n_sites);
  Complex val = v.dot(pv);
  int p = val.real() >= 0 ? 1 : -1;
  double residual = std::abs(val - Complex(p, 0));
  return {p, residual};
}

namespace {

// Degenerate clusters by gap chaining: consecutive eigenvalues closer than
// tol belong to one cluster.
std::vector<std::pair<int, int>> cluster_ranges(const RealVector& values,
                                                double tol) {
  std::vector<std::pair<int, int>> out;
  int begin = 0;
  for (int i = 1; i <= values.size(); ++i) {
    if (i == values.size() || values(i) - values(i - 1) > tol) {
      out.emplace_back(begin, i);
      begin = i;
    }
  }
  return out;
}

}  // namespace

ExactSpectrum ed_spectrum(const ModelSpec& model, int n_sites,
                          const EdOptions& opts) {
  const int d = model.phys_dim;
  const std::size_t dim = dense_dimension(d, n_sites);
  Matrix h = dense_hamiltonian(model, n_sites);

  RealVector energies;
  Matrix vectors;
  // Every model in this project is real in the computational basis; use the
  // real solver when possible, it is several times faster at dim 4096.
  double imag_norm = h.imag().cwiseAbs().maxCoeff();
  if (imag_norm < 1e-14 * std::max(1.0, max_abs(h))) {
    Eigen::SelfAdjointEigenSolver<RealMatrix> solver(h.real());
    if (solver.info() != Eigen::Success)
      throw NumericalError("ed_spectrum: real eigensolver failed");
    energies = solver.eigenvalues();
    vectors = solver.eigenvectors().cast<Complex>();
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
    if (solver.info() != Eigen::Success)
      throw NumericalError("ed_spectrum: eigensolver failed");
    energies = solver.eigenvalues();
    vectors = solver.eigenvectors();
  }

  auto perm = translation_permutation(d, n_sites);
  auto apply_t = [&](const Matrix& block) {
    Matrix out(block.rows(), block.cols());
    for (Eigen::Index c = 0; c < block.cols(); ++c)
      for (std::size_t r = 0; r < perm.size(); ++r)
        out(static_cast<Eigen::Index>(perm[r]), c) = block(r, c);
    return out;
  };

  ExactSpectrum spec;
  spec.model_name = model.name;
  spec.params = model.params;
  spec.n_sites = n_sites;
  spec.levels.resize(dim);
  const bool parity_wanted = opts.label_parity && model.parity_label_op.has_value();

  for (auto [lo, hi] : cluster_ranges(energies, opts.group_tol)) {
    int g = hi - lo;
    Matrix block = vectors.middleCols(lo, g);
    // Rotate the degenerate block into the translation eigenbasis. Schur
    // keeps the basis unitary even when momenta repeat inside the block.
    Matrix t_block = block.adjoint() * apply_t(block);
    Matrix rotated;
    Vector taus(g);
    if (g == 1) {
      rotated = block;
      taus(0) = t_block(0, 0);
    } else {
      Eigen::ComplexSchur<Matrix> schur(t_block, true);
      if (schur.info() != Eigen::Success)
        throw NumericalError("ed_spectrum: Schur of translation block failed");
      rotated = block * schur.matrixU();
      taus = schur.matrixT().diagonal();
    }
    std::vector<int> ks(g);
    std::vector<double> kres(g);
    for (int c = 0; c < g; ++c) {
      double k_float = -std::arg(taus(c)) * n_sites / (2.0 * kPi);
      int k = static_cast<int>(std::llround(k_float));
      ks[c] = ((k % n_sites) + n_sites) % n_sites;
      kres[c] = std::abs(taus(c) - momentum_phase(ks[c], 1, n_sites));
    }

    std::vector<int> ps(g, 0);
    std::vector<double> pres(g, 0.0);
    if (parity_wanted) {
      const Matrix& o = *model.parity_label_op;
      // Parity commutes with T, so rotate only within equal-momentum
      // subblocks to keep the momenta sharp.
      std::vector<int> order(g);
      for (int c = 0; c < g; ++c) order[c] = c;
      for (int k_val = 0; k_val < n_sites; ++k_val) {
        std::vector<int> cols;
        for (int c = 0; c < g; ++c)
          if (ks[c] == k_val) cols.push_back(c);
        if (cols.empty()) continue;
        Matrix sub(dim, cols.size());
        for (std::size_t j = 0; j < cols.size(); ++j)
          sub.col(j) = rotated.col(cols[j]);
        Matrix psub(dim, cols.size());
        for (std::size_t j = 0; j < cols.size(); ++j)
          psub.col(j) = apply_product_operator(sub.col(j), o, d, n_sites);
        Matrix p_block = sub.adjoint() * psub;
        Eigen::SelfAdjointEigenSolver<Matrix> psolver(
            0.5 * (p_block + p_block.adjoint()));
        Matrix sub_rot = sub * psolver.eigenvectors();
        for (std::size_t j = 0; j < cols.size(); ++j) {
          rotated.col(cols[j]) = sub_rot.col(j);
          double val = psolver.eigenvalues()(static_cast<Eigen::Index>(j));
          ps[cols[j]] = val >= 0 ? 1 : -1;
          pres[cols[j]] = std::abs(val - ps[cols[j]]);
        }
      }
    }

    for (int c = 0; c < g; ++c) {
      LabeledLevel& level = spec.levels[lo + c];
      level.energy = energies(lo + c);
      level.momentum = ks[c];
      level.momentum_residual = kres[c];
      level.parity = ps[c];
      level.parity_residual = pres[c];
      level.degeneracy = g;
    }
    vectors.middleCols(lo, g) = rotated;
  }

  if (opts.want_vectors) {
    spec.has_vectors = true;
    spec.vectors = std::move(vectors);
  }
  return spec;
}

ExactSpectrum ising_exact_spectrum(double g, int n_sites,
                                   const SpectrumWindow& window) {
  if (n_sites % 2 != 0 || n_sites < 2)
    throw ValidationError(
        "ising_exact_spectrum: mode bookkeeping needs even n_sites");
  if (n_sites > 16)
    throw ValidationError("ising_exact_spectrum: n_sites too large to "
                          "enumerate 2^N levels");

  auto mode_energy = [&](double theta) {
    return 2.0 * std::sqrt(std::max(0.0, 1.0 + g * g - 2.0 * g * std::cos(theta)));
  };

  std::vector<LabeledLevel> levels;
  levels.reserve(std::size_t(1) << n_sites);

  // Even (antiperiodic) sector: momenta 2 pi (q + 1/2) / N, even occupation.
  {
    std::vector<double> eps(n_sites);
    double vacuum = 0.0;
    for (int q = 0; q < n_sites; ++q) {
      eps[q] = mode_energy(2.0 * kPi * (q + 0.5) / n_sites);
      vacuum -= 0.5 * eps[q];
    }
    for (std::size_t occ = 0; occ < (std::size_t(1) << n_sites); ++occ) {
      if (__builtin_popcountll(occ) % 2 != 0) continue;
      double energy = vacuum;
      long twice_momentum = 0;
      std::vector<double> modes;
      for (int q = 0; q < n_sites; ++q)
        if (occ >> q & 1) {
          energy += eps[q];
          twice_momentum += 2 * q + 1;
          modes.push_back(q + 0.5);
        }
      LabeledLevel level;
      level.energy = energy;
      level.momentum = static_cast<int>((twice_momentum / 2) % n_sites);
      level.sector = +1;
      level.modes = std::move(modes);
      levels.push_back(std::move(level));
    }
  }

  // Odd (periodic) sector: momenta 2 pi q / N, odd occupation. The unpaired
  // q = 0 and q = N/2 modes carry signed energies 2(g-1) and 2(g+1).
  {
    std::vector<double> eps(n_sites);
    double vacuum = 0.0;
    for (int q = 0; q < n_sites; ++q) {
      if (q == 0)
        eps[q] = 2.0 * (g - 1.0);
      else if (q == n_sites / 2)
        eps[q] = 2.0 * (g + 1.0);
      else
        eps[q] = mode_energy(2.0 * kPi * q / n_sites);
      vacuum -= 0.5 * eps[q];
    }
    for (std::size_t occ = 0; occ < (std::size_t(1) << n_sites); ++occ) {
      if (__builtin_popcountll(occ) % 2 != 1) continue;
      double energy = vacuum;
      long momentum = 0;
      std::vector<double> modes;
      for (int q = 0; q < n_sites; ++q)
        if (occ >> q & 1) {
          energy += eps[q];
          momentum += q;
          modes.push_back(q);
        }
      LabeledLevel level;
      level.energy = energy;
      level.momentum = static_cast<int>(momentum % n_sites);
      level.sector = -1;
      level.modes = std::move(modes);
      levels.push_back(std::move(level));
    }
  }

  std::stable_sort(levels.begin(), levels.end(),
                   [](const LabeledLevel& a, const LabeledLevel& b) {
                     return a.energy < b.energy;
                   });

  if (window.max_energy)
    while (!levels.empty() && levels.back().energy > *window.max_energy)
      levels.pop_back();
  if (window.max_levels &&
      levels.size() > static_cast<std::size_t>(*window.max_levels))
    levels.resize(*window.max_levels);

  // Degeneracy counts with the same grouping rule as ed_spectrum.
  for (std::size_t lo = 0; lo < levels.size();) {
    std::size_t hi = lo + 1;
    while (hi < levels.size() &&
           levels[hi].energy - levels[hi - 1].energy <= 1e-8)
      ++hi;
    for (std::size_t i = lo; i < hi; ++i)
      levels[i].degeneracy = static_cast<int>(hi - lo);
    lo = hi;
  }

  ExactSpectrum spec;
  spec.model_name = "ising_exact";
  spec.params["g"] = g;
  spec.n_sites = n_sites;
  spec.levels = std::move(levels);
  return spec;
}

std::vector<MultipletGroup> multiplet_grouping(
    const std::vector<std::pair<int, double>>& momentum_energy, double tol) {
  std::vector<std::pair<int, double>> sorted = momentum_energy;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto& a, const auto& b) {
                     return a.first != b.first ? a.first < b.first
                                               : a.second < b.second;
                   });
  std::vector<MultipletGroup> groups;
  for (std::size_t lo = 0; lo < sorted.size();) {
    std::size_t hi = lo + 1;
    while (hi < sorted.size() && sorted[hi].first == sorted[lo].first &&
           sorted[hi].second - sorted[hi - 1].second <= tol)
      ++hi;
    MultipletGroup group;
    group.momentum = sorted[lo].first;
    group.energy = sorted[lo].second;
    group.size = static_cast<int>(hi - lo);
    switch (group.size) {
      case 1: group.name = "singlet"; break;
      case 3: group.name = "triplet"; break;
      case 5: group.name = "quintuplet"; break;
      case 7: group.name = "septuplet"; break;
      default: group.name = "m" + std::to_string(group.size); break;
    }
    groups.push_back(group);
    lo = hi;
  }
  return groups;
}

double canonical_angle_distance(const Matrix& u, const Matrix& v) {
  if (u.rows() != v.rows())
    throw ValidationError(
        "canonical_angle_distance: ambient dimensions differ");
  auto check_orthonormal = [](const Matrix& b, const char* who) {
    Matrix gram = b.adjoint() * b;
    double err =
        (gram - Matrix::Identity(b.cols(), b.cols())).cwiseAbs().maxCoeff();
    if (err > 1e-8) {
      std::ostringstream msg;
      msg << "canonical_angle_distance: " << who
          << " basis not orthonormal (error " << err << ")";
      throw ValidationError(msg.str());
    }
  };
  check_orthonormal(u, "first");
  check_orthonormal(v, "second");
  if (u.cols() != v.cols()) return 1.0;
  SvdResult overlap = svd(u.adjoint() * v);
  double smallest = overlap.singular_values(overlap.singular_values.size() - 1);
  smallest = std::clamp(smallest, 0.0, 1.0);
  return std::sqrt(1.0 - smallest * smallest);
}

RelPrecision relative_precision(double e_mps, double e_exact) {
  if (e_exact == 0.0) return {std::abs(e_mps - e_exact), true};
  return {std::abs(e_mps - e_exact) / std::abs(e_exact), false};
}

}  // namespace ringmps
