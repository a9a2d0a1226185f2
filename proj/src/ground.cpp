#include "ringmps/ground.hpp"

#include <sstream>

#include "ringmps/networks.hpp"

namespace ringmps {

namespace {

// G[i](a,b) = sum_{r,c} X_i(r,c) * R[(c,b),(r,a)]: the derivative of
// Tr[(X_i (x) e_ab) R] with respect to the open bra indices.
SiteTensor slot_gradient(const std::vector<Matrix>& x, const Matrix& r,
                         int d, int D) {
  SiteTensor g(d, D);
  for (int i = 0; i < d; ++i)
    for (int a = 0; a < D; ++a)
      for (int b = 0; b < D; ++b) {
        Complex acc(0, 0);
        for (int row = 0; row < D; ++row)
          for (int col = 0; col < D; ++col)
            acc += x[i](row, col) * r(col * D + b, row * D + a);
        g.site[i](a, b) = acc;
      }
  return g;
}

std::vector<Matrix> op_transformed(const SiteTensor& a, const Matrix& op) {
  std::vector<Matrix> out(a.phys_dim, Matrix::Zero(a.bond_dim, a.bond_dim));
  for (int i = 0; i < a.phys_dim; ++i)
    for (int y = 0; y < a.phys_dim; ++y) out[i] += op(i, y) * a.site[y];
  return out;
}

struct EnergyParts {
  double energy = 0.0;
  Complex norm_trace;
  Matrix e_plain;
  std::vector<Matrix> e_pow;  // e_plain^t, t = 0..N
  Matrix e_bond;              // sum_r E_{P_r} E_{Q_r}
  std::vector<std::pair<Matrix, Matrix>> factors;
  Complex bond_trace;
  Matrix e_prod;              // perturbation transfer matrix (if any)
  std::vector<Matrix> e_prod_pow;
  Complex prod_trace;
};

EnergyParts evaluate_energy(const SiteTensor& a, const ModelSpec& model,
                            int n_sites) {
  if (n_sites < 2)
    throw ValidationError("rayleigh_energy: need n_sites >= 2");
  EnergyParts parts;
  parts.e_plain = transfer_matrix(a);
  const int dsq = a.bond_dim * a.bond_dim;
  parts.e_pow.resize(n_sites + 1);
  parts.e_pow[0] = Matrix::Identity(dsq, dsq);
  for (int t = 1; t <= n_sites; ++t)
    parts.e_pow[t] = parts.e_pow[t - 1] * parts.e_plain;
  parts.norm_trace = parts.e_pow[n_sites].trace();
  double norm = parts.norm_trace.real();
  if (std::abs(parts.norm_trace) < 1e-14)
    throw NumericalError("rayleigh_energy: state norm below 1e-14");

  parts.factors = two_site_factors(model.h01, a.phys_dim);
  parts.e_bond = Matrix::Zero(dsq, dsq);
  for (const auto& [p_op, q_op] : parts.factors)
    parts.e_bond +=
        transfer_matrix(a, a, &p_op) * transfer_matrix(a, a, &q_op);
  parts.bond_trace = (parts.e_bond * parts.e_pow[n_sites - 2]).trace();

  double energy = n_sites * parts.bond_trace.real() / norm;
  if (model.perturbation) {
    parts.e_prod = transfer_matrix(a, a, &model.perturbation->op);
    parts.e_prod_pow.resize(n_sites + 1);
    parts.e_prod_pow[0] = Matrix::Identity(dsq, dsq);
    for (int t = 1; t <= n_sites; ++t)
      parts.e_prod_pow[t] = parts.e_prod_pow[t - 1] * parts.e_prod;
    parts.prod_trace = parts.e_prod_pow[n_sites].trace();
    energy += model.perturbation->strength * parts.prod_trace.real() / norm;
  }
  parts.energy = energy;
  return parts;
}

}  // namespace

double rayleigh_energy(const SiteTensor& a, const ModelSpec& model,
                       int n_sites) {
  return evaluate_energy(a, model, n_sites).energy;
}

std::pair<double, SiteTensor> rayleigh_energy_gradient(const SiteTensor& a,
                                                       const ModelSpec& model,
                                                       int n_sites) {
  const int d = a.phys_dim;
  const int D = a.bond_dim;
  EnergyParts parts = evaluate_energy(a, model, n_sites);
  double norm = parts.norm_trace.real();

  // d norm / d conj(A): N identical slots around the ring.
  SiteTensor g_norm = slot_gradient(a.site, parts.e_pow[n_sites - 1], d, D);
  for (auto& m : g_norm.site) m *= static_cast<double>(n_sites);

  // d <h01 contribution> / d conj(A): the two operator slots plus the N-2
  // plain slots, each trace rotated so the open site leads.
  SiteTensor g_bond(d, D);
  for (const auto& [p_op, q_op] : parts.factors) {
    Matrix e_p = transfer_matrix(a, a, &p_op);
    Matrix e_q = transfer_matrix(a, a, &q_op);
    SiteTensor g1 = slot_gradient(op_transformed(a, p_op),
                                  e_q * parts.e_pow[n_sites - 2], d, D);
    SiteTensor g2 = slot_gradient(op_transformed(a, q_op),
                                  parts.e_pow[n_sites - 2] * e_p, d, D);
    for (int i = 0; i < d; ++i) g_bond.site[i] += g1.site[i] + g2.site[i];
  }
  for (int t = 0; t <= n_sites - 3; ++t) {
    SiteTensor gt = slot_gradient(
        a.site, parts.e_pow[n_sites - 3 - t] * parts.e_bond * parts.e_pow[t],
        d, D);
    for (int i = 0; i < d; ++i) g_bond.site[i] += gt.site[i];
  }

  SiteTensor grad(d, D);
  double bond = parts.bond_trace.real();
  for (int i = 0; i < d; ++i)
    grad.site[i] = n_sites * (g_bond.site[i] * norm - bond * g_norm.site[i]) /
                   (norm * norm);

  if (model.perturbation) {
    SiteTensor g_prod =
        slot_gradient(op_transformed(a, model.perturbation->op),
                      parts.e_prod_pow[n_sites - 1], d, D);
    for (auto& m : g_prod.site) m *= static_cast<double>(n_sites);
    double prod = parts.prod_trace.real();
    double strength = model.perturbation->strength;
    for (int i = 0; i < d; ++i)
      grad.site[i] += strength *
                      (g_prod.site[i] * norm - prod * g_norm.site[i]) /
                      (norm * norm);
  }
  return {parts.energy, grad};
}

namespace {

double grad_norm2(const SiteTensor& g) {
  double acc = 0.0;
  for (const auto& m : g.site) acc += m.squaredNorm();
  return std::sqrt(acc);
}

Complex grad_dot(const SiteTensor& x, const SiteTensor& y) {
  Complex acc(0, 0);
  for (std::size_t i = 0; i < x.site.size(); ++i)
    acc += (x.site[i].conjugate().cwiseProduct(y.site[i])).sum();
  return acc;
}

SiteTensor project_real_symmetric(const SiteTensor& g) {
  SiteTensor out = g;
  for (auto& m : out.site) {
    Eigen::MatrixXd real = m.real();
    m = (0.5 * (real + real.transpose())).cast<Complex>();
  }
  return out;
}

GroundResult run_single_descent(const ModelSpec& model, int bond_dim,
                                int n_sites, const GroundOptions& opts,
                                std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  SiteTensor a =
      SiteTensor::random_gaussian(model.phys_dim, bond_dim, rng);
  if (opts.real_symmetric) a = project_real_symmetric(a);
  a = normalized(a);

  auto evaluate = [&](const SiteTensor& t) {
    auto [e, g] = rayleigh_energy_gradient(t, model, n_sites);
    if (opts.real_symmetric) g = project_real_symmetric(g);
    return std::pair<double, SiteTensor>(e, std::move(g));
  };

  auto [energy, grad] = evaluate(a);
  double gnorm = grad_norm2(grad);
  double step = 1e-2 / std::max(gnorm, 1e-12);
  SiteTensor prev_a = a, prev_grad = grad;
  int iter = 0;
  bool converged = gnorm <= opts.grad_tol;

  for (; iter < opts.max_iters && !converged; ++iter) {
    // Armijo backtracking from the Barzilai-Borwein estimate.
    double trial_step = step;
    double armijo = 1e-4;
    bool accepted = false;
    SiteTensor next_a;
    double next_energy = 0.0;
    for (int half = 0; half < 40; ++half) {
      next_a = a;
      for (int i = 0; i < model.phys_dim; ++i)
        next_a.site[i] -= trial_step * grad.site[i];
      try {
        next_a = normalized(next_a);
        next_energy = rayleigh_energy(next_a, model, n_sites);
      } catch (const NumericalError&) {
        trial_step *= 0.5;
        continue;
      }
      if (next_energy <= energy - armijo * trial_step * gnorm * gnorm) {
        accepted = true;
        break;
      }
      trial_step *= 0.5;
    }
    if (!accepted) break;  // line search stalled at numerical precision

    prev_a = a;
    prev_grad = grad;
    a = next_a;
    auto [e2, g2] = evaluate(a);
    energy = e2;
    grad = g2;
    gnorm = grad_norm2(grad);
    if (gnorm <= opts.grad_tol) {
      converged = true;
      break;
    }
    // BB step from the last displacement / gradient change.
    SiteTensor ds(model.phys_dim, bond_dim), dg(model.phys_dim, bond_dim);
    for (int i = 0; i < model.phys_dim; ++i) {
      ds.site[i] = a.site[i] - prev_a.site[i];
      dg.site[i] = grad.site[i] - prev_grad.site[i];
    }
    double sg = grad_dot(ds, dg).real();
    double ss = grad_dot(ds, ds).real();
    step = (sg > 1e-300) ? ss / sg : trial_step * 2.0;
    step = std::clamp(step, 1e-12, 1e3);
  }

  GroundResult result;
  result.a = std::move(a);
  result.energy = energy;
  result.grad_norm = gnorm;
  result.iterations = iter;
  result.converged = converged;
  return result;
}

}  // namespace

GroundResult optimize_ground_tensor(const ModelSpec& model, int bond_dim,
                                    int n_sites, const GroundOptions& opts) {
  if (bond_dim < 1)
    throw ValidationError("optimize_ground_tensor: bond_dim must be >= 1");
  int restarts = std::max(1, opts.restarts);
  std::vector<GroundResult> results(restarts);
  parallel_for(restarts, opts.threads, [&](std::size_t r) {
    results[r] = run_single_descent(model, bond_dim, n_sites, opts,
                                    opts.seed * 0x9e3779b97f4a7c15ull + r);
  });
  int best = 0;
  for (int r = 1; r < restarts; ++r)
    if (results[r].energy < results[best].energy) best = r;
  return results[best];
}

}  // namespace ringmps
