// Command-line driver: ground | dispersion | exact | compare | bench.
// Configuration comes from a JSON document (--config); explicit flags
// override file values. Exit codes: 0 success, 2 validation, 3 numerical
// failure, 4 resource refusal.

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <iostream>

#include <nlohmann/json.hpp>

#include "ringmps/io.hpp"

namespace fs = std::filesystem;
using namespace ringmps;
using ordered_json = nlohmann::ordered_json;

namespace {

struct CliFlags {
  std::string config_path;
  // Mirrors of RunConfig fields; only applied when the user passed them.
  std::string model, method, tensor_in, tensor_in_plus, tensor_out, cache_path,
      results_dir, mps_file, exact_file, tag;
  double g = 0, lambda = 0, eps = 0, grad_tol = 0, memory_budget_mb = 0,
         window_energy = 0;
  int sign = 0, n_sites = 0, bond_dim = 0, branches = 0, max_iters = 0,
      restarts = 0, threads = 0, window_levels = 0;
  std::uint64_t seed = 0;
  bool split = false, streaming = false, keep_vectors = false,
       real_symmetric = false, symmetric_field = false, with_states = false;
  std::vector<int> bench_bond_dims = {4, 8};
};

RunConfig merge_config(const CLI::App& app, const CliFlags& flags) {
  RunConfig config;
  if (!flags.config_path.empty())
    config = RunConfig::from_json(read_text_file(flags.config_path));
  auto passed = [&](const std::string& name) {
    return app.count(name) > 0;
  };
  if (passed("--model")) config.model_name = flags.model;
  if (passed("--g")) config.g = flags.g;
  if (passed("--lambda")) config.lambda = flags.lambda;
  if (passed("--sign")) config.sign = flags.sign;
  if (passed("--symmetric-field")) config.symmetric_field = flags.symmetric_field;
  if (passed("--n")) config.n_sites = flags.n_sites;
  if (passed("--bond-dim")) config.bond_dim = flags.bond_dim;
  if (passed("--branches")) config.branches = flags.branches;
  if (passed("--eps")) config.eps = flags.eps;
  if (passed("--seed")) config.seed = flags.seed;
  if (passed("--max-iters")) config.max_iters = flags.max_iters;
  if (passed("--grad-tol")) config.grad_tol = flags.grad_tol;
  if (passed("--restarts")) config.restarts = flags.restarts;
  if (passed("--real-symmetric")) config.real_symmetric = flags.real_symmetric;
  if (passed("--tensor-in")) config.tensor_in = flags.tensor_in;
  if (passed("--tensor-in-plus")) config.tensor_in_plus = flags.tensor_in_plus;
  if (passed("--tensor-out")) config.tensor_out = flags.tensor_out;
  if (passed("--cache")) config.cache_path = flags.cache_path;
  if (passed("--results-dir")) config.results_dir = flags.results_dir;
  if (passed("--memory-budget-mb"))
    config.memory_budget_mb = flags.memory_budget_mb;
  if (passed("--threads")) config.threads = flags.threads;
  if (passed("--split")) config.split = flags.split;
  if (passed("--streaming")) config.streaming = flags.streaming;
  if (passed("--method")) config.method = flags.method;
  if (passed("--window-levels")) config.window_levels = flags.window_levels;
  if (passed("--window-energy")) {
    config.window_energy = flags.window_energy;
    config.has_window_energy = true;
  }
  if (passed("--keep-vectors")) config.keep_vectors = flags.keep_vectors;
  return config;
}

std::string out_path(const RunConfig& config, const std::string& stem,
                     const std::string& ext) {
  return (fs::path(config.results_dir) / (stem + ext)).string();
}

GroundOptions ground_options(const RunConfig& config) {
  GroundOptions opts;
  opts.max_iters = config.max_iters;
  opts.grad_tol = config.grad_tol;
  opts.restarts = config.restarts;
  opts.seed = config.seed;
  opts.threads = config.threads;
  opts.real_symmetric = config.real_symmetric;
  return opts;
}

DispersionOptions dispersion_options(const RunConfig& config) {
  DispersionOptions opts;
  opts.eps = config.eps;
  opts.branch_count = config.branches;
  opts.threads = config.threads;
  opts.memory_budget_bytes =
      static_cast<std::size_t>(config.memory_budget_mb * 1024.0 * 1024.0);
  opts.cache_path = config.cache_path;
  opts.streaming = config.streaming;
  return opts;
}

SiteTensor backbone_for(const RunConfig& config, const ModelSpec& model,
                        const std::string& tensor_path) {
  if (!tensor_path.empty()) {
    std::cout << "loading backbone tensor from " << tensor_path << "\n";
    return load_tensor(tensor_path).a;
  }
  std::cout << "optimizing backbone tensor (D=" << config.bond_dim
            << ", N=" << config.n_sites << ")\n";
  GroundResult ground = optimize_ground_tensor(model, config.bond_dim,
                                               config.n_sites,
                                               ground_options(config));
  std::cout << "  energy " << format_g17(ground.energy) << ", |grad| "
            << ground.grad_norm << ", iterations " << ground.iterations
            << (ground.converged ? "" : " (not converged)") << "\n";
  return ground.a;
}

int cmd_ground(const RunConfig& config) {
  validate_config(config, "ground");
  if (config.tensor_out.empty())
    throw ValidationError("config field 'paths.tensor_out': required for ground");
  ModelSpec model = model_from_config(config);
  auto t0 = std::chrono::steady_clock::now();
  GroundResult result = optimize_ground_tensor(model, config.bond_dim,
                                               config.n_sites,
                                               ground_options(config));
  double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  std::map<std::string, std::string> metadata;
  metadata["model"] = config.model_name;
  char hashbuf[20];
  std::snprintf(hashbuf, sizeof(hashbuf), "%016llx",
                static_cast<unsigned long long>(config.hash()));
  metadata["config_hash"] = hashbuf;
  metadata["energy"] = format_g17(result.energy);
  metadata["n_sites"] = std::to_string(config.n_sites);
  metadata["seed"] = std::to_string(config.seed);
  save_tensor(config.tensor_out, result.a, metadata);

  ordered_json summary;
  summary["format"] = "ringmps-ground-summary";
  summary["version"] = kArtifactVersion;
  summary["config_hash"] = hashbuf;
  summary["model"] = config.model_name;
  summary["n_sites"] = config.n_sites;
  summary["bond_dim"] = config.bond_dim;
  summary["energy"] = result.energy;
  summary["grad_norm"] = result.grad_norm;
  summary["iterations"] = result.iterations;
  summary["converged"] = result.converged;
  summary["seconds"] = elapsed;
  summary["tensor_file"] = config.tensor_out;
  write_text_file(out_path(config, "ground_summary", ".json"),
                  summary.dump(1));
  std::cout << "ground energy " << format_g17(result.energy) << " ("
            << result.iterations << " iterations, " << elapsed << " s)\n"
            << "tensor written to " << config.tensor_out << "\n";
  return 0;
}

int cmd_dispersion(const RunConfig& config, bool with_states) {
  validate_config(config, "dispersion");
  ModelSpec model = model_from_config(config);
  DispersionOptions opts = dispersion_options(config);
  DispersionResult result;
  if (config.split) {
    double lambda =
        config.lambda != 0.0 ? config.lambda : 0.1 * config.n_sites;
    ModelSpec minus = heisenberg_transformed(lambda, -1);
    ModelSpec plus = heisenberg_transformed(lambda, +1);
    SiteTensor a_minus = backbone_for(config, minus, config.tensor_in);
    SiteTensor a_plus = backbone_for(config, plus, config.tensor_in_plus);
    result = heisenberg_split_dispersion(a_minus, a_plus, lambda,
                                         config.n_sites, opts);
  } else {
    SiteTensor a = backbone_for(config, model, config.tensor_in);
    result = dispersion(model, a, config.n_sites, opts);
  }
  std::cout << "network stage " << result.network_seconds << " s"
            << (result.used_cache ? " (warm cache, build skipped)" : "")
            << ", solve stage " << result.solve_seconds << " s\n";
  for (const auto& mb : result.momenta)
    if (mb.null_count_mismatch)
      std::cout << "warning: k=" << mb.k << " discarded " << mb.discarded
                << " directions, null-space law predicts " << mb.expected_null
                << "\n";
  std::uint64_t config_hash = config.hash();
  write_text_file(out_path(config, "dispersion", ".json"),
                  dispersion_to_json(result, config_hash, with_states));
  write_text_file(out_path(config, "dispersion", ".csv"),
                  dispersion_to_csv(result, config_hash));
  std::cout << "results written to "
            << out_path(config, "dispersion", ".json") << " and .csv\n";
  return 0;
}

int cmd_exact(const RunConfig& config) {
  validate_config(config, "exact");
  SpectrumWindow window;
  if (config.window_levels > 0) window.max_levels = config.window_levels;
  if (config.has_window_energy) window.max_energy = config.window_energy;
  ExactSpectrum spec;
  if (config.method == "ising-analytic") {
    double g = config.g;
    spec = ising_exact_spectrum(g, config.n_sites, window);
  } else {
    ModelSpec model = model_from_config(config);
    EdOptions opts;
    opts.want_vectors = config.keep_vectors;
    spec = ed_spectrum(model, config.n_sites, opts);
    if (window.max_energy)
      while (!spec.levels.empty() &&
             spec.levels.back().energy > *window.max_energy)
        spec.levels.pop_back();
    if (window.max_levels &&
        spec.levels.size() > static_cast<std::size_t>(*window.max_levels))
      spec.levels.resize(*window.max_levels);
    if (spec.has_vectors)
      spec.vectors.conservativeResize(
          Eigen::NoChange, static_cast<Eigen::Index>(spec.levels.size()));
  }
  std::uint64_t config_hash = config.hash();
  std::string stem = config.method == "ising-analytic" ? "exact_analytic"
                                                       : "exact_ed";
  write_text_file(out_path(config, stem, ".json"),
                  exact_to_json(spec, config_hash, config.keep_vectors));
  write_text_file(out_path(config, stem, ".csv"),
                  exact_to_csv(spec, config_hash));
  std::cout << spec.levels.size() << " levels written to "
            << out_path(config, stem, ".json") << " and .csv\n";
  return 0;
}

int cmd_compare(const RunConfig& config, const std::string& mps_file,
                const std::string& exact_file) {
  DispersionResult mps = dispersion_from_json(read_text_file(mps_file));
  ExactSpectrum exact = exact_from_json(read_text_file(exact_file));
  if (mps.n_sites != exact.n_sites)
    throw ValidationError("compare: n_sites mismatch between inputs");

  // Exact levels per momentum, ascending.
  std::vector<std::vector<double>> exact_by_k(mps.n_sites);
  for (const auto& level : exact.levels)
    exact_by_k[level.momentum].push_back(level.energy);
  for (auto& list : exact_by_k) std::sort(list.begin(), list.end());

  ordered_json report;
  report["format"] = "ringmps-compare";
  report["version"] = kArtifactVersion;
  report["config_hash"] = [&] {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(config.hash()));
    return std::string(buf);
  }();
  report["mps_file"] = mps_file;
  report["exact_file"] = exact_file;
  int bound_violations = 0;
  ordered_json table = ordered_json::array();
  std::cout << "k  branch  E_mps                E_exact              rel_precision\n";
  for (const auto& mb : mps.momenta) {
    const auto& exact_levels = exact_by_k[mb.k];
    for (std::size_t i = 0; i < mb.energies.size(); ++i) {
      if (i >= exact_levels.size()) break;
      RelPrecision rel = relative_precision(mb.energies[i], exact_levels[i]);
      ordered_json row;
      row["k"] = mb.k;
      row["branch"] = i;
      row["energy_mps"] = mb.energies[i];
      row["energy_exact"] = exact_levels[i];
      row["rel_precision"] = rel.value;
      row["zero_denominator"] = rel.zero_denominator;
      if (i == 0 && mb.energies[0] < exact_levels[0] - 1e-10) {
        row["bound_violation"] = true;
        ++bound_violations;
      }
      table.push_back(row);
      std::printf("%-2d %-7zu %-20.13g %-20.13g %.3e\n", mb.k, i,
                  mb.energies[i], exact_levels[i], rel.value);
    }
  }
  report["levels"] = table;
  report["lowest_branch_bound_violations"] = bound_violations;

  // Canonical-angle table when both sides carry state information.
  if (exact.has_vectors && mps.backbone.phys_dim > 0 &&
      mps.n_sites <= 12) {
    ordered_json angles = ordered_json::array();
    for (const auto& mb : mps.momenta) {
      if (mb.vectors.size() == 0 || mb.energies.empty()) continue;
      // Degenerate exact groups at this momentum.
      std::vector<std::pair<double, int>> group;  // energy, column
      for (std::size_t idx = 0; idx < exact.levels.size(); ++idx)
        if (exact.levels[idx].momentum == mb.k)
          group.emplace_back(exact.levels[idx].energy, static_cast<int>(idx));
      if (group.empty()) continue;
      // Compare the lowest exact degenerate group against the same number of
      // MPS states.
      double e0 = group[0].first;
      std::vector<int> cols;
      for (const auto& [energy, col] : group)
        if (energy - e0 <= 1e-8) cols.push_back(col);
      std::size_t dim_needed = cols.size();
      if (dim_needed > mb.energies.size()) continue;
      Matrix exact_basis(exact.vectors.rows(),
                         static_cast<Eigen::Index>(dim_needed));
      for (std::size_t c = 0; c < dim_needed; ++c)
        exact_basis.col(static_cast<Eigen::Index>(c)) =
            exact.vectors.col(cols[c]);
      Matrix mps_basis(exact.vectors.rows(),
                       static_cast<Eigen::Index>(dim_needed));
      for (std::size_t c = 0; c < dim_needed; ++c) {
        const SiteTensor& bb = (!mb.parity.empty() && mb.parity[c] < 0 &&
                                mps.backbone_plus.phys_dim > 0)
                                   ? mps.backbone_plus
                                   : mps.backbone;
        int k_solver = mb.k_original.empty() ? mb.k : mb.k_original[c];
        SiteTensor b = SiteTensor::from_vector(
            bb.phys_dim, bb.bond_dim,
            mb.vectors.col(static_cast<Eigen::Index>(c)));
        mps_basis.col(static_cast<Eigen::Index>(c)) = bloch_state_vector(
            bb, b, k_solver, mps.n_sites);
      }
      double distance = canonical_angle_distance(exact_basis, mps_basis);
      ordered_json row;
      row["k"] = mb.k;
      row["subspace_dim"] = dim_needed;
      row["sin_theta_max"] = distance;
      angles.push_back(row);
      std::printf("canonical angle k=%-2d dim=%zu sin(theta_max)=%.3e\n",
                  mb.k, dim_needed, distance);
    }
    report["canonical_angles"] = angles;
  }

  write_text_file(out_path(config, "compare", ".json"), report.dump(1));
  std::cout << "lowest-branch bound violations: " << bound_violations << "\n"
            << "report written to " << out_path(config, "compare", ".json")
            << "\n";
  return 0;
}

int cmd_bench(const RunConfig& config, const std::vector<int>& bond_dims) {
  validate_config(config, "bench");
  ModelSpec model = model_from_config(config);
  std::mt19937_64 rng(config.seed);
  std::cout << "network-set build times at N=" << config.n_sites << "\n";
  double previous = 0.0;
  int previous_d = 0;
  for (int D : bond_dims) {
    SiteTensor a = normalized(
        SiteTensor::random_gaussian(model.phys_dim, D, rng));
    NetworkBuildOptions opts;
    opts.threads = 1;
    // Repeat until the sample is long enough to time reliably.
    int repeats = 0;
    auto t0 = std::chrono::steady_clock::now();
    double elapsed = 0.0;
    do {
      NetworkSet set = build_network_set(a, config.n_sites, model.h01,
                                         nullptr, NetworkKey{}, opts);
      ++repeats;
      elapsed = std::chrono::duration<double>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
    } while (elapsed < 0.2);
    double per_build = elapsed / repeats;
    std::cout << "  D=" << D << ": " << per_build << " s per build ("
              << repeats << " repeats)";
    if (previous > 0.0) {
      double ratio = per_build / previous;
      double expected = std::pow(double(D) / previous_d, 6);
      std::cout << "  ratio vs D=" << previous_d << ": " << ratio
                << " (D^6 predicts " << expected << ")";
    }
    std::cout << "\n";
    previous = per_build;
    previous_d = D;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Momentum-resolved excitation spectra of spin-1/2 rings with "
               "a translationally invariant MPS ansatz"};
  app.require_subcommand(1);

  CliFlags flags;
  app.add_option("--config", flags.config_path, "JSON config file");
  app.add_option("--model", flags.model,
                 "ising | ising_x | heisenberg | heisenberg_transformed");
  app.add_option("--g", flags.g, "Ising transverse field");
  app.add_option("--lambda", flags.lambda, "parity-splitting strength");
  app.add_option("--sign", flags.sign, "sign of the parity term (+1/-1)");
  app.add_flag("--symmetric-field", flags.symmetric_field,
               "split the Ising field term symmetrically across the bond");
  app.add_option("--n", flags.n_sites, "ring length N");
  app.add_option("--bond-dim", flags.bond_dim, "MPS bond dimension D");
  app.add_option("--branches", flags.branches, "branches per momentum");
  app.add_option("--eps", flags.eps, "metric regularization cutoff");
  app.add_option("--seed", flags.seed, "RNG seed");
  app.add_option("--max-iters", flags.max_iters, "optimizer iteration cap");
  app.add_option("--grad-tol", flags.grad_tol, "optimizer gradient tolerance");
  app.add_option("--restarts", flags.restarts, "optimizer restarts");
  app.add_flag("--real-symmetric", flags.real_symmetric,
               "restrict the backbone tensor to real symmetric matrices");
  app.add_option("--tensor-in", flags.tensor_in, "backbone tensor file");
  app.add_option("--tensor-in-plus", flags.tensor_in_plus,
                 "second backbone for split runs");
  app.add_option("--tensor-out", flags.tensor_out, "tensor output file");
  app.add_option("--cache", flags.cache_path, "network cache file");
  app.add_option("--results-dir", flags.results_dir, "output directory");
  app.add_option("--memory-budget-mb", flags.memory_budget_mb,
                 "network set memory budget");
  app.add_option("--threads", flags.threads, "worker threads");
  app.add_flag("--split", flags.split, "run the parity-splitting workflow");
  app.add_flag("--streaming", flags.streaming,
               "stream the ham networks instead of holding the set");
  app.add_option("--method", flags.method, "exact: ed | ising-analytic");
  app.add_option("--window-levels", flags.window_levels,
                 "truncate exact spectrum to this many levels");
  app.add_option("--window-energy", flags.window_energy,
                 "truncate exact spectrum at this energy");
  app.add_flag("--keep-vectors", flags.keep_vectors,
               "retain eigenvectors in exact output");
  app.add_flag("--with-states", flags.with_states,
               "embed coefficient vectors and the backbone in dispersion JSON");

  CLI::App* ground = app.add_subcommand("ground", "optimize the backbone tensor");
  CLI::App* disp = app.add_subcommand("dispersion", "momentum-resolved spectrum");
  CLI::App* exact = app.add_subcommand("exact", "exact reference spectra");
  CLI::App* compare = app.add_subcommand("compare", "MPS vs exact report");
  compare->add_option("--mps", flags.mps_file, "dispersion JSON")->required();
  compare->add_option("--exact", flags.exact_file, "exact JSON")->required();
  CLI::App* bench = app.add_subcommand("bench", "network build cost scaling");
  bench->add_option("--bench-bond-dims", flags.bench_bond_dims,
                    "bond dimensions to time");

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig config = merge_config(app, flags);
    if (ground->parsed()) return cmd_ground(config);
    if (disp->parsed()) return cmd_dispersion(config, flags.with_states);
    if (exact->parsed()) return cmd_exact(config);
    if (compare->parsed())
      return cmd_compare(config, flags.mps_file, flags.exact_file);
    if (bench->parsed()) return cmd_bench(config, flags.bench_bond_dims);
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const ResourceError& e) {
    std::cerr << "resource refusal: " << e.what() << "\n";
    return 4;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
