#include "ringmps/io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace ringmps {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write file: " + path);
  out << content;
  if (!out) throw ValidationError("write failed: " + path);
}

namespace {

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

ordered_json complex_list(const Vector& v) {
  ordered_json list = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i)
    list.push_back({v(i).real(), v(i).imag()});
  return list;
}

Vector complex_list_parse(const ordered_json& list) {
  Vector v(list.size());
  for (std::size_t i = 0; i < list.size(); ++i)
    v(static_cast<Eigen::Index>(i)) =
        Complex(list[i][0].get<double>(), list[i][1].get<double>());
  return v;
}

constexpr const char* kVecLayout = "i*D*D + alpha*D + beta";

}  // namespace

void save_tensor(const std::string& path, const SiteTensor& a,
                 const std::map<std::string, std::string>& metadata) {
  ordered_json doc;
  doc["format"] = "ringmps-tensor";
  doc["version"] = kArtifactVersion;
  doc["phys_dim"] = a.phys_dim;
  doc["bond_dim"] = a.bond_dim;
  doc["layout"] = kVecLayout;
  doc["entries"] = complex_list(a.to_vector());
  ordered_json meta = ordered_json::object();
  for (const auto& [key, value] : metadata) meta[key] = value;
  doc["metadata"] = meta;
  write_text_file(path, doc.dump(1));
}

LoadedTensor load_tensor(const std::string& path) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("tensor file " + path + ": " + e.what());
  }
  if (doc.value("format", "") != "ringmps-tensor")
    throw ValidationError("tensor file " + path + ": wrong format field");
  if (doc.value("layout", "") != kVecLayout)
    throw ValidationError("tensor file " + path + ": unknown vec layout");
  int d = doc.at("phys_dim").get<int>();
  int D = doc.at("bond_dim").get<int>();
  Vector entries = complex_list_parse(doc.at("entries"));
  LoadedTensor out;
  out.a = SiteTensor::from_vector(d, D, entries);
  if (doc.contains("metadata"))
    for (auto it = doc["metadata"].begin(); it != doc["metadata"].end(); ++it)
      out.metadata[it.key()] = it.value().get<std::string>();
  return out;
}

std::string dispersion_to_json(const DispersionResult& result,
                               std::uint64_t config_hash,
                               bool include_states) {
  ordered_json doc;
  doc["format"] = "ringmps-dispersion";
  doc["version"] = kArtifactVersion;
  doc["config_hash"] = hex64(config_hash);
  doc["model"] = {{"name", result.model_name},
                  {"hash", hex64(result.model_hash)}};
  for (const auto& [key, value] : result.model_params)
    doc["model"]["params"][key] = value;
  doc["n_sites"] = result.n_sites;
  doc["phys_dim"] = result.phys_dim;
  doc["bond_dim"] = result.bond_dim;
  doc["eps"] = result.eps;
  doc["tensor_hash"] = hex64(result.tensor_hash);
  doc["backbone_energy"] = result.backbone_energy;
  doc["timings"] = {{"network_seconds", result.network_seconds},
                    {"solve_seconds", result.solve_seconds},
                    {"used_cache", result.used_cache}};
  ordered_json momenta = ordered_json::array();
  for (const auto& mb : result.momenta) {
    ordered_json entry;
    entry["k"] = mb.k;
    entry["discarded"] = mb.discarded;
    entry["expected_null"] = mb.expected_null;
    entry["null_count_mismatch"] = mb.null_count_mismatch;
    ordered_json branches = ordered_json::array();
    for (std::size_t i = 0; i < mb.energies.size(); ++i) {
      ordered_json b;
      b["branch"] = i;
      b["energy"] = mb.energies[i];
      b["metric_norm"] = mb.metric_norms[i];
      b["parity"] = mb.parity.empty() ? 0 : mb.parity[i];
      if (!mb.parity_values.empty()) b["parity_value"] = mb.parity_values[i];
      if (!mb.parity_flagged.empty())
        b["parity_flagged"] = static_cast<bool>(mb.parity_flagged[i]);
      b["k_solver"] = mb.k_original.empty() ? mb.k : mb.k_original[i];
      if (include_states)
        b["coefficients"] = complex_list(mb.vectors.col(i));
      branches.push_back(std::move(b));
    }
    entry["branches"] = std::move(branches);
    momenta.push_back(std::move(entry));
  }
  doc["momenta"] = std::move(momenta);
  if (include_states) {
    ordered_json backbone;
    backbone["phys_dim"] = result.backbone.phys_dim;
    backbone["bond_dim"] = result.backbone.bond_dim;
    backbone["layout"] = kVecLayout;
    backbone["entries"] = complex_list(result.backbone.to_vector());
    doc["backbone"] = std::move(backbone);
    if (result.backbone_plus.phys_dim > 0) {
      ordered_json plus;
      plus["phys_dim"] = result.backbone_plus.phys_dim;
      plus["bond_dim"] = result.backbone_plus.bond_dim;
      plus["layout"] = kVecLayout;
      plus["entries"] = complex_list(result.backbone_plus.to_vector());
      doc["backbone_plus"] = std::move(plus);
    }
  }
  return doc.dump(1);
}

std::string dispersion_to_csv(const DispersionResult& result,
                              std::uint64_t config_hash) {
  std::ostringstream out;
  out << "# ringmps-dispersion v" << kArtifactVersion << " config="
      << hex64(config_hash) << " model=" << hex64(result.model_hash)
      << " tensor=" << hex64(result.tensor_hash) << "\n";
  out << "k,branch,energy,discarded,parity,k_relabel\n";
  for (const auto& mb : result.momenta)
    for (std::size_t i = 0; i < mb.energies.size(); ++i) {
      int k_solver = mb.k_original.empty() ? mb.k : mb.k_original[i];
      int parity = mb.parity.empty() ? 0 : mb.parity[i];
      out << k_solver << ',' << i << ',' << format_g17(mb.energies[i]) << ','
          << mb.discarded << ',' << parity << ',' << mb.k << "\n";
    }
  return out.str();
}

DispersionResult dispersion_from_json(const std::string& text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("dispersion json: ") + e.what());
  }
  if (doc.value("format", "") != "ringmps-dispersion")
    throw ValidationError("dispersion json: wrong format field");
  DispersionResult result;
  result.model_name = doc["model"].value("name", "");
  result.model_hash =
      std::stoull(doc["model"].value("hash", "0"), nullptr, 16);
  if (doc["model"].contains("params"))
    for (auto it = doc["model"]["params"].begin();
         it != doc["model"]["params"].end(); ++it)
      result.model_params[it.key()] = it.value().get<double>();
  result.n_sites = doc.at("n_sites").get<int>();
  result.phys_dim = doc.at("phys_dim").get<int>();
  result.bond_dim = doc.at("bond_dim").get<int>();
  result.eps = doc.at("eps").get<double>();
  result.tensor_hash = std::stoull(doc.value("tensor_hash", "0"), nullptr, 16);
  result.backbone_energy = doc.value("backbone_energy", 0.0);
  for (const auto& entry : doc.at("momenta")) {
    MomentumBranches mb;
    mb.k = entry.at("k").get<int>();
    mb.discarded = entry.value("discarded", 0);
    mb.expected_null = entry.value("expected_null", 0);
    mb.null_count_mismatch = entry.value("null_count_mismatch", false);
    std::vector<Vector> coeff_cols;
    for (const auto& b : entry.at("branches")) {
      mb.energies.push_back(b.at("energy").get<double>());
      mb.metric_norms.push_back(b.value("metric_norm", 1.0));
      mb.parity.push_back(b.value("parity", 0));
      if (b.contains("parity_value"))
        mb.parity_values.push_back(b["parity_value"].get<double>());
      if (b.contains("parity_flagged"))
        mb.parity_flagged.push_back(b["parity_flagged"].get<bool>());
      mb.k_original.push_back(b.value("k_solver", mb.k));
      if (b.contains("coefficients"))
        coeff_cols.push_back(complex_list_parse(b["coefficients"]));
    }
    if (!coeff_cols.empty()) {
      mb.vectors.resize(coeff_cols[0].size(),
                        static_cast<Eigen::Index>(coeff_cols.size()));
      for (std::size_t c = 0; c < coeff_cols.size(); ++c)
        mb.vectors.col(static_cast<Eigen::Index>(c)) = coeff_cols[c];
    }
    result.momenta.push_back(std::move(mb));
  }
  auto parse_tensor = [](const ordered_json& node) {
    return SiteTensor::from_vector(node.at("phys_dim").get<int>(),
                                   node.at("bond_dim").get<int>(),
                                   complex_list_parse(node.at("entries")));
  };
  if (doc.contains("backbone")) result.backbone = parse_tensor(doc["backbone"]);
  if (doc.contains("backbone_plus"))
    result.backbone_plus = parse_tensor(doc["backbone_plus"]);
  return result;
}

std::string exact_to_json(const ExactSpectrum& spec, std::uint64_t config_hash,
                          bool include_vectors) {
  ordered_json doc;
  doc["format"] = "ringmps-exact";
  doc["version"] = kArtifactVersion;
  doc["config_hash"] = hex64(config_hash);
  doc["model"] = {{"name", spec.model_name}};
  for (const auto& [key, value] : spec.params)
    doc["model"]["params"][key] = value;
  doc["n_sites"] = spec.n_sites;
  ordered_json levels = ordered_json::array();
  for (const auto& level : spec.levels) {
    ordered_json entry;
    entry["energy"] = level.energy;
    entry["k"] = level.momentum;
    entry["momentum_residual"] = level.momentum_residual;
    entry["parity"] = level.parity != 0 ? level.parity : level.sector;
    entry["parity_residual"] = level.parity_residual;
    entry["degeneracy"] = level.degeneracy;
    if (level.sector != 0)
      entry["sector"] = level.sector > 0 ? "even" : "odd";
    if (!level.modes.empty()) entry["modes"] = level.modes;
    levels.push_back(std::move(entry));
  }
  doc["levels"] = std::move(levels);
  if (include_vectors && spec.has_vectors) {
    ordered_json vectors = ordered_json::array();
    for (Eigen::Index c = 0; c < spec.vectors.cols(); ++c)
      vectors.push_back(complex_list(spec.vectors.col(c)));
    doc["vectors"] = std::move(vectors);
  }
  return doc.dump(1);
}

std::string exact_to_csv(const ExactSpectrum& spec,
                         std::uint64_t config_hash) {
  std::ostringstream out;
  out << "# ringmps-exact v" << kArtifactVersion << " config="
      << hex64(config_hash) << " model=" << spec.model_name << "\n";
  out << "energy,k,parity,degeneracy,modes\n";
  for (const auto& level : spec.levels) {
    out << format_g17(level.energy) << ',' << level.momentum << ','
        << (level.parity != 0 ? level.parity : level.sector) << ','
        << level.degeneracy << ',';
    for (std::size_t i = 0; i < level.modes.size(); ++i) {
      if (i) out << '|';
      out << format_g17(level.modes[i]);
    }
    out << "\n";
  }
  return out.str();
}

ExactSpectrum exact_from_json(const std::string& text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("exact json: ") + e.what());
  }
  if (doc.value("format", "") != "ringmps-exact")
    throw ValidationError("exact json: wrong format field");
  ExactSpectrum spec;
  spec.model_name = doc["model"].value("name", "");
  if (doc["model"].contains("params"))
    for (auto it = doc["model"]["params"].begin();
         it != doc["model"]["params"].end(); ++it)
      spec.params[it.key()] = it.value().get<double>();
  spec.n_sites = doc.at("n_sites").get<int>();
  for (const auto& entry : doc.at("levels")) {
    LabeledLevel level;
    level.energy = entry.at("energy").get<double>();
    level.momentum = entry.at("k").get<int>();
    level.momentum_residual = entry.value("momentum_residual", 0.0);
    level.parity = entry.value("parity", 0);
    level.parity_residual = entry.value("parity_residual", 0.0);
    level.degeneracy = entry.value("degeneracy", 1);
    if (entry.contains("sector"))
      level.sector = entry["sector"] == "even" ? 1 : -1;
    if (entry.contains("modes"))
      level.modes = entry["modes"].get<std::vector<double>>();
    spec.levels.push_back(std::move(level));
  }
  if (doc.contains("vectors")) {
    const auto& vectors = doc["vectors"];
    if (!vectors.empty()) {
      spec.has_vectors = true;
      Vector first = complex_list_parse(vectors[0]);
      spec.vectors.resize(first.size(),
                          static_cast<Eigen::Index>(vectors.size()));
      spec.vectors.col(0) = first;
      for (std::size_t c = 1; c < vectors.size(); ++c)
        spec.vectors.col(static_cast<Eigen::Index>(c)) =
            complex_list_parse(vectors[c]);
    }
  }
  return spec;
}

std::uint64_t RunConfig::hash() const {
  return hash_bytes(to_json(), 1469598103934665603ull);
}

std::string RunConfig::to_json() const {
  ordered_json doc;
  doc["model"] = {{"name", model_name},
                  {"g", g},
                  {"lambda", lambda},
                  {"sign", sign},
                  {"symmetric_field", symmetric_field}};
  doc["n_sites"] = n_sites;
  doc["bond_dim"] = bond_dim;
  doc["branches"] = branches;
  doc["eps"] = eps;
  doc["seed"] = seed;
  doc["optimizer"] = {{"max_iters", max_iters},
                      {"grad_tol", grad_tol},
                      {"restarts", restarts},
                      {"real_symmetric", real_symmetric}};
  doc["paths"] = {{"tensor_in", tensor_in},
                  {"tensor_in_plus", tensor_in_plus},
                  {"tensor_out", tensor_out},
                  {"cache_path", cache_path},
                  {"results_dir", results_dir}};
  doc["memory_budget_mb"] = memory_budget_mb;
  doc["threads"] = threads;
  doc["split"] = split;
  doc["streaming"] = streaming;
  doc["exact"] = {{"method", method},
                  {"window_levels", window_levels},
                  {"window_energy", window_energy},
                  {"has_window_energy", has_window_energy},
                  {"keep_vectors", keep_vectors}};
  return doc.dump(1);
}

RunConfig RunConfig::from_json(const std::string& text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("config json: ") + e.what());
  }
  RunConfig c;
  if (doc.contains("model")) {
    const auto& m = doc["model"];
    c.model_name = m.value("name", c.model_name);
    c.g = m.value("g", c.g);
    c.lambda = m.value("lambda", c.lambda);
    c.sign = m.value("sign", c.sign);
    c.symmetric_field = m.value("symmetric_field", c.symmetric_field);
  }
  c.n_sites = doc.value("n_sites", c.n_sites);
  c.bond_dim = doc.value("bond_dim", c.bond_dim);
  c.branches = doc.value("branches", c.branches);
  c.eps = doc.value("eps", c.eps);
  c.seed = doc.value("seed", c.seed);
  if (doc.contains("optimizer")) {
    const auto& o = doc["optimizer"];
    c.max_iters = o.value("max_iters", c.max_iters);
    c.grad_tol = o.value("grad_tol", c.grad_tol);
    c.restarts = o.value("restarts", c.restarts);
    c.real_symmetric = o.value("real_symmetric", c.real_symmetric);
  }
  if (doc.contains("paths")) {
    const auto& p = doc["paths"];
    c.tensor_in = p.value("tensor_in", c.tensor_in);
    c.tensor_in_plus = p.value("tensor_in_plus", c.tensor_in_plus);
    c.tensor_out = p.value("tensor_out", c.tensor_out);
    c.cache_path = p.value("cache_path", c.cache_path);
    c.results_dir = p.value("results_dir", c.results_dir);
  }
  c.memory_budget_mb = doc.value("memory_budget_mb", c.memory_budget_mb);
  c.threads = doc.value("threads", c.threads);
  c.split = doc.value("split", c.split);
  c.streaming = doc.value("streaming", c.streaming);
  if (doc.contains("exact")) {
    const auto& e = doc["exact"];
    c.method = e.value("method", c.method);
    c.window_levels = e.value("window_levels", c.window_levels);
    c.window_energy = e.value("window_energy", c.window_energy);
    c.has_window_energy = e.value("has_window_energy", c.has_window_energy);
    c.keep_vectors = e.value("keep_vectors", c.keep_vectors);
  }
  return c;
}

void validate_config(const RunConfig& config, const std::string& command) {
  auto fail = [](const std::string& field, const std::string& why) {
    throw ValidationError("config field '" + field + "': " + why);
  };
  if (config.model_name != "ising" && config.model_name != "ising_x" &&
      config.model_name != "heisenberg" &&
      config.model_name != "heisenberg_transformed")
    fail("model.name", "unknown model '" + config.model_name + "'");
  if (config.n_sites < 2) fail("n_sites", "must be >= 2");
  if ((config.model_name == "heisenberg_transformed" || config.split) &&
      config.n_sites % 2 != 0)
    fail("n_sites", "must be even for the transformed Heisenberg chain");
  if (config.bond_dim < 1) fail("bond_dim", "must be >= 1");
  if (config.branches < 1) fail("branches", "must be >= 1");
  if (config.eps <= 0) fail("eps", "must be > 0");
  if (config.threads < 1) fail("threads", "must be >= 1");
  if (config.memory_budget_mb <= 0) fail("memory_budget_mb", "must be > 0");
  if (config.split && config.model_name != "heisenberg_transformed" &&
      config.model_name != "heisenberg")
    fail("split", "only meaningful for the Heisenberg chain");

  if (!config.results_dir.empty() && !fs::is_directory(config.results_dir))
    fail("paths.results_dir",
         "directory does not exist: " + config.results_dir);
  if (!config.tensor_in.empty() && !fs::is_regular_file(config.tensor_in))
    fail("paths.tensor_in", "file does not exist: " + config.tensor_in);
  if (!config.tensor_in_plus.empty() &&
      !fs::is_regular_file(config.tensor_in_plus))
    fail("paths.tensor_in_plus",
         "file does not exist: " + config.tensor_in_plus);
  if (!config.tensor_out.empty()) {
    fs::path parent = fs::path(config.tensor_out).parent_path();
    if (!parent.empty() && !fs::is_directory(parent))
      fail("paths.tensor_out",
           "parent directory does not exist: " + parent.string());
  }
  if (!config.cache_path.empty()) {
    fs::path parent = fs::path(config.cache_path).parent_path();
    if (!parent.empty() && !fs::is_directory(parent))
      fail("paths.cache_path",
           "parent directory does not exist: " + parent.string());
  }
  if (command == "exact" && config.method != "ed" &&
      config.method != "ising-analytic")
    fail("exact.method", "must be 'ed' or 'ising-analytic'");
}

ModelSpec model_from_config(const RunConfig& config) {
  if (config.model_name == "ising")
    return ising_model(config.g, config.symmetric_field);
  if (config.model_name == "ising_x") return ising_model_xbasis(config.g);
  if (config.model_name == "heisenberg") return heisenberg_model();
  if (config.model_name == "heisenberg_transformed") {
    double lambda = config.lambda != 0.0 ? config.lambda : 0.1 * config.n_sites;
    return heisenberg_transformed(lambda, config.sign);
  }
  throw ValidationError("unknown model: " + config.model_name);
}

}  // namespace ringmps
