#include <fstream>

#include "rsfbm/cli.h"
#include "rsfbm/io.h"

namespace rsfbm::cli {

std::string section_of(const std::string& command) {
  std::string s = command;
  for (char& c : s)
    if (c == '-') c = '_';
  return s;
}

Json default_config() {
  return Json::parse(R"({
  "command": "report",
  "seed": 20240601,
  "n_paths": 10000,
  "threads": 0,
  "hurst": 0.7,
  "model": {"type": "gamma_grey", "a0": 1.0, "beta": 0.5, "rho": 0.5, "x0": 1.0, "nu": 1.2,
            "kernel": {"type": "ggbm", "alpha": 1.0, "beta": 0.5}},
  "integrand": {"type": "constant", "c": 1.0, "beta": 0.0, "grid": [], "values": []},
  "time": {"T": 1.0, "steps": 64},
  "space": {"N": 4096, "L": 20.0},
  "output": {"prefix": "run"},
  "simulate": {"method": "automatic", "write_paths": 10},
  "moments": {"times": [0.5, 1.0, 2.0], "se_factor": 4.0},
  "ito_check": {"functional": "z2", "oracle": true, "enforce_admissibility": true, "time_nodes": 64,
                "tolerance": 1e-6, "se_factor": 3.0},
  "solve": {"method": "fourier", "t": 1.0, "datum": {"type": "gaussian", "amplitude": 1.0, "variance": 1.0},
            "x_points": [-2.0, 0.0, 2.0], "pde_residual": false, "time_nodes": 64, "se_factor": 3.0,
            "tolerance": 1e-4},
  "kernel_check": {"t": [0.5, 1.0, 2.0], "xi": [0.5, 1.0, 2.0], "tolerance": 1e-6},
  "phi_k": {"kernel": "ggbm", "alpha": 1.0, "beta": 0.5, "z_max": 10.0, "points": 101, "tolerance": 1e-8},
  "density_check": {"x0": 1.0, "nu": 1.2, "rho": 2.0, "delta": 1.4, "t": 1.0, "x_points": [0.0, 0.7, 1.5],
                    "tolerance": 1e-8},
  "report": {"laplace_max": 10.0, "points": 101}
})");
}

Json load_config_file(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file " + path.string());
  try {
    return Json::parse(f, nullptr, true, true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
}

void merge_into(Json& base, const Json& overlay, const std::string& where) {
  if (!overlay.is_object()) throw ConfigError("config" + (where.empty() ? "" : " at " + where) + " must be an object");
  for (auto it = overlay.begin(); it != overlay.end(); ++it) {
    const std::string path = where.empty() ? it.key() : where + "." + it.key();
    if (!base.contains(it.key())) throw ConfigError("unknown config key '" + path + "'");
    Json& slot = base[it.key()];
    if (slot.is_object() && it.value().is_object())
      merge_into(slot, it.value(), path);
    else
      slot = it.value();
  }
}

void apply_override(Json& config, const std::string& dotted, const std::string& value) {
  Json* node = &config;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = dotted.find('.', start);
    const std::string key = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty() || !node->is_object() || !node->contains(key))
      throw ConfigError("unknown config key '" + dotted + "'");
    node = &(*node)[key];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  Json parsed;
  try {
    parsed = Json::parse(value);
  } catch (const nlohmann::json::parse_error&) {
    parsed = value;
  }
  if (node->is_string() && !parsed.is_string()) parsed = value;
  if (node->is_number() && !parsed.is_number())
    throw ConfigError("config key '" + dotted + "' expects a number, got '" + value + "'");
  *node = parsed;
}

std::string config_hash(const Json& config) { return io::fnv1a_hex(config.dump()); }

namespace {

double num(const Json& node, const char* key) {
  if (!node.contains(key) || !node.at(key).is_number())
    throw ConfigError(std::string("config key '") + key + "' must be a number");
  return node.at(key).get<double>();
}

std::string str(const Json& node, const char* key) {
  if (!node.contains(key) || !node.at(key).is_string())
    throw ConfigError(std::string("config key '") + key + "' must be a string");
  return node.at(key).get<std::string>();
}

}  // namespace

HurstModel hurst_from(const Json& config) {
  const double H = num(config, "hurst");
  if (!(H > 0.0 && H < 1.0)) throw ConfigError("hurst must lie in (0,1)");
  return HurstModel(H);
}

Integrand integrand_from(const Json& node) {
  const std::string type = str(node, "type");
  if (type == "constant") return Integrand::constant(num(node, "c"));
  if (type == "power_law") return Integrand::power_law(num(node, "c"), num(node, "beta"));
  if (type == "tabulated")
    return Integrand::tabulated(node.at("grid").get<std::vector<double>>(), node.at("values").get<std::vector<double>>());
  throw ConfigError("integrand.type must be constant, power_law or tabulated");
}

HomogeneousKernel kernel_from(const Json& node) {
  const std::string type = str(node, "type");
  if (type == "ggbm") return HomogeneousKernel::ggbm(num(node, "alpha"), num(node, "beta"));
  throw ConfigError("kernel.type must be ggbm (custom kernels are available through the library only)");
}

DiffusionModel model_from(const Json& node) {
  const std::string type = str(node, "type");
  if (type == "dirac") return DiffusionModel::dirac(num(node, "a0"));
  if (type == "mittag_leffler") return DiffusionModel::mittag_leffler(num(node, "beta"));
  if (type == "gamma_grey") return DiffusionModel::gamma_grey(num(node, "rho"));
  if (type == "generalized_gamma") return DiffusionModel::generalized_gamma(num(node, "x0"), num(node, "nu"), num(node, "rho"));
  if (type == "bender_butko") return DiffusionModel::bender_butko(kernel_from(node.at("kernel")));
  throw ConfigError("model.type must be dirac, mittag_leffler, gamma_grey, generalized_gamma or bender_butko");
}

InitialDatum datum_from(const Json& node) {
  const std::string type = str(node, "type");
  if (type == "gaussian") return InitialDatum::gaussian(num(node, "amplitude"), num(node, "variance"));
  throw ConfigError("solve.datum.type must be gaussian");
}

KernelSpec kernel_spec_for(const DiffusionModel& model, const HurstModel& h) {
  const auto& v = model.variant();
  if (const auto* g = std::get_if<GammaGrey>(&v)) return KernelSpec::gamma_grey(g->rho, h.H());
  if (const auto* b = std::get_if<BenderButko>(&v)) return KernelSpec::bender_butko(b->kernel);
  if (const auto* m = std::get_if<MittagLefflerLaw>(&v))
    return KernelSpec::bender_butko(HomogeneousKernel::ggbm(2.0 * h.H(), m->beta));
  if (const auto* d = std::get_if<Dirac>(&v)) {
    // L[A](t^{2H} xi) = e^{-a0 t^{2H} xi}: k(t,s) = 2H a0 s^{2H-1}.
    const double a0 = d->a0, H = h.H();
    return KernelSpec::explicit_kernel(
        [a0, H](double, double s, double xi) { return -2.0 * H * a0 * std::pow(s, 2.0 * H - 1.0) * xi; }, H, "heat");
  }
  throw UnsupportedError("no evolution kernel is known for " + model.describe());
}

}  // namespace rsfbm::cli
