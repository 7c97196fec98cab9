#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "rsfbm/cli.h"
#include "rsfbm/fbm.h"
#include "rsfbm/io.h"
#include "rsfbm/parallel.h"
#include "rsfbm/specfun.h"
#include "rsfbm/stochint.h"

namespace rsfbm::cli {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// JSON cannot hold inf/nan; they go out as strings.
Json jnum(double v) {
  if (std::isfinite(v)) return v;
  return io::format_double(v);
}

struct Context {
  const Json& cfg;
  const Json& sec;
  std::string command;
  std::string hash;
  std::uint64_t seed;
  std::filesystem::path stem;
  Outcome out;
  Json results = Json::object();

  void write_csv(io::CsvTable table, const std::string& suffix = "") {
    table.comments.insert(table.comments.begin(), {"command=" + command, "config_hash=" + hash,
                                                   "seed=" + std::to_string(seed)});
    const auto path = std::filesystem::path(stem.string() + suffix + ".csv");
    io::write_text(path, io::to_csv(table));
    out.files.push_back(path);
  }
};

std::size_t count(const Json& node, const char* key) {
  const auto& v = node.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw ConfigError(std::string("config key '") + key + "' must be a non-negative integer");
  return v.get<std::size_t>();
}

std::vector<double> numbers(const Json& node, const char* key) {
  try {
    return node.at(key).get<std::vector<double>>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("config key '") + key + "' must be a list of numbers");
  }
}

std::string fmt(double v) { return io::format_double(v); }

bool cmd_simulate(Context& c) {
  const HurstModel h = hurst_from(c.cfg);
  const Integrand nu = integrand_from(c.cfg.at("integrand"));
  const DiffusionModel model = model_from(c.cfg.at("model"));
  const double T = c.cfg.at("time").at("T").get<double>();
  const TimeGrid grid = TimeGrid::uniform(T, count(c.cfg.at("time"), "steps"));
  FbmOptions fo;
  fo.method = fbm_method_from_string(c.sec.at("method").get<std::string>());
  const std::size_t n = count(c.cfg, "n_paths");
  const PathEnsemble ens = generate_scaled(h, nu, grid, model, n, c.seed, fo);
  const std::size_t w = std::min(n, count(c.sec, "write_paths"));
  io::CsvTable t;
  t.columns.push_back("t");
  for (std::size_t p = 0; p < w; ++p) t.columns.push_back("path_" + std::to_string(p));
  for (std::size_t j = 0; j < grid.size(); ++j) {
    std::vector<double> row{grid.points()[j]};
    for (std::size_t p = 0; p < w; ++p) row.push_back(ens.at(p, j));
    t.rows.push_back(std::move(row));
  }
  c.write_csv(t);
  double s = 0.0, ss = 0.0;
  for (std::size_t p = 0; p < n; ++p) s += ens.at(p, grid.size() - 1);
  const double m = s / static_cast<double>(n);
  for (std::size_t p = 0; p < n; ++p) ss += std::pow(ens.at(p, grid.size() - 1) - m, 2);
  c.results["method"] = to_string(ens.method);
  c.results["n_paths"] = n;
  c.results["var_T_empirical"] = jnum(n > 1 ? ss / static_cast<double>(n - 1) : kNaN);
  c.results["var_T_expected"] = jnum(model.mean() * weighted_variance(h, nu, T));
  c.out.summary = "simulated " + std::to_string(n) + " paths with " + to_string(ens.method);
  return true;
}

bool cmd_moments(Context& c) {
  const HurstModel h = hurst_from(c.cfg);
  const Integrand nu = integrand_from(c.cfg.at("integrand"));
  const DiffusionModel model = model_from(c.cfg.at("model"));
  std::vector<double> times = numbers(c.sec, "times");
  std::sort(times.begin(), times.end());
  if (times.empty() || !(times.front() > 0.0)) throw ConfigError("moments.times must be positive");
  std::vector<double> pts{0.0};
  pts.insert(pts.end(), times.begin(), times.end());
  const std::size_t n = count(c.cfg, "n_paths");
  if (n < 2) throw ConfigError("n_paths must be >= 2");
  FbmOptions fo;
  fo.method = FbmMethod::cholesky;
  const PathEnsemble ens = generate_scaled(h, nu, TimeGrid::from_points(pts), model, n, c.seed, fo);
  const double k = c.sec.at("se_factor").get<double>();
  const double N = static_cast<double>(n);
  io::CsvTable t;
  t.columns = {"t", "empirical_var", "stderr", "expected", "z"};
  bool pass = true;
  double worst = 0.0;
  for (std::size_t j = 1; j < pts.size(); ++j) {
    double s = 0.0;
    for (std::size_t p = 0; p < n; ++p) s += ens.at(p, j);
    const double m = s / N;
    double m2 = 0.0, m4 = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      const double d = ens.at(p, j) - m;
      m2 += d * d;
      m4 += d * d * d * d;
    }
    const double var = m2 / (N - 1.0);
    const double se = std::sqrt(std::max(m4 / N - (m2 / N) * (m2 / N), 0.0) / N);
    const double expected = model.mean() * weighted_variance(h, nu, pts[j]);
    const double z = (var - expected) / se;
    pass = pass && std::isfinite(z) && std::abs(z) <= k;
    worst = std::max(worst, std::isfinite(z) ? std::abs(z) : std::numeric_limits<double>::infinity());
    t.rows.push_back({pts[j], var, se, expected, z});
  }
  c.write_csv(t);
  c.results["max_abs_z"] = jnum(worst);
  c.out.summary = "max |z| = " + fmt(worst) + " (limit " + fmt(k) + ")";
  if (!std::isfinite(model.mean())) c.out.summary += "; E[A] is infinite for " + model.describe();
  return pass;
}

bool cmd_ito(Context& c) {
  const HurstModel h = hurst_from(c.cfg);
  const Integrand nu = integrand_from(c.cfg.at("integrand"));
  const DiffusionModel model = model_from(c.cfg.at("model"));
  const double T = c.cfg.at("time").at("T").get<double>();
  const Functional F = functional_from_name(c.sec.at("functional").get<std::string>());
  ItoOptions opts;
  opts.n_time_nodes = count(c.sec, "time_nodes");
  opts.enforce_admissibility = c.sec.at("enforce_admissibility").get<bool>();
  const double tol = c.sec.at("tolerance").get<double>();
  const double k = c.sec.at("se_factor").get<double>();
  bool pass = true;
  ItoReport rep;
  if (model.sampleable()) {
    rep = ito_expectation_residual_mc(F, h, nu, model, T, count(c.cfg, "n_paths"), c.seed, opts);
    pass = std::abs(rep.residual) <= k * rep.mc_stderr || std::abs(rep.residual) < tol;
  } else {
    rep.functional = F.name;
    rep.model = model.describe();
    rep.H = h.H();
    rep.T = T;
    rep.note = "law is not sampleable; Monte Carlo skipped";
  }
  if (c.sec.at("oracle").get<bool>()) {
    try {
      rep.quadrature_residual = ito_expectation_residual_quadrature(F, h, nu, model, T, opts);
      pass = pass && std::abs(rep.quadrature_residual) < tol;
    } catch (const UnsupportedError& e) {
      rep.note += (rep.note.empty() ? "" : "; ") + std::string(e.what());
    } catch (const EvaluationError& e) {
      rep.note += (rep.note.empty() ? "" : "; ") + std::string(e.what());
      pass = false;
    }
  }
  io::CsvTable t;
  t.columns = {"lhs", "initial", "time_term", "variance_term", "residual", "mc_stderr", "quadrature_residual"};
  t.rows.push_back({rep.lhs, rep.initial, rep.time_term, rep.variance_term, rep.residual, rep.mc_stderr,
                    rep.quadrature_residual});
  c.write_csv(t);
  c.results = Json::parse(rep.to_json());
  std::ostringstream os;
  os << F.name << " under " << model.describe() << ": MC residual " << fmt(rep.residual) << " (SE " << fmt(rep.mc_stderr)
     << "), quadrature residual " << fmt(rep.quadrature_residual);
  if (!rep.note.empty()) os << " [" << rep.note << "]";
  c.out.summary = os.str();
  return pass;
}

bool cmd_solve(Context& c) {
  const HurstModel h = hurst_from(c.cfg);
  const Integrand nu = integrand_from(c.cfg.at("integrand"));
  const DiffusionModel model = model_from(c.cfg.at("model"));
  const InitialDatum u0 = datum_from(c.sec.at("datum"));
  const double t = c.sec.at("t").get<double>();
  const std::string method = c.sec.at("method").get<std::string>();
  if (method != "fourier" && method != "fk" && method != "both")
    throw ConfigError("solve.method must be fourier, fk or both");
  SpectralOptions so;
  so.N = count(c.cfg.at("space"), "N");
  so.L = c.cfg.at("space").at("L").get<double>();
  const std::vector<double> xs = numbers(c.sec, "x_points");
  bool pass = true;
  std::ostringstream os;
  std::optional<SpectralField> field;
  if (method != "fk") {
    field = fourier_solve(u0, h, nu, model, t, so);
    io::CsvTable g;
    g.columns = {"x", "u"};
    for (std::size_t j = 0; j < field->size(); ++j) g.rows.push_back({field->x(j), field->values()[j]});
    c.write_csv(g, method == "both" ? "_fourier" : "");
    double mass = 0.0;
    for (double v : field->values()) mass += v * field->dx();
    c.results["mass"] = jnum(mass);
    os << "fourier solve on N=" << so.N << ", mass " << fmt(mass);
  }
  if (method != "fourier") {
    const PointEstimates fk = fk_solve(u0, h, nu, model, t, xs, count(c.cfg, "n_paths"), c.seed);
    io::CsvTable p;
    p.columns = {"x", "value", "stderr"};
    if (field) p.columns.insert(p.columns.end(), {"fourier", "z"});
    const double k = c.sec.at("se_factor").get<double>();
    double worst = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      std::vector<double> row{xs[i], fk.value[i], fk.stderr_[i]};
      if (field) {
        const double f = field->evaluate(xs[i]);
        const double diff = fk.value[i] - f;
        const double z = fk.stderr_[i] > 0.0 ? diff / fk.stderr_[i] : (diff == 0.0 ? 0.0 : kNaN);
        worst = std::max(worst, std::isfinite(z) ? std::abs(z) : std::numeric_limits<double>::infinity());
        row.insert(row.end(), {f, z});
      }
      p.rows.push_back(std::move(row));
    }
    c.write_csv(p, method == "both" ? "_fk" : "");
    if (field) {
      pass = pass && worst <= k;
      c.results["max_abs_z"] = jnum(worst);
      os << "; fk vs fourier max |z| = " << fmt(worst) << " (limit " << fmt(k) << ")";
    } else {
      os << "fk solve at " << xs.size() << " points";
    }
  }
  if (c.sec.at("pde_residual").get<bool>() && t > 0.0) {
    const KernelSpec spec = kernel_spec_for(model, h);
    const double r = pde_residual(u0, spec, model, h, nu, t, so, count(c.sec, "time_nodes"));
    const double tol = c.sec.at("tolerance").get<double>();
    c.results["pde_residual"] = jnum(r);
    pass = pass && r < tol;
    os << "; pde residual " << fmt(r) << " (limit " << fmt(tol) << ")";
  }
  c.out.summary = os.str();
  return pass;
}

bool cmd_kernel(Context& c) {
  const HurstModel h = hurst_from(c.cfg);
  const DiffusionModel model = model_from(c.cfg.at("model"));
  const KernelSpec spec = kernel_spec_for(model, h);
  const double tol = c.sec.at("tolerance").get<double>();
  io::CsvTable t;
  t.columns = {"t", "xi", "residual"};
  double worst = 0.0;
  for (double tt : numbers(c.sec, "t"))
    for (double xi : numbers(c.sec, "xi")) {
      const double r = kernel_residual(spec, model, h, tt, xi);
      worst = std::max(worst, r);
      t.rows.push_back({tt, xi, r});
    }
  c.write_csv(t);
  c.results["kernel"] = spec.describe();
  c.results["max_residual"] = jnum(worst);
  c.out.summary = spec.describe() + ": max residual " + fmt(worst) + " (limit " + fmt(tol) + ")";
  return worst < tol;
}

bool cmd_phi_k(Context& c) {
  if (c.sec.at("kernel").get<std::string>() != "ggbm") throw ConfigError("phi_k.kernel must be ggbm");
  const double alpha = c.sec.at("alpha").get<double>(), beta = c.sec.at("beta").get<double>();
  const HomogeneousKernel k = HomogeneousKernel::ggbm(alpha, beta);
  const double zmax = c.sec.at("z_max").get<double>();
  const std::size_t n = count(c.sec, "points");
  if (n < 2) throw ConfigError("phi_k.points must be >= 2");
  const double tol = c.sec.at("tolerance").get<double>();
  io::CsvTable t;
  t.columns = {"z", "phi", "mittag_leffler", "abs_err"};
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double z = zmax * static_cast<double>(i) / static_cast<double>(n - 1);
    const double p = phi_k(k, z);
    const double m = specfun::mittag_leffler(beta, 1.0, -z);
    worst = std::max(worst, std::abs(p - m));
    t.rows.push_back({z, p, m, std::abs(p - m)});
  }
  c.write_csv(t);
  c.results["kernel"] = k.describe();
  c.results["max_abs_err"] = jnum(worst);
  c.out.summary = k.describe() + ": max |Phi_k - E_beta(-z)| = " + fmt(worst) + " (limit " + fmt(tol) + ")";
  return worst < tol;
}

bool cmd_density(Context& c) {
  const double x0 = c.sec.at("x0").get<double>(), nu = c.sec.at("nu").get<double>(),
               rho = c.sec.at("rho").get<double>(), delta = c.sec.at("delta").get<double>(),
               t = c.sec.at("t").get<double>();
  const double tol = c.sec.at("tolerance").get<double>();
  const bool ek_ok = nu / rho - 1.0 < delta / 2.0;
  io::CsvTable tab;
  tab.columns = {"x", "closed_form", "mixture", "abs_diff", "ek_residual"};
  double worst = 0.0, worst_ek = 0.0;
  for (double x : numbers(c.sec, "x_points")) {
    const double a = superstat_density_closed(x0, nu, rho, delta, t, x);
    const double b = superstat_density_mixture(x0, nu, rho, delta, t, x);
    const double ek = ek_ok ? ek_identity_residual(x0, nu, rho, delta, t, x) : kNaN;
    worst = std::max(worst, std::abs(a - b));
    if (ek_ok) worst_ek = std::max(worst_ek, ek);
    tab.rows.push_back({x, a, b, std::abs(a - b), ek});
  }
  const double mass =
      2.0 * quad::exp_map([&](double x) { return superstat_density_closed(x0, nu, rho, delta, t, x); }, {1e-13, 1e-11});
  c.write_csv(tab);
  c.results["max_abs_diff"] = jnum(worst);
  c.results["mass"] = jnum(mass);
  c.results["ek_checked"] = ek_ok;
  if (ek_ok) c.results["max_ek_residual"] = jnum(worst_ek);
  std::ostringstream os;
  os << "closed vs mixture " << fmt(worst) << ", mass - 1 = " << fmt(mass - 1.0);
  if (ek_ok)
    os << ", density-shift identity residual " << fmt(worst_ek);
  else
    os << " (identity skipped: nu/rho - 1 < delta/2 does not hold)";
  c.out.summary = os.str();
  return worst < tol && std::abs(mass - 1.0) < 1e-6 && (!ek_ok || worst_ek < tol);
}

bool cmd_report(Context& c) {
  const HurstModel h = hurst_from(c.cfg);
  const Integrand nu = integrand_from(c.cfg.at("integrand"));
  check_admissible(h, nu);
  const DiffusionModel model = model_from(c.cfg.at("model"));
  const double T = c.cfg.at("time").at("T").get<double>();
  const double xmax = c.sec.at("laplace_max").get<double>();
  const std::size_t n = count(c.sec, "points");
  if (n < 2) throw ConfigError("report.points must be >= 2");
  io::CsvTable t;
  t.columns = {"x", "laplace"};
  for (std::size_t i = 0; i < n; ++i) {
    const double x = xmax * static_cast<double>(i) / static_cast<double>(n - 1);
    t.rows.push_back({x, model.laplace(x)});
  }
  c.write_csv(t);
  c.results["model"] = model.describe();
  c.results["radius"] = jnum(model.radius());
  c.results["mean"] = jnum(model.mean());
  c.results["second_moment"] = jnum(model.second_moment());
  c.results["sampleable"] = model.sampleable();
  c.results["has_density"] = model.has_density();
  c.results["K_H"] = jnum(k_h(h.H()));
  c.results["v_T"] = jnum(weighted_variance(h, nu, T));
  c.results["sigma_T"] = jnum(time_change(h, nu, T));
  c.out.summary = model.describe() + ", H=" + fmt(h.H()) + ", v(T)=" + fmt(weighted_variance(h, nu, T));
  return true;
}

}  // namespace

Outcome dispatch(const Json& config, const std::filesystem::path& out_dir) {
  const std::string command = config.at("command").get<std::string>();
  if (std::find(commands().begin(), commands().end(), command) == commands().end())
    throw ConfigError("unknown command '" + command + "'");
  const std::string section = section_of(command);
  if (!config.at("seed").is_number_unsigned()) throw ConfigError("seed must be an unsigned 64-bit integer");
  // The thread count changes how the work is split, never the numbers, so it
  // is kept out of the hashed and recorded config.
  Json recorded = config;
  recorded.erase("threads");
  Context c{config, config.at(section), command, config_hash(recorded), config.at("seed").get<std::uint64_t>(),
            out_dir / (config.at("output").at("prefix").get<std::string>() + "_" + section), {}};
  const auto start = std::chrono::steady_clock::now();
  bool pass = false;
  if (command == "simulate") pass = cmd_simulate(c);
  else if (command == "moments") pass = cmd_moments(c);
  else if (command == "ito-check") pass = cmd_ito(c);
  else if (command == "solve") pass = cmd_solve(c);
  else if (command == "kernel-check") pass = cmd_kernel(c);
  else if (command == "phi-k") pass = cmd_phi_k(c);
  else if (command == "density-check") pass = cmd_density(c);
  else pass = cmd_report(c);
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

  Json side;
  side["command"] = command;
  side["config_hash"] = c.hash;
  side["seed"] = c.seed;
  side["pass"] = pass;
  side["results"] = c.results;
  side["config"] = recorded;
  const auto side_path = std::filesystem::path(c.stem.string() + ".json");
  io::write_text(side_path, side.dump(2) + "\n");
  c.out.files.push_back(side_path);
  // Wall time lives in its own file so the artifacts above stay byte-identical across runs.
  Json timing;
  timing["command"] = command;
  timing["config_hash"] = c.hash;
  timing["threads"] = config.at("threads");
  timing["runtime_ms"] = ms;
  const auto timing_path = std::filesystem::path(c.stem.string() + ".timing.json");
  io::write_text(timing_path, timing.dump(2) + "\n");
  c.out.files.push_back(timing_path);

  c.out.exit_code = pass ? 0 : 1;
  c.out.summary = command + ": " + (pass ? "PASS" : "FAIL") + " " + c.out.summary + " [" + fmt(std::round(ms)) + " ms]";
  return c.out;
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Randomly scaled fractional Brownian motion: simulation and verification"};
  std::string command, config_path, out_dir;
  std::vector<std::string> sets;
  unsigned threads = 0;
  std::uint64_t seed = 0;
  app.add_option("command", command, "simulate | moments | ito-check | solve | kernel-check | phi-k | density-check | report")
      ->required();
  app.add_option("-c,--config", config_path, "JSON config file");
  app.add_option("--set", sets, "dotted.key=value overrides (repeatable)");
  auto* thr = app.add_option("--threads", threads, "worker threads (0 = hardware concurrency)");
  auto* sd = app.add_option("--seed", seed, "root seed");
  app.add_option("-o,--out", out_dir, "output directory (default $RSFBM_OUTPUT_DIR or .)");
  app.allow_extras();
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }
  try {
    Json cfg = default_config();
    if (!config_path.empty()) merge_into(cfg, load_config_file(config_path));
    if (std::find(commands().begin(), commands().end(), command) == commands().end())
      throw ConfigError("unknown command '" + command + "'");
    cfg["command"] = command;
    const std::string section = section_of(command);
    auto put = [&](std::string key, const std::string& value) {
      for (char& ch : key)
        if (ch == '-') ch = '_';
      if (key.find('.') == std::string::npos && !cfg.contains(key)) key = section + "." + key;
      apply_override(cfg, key, value);
    };
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
      put(s.substr(0, eq), s.substr(eq + 1));
    }
    const auto extras = app.remaining();
    for (std::size_t i = 0; i < extras.size(); ++i) {
      const std::string& a = extras[i];
      if (a.rfind("--", 0) != 0) throw ConfigError("unexpected argument '" + a + "'");
      const auto eq = a.find('=');
      if (eq != std::string::npos) {
        put(a.substr(2, eq - 2), a.substr(eq + 1));
      } else {
        if (i + 1 >= extras.size()) throw ConfigError("flag " + a + " needs a value");
        put(a.substr(2), extras[++i]);
      }
    }
    if (*thr) cfg["threads"] = threads;
    if (*sd) cfg["seed"] = seed;
    if (!cfg.at("threads").is_number_unsigned()) throw ConfigError("threads must be a non-negative integer");
    set_default_threads(cfg.at("threads").get<unsigned>());
    const std::filesystem::path dir = out_dir.empty() ? io::default_output_dir() : std::filesystem::path(out_dir);
    const Outcome o = dispatch(cfg, dir);
    out << o.summary << "\n";
    return o.exit_code;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
  } catch (const PreconditionError& e) {
    err << "invalid parameters: " << e.what() << "\n";
  } catch (const DomainError& e) {
    err << "invalid parameters: " << e.what() << "\n";
  } catch (const UnsupportedError& e) {
    err << "unsupported: " << e.what() << "\n";
  } catch (const nlohmann::json::exception& e) {
    err << "config error: " << e.what() << "\n";
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace rsfbm::cli
