#include "rsfbm/stochint.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include <json.hpp>

#include "rsfbm/parallel.h"
#include "rsfbm/quadrature.h"

namespace rsfbm {

namespace {

constexpr double kE = std::numbers::e;

// sup_{a>0, z} K a^p |z|^q e^{-c a - lambda z^2}
double monomial_bound(double K, double p, double q, double c, double lambda) {
  double b = K;
  if (p > 0.0) b *= std::pow(p / (c * kE), p);
  if (q > 0.0) b *= std::pow(q / (2.0 * lambda * kE), 0.5 * q);
  return b;
}

bool polynomial_c(double radius, double& c, std::string& why) {
  if (!(radius > 0.0)) {
    why = "c < R_A/2 cannot hold: R_A = 0 while the functional grows polynomially in a";
    return false;
  }
  c = std::isinf(radius) ? 0.5 : 0.25 * radius;
  return true;
}

struct Clock {
  // Variance-term nodes: either in u = v(t)/v(T) (vw = true) or in t.
  std::vector<double> t_var, w_var, v_at;
  bool variance_clock = true;
  // Time-term nodes in t.
  std::vector<double> t_time, w_time;
  double vT = 0.0;
};

bool nu_keeps_sign(const Integrand& nu) {
  if (nu.kind() != Integrand::Kind::tabulated) return true;
  bool pos = false, neg = false;
  for (double v : nu.values()) {
    pos |= v > 0.0;
    neg |= v < 0.0;
  }
  return !(pos && neg);
}

// Grading of the variance clock w = v(T) u^m. For laws with E[A] = inf the
// mean of A d2F/dz2 behaves like w^{rho-1} near 0; m = 3/rho turns that into
// a smooth function of u and resolves e^{-a w/2} up to a ~ 1e20.
double clock_grading(const DiffusionModel& model, double requested) {
  if (requested > 0.0) return requested;
  if (const auto* g = std::get_if<GammaGrey>(&model.variant())) return 3.0 / g->rho;
  return 1.0;
}

Clock make_clock(const Functional& F, const HurstModel& h, const Integrand& nu, double T, std::size_t n, double m) {
  Clock c;
  c.vT = weighted_variance(h, nu, T);
  c.variance_clock = nu_keeps_sign(nu) && c.vT > 0.0;
  if (c.variance_clock) {
    const quad::Rule gl = quad::gauss_legendre(n, 0.0, 1.0);
    for (std::size_t j = 0; j < gl.size(); ++j) {
      const double u = gl.nodes[j];
      const double w = c.vT * std::pow(u, m);
      c.t_var.push_back(inverse_weighted_variance(h, nu, T, w));
      c.w_var.push_back(0.5 * c.vT * m * std::pow(u, m - 1.0) * gl.weights[j]);
      c.v_at.push_back(w);
    }
  } else {
    const quad::Rule gl = quad::gauss_legendre(n, 0.0, T);
    for (std::size_t j = 0; j < gl.size(); ++j) {
      c.t_var.push_back(gl.nodes[j]);
      c.w_var.push_back(0.5 * gl.weights[j] * variance_derivative(h, nu, gl.nodes[j]));
      c.v_at.push_back(weighted_variance(h, nu, gl.nodes[j]));
    }
  }
  if (F.time_dependent) {
    const quad::Rule gl = quad::gauss_legendre(n, 0.0, T);
    c.t_time = gl.nodes;
    c.w_time = gl.weights;
  }
  return c;
}

double max_nu_on(const Integrand& nu, double T) { return nu.max_abs(T); }

}  // namespace

Functional functional_power(int n) {
  if (n < 2 || (n & 1)) throw DomainError("power functional needs an even exponent >= 2");
  Functional f;
  f.name = "z" + std::to_string(n);
  f.F = [n](double, double z, double) { return std::pow(z, n); };
  f.dt = [](double, double, double) { return 0.0; };
  f.dz = [n](double, double z, double) { return n * std::pow(z, n - 1); };
  f.dzz = [n](double, double z, double) { return n * (n - 1) * std::pow(z, n - 2); };
  // E[Z^n] = (n-1)!!
  auto gauss_moment = [](int k, double var) {
    double m = 1.0;
    for (int j = k - 1; j > 1; j -= 2) m *= j;
    return m * std::pow(var, k / 2);
  };
  f.mean_F = [n, gauss_moment](double, double var, double) { return gauss_moment(n, var); };
  f.mean_dt = [](double, double, double) { return 0.0; };
  f.mean_dzz = [n, gauss_moment](double, double var, double) { return n * (n - 1) * gauss_moment(n - 2, var); };
  f.certify = [n](double radius, double lambda_max, GrowthCertificate& g, std::string& why) {
    if (!polynomial_c(radius, g.c, why)) return false;
    g.lambda = 0.5 * lambda_max;
    const double dn = n;
    g.C = std::max({monomial_bound(1.0, dn / 2, dn, g.c, g.lambda),
                    monomial_bound(dn, (dn + 1) / 2, dn - 1, g.c, g.lambda),
                    monomial_bound(dn * (dn - 1), dn / 2, dn - 2, g.c, g.lambda)});
    return true;
  };
  return f;
}

Functional functional_cos() {
  Functional f;
  f.name = "cos";
  f.F = [](double, double z, double) { return std::cos(z); };
  f.dt = [](double, double, double) { return 0.0; };
  f.dz = [](double, double z, double) { return -std::sin(z); };
  f.dzz = [](double, double z, double) { return -std::cos(z); };
  f.mean_F = [](double, double var, double) { return std::exp(-0.5 * var); };
  f.mean_dt = [](double, double, double) { return 0.0; };
  f.mean_dzz = [](double, double var, double) { return -std::exp(-0.5 * var); };
  f.certify = [](double radius, double lambda_max, GrowthCertificate& g, std::string& why) {
    if (!polynomial_c(radius, g.c, why)) return false;
    g.lambda = 0.5 * lambda_max;
    g.C = std::max(1.0, 1.0 / (g.c * kE));
    return true;
  };
  return f;
}

Functional functional_exp(double kappa) {
  if (!std::isfinite(kappa)) throw DomainError("exponential functional needs finite kappa");
  Functional f;
  f.name = "exp:" + std::to_string(kappa);
  f.F = [kappa](double, double z, double) { return std::exp(kappa * z); };
  f.dt = [](double, double, double) { return 0.0; };
  f.dz = [kappa](double, double z, double) { return kappa * std::exp(kappa * z); };
  f.dzz = [kappa](double, double z, double) { return kappa * kappa * std::exp(kappa * z); };
  f.mean_F = [kappa](double, double var, double) { return std::exp(0.5 * kappa * kappa * var); };
  f.mean_dt = [](double, double, double) { return 0.0; };
  f.mean_dzz = [kappa](double, double var, double) { return kappa * kappa * std::exp(0.5 * kappa * kappa * var); };
  f.certify = [kappa](double radius, double lambda_max, GrowthCertificate& g, std::string& why) {
    const double k2 = kappa * kappa;
    if (!(radius > 0.0)) {
      why = "c < R_A/2 cannot hold: R_A = 0";
      return false;
    }
    double eps = 0.5;
    if (std::isinf(radius)) {
      g.lambda = 0.5 * lambda_max;
    } else {
      // k sqrt(a)|z| <= k^2 a/(4 lambda) + lambda z^2 needs lambda in (k^2/(2 R_A), lambda_max)
      const double lo = k2 / (2.0 * radius);
      if (!(lo < lambda_max)) {
        why = "growth rate k exceeds sqrt(2 R_A)/(2 T^H max|nu|)";
        return false;
      }
      g.lambda = 0.5 * (lo + lambda_max);
      eps = 0.5 * (0.5 * radius - k2 / (4.0 * g.lambda));
    }
    g.c = k2 / (4.0 * g.lambda) + eps;
    g.C = std::max({1.0, std::abs(kappa) / (eps * kE), k2 / (eps * kE)});
    return true;
  };
  return f;
}

Functional functional_from_name(const std::string& name) {
  if (name == "z2") return functional_power(2);
  if (name == "z4") return functional_power(4);
  if (name == "cos") return functional_cos();
  if (name.rfind("exp:", 0) == 0) return functional_exp(std::stod(name.substr(4)));
  if (name.size() > 1 && name[0] == 'z') return functional_power(std::stoi(name.substr(1)));
  throw PreconditionError("unknown functional '" + name + "' (expected z2, z4, cos or exp:<kappa>)");
}

double exponential_growth_bound(double radius, double H, double T, double max_nu) {
  if (max_nu == 0.0) return std::numeric_limits<double>::infinity();
  return std::sqrt(2.0 * radius) / (2.0 * std::pow(T, H) * max_nu);
}

Admissibility check_admissibility(const Functional& F, const HurstModel& h, const Integrand& nu,
                                  const DiffusionModel& model, double T) {
  Admissibility res;
  const double m = max_nu_on(nu, T);
  res.lambda_max = m == 0.0 ? std::numeric_limits<double>::infinity() : std::pow(2.0 * std::pow(T, h.H()) * m, -2.0);
  const double lam_cap = std::isinf(res.lambda_max) ? 1.0 : res.lambda_max;
  if (!F.certify) {
    res.violated = "functional carries no growth certificate";
    return res;
  }
  std::string why;
  if (!F.certify(model.radius(), lam_cap, res.cert, why)) {
    res.violated = why;
    return res;
  }
  // Probe the certificate.
  const double sigma = std::sqrt(std::max(weighted_variance(h, nu, T), 1e-300));
  std::vector<double> as;
  if (model.sampleable()) {
    std::vector<double> draws = sample_scales(model, 4000, 0x5eedULL, 1);
    std::sort(draws.begin(), draws.end());
    for (int i = 0; i < 20; ++i) {
      const double q = 0.005 + 0.99 * i / 19.0;
      as.push_back(draws[static_cast<std::size_t>(q * (draws.size() - 1))]);
    }
  } else {
    for (int i = 0; i < 20; ++i) as.push_back(std::pow(10.0, -3.0 + 6.0 * i / 19.0));
  }
  const auto& g = res.cert;
  for (int it = 0; it < 20; ++it) {
    const double t = T * it / 19.0;
    for (int iz = 0; iz < 20; ++iz) {
      const double z = -6.0 * sigma + 12.0 * sigma * iz / 19.0;
      for (double a : as) {
        const double bound = g.C * std::exp(g.c * a + g.lambda * z * z) * (1.0 + 1e-12);
        const double x = std::sqrt(a) * z;
        const double vals[4] = {F.F(t, x, a), F.time_dependent ? F.dt(t, x, a) : 0.0, a * F.dz(t, x, a),
                                a * F.dzz(t, x, a)};
        for (double v : vals)
          if (std::abs(v) > bound) {
            res.violated = "growth bound |F(t,sqrt(a)z,a)| <= C exp(c a + lambda z^2) violated at t=" +
                           std::to_string(t) + ", z=" + std::to_string(z) + ", a=" + std::to_string(a);
            return res;
          }
      }
    }
  }
  res.ok = true;
  return res;
}

std::string ItoReport::to_json() const {
  nlohmann::json j;
  j["functional"] = functional;
  j["model"] = model;
  j["H"] = H;
  j["T"] = T;
  j["lhs"] = lhs;
  j["rhs_terms"] = {{"initial", initial}, {"time_term", time_term}, {"variance_term", variance_term}};
  j["residual"] = residual;
  j["mc_stderr"] = mc_stderr;
  if (std::isfinite(quadrature_residual))
    j["quadrature_residual"] = quadrature_residual;
  else
    j["quadrature_residual"] = nullptr;
  j["n_paths"] = n_paths;
  j["admissible"] = admissible;
  j["note"] = note;
  return j.dump(2);
}

ItoReport ito_expectation_residual_mc(const Functional& F, const HurstModel& h, const Integrand& nu,
                                      const DiffusionModel& model, double T, std::size_t n_paths, std::uint64_t seed,
                                      const ItoOptions& opts) {
  check_admissible(h, nu);
  if (!(T > 0.0)) throw DomainError("Ito check needs T > 0");
  if (!model.sampleable()) throw UnsupportedError(model.describe() + " is not sampleable");
  if (n_paths < 2) throw DomainError("Ito check needs at least 2 paths");
  ItoReport rep;
  rep.functional = F.name;
  rep.model = model.describe();
  rep.H = h.H();
  rep.T = T;
  rep.n_paths = n_paths;
  const Admissibility adm = check_admissibility(F, h, nu, model, T);
  rep.admissible = adm.ok;
  if (!adm.ok) {
    if (opts.enforce_admissibility) throw PreconditionError("functional " + F.name + " is not admissible: " + adm.violated);
    rep.note = "admissibility gate bypassed: " + adm.violated;
  }

  const Clock clk = make_clock(F, h, nu, T, opts.n_time_nodes, clock_grading(model, opts.clock_grading));
  // Union grid with index maps.
  std::vector<double> pts{0.0, T};
  pts.insert(pts.end(), clk.t_var.begin(), clk.t_var.end());
  pts.insert(pts.end(), clk.t_time.begin(), clk.t_time.end());
  std::sort(pts.begin(), pts.end());
  std::vector<double> uniq;
  for (double p : pts)
    if (uniq.empty() || p > uniq.back() * (1.0 + 1e-14) + 1e-300) uniq.push_back(p);
  auto index_of = [&](double t) {
    const auto it = std::lower_bound(uniq.begin(), uniq.end(), t * (1.0 - 1e-14) - 1e-300);
    return static_cast<std::size_t>(it - uniq.begin());
  };
  std::vector<std::size_t> iv, it;
  for (double t : clk.t_var) iv.push_back(index_of(t));
  for (double t : clk.t_time) it.push_back(index_of(t));
  const std::size_t iT = uniq.size() - 1;

  FbmOptions fo;
  fo.method = FbmMethod::cholesky;
  fo.threads = opts.threads;
  const PathEnsemble ens = generate_scaled(h, nu, TimeGrid::from_points(uniq), model, n_paths, seed, fo);

  std::vector<double> r_lhs(n_paths), r_init(n_paths), r_time(n_paths), r_var(n_paths);
  parallel_for(
      n_paths,
      [&](std::size_t p) {
        const double a = ens.a_values[p];
        const auto row = ens.row(p);
        r_lhs[p] = F.F(T, row[iT], a);
        r_init[p] = F.F(0.0, 0.0, a);
        double tt = 0.0;
        for (std::size_t k = 0; k < it.size(); ++k) tt += clk.w_time[k] * F.dt(clk.t_time[k], row[it[k]], a);
        r_time[p] = tt;
        double vv = 0.0;
        for (std::size_t j = 0; j < iv.size(); ++j) vv += clk.w_var[j] * a * F.dzz(clk.t_var[j], row[iv[j]], a);
        r_var[p] = vv;
      },
      opts.threads);

  // Reductions in path order.
  double s_lhs = 0, s_init = 0, s_time = 0, s_var = 0;
  for (std::size_t p = 0; p < n_paths; ++p) {
    s_lhs += r_lhs[p];
    s_init += r_init[p];
    s_time += r_time[p];
    s_var += r_var[p];
  }
  const double N = static_cast<double>(n_paths);
  rep.lhs = s_lhs / N;
  rep.initial = s_init / N;
  rep.time_term = s_time / N;
  rep.variance_term = s_var / N;
  rep.residual = rep.lhs - rep.initial - rep.time_term - rep.variance_term;
  double ss = 0.0;
  for (std::size_t p = 0; p < n_paths; ++p) {
    const double d = (r_lhs[p] - r_init[p] - r_time[p] - r_var[p]) - rep.residual;
    ss += d * d;
  }
  rep.mc_stderr = std::sqrt(ss / (N - 1.0) / N);
  return rep;
}

QuadratureTerms ito_expectation_quadrature(const Functional& F, const HurstModel& h, const Integrand& nu,
                                           const DiffusionModel& model, double T, const ItoOptions& opts) {
  check_admissible(h, nu);
  if (!(T > 0.0)) throw DomainError("Ito check needs T > 0");
  const bool atom = std::holds_alternative<Dirac>(model.variant());
  if (!atom && !model.has_density())
    throw UnsupportedError("quadrature oracle needs a density or a Dirac law; " + model.describe() + " has neither");
  const Clock clk = make_clock(F, h, nu, T, opts.n_time_nodes, clock_grading(model, opts.clock_grading));
  std::vector<double> v_time;
  for (double t : clk.t_time) v_time.push_back(weighted_variance(h, nu, t));
  const quad::Rule gh = quad::gauss_hermite(opts.gh_nodes);

  auto expect = [&](const Functional::Fn& g, const Functional::Fn& mean, double t, double var, double a) {
    if (mean) return mean(t, a * var, a);
    const double s = std::sqrt(a * var);
    double acc = 0.0;
    for (std::size_t i = 0; i < gh.size(); ++i) acc += gh.weights[i] * g(t, s * gh.nodes[i], a);
    return acc;
  };
  auto terms_at = [&](double a) {
    QuadratureTerms q;
    q.lhs = expect(F.F, F.mean_F, T, clk.vT, a);
    q.initial = F.F(0.0, 0.0, a);
    for (std::size_t k = 0; k < clk.t_time.size(); ++k) q.time_term += clk.w_time[k] * expect(F.dt, F.mean_dt, clk.t_time[k], v_time[k], a);
    for (std::size_t j = 0; j < clk.t_var.size(); ++j)
      q.variance_term += clk.w_var[j] * a * expect(F.dzz, F.mean_dzz, clk.t_var[j], clk.v_at[j], a);
    q.residual = q.lhs - q.initial - q.time_term - q.variance_term;
    return q;
  };

  if (atom) return terms_at(std::get<Dirac>(model.variant()).a0);

  // Laws with a density: the A-expectation is taken at each clock node and the
  // clock sum comes last. A fixed clock cannot resolve a e^{-a w/2} in w once
  // a >> 1/w_min, while E[A e^{-A w/2}] only carries the w^{rho-1} endpoint
  // behaviour the graded clock is built for.
  const double lower = model.support_lower();
  auto a_mean = [&](const std::function<double(double)>& g, const char* what) {
    // a f(a) |g(a)| sampled over the decades up to 1e60 must be decaying at
    // the far end; this exposes infinite expectations before the adaptive rule
    // wanders off into overflow.
    std::vector<double> probe;
    for (int k = 2; k <= 60; k += 2) {
      const double a = lower + std::pow(10.0, k);
      const double d = model.density(a);
      const double v = d == 0.0 ? 0.0 : a * d * std::abs(g(a));
      if (!std::isfinite(v))
        throw EvaluationError(std::string("expectation of the ") + what + " under " + model.describe() +
                                  " is infinite (integrand overflows in a)",
                              std::numeric_limits<double>::infinity());
      probe.push_back(v);
    }
    const std::size_t n = probe.size();
    const double peak = *std::max_element(probe.begin(), probe.end());
    const bool decaying = probe[n - 1] == 0.0 || (probe[n - 1] < probe[n - 2] && probe[n - 2] < probe[n - 3] &&
                                                  probe[n - 1] <= 1e-3 * peak);
    if (!decaying)
      throw EvaluationError(std::string("expectation of the ") + what + " under " + model.describe() +
                                " is infinite (integrand does not decay in a)",
                            std::numeric_limits<double>::infinity());
    try {
      return quad::exp_map([&](double d) { return model.density_above_lower(d) * g(lower + d); }, {1e-14, 1e-11});
    } catch (const EvaluationError& e) {
      throw EvaluationError(std::string("expectation of the ") + what + " under " + model.describe() +
                                " does not exist or does not converge: " + e.what(),
                            e.partial_estimate());
    }
  };
  QuadratureTerms out;
  out.lhs = a_mean([&](double a) { return expect(F.F, F.mean_F, T, clk.vT, a); }, "left-hand side");
  out.initial = a_mean([&](double a) { return F.F(0.0, 0.0, a); }, "initial term");
  for (std::size_t k = 0; k < clk.t_time.size(); ++k)
    out.time_term += clk.w_time[k] * a_mean([&](double a) { return expect(F.dt, F.mean_dt, clk.t_time[k], v_time[k], a); },
                                            "time term");
  for (std::size_t j = 0; j < clk.t_var.size(); ++j)
    out.variance_term +=
        clk.w_var[j] *
        a_mean([&](double a) { return a * expect(F.dzz, F.mean_dzz, clk.t_var[j], clk.v_at[j], a); }, "variance term");
  out.residual = out.lhs - out.initial - out.time_term - out.variance_term;
  return out;
}

double ito_expectation_residual_quadrature(const Functional& F, const HurstModel& h, const Integrand& nu,
                                           const DiffusionModel& model, double T, const ItoOptions& opts) {
  return ito_expectation_quadrature(F, h, nu, model, T, opts).residual;
}

QuadraticReport quadratic_identity_moments(const HurstModel& h, const DiffusionModel& model, double t,
                                           std::size_t n_paths, std::uint64_t seed, unsigned threads) {
  if (!(t > 0.0)) throw DomainError("quadratic identity needs t > 0");
  if (n_paths < 2) throw DomainError("quadratic identity needs at least 2 paths");
  FbmOptions fo;
  fo.method = FbmMethod::cholesky;
  fo.threads = threads;
  const PathEnsemble ens =
      generate_scaled(h, Integrand::constant(1.0), TimeGrid::from_points({0.0, t}), model, n_paths, seed, fo);
  const double t2h = std::pow(t, 2.0 * h.H());
  std::vector<double> s(n_paths);
  for (std::size_t p = 0; p < n_paths; ++p) {
    const double x = ens.at(p, 1);
    s[p] = 0.5 * (x * x - ens.a_values[p] * t2h);
  }
  const double N = static_cast<double>(n_paths);
  QuadraticReport r;
  double m1 = 0.0, m2 = 0.0;
  for (double v : s) {
    m1 += v;
    m2 += v * v;
  }
  r.mean = m1 / N;
  r.second = m2 / N;
  double d1 = 0.0, d2 = 0.0;
  for (double v : s) {
    d1 += (v - r.mean) * (v - r.mean);
    d2 += (v * v - r.second) * (v * v - r.second);
  }
  r.mean_se = std::sqrt(d1 / (N - 1.0) / N);
  r.second_se = std::sqrt(d2 / (N - 1.0) / N);
  const double ea2 = model.second_moment();
  r.expected_second = ea2 * t2h * t2h / 2.0;
  if (!std::isfinite(ea2)) {
    r.second_checked = false;
    r.note = "E[A^2] is infinite for " + model.describe() + "; second-moment check skipped";
  }
  return r;
}

PathEnsemble geometric_rsgp(double g0, const std::function<double(double)>& phi,
                            const std::function<double(double)>& r, const Integrand& nu, const HurstModel& h,
                            const DiffusionModel& model, const TimeGrid& grid, std::size_t n_paths,
                            std::uint64_t seed, ExponentConvention convention, const FbmOptions& opts) {
  if (!(g0 > 0.0)) throw DomainError("geometric process needs g0 > 0");
  for (double a : {1e4, 1e6, 1e8})
    if (phi(a) / std::sqrt(a) > 1.0 + 1e-9)
      throw PreconditionError("lim sup phi(a)/sqrt(a) <= 1 appears violated (phi(" + std::to_string(a) + ") too large)");
  PathEnsemble ens = generate_scaled(h, nu, grid, model, n_paths, seed, opts);
  const auto& pts = grid.points();
  std::vector<double> R(pts.size(), 0.0), w(pts.size(), 0.0);
  for (std::size_t j = 1; j < pts.size(); ++j) {
    R[j] = R[j - 1] + quad::gauss_kronrod(r, pts[j - 1], pts[j]);
    w[j] = convention == ExponentConvention::derivative ? variance_derivative(h, nu, pts[j])
                                                        : weighted_variance(h, nu, pts[j]);
  }
  const std::size_t n = pts.size();
  for (std::size_t p = 0; p < n_paths; ++p) {
    const double a = ens.a_values[p];
    const double ph = phi(a);
    ens.paths[p * n] = g0;
    for (std::size_t j = 1; j < n; ++j) {
      double& z = ens.paths[p * n + j];
      z = g0 * std::exp(ph * R[j] - 0.5 * a * w[j] + z);
    }
  }
  ens.model = model.describe();
  return ens;
}

}  // namespace rsfbm
