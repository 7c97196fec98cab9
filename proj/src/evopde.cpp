#include "rsfbm/evopde.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fftw_util.h"
#include "rsfbm/parallel.h"
#include "rsfbm/quadrature.h"
#include "rsfbm/specfun.h"
#include "rsfbm/stochint.h"

namespace rsfbm {

namespace {

constexpr double kPi = std::numbers::pi;
const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * kPi);

// Coefficients this far below the peak carry no information in double precision.
constexpr double kNegligible = 1e-30;

void check_grid(std::size_t N, double L) {
  if (N < 4 || (N & (N - 1)) != 0) throw DomainError("spectral grid size must be a power of two >= 4");
  if (!(L > 0.0) || !std::isfinite(L)) throw DomainError("spectral half-width L must be positive");
}

double sign_k(std::size_t k) { return (k & 1) ? -1.0 : 1.0; }

std::vector<std::complex<double>> fft(const std::vector<std::complex<double>>& in, int sign) {
  const std::size_t N = in.size();
  detail::FftwBuffer a(N), b(N);
  for (std::size_t i = 0; i < N; ++i) {
    a.p[i][0] = in[i].real();
    a.p[i][1] = in[i].imag();
  }
  detail::FftwPlan plan(static_cast<int>(N), a.p, b.p, sign);
  fftw_execute_dft(plan.plan, a.p, b.p);
  std::vector<std::complex<double>> out(N);
  for (std::size_t i = 0; i < N; ++i) out[i] = {b.p[i][0], b.p[i][1]};
  return out;
}

double peak_abs(const std::vector<std::complex<double>>& f) {
  double m = 0.0;
  for (const auto& c : f) m = std::max(m, std::abs(c));
  return m;
}

void require_same_h(double spec_H, const HurstModel& h) {
  if (std::abs(spec_H - h.H()) > 1e-14)
    throw PreconditionError("kernel and process use different H (" + std::to_string(spec_H) + " vs " +
                            std::to_string(h.H()) + ")");
}

void require_consistent(const KernelSpec& spec, const DiffusionModel& model) {
  const auto& v = model.variant();
  switch (spec.kind()) {
    case KernelSpec::Kind::gamma_grey:
      if (!std::holds_alternative<GammaGrey>(v) || std::get<GammaGrey>(v).rho != spec.rho())
        throw PreconditionError("gamma-grey kernel with rho=" + std::to_string(spec.rho()) +
                                " needs the gamma-grey law with the same rho, got " + model.describe());
      return;
    case KernelSpec::Kind::bender_butko: {
      const auto& k = *spec.kernel();
      if (std::holds_alternative<BenderButko>(v) && std::get<BenderButko>(v).kernel.describe() == k.describe()) return;
      if (k.is_ggbm() && std::holds_alternative<MittagLefflerLaw>(v) &&
          std::abs(std::get<MittagLefflerLaw>(v).beta - k.ggbm_beta()) < 1e-15)
        return;
      throw PreconditionError("kernel " + k.describe() + " needs a law with L[A] = Phi_k, got " + model.describe());
    }
    case KernelSpec::Kind::explicit_kernel:
      return;
  }
}

}  // namespace

// ---------------------------------------------------------------- spectral field

SpectralField::SpectralField(std::size_t N, double L) : N_(N), L_(L), values_(N, 0.0), fourier_(N) {
  check_grid(N, L);
}

SpectralField SpectralField::sample(const std::function<double(double)>& f, std::size_t N, double L) {
  SpectralField s(N, L);
  for (std::size_t j = 0; j < N; ++j) s.values_[j] = f(s.x(j));
  s.fourier_ = spectral_forward(s.values_, L);
  return s;
}

SpectralField SpectralField::from_fourier(std::vector<std::complex<double>> fourier, double L) {
  SpectralField s(fourier.size(), L);
  s.values_ = spectral_inverse(fourier, L);
  s.fourier_ = std::move(fourier);
  return s;
}

double SpectralField::xi(std::size_t k) const {
  const double kk = k < N_ / 2 ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(N_);
  return kk * kPi / L_;
}

double SpectralField::evaluate(double x) const {
  const double dxi = kPi / L_;
  double acc = 0.0;
  for (std::size_t k = 0; k < N_; ++k) {
    const double w = xi(k);
    if (k == N_ / 2)
      acc += fourier_[k].real() * std::cos(w * x);
    else
      acc += (fourier_[k] * std::complex<double>(std::cos(w * x), std::sin(w * x))).real();
  }
  return acc * dxi * kInvSqrt2Pi;
}

std::vector<std::complex<double>> spectral_forward(const std::vector<double>& values, double L) {
  const std::size_t N = values.size();
  check_grid(N, L);
  std::vector<std::complex<double>> in(values.begin(), values.end());
  auto out = fft(in, FFTW_FORWARD);
  const double scale = (2.0 * L / static_cast<double>(N)) * kInvSqrt2Pi;
  for (std::size_t k = 0; k < N; ++k) out[k] *= scale * sign_k(k);
  return out;
}

std::vector<double> spectral_inverse(const std::vector<std::complex<double>>& fourier, double L) {
  const std::size_t N = fourier.size();
  check_grid(N, L);
  std::vector<std::complex<double>> in(N);
  for (std::size_t k = 0; k < N; ++k) in[k] = fourier[k] * sign_k(k);
  const auto out = fft(in, FFTW_BACKWARD);
  const double scale = (kPi / L) * kInvSqrt2Pi;
  std::vector<double> v(N);
  for (std::size_t j = 0; j < N; ++j) v[j] = out[j].real() * scale;
  return v;
}

InitialDatum InitialDatum::gaussian(double amplitude, double variance) {
  if (!(variance > 0.0)) throw DomainError("Gaussian datum needs variance > 0");
  InitialDatum d;
  d.name = "gaussian";
  d.u0 = [=](double x) { return amplitude * std::exp(-x * x / (2.0 * variance)); };
  d.fourier = [=](double xi) {
    return std::complex<double>(amplitude * std::sqrt(variance) * std::exp(-variance * xi * xi / 2.0), 0.0);
  };
  return d;
}

InitialDatum InitialDatum::custom(std::string name, std::function<double(double)> u0) {
  InitialDatum d;
  d.name = std::move(name);
  d.u0 = std::move(u0);
  return d;
}

// ---------------------------------------------------------------- solvers

SpectralField fourier_solve(const InitialDatum& u0, const HurstModel& h, const Integrand& nu,
                            const DiffusionModel& model, double t, const SpectralOptions& grid) {
  check_admissible(h, nu);
  if (!(t >= 0.0)) throw DomainError("fourier_solve needs t >= 0");
  SpectralField f0 = SpectralField::sample(u0.u0, grid.N, grid.L);
  double umax = 0.0;
  for (double v : f0.values()) umax = std::max(umax, std::abs(v));
  const double edge = std::max(std::abs(u0.u0(-grid.L)), std::abs(u0.u0(grid.L)));
  if (edge > umax * std::pow(1.0 + grid.L, -4.0))
    throw PreconditionError("initial datum does not decay on [-L, L]: |u0(+-L)| = " + std::to_string(edge) +
                            "; enlarge L");
  const double fmax = peak_abs(f0.fourier());
  if (std::abs(f0.fourier()[grid.N / 2]) > 1e-10 * fmax)
    throw PreconditionError("spectral grid too coarse: |F[u0]| at xi_max is " +
                            std::to_string(std::abs(f0.fourier()[grid.N / 2]) / fmax) + " of its peak; increase N");
  if (t == 0.0) return f0;
  const double v = weighted_variance(h, nu, t);
  std::vector<std::complex<double>> F = f0.fourier();
  // The multiplier depends on |k| only.
  std::vector<double> mult(grid.N / 2 + 1, 0.0);
  std::vector<char> needed(grid.N / 2 + 1, 0);
  for (std::size_t k = 0; k < grid.N; ++k) {
    const std::size_t kk = k <= grid.N / 2 ? k : grid.N - k;
    if (std::abs(F[k]) > kNegligible * fmax) needed[kk] = 1;
  }
  for (std::size_t kk = 0; kk <= grid.N / 2; ++kk)
    if (needed[kk]) {
      const double xi = static_cast<double>(kk) * kPi / grid.L;
      mult[kk] = model.laplace(v * xi * xi / 2.0);
    }
  for (std::size_t k = 0; k < grid.N; ++k) F[k] *= mult[k <= grid.N / 2 ? k : grid.N - k];
  return SpectralField::from_fourier(std::move(F), grid.L);
}

PointEstimates fk_solve(const InitialDatum& u0, const HurstModel& h, const Integrand& nu, const DiffusionModel& model,
                        double t, const std::vector<double>& x_points, std::size_t n_paths, std::uint64_t seed,
                        unsigned threads) {
  check_admissible(h, nu);
  if (!(t >= 0.0)) throw DomainError("fk_solve needs t >= 0");
  if (!model.sampleable())
    throw UnsupportedError(model.describe() + " cannot be sampled; use fourier_solve for this law");
  PointEstimates out;
  out.x = x_points;
  out.n_paths = n_paths;
  out.value.resize(x_points.size());
  out.stderr_.assign(x_points.size(), 0.0);
  if (t == 0.0) {
    for (std::size_t i = 0; i < x_points.size(); ++i) out.value[i] = u0.u0(x_points[i]);
    return out;
  }
  if (n_paths < 2) throw DomainError("fk_solve needs at least 2 paths");
  FbmOptions fo;
  fo.method = FbmMethod::cholesky;
  fo.threads = threads;
  const PathEnsemble ens = generate_scaled(h, nu, TimeGrid::from_points({0.0, t}), model, n_paths, seed, fo);
  const double N = static_cast<double>(n_paths);
  parallel_for(
      x_points.size(),
      [&](std::size_t i) {
        double s = 0.0;
        for (std::size_t p = 0; p < n_paths; ++p) s += u0.u0(x_points[i] + ens.at(p, 1));
        const double m = s / N;
        double ss = 0.0;
        for (std::size_t p = 0; p < n_paths; ++p) {
          const double d = u0.u0(x_points[i] + ens.at(p, 1)) - m;
          ss += d * d;
        }
        out.value[i] = m;
        out.stderr_[i] = std::sqrt(ss / (N - 1.0) / N);
      },
      threads);
  return out;
}

double phi_k(const HomogeneousKernel& kernel, double z, const specfun::Tolerance& tol) {
  if (!(z >= 0.0)) throw DomainError("phi_k needs z >= 0");
  return kernel.phi(z, tol);
}

double damped_rho_ml(double rho, double z, const specfun::Tolerance& tol) {
  if (!(rho > 0.0 && rho < 1.0)) throw DomainError("rho must lie in (0,1)");
  if (!(z >= 0.0)) throw DomainError("damped rho-exponential needs z >= 0");
  if (z == 0.0) return 1.0 / std::tgamma(rho);
  const double zr = std::pow(z, rho);
  if (zr <= specfun::series_radius(rho)) return std::exp(-z) * specfun::mittag_leffler_series(rho, rho, zr, tol);
  return std::pow(z, 1.0 - rho) / rho + std::exp(-z) * specfun::mittag_leffler_integral_part(rho, rho, zr, tol);
}

// ---------------------------------------------------------------- kernels

KernelSpec KernelSpec::gamma_grey(double rho, double H) {
  if (!(rho > 0.0 && rho < 1.0)) throw DomainError("gamma-grey kernel: rho in (0,1) required");
  if (!(H > 0.0 && H < 1.0)) throw DomainError("gamma-grey kernel: H in (0,1) required");
  KernelSpec k;
  k.kind_ = Kind::gamma_grey;
  k.rho_ = rho;
  k.H_ = H;
  k.name_ = "gamma_grey";
  return k;
}

KernelSpec KernelSpec::bender_butko(HomogeneousKernel kernel) {
  if (!(kernel.theta() > 0.0 && kernel.theta() < 2.0))
    throw DomainError("Bender-Butko kernel: theta in (0,2) required so that H = theta/2 is a Hurst index");
  KernelSpec k;
  k.kind_ = Kind::bender_butko;
  k.H_ = kernel.theta() / 2.0;
  k.kernel_ = std::move(kernel);
  k.name_ = "bender_butko";
  return k;
}

KernelSpec KernelSpec::explicit_kernel(Fn K, double H, std::string name) {
  if (!(H > 0.0 && H < 1.0)) throw DomainError("explicit kernel: H in (0,1) required");
  KernelSpec k;
  k.kind_ = Kind::explicit_kernel;
  k.H_ = H;
  k.K_ = std::move(K);
  k.name_ = std::move(name);
  return k;
}

std::string KernelSpec::describe() const {
  switch (kind_) {
    case Kind::gamma_grey:
      return "gamma_grey(rho=" + std::to_string(rho_) + ", H=" + std::to_string(H_) + ")";
    case Kind::bender_butko:
      return "bender_butko(" + kernel_->describe() + ")";
    case Kind::explicit_kernel:
      break;
  }
  return name_ + "(H=" + std::to_string(H_) + ")";
}

double KernelSpec::operator()(double t, double s, double xi) const {
  if (!(s > 0.0 && s < t)) throw DomainError("kernel needs 0 < s < t");
  switch (kind_) {
    case Kind::gamma_grey: {
      const double d = std::pow(t, 2 * H_) - std::pow(s, 2 * H_);
      return -2.0 * H_ * std::pow(s, 2 * H_ - 1.0) * std::pow(xi, rho_) * std::pow(d, rho_ - 1.0) *
             damped_rho_ml(rho_, xi * d);
    }
    case Kind::bender_butko:
      return -(*kernel_)(t, s)*xi;
    case Kind::explicit_kernel:
      break;
  }
  return K_(t, s, xi);
}

double kernel_residual(const KernelSpec& spec, const DiffusionModel& model, const HurstModel& h, double t, double xi) {
  require_same_h(spec.H(), h);
  require_consistent(spec, model);
  if (!(t > 0.0 && xi > 0.0)) throw DomainError("kernel_residual needs t > 0 and xi > 0");
  const double H2 = 2.0 * h.H();
  const double lhs = model.laplace(std::pow(t, H2) * xi);
  const quad::Tolerances tol{1e-15, 1e-13};
  double integral = 0.0;
  switch (spec.kind()) {
    case KernelSpec::Kind::gamma_grey: {
      // w = s^{2H}: the kernel becomes -xi^rho (W-w)^{rho-1} e^{-xi(W-w)} E_{rho,rho}((xi(W-w))^rho).
      const double rho = spec.rho();
      const double W = std::pow(t, H2);
      auto f = [&](double w, double, double r) {
        return std::pow(r, rho - 1.0) * damped_rho_ml(rho, xi * r) * model.laplace(w * xi);
      };
      integral = -std::pow(xi, rho) * quad::tanh_sinh(f, 0.0, W, tol);
      break;
    }
    case KernelSpec::Kind::bender_butko: {
      const auto& k = *spec.kernel();
      const double th = k.theta();
      auto f = [&](double s, double left, double right) {
        return std::pow(t, th - 1.0) * k.k_unit(left / t, right / t) * model.laplace(std::pow(s, th) * xi);
      };
      integral = -xi * quad::tanh_sinh(f, 0.0, t, tol);
      break;
    }
    case KernelSpec::Kind::explicit_kernel: {
      // Nodes that round onto an endpoint carry negligible weight; a generic
      // kernel cannot be handed the endpoint distance, so they are dropped.
      auto f = [&](double s) {
        if (!(s > 0.0 && s < t)) return 0.0;
        return spec(t, s, xi) * model.laplace(std::pow(s, H2) * xi);
      };
      // Without endpoint distances a generic kernel is only good to ~1e-12.
      integral = quad::tanh_sinh(f, 0.0, t, {1e-13, 1e-11});
      break;
    }
  }
  return std::abs(lhs - 1.0 - integral);
}

// ---------------------------------------------------------------- evolution equation

PdeTimeRule pde_time_rule(const KernelSpec& spec, const HurstModel& h, const Integrand& nu, double t,
                          std::size_t n_nodes) {
  require_same_h(spec.H(), h);
  check_admissible(h, nu);
  if (!(t > 0.0)) throw DomainError("pde_time_rule needs t > 0");
  const double H2 = 2.0 * h.H();
  const double sig_t = time_change(h, nu, t);
  PdeTimeRule rule;
  // Every rule works on S = sigma(s), where sigma'(s) ds = dS; the node in s
  // solves v(s) = S^{2H}.
  auto push = [&](double S) {
    rule.sigma.push_back(S);
    rule.s.push_back(inverse_weighted_variance(h, nu, t, std::pow(S, H2)));
  };
  switch (spec.kind()) {
    case KernelSpec::Kind::gamma_grey: {
      // w = S^{2H}; Jacobi weight (W - w)^{rho-1}.
      const double rho = spec.rho();
      const double W = std::pow(sig_t, H2);
      const quad::Rule gj = quad::gauss_jacobi_unit(n_nodes, rho - 1.0, 0.0);
      std::vector<double> om, dist;
      for (std::size_t j = 0; j < gj.size(); ++j) {
        push(std::pow(W * gj.nodes[j], 1.0 / H2));
        om.push_back(std::pow(W, rho) * gj.weights[j]);
        dist.push_back(W * (1.0 - gj.nodes[j]));
      }
      rule.weight = [om, dist, rho](std::size_t j, double q) {
        if (q == 0.0) return 0.0;
        return -std::pow(q, rho) * om[j] * damped_rho_ml(rho, q * dist[j]);
      };
      break;
    }
    case KernelSpec::Kind::bender_butko: {
      const auto& k = *spec.kernel();
      if (k.is_ggbm()) {
        // w = S^{alpha/beta}; k dS = (W - w)^{beta-1} dw / Gamma(beta).
        const double a = k.ggbm_alpha(), b = k.ggbm_beta();
        const double W = std::pow(sig_t, a / b);
        const quad::Rule gj = quad::gauss_jacobi_unit(n_nodes, b - 1.0, 0.0);
        std::vector<double> om;
        for (std::size_t j = 0; j < gj.size(); ++j) {
          push(std::pow(W * gj.nodes[j], b / a));
          om.push_back(std::pow(W, b) * gj.weights[j] / std::tgamma(b));
        }
        rule.weight = [om](std::size_t j, double q) { return -q * om[j]; };
      } else {
        const quad::EndpointRule ts = quad::tanh_sinh_rule(0.0, sig_t, 6);
        std::vector<double> om;
        const double th = k.theta();
        for (std::size_t j = 0; j < ts.size(); ++j) {
          push(ts.nodes[j]);
          om.push_back(ts.weights[j] * std::pow(sig_t, th - 1.0) * k.k_unit(ts.left[j] / sig_t, ts.right[j] / sig_t));
        }
        rule.weight = [om](std::size_t j, double q) { return -q * om[j]; };
      }
      break;
    }
    case KernelSpec::Kind::explicit_kernel: {
      const quad::Rule gl = quad::gauss_legendre(n_nodes, 0.0, sig_t);
      std::vector<double> om, S;
      for (std::size_t j = 0; j < gl.size(); ++j) {
        push(gl.nodes[j]);
        om.push_back(gl.weights[j]);
        S.push_back(gl.nodes[j]);
      }
      rule.weight = [om, S, spec, sig_t](std::size_t j, double q) {
        if (q == 0.0) return 0.0;
        return om[j] * spec(sig_t, S[j], q);
      };
      break;
    }
  }
  return rule;
}

double pde_residual(const SpectralField& u_t, const SpectralField& u0, const std::vector<SpectralField>& u_nodes,
                    const PdeTimeRule& rule) {
  const std::size_t N = u0.size();
  const double L = u0.half_width();
  if (u_t.size() != N || u_nodes.size() != rule.s.size())
    throw DomainError("pde_residual: fields do not match the time rule");
  for (const auto& f : u_nodes)
    if (f.size() != N || f.half_width() != L) throw DomainError("pde_residual: fields on different grids");
  const double fmax = std::max(peak_abs(u0.fourier()), peak_abs(u_t.fourier()));
  std::vector<std::complex<double>> R(N);
  std::vector<double> w(rule.s.size());
  std::vector<char> have(N / 2 + 1, 0);
  std::vector<std::vector<double>> weights(N / 2 + 1);
  for (std::size_t k = 0; k < N; ++k) {
    R[k] = u_t.fourier()[k] - u0.fourier()[k];
    const std::size_t kk = k <= N / 2 ? k : N - k;
    if (std::max(std::abs(u0.fourier()[k]), std::abs(u_t.fourier()[k])) <= kNegligible * fmax) continue;
    if (!have[kk]) {
      const double xi = u0.xi(kk);
      auto& wk = weights[kk];
      wk.resize(rule.s.size());
      for (std::size_t j = 0; j < rule.s.size(); ++j) wk[j] = rule.weight(j, xi * xi / 2.0);
      have[kk] = 1;
    }
    const auto& wk = weights[kk];
    for (std::size_t j = 0; j < rule.s.size(); ++j) R[k] -= wk[j] * u_nodes[j].fourier()[k];
  }
  const std::vector<double> r = spectral_inverse(R, L);
  double sup = 0.0;
  for (double v : r) sup = std::max(sup, std::abs(v));
  return sup;
}

double pde_residual(const InitialDatum& u0, const KernelSpec& spec, const DiffusionModel& model, const HurstModel& h,
                    const Integrand& nu, double t, const SpectralOptions& grid, std::size_t n_nodes) {
  if (spec.kind() != KernelSpec::Kind::explicit_kernel) require_consistent(spec, model);
  const PdeTimeRule rule = pde_time_rule(spec, h, nu, t, n_nodes);
  const SpectralField f0 = fourier_solve(u0, h, nu, model, 0.0, grid);
  const SpectralField ft = fourier_solve(u0, h, nu, model, t, grid);
  std::vector<SpectralField> nodes;
  nodes.reserve(rule.s.size());
  for (double s : rule.s) nodes.push_back(fourier_solve(u0, h, nu, model, s, grid));
  return pde_residual(ft, f0, nodes, rule);
}

// ---------------------------------------------------------------- superstatistical example

namespace {

void check_superstat(double x0, double nu, double rho, double delta, double t) {
  if (!(x0 > 0.0)) throw DomainError("x0 > 0 required");
  if (!(nu > 0.5)) throw DomainError("nu > 1/2 required for generalized gamma");
  if (!(rho > 1.0)) throw DomainError("rho > 1 required for generalized gamma");
  if (!(delta > 0.0 && delta < 2.0)) throw DomainError("delta = 2H in (0,2) required");
  if (!(t > 0.0)) throw DomainError("t > 0 required");
}


}  // namespace

double superstat_density_closed(double x0, double nu, double rho, double delta, double t, double x) {
  check_superstat(x0, nu, rho, delta, t);
  const double s = 4.0 * x0 * std::pow(t, delta);
  return rho / (std::tgamma(nu / rho) * std::sqrt(kPi * s)) * specfun::kraetzel(nu - 0.5, rho, x * x / s);
}

double superstat_density_mixture(double x0, double nu, double rho, double delta, double t, double x) {
  check_superstat(x0, nu, rho, delta, t);
  const double td = std::pow(t, delta);
  auto g = [&](double a) {
    const double var = a * td;
    return std::exp(-x * x / (2.0 * var)) / std::sqrt(2.0 * kPi * var) * generalized_gamma_density(2.0 * x0, nu, rho, a);
  };
  return quad::exp_map(g, {1e-14, 1e-12});
}

double superstat_density(double x0, double nu, double rho, double delta, double t, double x) {
  const double closed = superstat_density_closed(x0, nu, rho, delta, t, x);
  const double mix = superstat_density_mixture(x0, nu, rho, delta, t, x);
  if (std::abs(closed - mix) > 1e-6 * std::max(1.0, std::abs(closed)))
    throw NumericalError("superstatistical density: mixture " + std::to_string(mix) + " and closed form " +
                         std::to_string(closed) + " disagree");
  return closed;
}

double ek_identity_residual(double x0, double nu, double rho, double delta, double t, double x) {
  check_superstat(x0, nu, rho, delta, t);
  if (!(nu / rho - 1.0 < delta / 2.0)) throw PreconditionError("hypothesis nu/rho - 1 < delta/2 violated");
  const double td = std::pow(t, delta);
  auto u0 = [](double y) { return std::exp(-y * y / 2.0); };
  // E_y[u0(x + s y)] for standard normal y, s^2 = a t^delta.
  auto lhs_g = [&](double a) {
    const double v = 1.0 + a * td;
    return a * generalized_gamma_density(2.0 * x0, nu, rho, a) * std::exp(-x * x / (2.0 * v)) / std::sqrt(v);
  };
  const double lhs = quad::exp_map(lhs_g, {1e-14, 1e-12});
  auto rhs_g = [&](double y) {
    return (u0(x + y) + u0(x - y)) * superstat_density_closed(x0, nu + 1.0, rho, delta, t, y);
  };
  const double rhs = moment_shift_factor(2.0 * x0, nu, rho) * quad::exp_map(rhs_g, {1e-14, 1e-12});
  return std::abs(lhs - rhs);
}

// ---------------------------------------------------------------- multiplicative example

namespace {

void check_growth(const MultiplicativeDatum& u0, const HurstModel& h, const Integrand& nu, const DiffusionModel& model,
                  double t) {
  const double bound = exponential_growth_bound(model.radius(), h.H(), t, nu.max_abs(t));
  if (!(std::abs(u0.kappa) < bound))
    throw PreconditionError("growth rate " + std::to_string(u0.kappa) + " of " + u0.name +
                            " is not below sqrt(2 R_A)/(2 T^H max|nu|) = " + std::to_string(bound));
}

}  // namespace

PointEstimates multiplicative_fk(const MultiplicativeDatum& u0, const HurstModel& h, const Integrand& nu,
                                 const DiffusionModel& model, double t, const std::vector<double>& x_points,
                                 std::size_t n_paths, std::uint64_t seed, unsigned threads) {
  check_admissible(h, nu);
  if (!(t >= 0.0)) throw DomainError("multiplicative_fk needs t >= 0");
  if (!model.sampleable()) throw UnsupportedError(model.describe() + " cannot be sampled");
  PointEstimates out;
  out.x = x_points;
  out.n_paths = n_paths;
  out.value.resize(x_points.size());
  out.stderr_.assign(x_points.size(), 0.0);
  if (t == 0.0) {
    for (std::size_t i = 0; i < x_points.size(); ++i) out.value[i] = u0.u0(x_points[i]);
    return out;
  }
  check_growth(u0, h, nu, model, t);
  if (n_paths < 2) throw DomainError("multiplicative_fk needs at least 2 paths");
  FbmOptions fo;
  fo.method = FbmMethod::cholesky;
  fo.threads = threads;
  const PathEnsemble ens = generate_scaled(h, nu, TimeGrid::from_points({0.0, t}), model, n_paths, seed, fo);
  std::vector<double> ez(n_paths);
  for (std::size_t p = 0; p < n_paths; ++p) ez[p] = std::exp(ens.at(p, 1));
  const double N = static_cast<double>(n_paths);
  parallel_for(
      x_points.size(),
      [&](std::size_t i) {
        double s = 0.0;
        for (double e : ez) s += u0.u0(x_points[i] * e);
        const double m = s / N;
        double ss = 0.0;
        for (double e : ez) ss += (u0.u0(x_points[i] * e) - m) * (u0.u0(x_points[i] * e) - m);
        out.value[i] = m;
        out.stderr_[i] = std::sqrt(ss / (N - 1.0) / N);
      },
      threads);
  return out;
}

std::vector<double> multiplicative_oracle(const MultiplicativeDatum& u0, const HurstModel& h, const Integrand& nu,
                                          const DiffusionModel& model, double t, const std::vector<double>& x_points) {
  check_admissible(h, nu);
  std::vector<double> out(x_points.size());
  if (t == 0.0) {
    for (std::size_t i = 0; i < x_points.size(); ++i) out[i] = u0.u0(x_points[i]);
    return out;
  }
  check_growth(u0, h, nu, model, t);
  const bool atom = std::holds_alternative<Dirac>(model.variant());
  if (!atom && !model.has_density()) throw UnsupportedError("oracle needs a density or a Dirac law");
  const double v = weighted_variance(h, nu, t);
  const quad::Rule gh = quad::gauss_hermite(96);
  for (std::size_t i = 0; i < x_points.size(); ++i) {
    const double x = x_points[i];
    auto given_a = [&](double a) {
      const double s = std::sqrt(a * v);
      double acc = 0.0;
      for (std::size_t k = 0; k < gh.size(); ++k) acc += gh.weights[k] * u0.u0(x * std::exp(s * gh.nodes[k]));
      return acc;
    };
    const double lower = model.support_lower();
    if (atom)
      out[i] = given_a(std::get<Dirac>(model.variant()).a0);
    else
      out[i] = quad::exp_map([&](double d) { return model.density_above_lower(d) * given_a(lower + d); },
                             {1e-13, 1e-10});
  }
  return out;
}

}  // namespace rsfbm
