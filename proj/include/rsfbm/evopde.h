#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rsfbm/fbm.h"
#include "rsfbm/fracops.h"
#include "rsfbm/homkernel.h"
#include "rsfbm/randscale.h"

namespace rsfbm {

/// Periodic grid x_j = -L + j dx, dx = 2L/N, frequencies xi_k = k pi / L
/// (k taken in [-N/2, N/2)). The transform approximates the unitary
/// continuum transform F[u](xi) = (2 pi)^{-1/2} int u(x) e^{-i x xi} dx, so
/// e^{-x^2/2} maps to e^{-xi^2/2}.
class SpectralField {
 public:
  SpectralField(std::size_t N, double L);

  static SpectralField sample(const std::function<double(double)>& f, std::size_t N, double L);
  static SpectralField from_fourier(std::vector<std::complex<double>> fourier, double L);

  std::size_t size() const { return N_; }
  double half_width() const { return L_; }
  double dx() const { return 2.0 * L_ / static_cast<double>(N_); }
  double x(std::size_t j) const { return -L_ + static_cast<double>(j) * dx(); }
  double xi(std::size_t k) const;

  const std::vector<double>& values() const { return values_; }
  const std::vector<std::complex<double>>& fourier() const { return fourier_; }

  /// Trigonometric interpolant at an arbitrary x (Nyquist term split evenly).
  double evaluate(double x) const;

 private:
  std::size_t N_;
  double L_;
  std::vector<double> values_;
  std::vector<std::complex<double>> fourier_;
};

/// Forward transform of real samples on the grid.
std::vector<std::complex<double>> spectral_forward(const std::vector<double>& values, double L);
/// Inverse transform, real part.
std::vector<double> spectral_inverse(const std::vector<std::complex<double>>& fourier, double L);

struct InitialDatum {
  std::string name;
  std::function<double(double)> u0;
  /// Closed-form transform when known.
  std::function<std::complex<double>(double)> fourier;

  /// amplitude * exp(-x^2 / (2 variance)).
  static InitialDatum gaussian(double amplitude = 1.0, double variance = 1.0);
  static InitialDatum custom(std::string name, std::function<double(double)> u0);
};

struct SpectralOptions {
  std::size_t N = 4096;
  double L = 20.0;
};

/// u(t) = F^{-1}[F[u0] L[A](v(t) xi^2 / 2)] on the grid. Frequencies whose
/// initial coefficient is below 1e-30 of the peak are set to zero.
SpectralField fourier_solve(const InitialDatum& u0, const HurstModel& h, const Integrand& nu,
                            const DiffusionModel& model, double t, const SpectralOptions& grid = {});

struct PointEstimates {
  std::vector<double> x, value, stderr_;
  std::size_t n_paths = 0;
};

/// Monte Carlo E[u0(x + Z_t)] with per-point standard errors.
PointEstimates fk_solve(const InitialDatum& u0, const HurstModel& h, const Integrand& nu, const DiffusionModel& model,
                        double t, const std::vector<double>& x_points, std::size_t n_paths, std::uint64_t seed,
                        unsigned threads = 0);

/// Phi_k(z) for a homogeneous kernel.
double phi_k(const HomogeneousKernel& kernel, double z, const specfun::Tolerance& tol = {});

/// e^{-z} E_{rho,rho}(z^rho) = z^{1-rho} e^{-z} e_rho(z); finite at z = 0.
double damped_rho_ml(double rho, double z, const specfun::Tolerance& tol = {});

/// K_{t,s}(xi) of the evolution equation.
class KernelSpec {
 public:
  enum class Kind { gamma_grey, bender_butko, explicit_kernel };
  using Fn = std::function<double(double t, double s, double xi)>;

  static KernelSpec gamma_grey(double rho, double H);
  static KernelSpec bender_butko(HomogeneousKernel kernel);
  /// Generic K_{t,s}(xi) together with the H of the clock it lives on.
  static KernelSpec explicit_kernel(Fn K, double H, std::string name = "explicit");

  Kind kind() const { return kind_; }
  double rho() const { return rho_; }
  double H() const { return H_; }
  const std::optional<HomogeneousKernel>& kernel() const { return kernel_; }
  std::string describe() const;

  double operator()(double t, double s, double xi) const;

 private:
  Kind kind_ = Kind::explicit_kernel;
  double rho_ = 0.0, H_ = 0.5;
  std::optional<HomogeneousKernel> kernel_;
  Fn K_;
  std::string name_;
};

/// |L[A](t^{2H} xi) - 1 - int_0^t K_{t,s}(xi) L[A](s^{2H} xi) ds|.
double kernel_residual(const KernelSpec& spec, const DiffusionModel& model, const HurstModel& h, double t, double xi);

/// Quadrature rule for int_0^t sigma'(s) K_{sigma(t),sigma(s)}(q) f(s) ds,
/// with weights depending on q = xi^2/2.
struct PdeTimeRule {
  std::vector<double> s;      // time nodes in (0, t)
  std::vector<double> sigma;  // sigma_nu at the nodes
  std::function<double(std::size_t j, double q)> weight;
};

PdeTimeRule pde_time_rule(const KernelSpec& spec, const HurstModel& h, const Integrand& nu, double t,
                          std::size_t n_nodes = 64);

/// sup_x |u(t) - u0 - int_0^t sigma' K(-Delta/2) u(s) ds| given fields at the rule's nodes.
double pde_residual(const SpectralField& u_t, const SpectralField& u0, const std::vector<SpectralField>& u_nodes,
                    const PdeTimeRule& rule);

/// Convenience: builds the rule and the fields with fourier_solve.
double pde_residual(const InitialDatum& u0, const KernelSpec& spec, const DiffusionModel& model, const HurstModel& h,
                    const Integrand& nu, double t, const SpectralOptions& grid = {}, std::size_t n_nodes = 64);

/// Density of sqrt(A) B^H at (t, x) with A ~ f_{2 x0, nu, rho}, delta = 2H:
/// rho / (Gamma(nu/rho) sqrt(4 pi x0 t^delta)) Z^{nu-1/2}_rho(x^2/(4 x0 t^delta)).
/// Both the mixture integral and the closed form are computed; a mismatch
/// beyond 1e-6 raises NumericalError.
double superstat_density(double x0, double nu, double rho, double delta, double t, double x);
double superstat_density_mixture(double x0, double nu, double rho, double delta, double t, double x);
double superstat_density_closed(double x0, double nu, double rho, double delta, double t, double x);

/// |E[A u0(x+Z_t)] - 2 x0 Gamma((nu+1)/rho)/Gamma(nu/rho) E_{nu+1}[u0(x+Z_t)]| for u0 = e^{-y^2/2}.
double ek_identity_residual(double x0, double nu, double rho, double delta, double t, double x);

struct MultiplicativeDatum {
  std::string name;
  std::function<double(double)> u0;
  /// Exponential growth rate of u0(x e^z) and its first two derivatives in z.
  double kappa = 0.0;
};

/// Monte Carlo E[u0(x e^{Z_t})].
PointEstimates multiplicative_fk(const MultiplicativeDatum& u0, const HurstModel& h, const Integrand& nu,
                                 const DiffusionModel& model, double t, const std::vector<double>& x_points,
                                 std::size_t n_paths, std::uint64_t seed, unsigned threads = 0);

/// Deterministic oracle: Gauss-Hermite in the Gaussian factor, adaptive quadrature in a.
std::vector<double> multiplicative_oracle(const MultiplicativeDatum& u0, const HurstModel& h, const Integrand& nu,
                                          const DiffusionModel& model, double t, const std::vector<double>& x_points);

}  // namespace rsfbm
