#include "rsfbm/fbm.h"

#include <cmath>
#include <complex>
#include <mutex>

#include "fftw_util.h"
#include "rsfbm/log.h"
#include "rsfbm/parallel.h"
#include "rsfbm/rng.h"

namespace rsfbm {

namespace {

using detail::FftwBuffer;
using detail::FftwPlan;

// Eigenvalues of the circulant embedding of fractional Gaussian noise with M
// increments of unit step; size 2 * next_pow2(M).
std::vector<double> fgn_circulant_eigenvalues(double H, std::size_t M, std::size_t& N) {
  std::size_t m = 1;
  while (m < M) m <<= 1;
  N = 2 * m;
  auto gamma = [H](double k) {
    return 0.5 * (std::pow(std::abs(k + 1.0), 2 * H) - 2.0 * std::pow(std::abs(k), 2 * H) +
                  std::pow(std::abs(k - 1.0), 2 * H));
  };
  FftwBuffer in(N), out(N);
  for (std::size_t k = 0; k < N; ++k) {
    const double lag = k <= m ? static_cast<double>(k) : static_cast<double>(N - k);
    in.p[k][0] = gamma(lag);
    in.p[k][1] = 0.0;
  }
  FftwPlan plan(static_cast<int>(N), in.p, out.p);
  fftw_execute_dft(plan.plan, in.p, out.p);
  std::vector<double> lam(N);
  for (std::size_t k = 0; k < N; ++k) lam[k] = out.p[k][0];
  return lam;
}

bool constant_nu(const Integrand& nu) {
  return nu.kind() == Integrand::Kind::constant ||
         (nu.kind() == Integrand::Kind::power_law && nu.beta() == 0.0);
}

FbmMethod resolve_method(const Integrand& nu, const TimeGrid& grid, const FbmOptions& opts) {
  const bool circ_ok = grid.is_uniform() && constant_nu(nu) && grid.size() >= 2;
  switch (opts.method) {
    case FbmMethod::circulant:
      if (!grid.is_uniform()) throw PreconditionError("circulant method requires a uniform grid");
      if (!constant_nu(nu)) throw PreconditionError("circulant method requires constant nu");
      return FbmMethod::circulant;
    case FbmMethod::cholesky:
      if (grid.size() > opts.cholesky_cap)
        throw PreconditionError("cholesky method limited to " + std::to_string(opts.cholesky_cap) + " grid points");
      return FbmMethod::cholesky;
    case FbmMethod::automatic:
      if (circ_ok && grid.size() > 64) return FbmMethod::circulant;
      if (grid.size() > opts.cholesky_cap) {
        if (circ_ok) return FbmMethod::circulant;
        throw PreconditionError("grid exceeds the cholesky cap and is not eligible for the circulant method");
      }
      return FbmMethod::cholesky;
  }
  return FbmMethod::cholesky;
}

void fill_cholesky(PathEnsemble& ens, const HurstModel& h, const Integrand& nu, unsigned threads) {
  const auto& pts = ens.grid.points();
  const std::size_t n = pts.size();
  const Eigen::MatrixXd cov = z_covariance(h, nu, ens.grid);
  const std::size_t m = n - 1;
  const Eigen::MatrixXd L = jittered_cholesky(cov.bottomRightCorner(m, m));
  parallel_for(
      ens.n_paths,
      [&](std::size_t p) {
        Engine rng = make_engine(ens.seed, Stream::gaussian, p);
        std::normal_distribution<double> nd(0.0, 1.0);
        std::vector<double> g(m);
        for (auto& x : g) x = nd(rng);
        double* row = ens.paths.data() + p * n;
        row[0] = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
          double s = 0.0;
          for (std::size_t k = 0; k <= j; ++k) s += L(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) * g[k];
          row[j + 1] = s;
        }
      },
      threads);
}

// Returns false when the embedding is not PSD enough and Cholesky must take over.
bool fill_circulant(PathEnsemble& ens, const HurstModel& h, double scale, unsigned threads) {
  const auto& pts = ens.grid.points();
  const std::size_t n = pts.size();
  const std::size_t M = n - 1;
  std::size_t N = 0;
  std::vector<double> lam = fgn_circulant_eigenvalues(h.H(), M, N);
  double min_lam = 0.0;
  for (double l : lam) min_lam = std::min(min_lam, l);
  if (min_lam < -1e-10) {
    warn("circulant embedding has eigenvalue " + std::to_string(min_lam) + "; falling back to cholesky");
    return false;
  }
  std::vector<double> amp(N);
  for (std::size_t k = 0; k < N; ++k) amp[k] = std::sqrt(std::max(lam[k], 0.0) / static_cast<double>(N));
  const double dt = pts[1] - pts[0];
  const double step_scale = scale * std::pow(dt, h.H());

  FftwBuffer probe_in(N), probe_out(N);
  FftwPlan plan(static_cast<int>(N), probe_in.p, probe_out.p);
  parallel_for(
      ens.n_paths,
      [&](std::size_t p) {
        Engine rng = make_engine(ens.seed, Stream::gaussian, p);
        std::normal_distribution<double> nd(0.0, 1.0);
        FftwBuffer in(N), out(N);
        for (std::size_t k = 0; k < N; ++k) {
          in.p[k][0] = amp[k] * nd(rng);
          in.p[k][1] = amp[k] * nd(rng);
        }
        fftw_execute_dft(plan.plan, in.p, out.p);
        double* row = ens.paths.data() + p * n;
        row[0] = 0.0;
        double acc = 0.0;
        for (std::size_t j = 0; j < M; ++j) {
          acc += step_scale * out.p[j][0];
          row[j + 1] = acc;
        }
      },
      threads);
  return true;
}

PathEnsemble gaussian_ensemble(const HurstModel& h, const Integrand& nu, const TimeGrid& grid, std::size_t n_paths,
                               std::uint64_t seed, const FbmOptions& opts) {
  check_admissible(h, nu);
  if (grid.back() > nu.domain_end()) throw DomainError("grid extends beyond the integrand domain");
  PathEnsemble ens;
  ens.grid = grid;
  ens.n_paths = n_paths;
  ens.seed = seed;
  ens.paths.assign(n_paths * grid.size(), 0.0);
  if (grid.size() < 2) return ens;
  ens.method = resolve_method(nu, grid, opts);
  if (ens.method == FbmMethod::circulant) {
    if (fill_circulant(ens, h, nu.scale(), opts.threads)) return ens;
    if (grid.size() > opts.cholesky_cap) throw NumericalError("circulant embedding failed and grid exceeds cholesky cap");
    ens.method = FbmMethod::cholesky;
  }
  fill_cholesky(ens, h, nu, opts.threads);
  return ens;
}

}  // namespace

TimeGrid TimeGrid::uniform(double T, std::size_t n) {
  if (!(T > 0.0)) throw DomainError("time grid needs T > 0");
  if (n < 1) throw DomainError("time grid needs at least one step");
  TimeGrid g;
  g.points_.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i) g.points_[i] = T * static_cast<double>(i) / static_cast<double>(n);
  g.uniform_ = true;
  return g;
}

TimeGrid TimeGrid::from_points(std::vector<double> points) {
  if (points.empty() || points.front() != 0.0) throw DomainError("time grid must start at 0");
  for (std::size_t i = 1; i < points.size(); ++i)
    if (!(points[i] > points[i - 1])) throw DomainError("time grid must be strictly increasing");
  TimeGrid g;
  g.uniform_ = points.size() >= 2;
  if (points.size() >= 2) {
    const double step = (points.back() - points.front()) / static_cast<double>(points.size() - 1);
    for (std::size_t i = 1; i < points.size(); ++i)
      if (std::abs(points[i] - points[i - 1] - step) > 1e-12 * std::max(1.0, step)) g.uniform_ = false;
  }
  g.points_ = std::move(points);
  return g;
}

const char* to_string(FbmMethod m) {
  switch (m) {
    case FbmMethod::automatic:
      return "auto";
    case FbmMethod::cholesky:
      return "cholesky";
    case FbmMethod::circulant:
      return "circulant";
  }
  return "auto";
}

FbmMethod fbm_method_from_string(const std::string& s) {
  if (s == "auto" || s == "automatic") return FbmMethod::automatic;
  if (s == "cholesky") return FbmMethod::cholesky;
  if (s == "circulant") return FbmMethod::circulant;
  throw PreconditionError("unknown fbm method '" + s + "' (expected auto, cholesky or circulant)");
}

double fbm_covariance(const HurstModel& h, double t, double s) {
  const double p = 2.0 * h.H();
  return 0.5 * (std::pow(std::abs(t), p) + std::pow(std::abs(s), p) - std::pow(std::abs(t - s), p));
}

Eigen::MatrixXd z_covariance(const HurstModel& h, const Integrand& nu, const TimeGrid& grid) {
  check_admissible(h, nu);
  const auto& pts = grid.points();
  const auto n = static_cast<Eigen::Index>(pts.size());
  Eigen::MatrixXd C(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double c = cross_covariance(h, nu, pts[static_cast<std::size_t>(j)], pts[static_cast<std::size_t>(i)]);
      C(i, j) = c;
      C(j, i) = c;
    }
  return C;
}

Eigen::MatrixXd jittered_cholesky(const Eigen::MatrixXd& cov, double* jitter_used) {
  const Eigen::Index n = cov.rows();
  const Eigen::MatrixXd sym = 0.5 * (cov + cov.transpose());
  const double base = n > 0 ? sym.trace() / static_cast<double>(n) : 0.0;
  double lambda = 0.0;
  for (int attempt = 0; attempt < 8; ++attempt) {
    Eigen::MatrixXd a = sym;
    if (lambda > 0.0) a.diagonal().array() += lambda * base;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() == Eigen::Success) {
      if (jitter_used) *jitter_used = lambda;
      return llt.matrixL();
    }
    lambda = lambda == 0.0 ? 1e-14 : lambda * 10.0;
    if (lambda > 1e-8 * (1.0 + 1e-9)) break;
  }
  throw NumericalError("covariance matrix is not positive definite even with jitter 1e-8 * trace/n");
}

PathEnsemble generate_fbm(const HurstModel& h, const TimeGrid& grid, std::size_t n_paths, std::uint64_t seed,
                          const FbmOptions& opts) {
  PathEnsemble e = gaussian_ensemble(h, Integrand::constant(1.0), grid, n_paths, seed, opts);
  e.model = "none";
  return e;
}

PathEnsemble generate_gaussian(const HurstModel& h, const Integrand& nu, const TimeGrid& grid, std::size_t n_paths,
                               std::uint64_t seed, const FbmOptions& opts) {
  PathEnsemble e = gaussian_ensemble(h, nu, grid, n_paths, seed, opts);
  e.model = "none";
  return e;
}

std::vector<double> sample_scales(const DiffusionModel& model, std::size_t n, std::uint64_t seed, unsigned threads) {
  if (!model.sampleable()) throw UnsupportedError(model.describe() + " is not sampleable");
  std::vector<double> a(n);
  parallel_for(
      n,
      [&](std::size_t p) {
        Engine rng = make_engine(seed, Stream::scale, p);
        a[p] = model.sample(rng);
      },
      threads);
  return a;
}

PathEnsemble generate_scaled(const HurstModel& h, const Integrand& nu, const TimeGrid& grid,
                             const DiffusionModel& model, std::size_t n_paths, std::uint64_t seed,
                             const FbmOptions& opts) {
  if (!model.sampleable()) throw UnsupportedError(model.describe() + " is not sampleable");
  PathEnsemble e = gaussian_ensemble(h, nu, grid, n_paths, seed, opts);
  e.a_values = sample_scales(model, n_paths, seed, opts.threads);
  const std::size_t n = grid.size();
  for (std::size_t p = 0; p < n_paths; ++p) {
    const double s = std::sqrt(e.a_values[p]);
    for (std::size_t j = 0; j < n; ++j) e.paths[p * n + j] *= s;
  }
  e.model = model.describe();
  return e;
}

}  // namespace rsfbm
