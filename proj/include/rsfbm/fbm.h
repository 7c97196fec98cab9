#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rsfbm/fracops.h"
#include "rsfbm/randscale.h"

namespace rsfbm {

class TimeGrid {
 public:
  /// n steps of size T/n, points 0..T.
  static TimeGrid uniform(double T, std::size_t n);
  /// Strictly increasing, starting at 0; the uniform flag is detected to 1e-12.
  static TimeGrid from_points(std::vector<double> points);

  const std::vector<double>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  bool is_uniform() const { return uniform_; }
  double back() const { return points_.back(); }

 private:
  std::vector<double> points_;
  bool uniform_ = false;
};

enum class FbmMethod { automatic, cholesky, circulant };

const char* to_string(FbmMethod m);
FbmMethod fbm_method_from_string(const std::string& s);

struct FbmOptions {
  FbmMethod method = FbmMethod::automatic;
  std::size_t cholesky_cap = 4096;
  unsigned threads = 0;
};

/// Row-major n_paths x n_times matrix of sampled paths.
struct PathEnsemble {
  TimeGrid grid;
  std::size_t n_paths = 0;
  std::vector<double> paths;
  std::vector<double> a_values;  // empty for unscaled ensembles
  std::uint64_t seed = 0;
  FbmMethod method = FbmMethod::cholesky;
  std::string model;

  double at(std::size_t path, std::size_t time) const { return paths[path * grid.size() + time]; }
  std::span<const double> row(std::size_t path) const {
    return {paths.data() + path * grid.size(), grid.size()};
  }
};

/// 1/2 (|t|^{2H} + |s|^{2H} - |t-s|^{2H}).
double fbm_covariance(const HurstModel& h, double t, double s);

/// Gram matrix of Y_t = int_0^t nu dB^H on the grid (including t = 0).
Eigen::MatrixXd z_covariance(const HurstModel& h, const Integrand& nu, const TimeGrid& grid);

/// Lower Cholesky factor of a covariance matrix with escalating diagonal jitter
/// lambda * trace/n, lambda = 0, 1e-14, ..., 1e-8. Throws NumericalError beyond that.
Eigen::MatrixXd jittered_cholesky(const Eigen::MatrixXd& cov, double* jitter_used = nullptr);

/// Exact FBM paths.
PathEnsemble generate_fbm(const HurstModel& h, const TimeGrid& grid, std::size_t n_paths, std::uint64_t seed,
                          const FbmOptions& opts = {});

/// Paths of Y = int nu dB^H (no scaling).
PathEnsemble generate_gaussian(const HurstModel& h, const Integrand& nu, const TimeGrid& grid, std::size_t n_paths,
                               std::uint64_t seed, const FbmOptions& opts = {});

/// Paths of Z = sqrt(A) Y with A drawn from its own stream.
PathEnsemble generate_scaled(const HurstModel& h, const Integrand& nu, const TimeGrid& grid,
                             const DiffusionModel& model, std::size_t n_paths, std::uint64_t seed,
                             const FbmOptions& opts = {});

/// A draws for paths 0..n-1 of the given root seed.
std::vector<double> sample_scales(const DiffusionModel& model, std::size_t n, std::uint64_t seed,
                                  unsigned threads = 0);

}  // namespace rsfbm
