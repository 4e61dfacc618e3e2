#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "stmado/rng.hpp"

namespace stmado {

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double t = 0.0;
};

/// Semivariogram of a lag (dx, dy, dt); must satisfy gamma(0,0,0) == 0 and
/// be conditionally negative definite.
using Semivariogram = std::function<double(double dx, double dy, double dt)>;

/// Centered Gaussian process with stationary increments, anchored so that
/// eps(0) == 0: Cov(eps(p), eps(q)) = gamma(p) + gamma(q) - gamma(p - q),
/// hence Var(eps(p) - eps(q)) = 2 gamma(p - q).
///
/// The covariance is factorized once; draw() reuses the factor. Sites with
/// zero variance (the origin) are exactly 0 in every draw.
class GaussianIncrementSampler {
 public:
  GaussianIncrementSampler(const Semivariogram& gamma, std::vector<Point3> sites, double jitter = 0.0,
                           int budget = 4000);

  std::size_t size() const { return sites_.size(); }
  void draw(Rng& rng, std::span<double> out) const;

  /// Relative jitter actually added to the diagonal (0 if none was needed).
  double jitter_used() const { return jitter_used_; }

 private:
  std::vector<Point3> sites_;
  std::vector<std::size_t> active_;
  Eigen::MatrixXd factor_;  // lower triangular
  double jitter_used_ = 0.0;
  mutable Eigen::VectorXd z_;
};

/// One draw of the anchored Gaussian field at `sites`.
std::vector<double> simulate_gaussian_field(const Semivariogram& gamma, const std::vector<Point3>& sites,
                                            std::uint64_t seed, double jitter = 0.0);

/// Lower Cholesky factor of a correlation/covariance matrix with the same
/// jitter escalation as GaussianIncrementSampler. Throws NotPSD.
Eigen::MatrixXd robust_cholesky(const Eigen::MatrixXd& cov, double jitter, double* jitter_used = nullptr);

}  // namespace stmado
