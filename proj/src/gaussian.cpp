#include "stmado/gaussian.hpp"

#include <cmath>
#include <string>

#include "stmado/error.hpp"

namespace stmado {

Eigen::MatrixXd robust_cholesky(const Eigen::MatrixXd& cov, double jitter, double* jitter_used) {
  const Eigen::Index m = cov.rows();
  if (m == 0) return Eigen::MatrixXd(0, 0);
  const double scale = cov.diagonal().cwiseAbs().mean();
  double eps = jitter;
  for (int attempt = 0; attempt < 12; ++attempt) {
    Eigen::MatrixXd a = cov;
    if (eps > 0.0) a.diagonal().array() += eps * scale;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() == Eigen::Success) {
      if (jitter_used) *jitter_used = eps;
      return llt.matrixL();
    }
    eps = eps > 0.0 ? eps * 10.0 : 1e-12;
    if (eps > 1e-4) break;
  }
  throw Error(ErrorKind::NotPSD, "covariance matrix is not positive definite after jitter escalation");
}

GaussianIncrementSampler::GaussianIncrementSampler(const Semivariogram& gamma, std::vector<Point3> sites,
                                                   double jitter, int budget)
    : sites_(std::move(sites)) {
  if (jitter < 0.0) throw Error(ErrorKind::InvalidArgs, "jitter must be >= 0");
  if (static_cast<long long>(sites_.size()) > budget)
    throw Error(ErrorKind::BudgetExceeded, std::to_string(sites_.size()) + " sites exceed the Cholesky budget of " +
                                               std::to_string(budget));
  std::vector<double> var(sites_.size());
  for (std::size_t i = 0; i < sites_.size(); ++i) {
    var[i] = gamma(sites_[i].x, sites_[i].y, sites_[i].t);
    if (var[i] > 0.0) active_.push_back(i);
  }
  const auto m = static_cast<Eigen::Index>(active_.size());
  Eigen::MatrixXd cov(m, m);
  for (Eigen::Index a = 0; a < m; ++a) {
    const Point3& p = sites_[active_[a]];
    for (Eigen::Index b = 0; b <= a; ++b) {
      const Point3& q = sites_[active_[b]];
      const double c = var[active_[a]] + var[active_[b]] - gamma(p.x - q.x, p.y - q.y, p.t - q.t);
      cov(a, b) = c;
      cov(b, a) = c;
    }
  }
  factor_ = robust_cholesky(cov, jitter, &jitter_used_);
  z_.resize(m);
}

void GaussianIncrementSampler::draw(Rng& rng, std::span<double> out) const {
  if (out.size() != sites_.size()) throw Error(ErrorKind::InvalidArgs, "output span has the wrong size");
  std::normal_distribution<double> normal;
  for (Eigen::Index i = 0; i < z_.size(); ++i) z_[i] = normal(rng);
  const Eigen::VectorXd v = factor_.triangularView<Eigen::Lower>() * z_;
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t a = 0; a < active_.size(); ++a) out[active_[a]] = v[static_cast<Eigen::Index>(a)];
}

std::vector<double> simulate_gaussian_field(const Semivariogram& gamma, const std::vector<Point3>& sites,
                                            std::uint64_t seed, double jitter) {
  GaussianIncrementSampler sampler(gamma, sites, jitter);
  Rng rng = make_rng(seed);
  std::vector<double> out(sites.size());
  sampler.draw(rng, out);
  return out;
}

}  // namespace stmado
