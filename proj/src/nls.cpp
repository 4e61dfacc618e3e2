#include "stmado/nls.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "stmado/error.hpp"
#include "stmado/rng.hpp"

namespace stmado {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Run {
  std::vector<double> u;
  double f = kInf;
  int iterations = 0;
  bool converged = false;
  std::vector<double> history;
};

class Simplex {
 public:
  Simplex(const std::function<double(const std::vector<double>&)>& f, const NlsOptions& opts) : f_(f), opts_(opts) {}

  Run run(std::vector<double> u0, Run carry) const {
    const std::size_t d = u0.size();
    std::vector<std::vector<double>> pts(d + 1, u0);
    std::vector<double> vals(d + 1);
    for (std::size_t i = 0; i < d; ++i) pts[i + 1][i] += std::max(0.25, 0.1 * std::fabs(u0[i]));
    for (std::size_t i = 0; i <= d; ++i) vals[i] = eval(pts[i]);

    // Dimension-adapted coefficients (Gao and Han), which keep the simplex
    // from stalling in five or six dimensions.
    const double dd = static_cast<double>(std::max<std::size_t>(d, 2));
    const double alpha = 1.0, gamma = 1.0 + 2.0 / dd, rho = 0.75 - 0.5 / dd, sigma = 1.0 - 1.0 / dd;
    std::vector<std::size_t> order(d + 1);
    std::vector<double> centroid(d), xr(d), xe(d), xc(d);
    bool converged = false;
    int it = 0;
    for (; it < opts_.max_iterations; ++it) {
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
      const std::size_t best = order.front(), worst = order.back(), second = order[d - 1];
      carry.history.push_back(std::min(carry.history.empty() ? kInf : carry.history.back(), vals[best]));
      if (done(pts, vals, best, worst)) {
        converged = true;
        break;
      }
      std::fill(centroid.begin(), centroid.end(), 0.0);
      for (std::size_t i = 0; i <= d; ++i)
        if (i != worst)
          for (std::size_t j = 0; j < d; ++j) centroid[j] += pts[i][j] / static_cast<double>(d);
      for (std::size_t j = 0; j < d; ++j) xr[j] = centroid[j] + alpha * (centroid[j] - pts[worst][j]);
      const double fr = eval(xr);
      if (fr < vals[best]) {
        for (std::size_t j = 0; j < d; ++j) xe[j] = centroid[j] + gamma * (xr[j] - centroid[j]);
        const double fe = eval(xe);
        if (fe < fr) {
          pts[worst] = xe;
          vals[worst] = fe;
        } else {
          pts[worst] = xr;
          vals[worst] = fr;
        }
        continue;
      }
      if (fr < vals[second]) {
        pts[worst] = xr;
        vals[worst] = fr;
        continue;
      }
      const bool outside = fr < vals[worst];
      for (std::size_t j = 0; j < d; ++j)
        xc[j] = outside ? centroid[j] + rho * (xr[j] - centroid[j]) : centroid[j] + rho * (pts[worst][j] - centroid[j]);
      const double fc = eval(xc);
      if (fc < (outside ? fr : vals[worst])) {
        pts[worst] = xc;
        vals[worst] = fc;
        continue;
      }
      for (std::size_t i = 0; i <= d; ++i) {
        if (i == best) continue;
        for (std::size_t j = 0; j < d; ++j) pts[i][j] = pts[best][j] + sigma * (pts[i][j] - pts[best][j]);
        vals[i] = eval(pts[i]);
      }
    }
    const auto best = static_cast<std::size_t>(std::min_element(vals.begin(), vals.end()) - vals.begin());
    carry.u = pts[best];
    carry.f = vals[best];
    carry.iterations += it;
    carry.converged = converged;
    return carry;
  }

 private:
  const std::function<double(const std::vector<double>&)>& f_;
  const NlsOptions& opts_;

  double eval(const std::vector<double>& u) const {
    const double v = f_(u);
    return std::isfinite(v) ? v : kInf;
  }

  bool done(const std::vector<std::vector<double>>& pts, const std::vector<double>& vals, std::size_t best,
            std::size_t worst) const {
    if (!std::isfinite(vals[worst])) return false;
    if (vals[worst] - vals[best] <= opts_.ftol * std::fabs(vals[best]) + 1e-300) return true;
    double diam = 0.0;
    for (const auto& p : pts)
      for (std::size_t j = 0; j < p.size(); ++j) diam = std::max(diam, std::fabs(p[j] - pts[best][j]));
    return diam <= 1e-12;
  }
};

}  // namespace

double to_internal(const ParamSpec& p, double x) {
  switch (p.transform) {
    case Transform::Identity:
      return x;
    case Transform::Log:
      return std::log(std::max(x - p.lo, 1e-300));
    case Transform::Logit: {
      const double z = std::clamp((x - p.lo) / (p.hi - p.lo), 1e-15, 1.0 - 1e-15);
      return std::log(z / (1.0 - z));
    }
  }
  return x;
}

double to_external(const ParamSpec& p, double u) {
  switch (p.transform) {
    case Transform::Identity:
      return u;
    case Transform::Log:
      return p.lo + std::exp(u);
    case Transform::Logit:
      return p.lo + (p.hi - p.lo) / (1.0 + std::exp(-u));
  }
  return u;
}

NlsResult nls_minimize(const Objective& f, const std::vector<ParamSpec>& specs,
                       const std::optional<std::vector<double>>& init, const NlsOptions& opts) {
  const std::size_t d = specs.size();
  if (d == 0) throw Error(ErrorKind::InvalidArgs, "nothing to minimize");
  if (init && init->size() != d) throw Error(ErrorKind::InvalidArgs, "init has the wrong length");

  std::vector<std::vector<double>> starts;
  Rng rng = make_rng(opts.seed, 0x6e6c73);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int m = std::max(0, opts.starts);
  std::vector<std::vector<int>> strata(d, std::vector<int>(static_cast<std::size_t>(m)));
  for (auto& s : strata) {
    std::iota(s.begin(), s.end(), 0);
    std::shuffle(s.begin(), s.end(), rng);
  }
  for (int i = 0; i < m; ++i) {
    std::vector<double> x(d);
    for (std::size_t j = 0; j < d; ++j) {
      const double q = (strata[j][static_cast<std::size_t>(i)] + unif(rng)) / m;
      x[j] = specs[j].start_lo + q * (specs[j].start_hi - specs[j].start_lo);
    }
    starts.push_back(std::move(x));
  }
  if (init) starts.push_back(*init);
  std::sort(starts.begin(), starts.end());

  std::vector<double> x(d);
  const std::function<double(const std::vector<double>&)> inner = [&](const std::vector<double>& u) {
    for (std::size_t j = 0; j < d; ++j) x[j] = to_external(specs[j], u[j]);
    return f(x);
  };
  const Simplex simplex(inner, opts);

  NlsResult res;
  res.objective = kInf;
  int total_iterations = 0;
  bool any_converged = false;
  for (std::size_t s = 0; s < starts.size(); ++s) {
    std::vector<double> u(d);
    for (std::size_t j = 0; j < d; ++j) u[j] = to_internal(specs[j], starts[s][j]);
    Run r = simplex.run(u, Run{});
    for (int k = 0; k < opts.polish_rounds && r.converged; ++k) {
      const double before = r.f;
      std::vector<double> from = r.u;
      r = simplex.run(std::move(from), std::move(r));
      if (!(before - r.f > opts.ftol * std::fabs(r.f) + 1e-300)) break;
    }
    total_iterations += r.iterations;
    any_converged = any_converged || r.converged;
    const bool better = std::isfinite(res.objective) ? r.f < res.objective - 1e-10 * std::fabs(res.objective)
                                                     : std::isfinite(r.f);
    if (better || res.best_start < 0) {
      {
        res.objective = r.f;
        res.best_start = static_cast<int>(s);
        res.converged = r.converged;
        res.history = std::move(r.history);
        res.x.resize(d);
        for (std::size_t j = 0; j < d; ++j) res.x[j] = to_external(specs[j], r.u[j]);
      }
    }
  }
  res.iterations = total_iterations;
  res.restarts_used = static_cast<int>(starts.size());
  if (!std::isfinite(res.objective)) throw Error(ErrorKind::NoConvergence, "objective is not finite at any start");
  if (!any_converged)
    throw Error(ErrorKind::NoConvergence,
                "simplex search did not converge within " + std::to_string(opts.max_iterations) + " iterations");
  return res;
}

}  // namespace stmado
