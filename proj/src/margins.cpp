#include "stmado/margins.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>

#include <Eigen/Dense>

#include "stmado/error.hpp"
#include "stmado/nls.hpp"
#include "stmado/special.hpp"

namespace stmado {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEulerGamma = 0.57721566490153286061;

std::vector<double> finite_values(std::span<const double> x) {
  std::vector<double> v;
  v.reserve(x.size());
  for (double d : x)
    if (std::isfinite(d)) v.push_back(d);
  return v;
}

void require_sample(std::span<const double> x) {
  for (double d : x)
    if (!std::isfinite(d)) throw Error(ErrorKind::InvalidArgs, "marginal fit needs finite observations");
  if (x.size() < 30)
    throw Error(ErrorKind::InvalidArgs, "marginal fit needs at least 30 observations, got " + std::to_string(x.size()));
}

// Profile score for the Gumbel scale on standardized data:
// g(s) = s - mean(z) + sum z w / sum w with w = exp(-z / s).
struct Profile {
  double g;
  double dg;
};

Profile gumbel_profile(const std::vector<double>& z, double s) {
  // Shift by min(z) so every exponent is <= 0.
  const double zmin = *std::min_element(z.begin(), z.end());
  double sw = 0.0, szw = 0.0, sz2w = 0.0, sz = 0.0;
  for (double v : z) {
    const double w = std::exp(-(v - zmin) / s);
    sw += w;
    szw += v * w;
    sz2w += v * v * w;
    sz += v;
  }
  const double n = static_cast<double>(z.size());
  const double m1 = szw / sw, m2 = sz2w / sw;
  return {s - sz / n + m1, 1.0 + (m2 - m1 * m1) / (s * s)};
}

double gev_nll(std::span<const double> x, double mu, double sigma, double xi) {
  if (!(sigma > 0.0)) return kInf;
  const double n = static_cast<double>(x.size());
  double s = n * std::log(sigma);
  if (std::fabs(xi) < 1e-9) {
    for (double v : x) {
      const double z = (v - mu) / sigma;
      s += z + std::exp(-z);
    }
    return s;
  }
  for (double v : x) {
    const double t = 1.0 + xi * (v - mu) / sigma;
    if (!(t > 0.0)) return kInf;
    const double lt = std::log(t);
    s += (1.0 + 1.0 / xi) * lt + std::exp(-lt / xi);
  }
  return s;
}

}  // namespace

SpaceTimeField block_maxima(const SpaceTimeField& raw, int b, int w) {
  if (b < 1 || w < 1) throw Error(ErrorKind::InvalidArgs, "block sizes must be >= 1");
  if (raw.n % b != 0 || raw.T % w != 0)
    throw Error(ErrorKind::IndivisibleBlocks, "grid " + std::to_string(raw.n) + "x" + std::to_string(raw.T) +
                                                  " is not divisible into " + std::to_string(b) + "x" +
                                                  std::to_string(w) + " blocks");
  const int m = raw.n / b, tb = raw.T / w;
  if (m < 2) throw Error(ErrorKind::InvalidArgs, "block maxima grid would have fewer than 2 sites per side");
  SpaceTimeField out(m, tb, raw.margins, kNaN);
  for (int t = 0; t < raw.T; ++t)
    for (int y = 0; y < raw.n; ++y)
      for (int x = 0; x < raw.n; ++x) {
        const double v = raw(x, y, t);
        if (std::isnan(v)) continue;
        double& cell = out(x / b, y / b, t / w);
        if (std::isnan(cell) || v > cell) cell = v;
      }
  return out;
}

std::vector<double> deseasonalize(std::span<const double> series, int period, int years) {
  if (period < 1 || years < 1) throw Error(ErrorKind::InvalidArgs, "period and years must be >= 1");
  if (series.size() != static_cast<std::size_t>(period) * static_cast<std::size_t>(years))
    throw Error(ErrorKind::LengthMismatch, "series of length " + std::to_string(series.size()) + " is not " +
                                               std::to_string(period) + " x " + std::to_string(years));
  std::vector<double> out(series.begin(), series.end());
  for (int i = 0; i < period; ++i) {
    CompensatedSum s;
    int count = 0;
    for (int y = 0; y < years; ++y) {
      const double v = series[static_cast<std::size_t>(y) * period + i];
      if (std::isnan(v)) continue;
      s.add(v);
      ++count;
    }
    if (count == 0) continue;
    const double m = s.value() / count;
    for (int y = 0; y < years; ++y) out[static_cast<std::size_t>(y) * period + i] -= m;
  }
  return out;
}

double gumbel_cdf(double x, const GumbelParams& p) { return std::exp(-std::exp(-(x - p.mu) / p.sigma)); }

double gumbel_quantile(double u, const GumbelParams& p) {
  if (!(u > 0.0 && u < 1.0)) throw Error(ErrorKind::InvalidArgs, "Gumbel quantile needs u in (0,1)");
  return p.mu - p.sigma * std::log(-std::log(u));
}

double gumbel_loglik(std::span<const double> x, const GumbelParams& p) { return -gev_nll(x, p.mu, p.sigma, 0.0); }

double gev_loglik(std::span<const double> x, const GevParams& p) { return -gev_nll(x, p.mu, p.sigma, p.xi); }

GumbelParams gumbel_moments(std::span<const double> x) {
  const double m = mean(x);
  const double sd = std::sqrt(sample_variance(x));
  const double s0 = sd * std::sqrt(6.0) / std::numbers::pi;
  return {m - kEulerGamma * s0, s0};
}

GumbelParams fit_gumbel(std::span<const double> x) {
  require_sample(x);
  const double m = mean(x);
  const double sd = std::sqrt(sample_variance(x));
  if (!(sd > 0.0)) throw Error(ErrorKind::NoConvergence, "constant sample has no Gumbel fit");
  // Work on standardized data so location and scale enter only through the
  // final back-transform.
  std::vector<double> z(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) z[i] = (x[i] - m) / sd;

  double lo = 1e-8, hi = 1.0;
  while (gumbel_profile(z, hi).g < 0.0) hi *= 2.0;
  double s = std::sqrt(6.0) / std::numbers::pi;
  bool done = false;
  for (int it = 0; it < 200; ++it) {
    const Profile pr = gumbel_profile(z, s);
    if (pr.g < 0.0)
      lo = s;
    else
      hi = s;
    double next = s - pr.g / pr.dg;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::fabs(next - s) <= 1e-14 * s) {
      s = next;
      done = true;
      break;
    }
    s = next;
  }
  if (!done) throw Error(ErrorKind::NoConvergence, "Gumbel profile equation did not converge");
  const double zmin = *std::min_element(z.begin(), z.end());
  double sw = 0.0;
  for (double v : z) sw += std::exp(-(v - zmin) / s);
  const double mu_z = zmin - s * std::log(sw / static_cast<double>(z.size()));
  return {m + sd * mu_z, sd * s};
}

GevParams fit_gev(std::span<const double> x) {
  const GumbelParams g = fit_gumbel(x);
  const double scale = g.sigma;
  // Optimize over (mu, sigma, xi) in units of the Gumbel scale.
  std::vector<double> z(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) z[i] = (x[i] - g.mu) / scale;
  const Objective nll = [&](std::span<const double> p) { return gev_nll(z, p[0], p[1], p[2]); };
  const std::vector<ParamSpec> specs = {{Transform::Identity, -kInf, kInf, -1.0, 1.0},
                                        {Transform::Log, 0.0, kInf, 0.5, 2.0},
                                        {Transform::Logit, -1.0, 1.0, -0.5, 0.5}};
  NlsOptions opts;
  opts.starts = 0;
  opts.ftol = 1e-13;
  const NlsResult r = nls_minimize(nll, specs, std::vector<double>{0.0, 1.0, 0.0}, opts);
  GevParams out;
  out.mu = g.mu + scale * r.x[0];
  out.sigma = scale * r.x[1];
  out.xi = r.x[2];
  if (!std::isfinite(r.objective))
    throw Error(ErrorKind::SupportViolation, "GEV optimum leaves observations outside the support");
  out.loglik = -(r.objective + static_cast<double>(x.size()) * std::log(scale));

  // Observed information by central differences in the scaled coordinates.
  Eigen::Matrix3d hess;
  const double base[3] = {r.x[0], r.x[1], r.x[2]};
  const double step[3] = {1e-4, 1e-4 * r.x[1], 1e-4};
  auto at = [&](int i, double di, int j, double dj) {
    double p[3] = {base[0], base[1], base[2]};
    p[i] += di;
    p[j] += dj;
    return gev_nll(z, p[0], p[1], p[2]);
  };
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) {
      const double hi = step[i], hj = step[j];
      const double v = (at(i, hi, j, hj) - at(i, hi, j, -hj) - at(i, -hi, j, hj) + at(i, -hi, j, -hj)) / (4.0 * hi * hj);
      hess(i, j) = hess(j, i) = v;
    }
  Eigen::LDLT<Eigen::Matrix3d> ldlt(hess);
  double se = kInf;
  if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
    const Eigen::Matrix3d cov = ldlt.solve(Eigen::Matrix3d::Identity());
    if (cov(2, 2) > 0.0 && std::isfinite(cov(2, 2))) se = std::sqrt(cov(2, 2));
  }
  const double zq = 1.959963984540054;
  out.xi_lo = out.xi - zq * se;
  out.xi_hi = out.xi + zq * se;
  return out;
}

std::vector<double> pit_to_frechet(std::span<const double> x, const GumbelParams& p) {
  if (!(p.sigma > 0.0)) throw Error(ErrorKind::InvalidArgs, "sigma must be > 0");
  // -1 / log G(x) = exp((x - mu) / sigma).
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::isnan(x[i]) ? x[i] : std::exp((x[i] - p.mu) / p.sigma);
  return out;
}

std::vector<double> gev_to_frechet(std::span<const double> x, const GevParams& p) {
  if (!(p.sigma > 0.0)) throw Error(ErrorKind::InvalidArgs, "sigma must be > 0");
  if (std::fabs(p.xi) < 1e-9) return pit_to_frechet(x, {p.mu, p.sigma});
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (std::isnan(x[i])) {
      out[i] = x[i];
      continue;
    }
    const double t = 1.0 + p.xi * (x[i] - p.mu) / p.sigma;
    out[i] = t > 0.0 ? std::pow(t, 1.0 / p.xi) : (p.xi > 0.0 ? 0.0 : kInf);
  }
  return out;
}

std::vector<double> pit_to_gumbel(std::span<const double> x, const GumbelParams& p) {
  if (!(p.sigma > 0.0)) throw Error(ErrorKind::InvalidArgs, "sigma must be > 0");
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - p.mu) / p.sigma;
  return out;
}

std::vector<std::pair<double, double>> qq_data(std::span<const double> x, const GumbelParams& p) {
  std::vector<double> s = finite_values(x);
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  std::vector<std::pair<double, double>> out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i)
    out.emplace_back(s[i], gumbel_quantile(static_cast<double>(i + 1) / (n + 1.0), p));
  return out;
}

MarginsResult transform_margins(const SpaceTimeField& raw, const MarginsOptions& opts) {
  MarginsResult res;
  res.transformed = SpaceTimeField(raw.n, raw.T,
                                   opts.target == MarginTarget::Frechet ? Margins::Frechet : Margins::Gumbel, kNaN);
  if (opts.period > 0 && raw.T % opts.period != 0)
    throw Error(ErrorKind::LengthMismatch, "T = " + std::to_string(raw.T) + " is not a multiple of the period " +
                                               std::to_string(opts.period));
  for (int y = 0; y < raw.n; ++y)
    for (int x = 0; x < raw.n; ++x) {
      std::vector<double> s = raw.series(x, y);
      if (opts.period > 0) s = deseasonalize(s, opts.period, raw.T / opts.period);
      const std::vector<double> obs = finite_values(s);
      SiteMargins site;
      site.x = x;
      site.y = y;
      site.gumbel = fit_gumbel(obs);
      if (opts.force_gumbel) {
        site.gev = GevParams{site.gumbel.mu, site.gumbel.sigma, 0.0, kNaN, kNaN, gumbel_loglik(obs, site.gumbel)};
        site.gumbel_selected = true;
      } else {
        site.gev = fit_gev(obs);
        site.gumbel_selected = site.gev.xi_lo <= 0.0 && 0.0 <= site.gev.xi_hi;
      }
      std::vector<double> out;
      if (opts.target == MarginTarget::Gumbel) {
        out = site.gumbel_selected ? pit_to_gumbel(s, site.gumbel)
                                   : [&] {
                                       std::vector<double> f = gev_to_frechet(s, site.gev);
                                       for (double& v : f) v = std::isnan(v) ? v : std::log(v);
                                       return f;
                                     }();
      } else {
        out = site.gumbel_selected ? pit_to_frechet(s, site.gumbel) : gev_to_frechet(s, site.gev);
      }
      res.transformed.set_series(x, y, out);
      res.sites.push_back(site);
    }
  return res;
}

void write_margins_csv(std::ostream& os, const std::vector<SiteMargins>& sites) {
  os << "x,y,mu,sigma,xi,ci_lo,ci_hi\n";
  os.precision(17);
  for (const auto& s : sites) {
    os << s.x + 1 << ',' << s.y + 1 << ',';
    if (s.gumbel_selected)
      os << s.gumbel.mu << ',' << s.gumbel.sigma << ',';
    else
      os << s.gev.mu << ',' << s.gev.sigma << ',';
    os << s.gev.xi << ',';
    if (std::isnan(s.gev.xi_lo))
      os << "NA,NA\n";
    else
      os << s.gev.xi_lo << ',' << s.gev.xi_hi << '\n';
  }
}

}  // namespace stmado
