#include "stmado/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "stmado/error.hpp"

namespace stmado {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kSqrt2Pi = 2.5066282746310002;

std::vector<Point3> grid_sites(int nx, int ny) {
  std::vector<Point3> sites;
  sites.reserve(static_cast<std::size_t>(nx) * ny);
  for (int y = 0; y < ny; ++y)
    for (int x = 0; x < nx; ++x) sites.push_back({static_cast<double>(x), static_cast<double>(y), 0.0});
  return sites;
}

void check_budget(std::size_t sites, const SimConfig& cfg) {
  if (static_cast<long long>(sites) > cfg.cholesky_budget)
    throw Error(ErrorKind::BudgetExceeded, std::to_string(sites) + " sites exceed the Cholesky budget of " +
                                               std::to_string(cfg.cholesky_budget));
}

double min_value(const std::vector<double>& v) { return *std::min_element(v.begin(), v.end()); }

}  // namespace

int mar_truncation_depth(double delta, double tol) {
  if (!(delta > 0.0 && delta < 1.0)) throw Error(ErrorKind::InvalidParams, "delta must lie in (0,1)");
  if (!(tol > 0.0 && tol < 1.0)) throw Error(ErrorKind::InvalidArgs, "truncation tolerance must lie in (0,1)");
  const int j = static_cast<int>(std::ceil(std::log(tol) / std::log(delta))) - 1;
  return std::max(j, 1);
}

// ---------------------------------------------------------------------------
// Brown-Resnick by extremal functions.

SeparableBRSampler::SeparableBRSampler(std::vector<Point3> spatial_sites, std::function<double(double, double)> gamma_s,
                                       int T, std::function<double(double)> gamma_t, const SimConfig& cfg)
    : sites_(std::move(spatial_sites)),
      T_(T),
      spatial_([&] {
        check_budget(sites_.size(), cfg);
        return GaussianIncrementSampler([gamma_s](double dx, double dy, double) { return gamma_s(dx, dy); }, sites_,
                                        cfg.jitter, cfg.cholesky_budget);
      }()) {
  if (T < 1) throw Error(ErrorKind::InvalidArgs, "T must be >= 1");
  const std::size_t S = sites_.size();
  gamma_s_table_.resize(S * S);
  for (std::size_t a = 0; a < S; ++a)
    for (std::size_t b = 0; b < S; ++b)
      gamma_s_table_[a * S + b] = gamma_s(sites_[a].x - sites_[b].x, sites_[a].y - sites_[b].y);
  gamma_t_table_.resize(static_cast<std::size_t>(T));
  for (int l = 0; l < T; ++l) gamma_t_table_[static_cast<std::size_t>(l)] = l == 0 ? 0.0 : gamma_t(l);
  if (T > 1) {
    check_budget(static_cast<std::size_t>(T), cfg);
    std::vector<Point3> times;
    for (int t = 0; t < T; ++t) times.push_back({0.0, 0.0, static_cast<double>(t)});
    temporal_ = std::make_unique<GaussianIncrementSampler>(
        [gamma_t](double, double, double dt) { return dt == 0.0 ? 0.0 : gamma_t(std::abs(dt)); }, times, cfg.jitter,
        cfg.cholesky_budget);
  }
}

std::vector<double> SeparableBRSampler::draw(Rng& rng) const {
  const std::size_t S = sites_.size();
  const std::size_t T = static_cast<std::size_t>(T_);
  const std::size_t N = S * T;
  std::vector<double> Z(N, 0.0), es(S), et(T, 0.0), ys(S), yt(T);
  std::exponential_distribution<double> expo(1.0);
  std::size_t count = 0;

  for (std::size_t k = 0; k < N; ++k) {
    const std::size_t tk = k / S, sk = k % S;
    const double* gs_row = gamma_s_table_.data() + sk * S;
    double arrival = expo(rng);
    while (1.0 / arrival > Z[k]) {
      spatial_.draw(rng, es);
      if (temporal_) temporal_->draw(rng, et);
      const double es0 = es[sk], et0 = et[tk];
      for (std::size_t s = 0; s < S; ++s) ys[s] = std::exp(es[s] - es0 - gs_row[s]);
      for (std::size_t t = 0; t < T; ++t) {
        const std::size_t lag = t > tk ? t - tk : tk - t;
        yt[t] = std::exp(et[t] - et0 - gamma_t_table_[lag]);
      }
      const double zeta = 1.0 / arrival;
      ++count;

      // Reject if the candidate exceeds the current maximum at an earlier site.
      bool accept = true;
      for (std::size_t t = 0; t <= tk && accept; ++t) {
        const double zt = zeta * yt[t];
        const std::size_t s_end = t < tk ? S : sk;
        const double* zrow = Z.data() + t * S;
        for (std::size_t s = 0; s < s_end; ++s)
          if (zt * ys[s] > zrow[s]) {
            accept = false;
            break;
          }
      }
      if (accept) {
        for (std::size_t t = tk; t < T; ++t) {
          const double zt = zeta * yt[t];
          double* zrow = Z.data() + t * S;
          for (std::size_t s = (t == tk ? sk : 0); s < S; ++s) zrow[s] = std::max(zrow[s], zt * ys[s]);
        }
      }
      arrival += expo(rng);
    }
  }
  last_count_ = count;
  return Z;
}

SpaceTimeField simulate_br(const BRParams& p, const GridSpec& grid, int T, const SimConfig& cfg) {
  validate(ModelSpec{p});
  if (T < 1) throw Error(ErrorKind::InvalidArgs, "T must be >= 1");
  SeparableBRSampler sampler(
      grid_sites(grid.n, grid.n),
      [p](double dx, double dy) {
        const double d = std::hypot(dx, dy);
        return d > 0.0 ? 2.0 * p.phi_s * std::pow(d, p.kappa_s) : 0.0;
      },
      T, [p](double l) { return 2.0 * p.phi_t * std::pow(l, p.kappa_t); }, cfg);
  Rng rng = make_rng(cfg.seed);
  SpaceTimeField f(grid.n, T, Margins::Frechet);
  f.values = sampler.draw(rng);
  return f;
}

// ---------------------------------------------------------------------------
// Spatial innovations.

struct InnovationSampler::Impl {
  int nx = 0, ny = 0;
  SimConfig cfg;
  Innovation inn;
  // Smith
  double inv11 = 0, inv12 = 0, inv22 = 0, fmax = 0, lambda_max = 0, buffer = 0;
  // Schlather
  Eigen::MatrixXd corr_factor;
  // Brown-Resnick
  std::unique_ptr<SeparableBRSampler> br;

  std::vector<double> draw_smith(Rng& rng) const {
    const std::size_t cells = static_cast<std::size_t>(nx) * ny;
    std::vector<double> X(cells, 0.0);
    const double x0 = -buffer, x1 = nx - 1 + buffer, y0 = -buffer, y1 = ny - 1 + buffer;
    const double area = (x1 - x0) * (y1 - y0);
    std::exponential_distribution<double> expo(1.0);
    std::uniform_real_distribution<double> ux(x0, x1), uy(y0, y1);
    double arrival = 0.0, lower = 0.0;
    std::size_t storms = 0;
    for (;;) {
      arrival += expo(rng);
      const double zeta = area / arrival;
      if (lower > 0.0 && zeta * fmax <= lower) break;
      const double cx = ux(rng), cy = uy(rng);
      int bx0 = 0, bx1 = nx - 1, by0 = 0, by1 = ny - 1;
      if (lower > 0.0) {
        // Cells where zeta f(s - c) cannot exceed the current minimum are skipped.
        const double r = std::min(std::sqrt(2.0 * lambda_max * std::log(zeta * fmax / lower)),
                                  static_cast<double>(nx + ny) + buffer);
        bx0 = static_cast<int>(std::clamp(std::ceil(cx - r), 0.0, static_cast<double>(nx)));
        bx1 = static_cast<int>(std::clamp(std::floor(cx + r), -1.0, static_cast<double>(nx - 1)));
        by0 = static_cast<int>(std::clamp(std::ceil(cy - r), 0.0, static_cast<double>(ny)));
        by1 = static_cast<int>(std::clamp(std::floor(cy + r), -1.0, static_cast<double>(ny - 1)));
      }
      for (int y = by0; y <= by1; ++y) {
        const double dy = y - cy;
        for (int x = bx0; x <= bx1; ++x) {
          const double dx = x - cx;
          const double q = inv11 * dx * dx + 2.0 * inv12 * dx * dy + inv22 * dy * dy;
          const double v = zeta * fmax * std::exp(-0.5 * q);
          double& cell = X[static_cast<std::size_t>(y) * nx + x];
          if (v > cell) cell = v;
        }
      }
      ++storms;
      if (lower <= 0.0 || storms % 16 == 0) lower = min_value(X);
    }
    return X;
  }

  std::vector<double> draw_schlather(Rng& rng) const {
    const auto cells = static_cast<Eigen::Index>(nx) * ny;
    std::vector<double> X(static_cast<std::size_t>(cells), 0.0);
    std::exponential_distribution<double> expo(1.0);
    std::normal_distribution<double> normal;
    Eigen::VectorXd z(cells);
    double arrival = 0.0;
    for (;;) {
      arrival += expo(rng);
      const double zeta = 1.0 / arrival;
      if (kSqrt2Pi * cfg.schlather_bound * zeta <= min_value(X)) break;
      for (Eigen::Index i = 0; i < cells; ++i) z[i] = normal(rng);
      const Eigen::VectorXd w = corr_factor.triangularView<Eigen::Lower>() * z;
      for (Eigen::Index i = 0; i < cells; ++i) {
        const double v = kSqrt2Pi * zeta * std::max(0.0, w[i]);
        double& cell = X[static_cast<std::size_t>(i)];
        if (v > cell) cell = v;
      }
    }
    return X;
  }
};

InnovationSampler::InnovationSampler(const Innovation& inn, int nx, int ny, const SimConfig& cfg)
    : impl_(std::make_unique<Impl>()) {
  if (nx < 1 || ny < 1) throw Error(ErrorKind::InvalidArgs, "innovation window must be non-empty");
  Impl& im = *impl_;
  im.nx = nx;
  im.ny = ny;
  im.cfg = cfg;
  im.inn = inn;
  std::visit(overloaded{
                 [&](const SmithInnovation& s) {
                   const double det = s.s11 * s.s22 - s.s12 * s.s12;
                   if (!(det > 0.0) || !(s.s11 > 0.0))
                     throw Error(ErrorKind::InvalidParams, "Sigma must be positive definite");
                   im.inv11 = s.s22 / det;
                   im.inv12 = -s.s12 / det;
                   im.inv22 = s.s11 / det;
                   im.fmax = 1.0 / (2.0 * std::numbers::pi * std::sqrt(det));
                   const double half = 0.5 * (s.s11 + s.s22);
                   im.lambda_max = half + std::sqrt(0.25 * (s.s11 - s.s22) * (s.s11 - s.s22) + s.s12 * s.s12);
                   im.buffer = cfg.smith_buffer_sd * std::sqrt(im.lambda_max);
                 },
                 [&](const SchlatherInnovation& s) {
                   const std::vector<Point3> sites = grid_sites(nx, ny);
                   check_budget(sites.size(), cfg);
                   const auto m = static_cast<Eigen::Index>(sites.size());
                   Eigen::MatrixXd corr(m, m);
                   for (Eigen::Index a = 0; a < m; ++a)
                     for (Eigen::Index b = 0; b <= a; ++b) {
                       const double d = std::hypot(sites[a].x - sites[b].x, sites[a].y - sites[b].y);
                       corr(a, b) = corr(b, a) = powered_exponential(d, s.phi, s.kappa);
                     }
                   im.corr_factor = robust_cholesky(corr, cfg.jitter);
                 },
                 [&](const BRInnovation& b) {
                   im.br = std::make_unique<SeparableBRSampler>(
                       grid_sites(nx, ny),
                       [b](double dx, double dy) {
                         const double d = std::hypot(dx, dy);
                         return d > 0.0 ? std::pow(d / b.phi, b.kappa) : 0.0;
                       },
                       1, [](double) { return 0.0; }, cfg);
                 },
                 [&](const ExtremalTInnovation&) {
                   throw Error(ErrorKind::NotSupported, "extremal-t innovations cannot be simulated");
                 },
             },
             inn);
}

InnovationSampler::~InnovationSampler() = default;
InnovationSampler::InnovationSampler(InnovationSampler&&) noexcept = default;

std::vector<double> InnovationSampler::draw(Rng& rng) const {
  const Impl& im = *impl_;
  return std::visit(overloaded{
                        [&](const SmithInnovation&) { return im.draw_smith(rng); },
                        [&](const SchlatherInnovation&) { return im.draw_schlather(rng); },
                        [&](const BRInnovation&) { return im.br->draw(rng); },
                        [&](const ExtremalTInnovation&) -> std::vector<double> {
                          throw Error(ErrorKind::NotSupported, "extremal-t innovations cannot be simulated");
                        },
                    },
                    im.inn);
}

std::vector<double> simulate_spatial_innovation(const Innovation& inn, int nx, int ny, Rng& rng,
                                                const SimConfig& cfg) {
  return InnovationSampler(inn, nx, ny, cfg).draw(rng);
}

// ---------------------------------------------------------------------------
// Max-autoregressive recursion.

double MarRealization::innovation(int x, int y, int t) const {
  const std::size_t idx = (static_cast<std::size_t>(t - t_lo) * ny + static_cast<std::size_t>(y - y_lo)) * nx +
                          static_cast<std::size_t>(x - x_lo);
  return innovations[idx];
}

MarRealization simulate_mar_realization(const MarParams& p, const GridSpec& grid, int T, const SimConfig& cfg) {
  validate(ModelSpec{p});
  if (T < 1) throw Error(ErrorKind::InvalidArgs, "T must be >= 1");
  const double rx = std::round(p.tau.x), ry = std::round(p.tau.y);
  if (std::abs(p.tau.x - rx) > 1e-12 || std::abs(p.tau.y - ry) > 1e-12)
    throw Error(ErrorKind::NonIntegerShift, "simulation needs an integer propagation vector tau");
  const int tx = static_cast<int>(rx), ty = static_cast<int>(ry);
  const int J = cfg.truncation > 0 ? cfg.truncation : mar_truncation_depth(p.delta, cfg.truncation_tol);
  const int n = grid.n;

  MarRealization r;
  r.depth = J;
  r.x_lo = -J * std::max(0, tx);
  r.y_lo = -J * std::max(0, ty);
  r.nx = n + J * std::abs(tx);
  r.ny = n + J * std::abs(ty);
  r.t_lo = -J;
  const int nt = T + J;
  const std::size_t plane = static_cast<std::size_t>(r.nx) * r.ny;

  InnovationSampler sampler(p.innovation, r.nx, r.ny, cfg);
  Rng rng = make_rng(cfg.seed);
  r.innovations.resize(plane * nt);
  for (int t = 0; t < nt; ++t) {
    const std::vector<double> h = sampler.draw(rng);
    std::copy(h.begin(), h.end(), r.innovations.begin() + static_cast<std::ptrdiff_t>(plane * t));
  }

  const double w = 1.0 - p.delta;
  std::vector<double> Y(r.innovations.size());
  for (std::size_t i = 0; i < Y.size(); ++i) Y[i] = w * r.innovations[i];
  for (int j = 1; j <= J; ++j) {
    for (int t = nt - 1; t >= 1; --t) {
      double* cur = Y.data() + plane * t;
      const double* prev = Y.data() + plane * (t - 1);
      const double* base = r.innovations.data() + plane * t;
      for (int y = 0; y < r.ny; ++y) {
        const int ys = y - ty;
        if (ys < 0 || ys >= r.ny) continue;
        for (int x = 0; x < r.nx; ++x) {
          const int xs = x - tx;
          if (xs < 0 || xs >= r.nx) continue;
          const std::size_t i = static_cast<std::size_t>(y) * r.nx + x;
          cur[i] = std::max(w * base[i], p.delta * prev[static_cast<std::size_t>(ys) * r.nx + xs]);
        }
      }
    }
  }

  r.field = SpaceTimeField(n, T, Margins::Frechet);
  for (int t = 0; t < T; ++t) {
    const double* plane_t = Y.data() + plane * (t + J);
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x)
        r.field(x, y, t) = plane_t[static_cast<std::size_t>(y - r.y_lo) * r.nx + (x - r.x_lo)];
  }
  return r;
}

SpaceTimeField simulate_mar(const MarParams& p, const GridSpec& grid, int T, const SimConfig& cfg) {
  return simulate_mar_realization(p, grid, T, cfg).field;
}

// ---------------------------------------------------------------------------
// Separable space-time Schlather.

SpaceTimeField simulate_sep_schlather(const SepSchlatherParams& p, const GridSpec& grid, int T,
                                      const SimConfig& cfg) {
  validate(ModelSpec{p});
  const std::vector<Point3> sites = grid_sites(grid.n, grid.n);
  check_budget(sites.size(), cfg);
  check_budget(static_cast<std::size_t>(T), cfg);
  const auto S = static_cast<Eigen::Index>(sites.size());
  Eigen::MatrixXd cs(S, S), ct(T, T);
  for (Eigen::Index a = 0; a < S; ++a)
    for (Eigen::Index b = 0; b <= a; ++b)
      cs(a, b) = cs(b, a) =
          powered_exponential(std::hypot(sites[a].x - sites[b].x, sites[a].y - sites[b].y), p.phi_s, p.kappa_s);
  for (int a = 0; a < T; ++a)
    for (int b = 0; b <= a; ++b) ct(a, b) = ct(b, a) = powered_exponential(a - b, p.phi_t, p.kappa_t);
  const Eigen::MatrixXd ls = robust_cholesky(cs, cfg.jitter);
  const Eigen::MatrixXd lt = robust_cholesky(ct, cfg.jitter);

  Rng rng = make_rng(cfg.seed);
  std::exponential_distribution<double> expo(1.0);
  std::normal_distribution<double> normal;
  SpaceTimeField f(grid.n, T, Margins::Frechet);
  Eigen::MatrixXd z(S, T);
  double arrival = 0.0;
  for (;;) {
    arrival += expo(rng);
    const double zeta = 1.0 / arrival;
    if (kSqrt2Pi * cfg.schlather_bound * zeta <= min_value(f.values)) break;
    for (Eigen::Index j = 0; j < T; ++j)
      for (Eigen::Index i = 0; i < S; ++i) z(i, j) = normal(rng);
    const Eigen::MatrixXd w = ls.triangularView<Eigen::Lower>() * z * lt.transpose();
    for (int t = 0; t < T; ++t)
      for (Eigen::Index s = 0; s < S; ++s) {
        double& cell = f.values[static_cast<std::size_t>(t) * S + s];
        cell = std::max(cell, kSqrt2Pi * zeta * std::max(0.0, w(s, t)));
      }
  }
  return f;
}

SpaceTimeField simulate_model(const ModelSpec& m, const GridSpec& grid, int T, const SimConfig& cfg) {
  return std::visit(overloaded{
                        [&](const BRParams& p) { return simulate_br(p, grid, T, cfg); },
                        [&](const SepSchlatherParams& p) { return simulate_sep_schlather(p, grid, T, cfg); },
                        [&](const MarParams& p) { return simulate_mar(p, grid, T, cfg); },
                    },
                    m);
}

}  // namespace stmado
