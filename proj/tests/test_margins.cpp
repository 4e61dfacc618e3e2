#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "stmado/error.hpp"
#include "stmado/margins.hpp"
#include "stmado/rng.hpp"

using namespace stmado;
using doctest::Approx;

namespace {

std::vector<double> gumbel_sample(int N, double mu, double sigma, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> x(N);
  for (double& v : x) v = mu - sigma * std::log(-std::log(u(rng)));
  return x;
}

std::vector<double> gev_sample(int N, double mu, double sigma, double xi, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> x(N);
  for (double& v : x) v = mu + sigma * (std::pow(-std::log(u(rng)), -xi) - 1) / xi;
  return x;
}

// Kolmogorov-Smirnov distance of a sample from a continuous CDF.
template <class F>
double ks(std::vector<double> x, F cdf) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double F0 = cdf(x[i]);
    d = std::max({d, (i + 1) / n - F0, F0 - i / n});
  }
  return d;
}

}  // namespace

TEST_CASE("block maxima") {
  SpaceTimeField f(6, 4, Margins::Raw);
  Rng rng(3);
  std::normal_distribution<double> z;
  for (double& v : f.values) v = z(rng);

  const SpaceTimeField same = block_maxima(f, 1, 1);
  CHECK(same.values == f.values);

  const SpaceTimeField m = block_maxima(f, 3, 2);
  CHECK(m.n == 2);
  CHECK(m.T == 2);
  for (int bt = 0; bt < 2; ++bt)
    for (int by = 0; by < 2; ++by)
      for (int bx = 0; bx < 2; ++bx) {
        double best = -INFINITY;
        for (int t = 2 * bt; t < 2 * bt + 2; ++t)
          for (int y = 3 * by; y < 3 * by + 3; ++y)
            for (int x = 3 * bx; x < 3 * bx + 3; ++x) best = std::max(best, f(x, y, t));
        CHECK(m(bx, by, bt) == best);
      }

  CHECK(block_maxima(SpaceTimeField(4, 4, Margins::Raw, 1.5), 2, 2).values == std::vector<double>(8, 1.5));

  SpaceTimeField holes(4, 1, Margins::Raw, kMissing);
  holes(1, 1, 0) = 4.0;
  const SpaceTimeField hm = block_maxima(holes, 2, 1);
  CHECK(hm.values[0] == 4.0);
  CHECK(std::isnan(hm.values[1]));
  CHECK_THROWS_AS(block_maxima(holes, 4, 1), Error);

  const SpaceTimeField big = block_maxima(SpaceTimeField(70, 48, Margins::Raw, 0.0), 5, 24);
  CHECK(big.n == 14);
  CHECK(big.T == 2);

  try {
    block_maxima(f, 4, 1);
    FAIL("expected IndivisibleBlocks");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::IndivisibleBlocks);
  }
  CHECK_THROWS_AS(block_maxima(f, 3, 3), Error);
  CHECK_THROWS_AS(block_maxima(f, 0, 1), Error);
}

TEST_CASE("seasonal centering") {
  const std::vector<double> zeros(12, 0.0);
  CHECK(deseasonalize(zeros, 4, 3) == zeros);

  Rng rng(5);
  std::normal_distribution<double> z(10.0, 3.0);
  std::vector<double> s(7 * 5);
  for (double& v : s) v = z(rng);
  const auto d = deseasonalize(s, 7, 5);
  for (int j = 0; j < 7; ++j) {
    double m = 0.0;
    for (int y = 0; y < 5; ++y) m += d[y * 7 + j];
    CHECK(std::fabs(m / 5) <= 1e-12);
  }
  CHECK(d[8] - d[1] == Approx(s[8] - s[1]));

  s[3] = kMissing;
  const auto dm = deseasonalize(s, 7, 5);
  CHECK(std::isnan(dm[3]));
  CHECK(std::fabs(dm[10] + dm[17] + dm[24] + dm[31]) <= 1e-12);

  try {
    deseasonalize(s, 7, 4);
    FAIL("expected LengthMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::LengthMismatch);
  }
}

TEST_CASE("Gumbel distribution functions") {
  const GumbelParams p{2.0, 3.0};
  CHECK(gumbel_cdf(2.0, p) == Approx(std::exp(-1.0)));
  for (double u : {0.01, 0.3, 0.5, 0.99}) CHECK(gumbel_cdf(gumbel_quantile(u, p), p) == Approx(u).epsilon(1e-13));
  const std::vector<double> x{1.0, 2.5, 7.0};
  double ll = 0.0;
  for (double v : x) {
    const double z = (v - 2.0) / 3.0;
    ll += -std::log(3.0) - z - std::exp(-z);
  }
  CHECK(gumbel_loglik(x, p) == Approx(ll).epsilon(1e-14));
  CHECK(gev_loglik(x, GevParams{2.0, 3.0, 1e-12}) == Approx(ll).epsilon(1e-9));
}

TEST_CASE("Gumbel maximum likelihood") {
  const auto x = gumbel_sample(10000, 2.0, 3.0, 11);
  const GumbelParams g = fit_gumbel(x);
  CHECK(std::fabs(g.mu - 2.0) <= 0.02 * 2.0);
  CHECK(std::fabs(g.sigma - 3.0) <= 0.02 * 3.0);

  const GumbelParams mom = gumbel_moments(x);
  CHECK(gumbel_loglik(x, g) >= gumbel_loglik(x, mom));
  CHECK(gumbel_loglik(x, g) >= gumbel_loglik(x, GumbelParams{g.mu + 1e-3, g.sigma}));
  CHECK(gumbel_loglik(x, g) >= gumbel_loglik(x, GumbelParams{g.mu, g.sigma * 1.001}));

  std::vector<double> y(x);
  for (double& v : y) v = 5.0 + 4.0 * v;
  const GumbelParams gy = fit_gumbel(y);
  CHECK(gy.mu == Approx(5.0 + 4.0 * g.mu).epsilon(1e-8));
  CHECK(gy.sigma == Approx(4.0 * g.sigma).epsilon(1e-8));

  const std::vector<double> few(x.begin(), x.begin() + 29);
  CHECK_THROWS_AS(fit_gumbel(few), Error);
  std::vector<double> with_nan(x.begin(), x.begin() + 40);
  with_nan[0] = kMissing;
  CHECK_THROWS_AS(fit_gumbel(with_nan), Error);
}

TEST_CASE("GEV maximum likelihood") {
  const auto heavy = gev_sample(4000, 1.0, 2.0, 0.3, 21);
  const GevParams g = fit_gev(heavy);
  CHECK(std::fabs(g.xi - 0.3) <= 0.06);
  CHECK(g.xi_lo < g.xi);
  CHECK(g.xi_hi > g.xi);
  CHECK(g.xi_lo > 0.0);
  CHECK(gev_loglik(heavy, g) == Approx(g.loglik).epsilon(1e-12));
  CHECK(g.loglik >= gev_loglik(heavy, GevParams{1.0, 2.0, 0.3}));

  const auto light = gev_sample(4000, 1.0, 2.0, -0.2, 22);
  CHECK(std::fabs(fit_gev(light).xi + 0.2) <= 0.05);

  const auto gum = gumbel_sample(4000, 1.0, 2.0, 23);
  const GevParams gg = fit_gev(gum);
  CHECK(gg.xi_lo < 0.0);
  CHECK(gg.xi_hi > 0.0);
}

TEST_CASE("probability integral transforms") {
  const GumbelParams p{2.0, 3.0};
  CHECK(pit_to_frechet(std::vector<double>{2.0}, p)[0] == Approx(1.0).epsilon(1e-15));
  const std::vector<double> grid{-5, -1, 0, 2, 4, 10, 30};
  const auto fr = pit_to_frechet(grid, p);
  for (std::size_t i = 1; i < fr.size(); ++i) CHECK(fr[i] > fr[i - 1]);
  const auto gu = pit_to_gumbel(grid, p);
  CHECK(gu[3] == 0.0);
  CHECK(gu[6] == Approx(28.0 / 3));

  const auto x = gumbel_sample(2000, 2.0, 3.0, 31);
  const auto z = pit_to_frechet(x, p);
  CHECK(ks(z, [](double v) { return std::exp(-1.0 / v); }) <= 1.628 / std::sqrt(2000.0));

  const GevParams zero{2.0, 3.0, 0.0};
  const auto zg = gev_to_frechet(grid, zero);
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(zg[i] == Approx(fr[i]).epsilon(1e-12));

  const GevParams pos{0.0, 1.0, 0.5};
  const auto out = gev_to_frechet(std::vector<double>{-3.0, 0.0}, pos);
  CHECK(out[0] == 0.0);
  CHECK(out[1] == Approx(1.0));
  const auto h = gev_sample(2000, 0.0, 1.0, 0.5, 32);
  CHECK(ks(gev_to_frechet(h, pos), [](double v) { return std::exp(-1.0 / v); }) <= 1.628 / std::sqrt(2000.0));
}

TEST_CASE("quantile plot data") {
  const GumbelParams p{0.0, 1.0};
  const std::vector<double> one{0.7};
  const auto q1 = qq_data(one, p);
  REQUIRE(q1.size() == 1);
  CHECK(q1[0].second == Approx(gumbel_quantile(0.5, p)));

  std::vector<double> exact;
  for (int i = 1; i <= 99; ++i) exact.push_back(gumbel_quantile(i / 100.0, p));
  std::reverse(exact.begin(), exact.end());
  for (const auto& [a, b] : qq_data(exact, p)) CHECK(a == Approx(b).epsilon(1e-13));

  double dev_small = 0.0, dev_big = 0.0;
  for (const auto& [a, b] : qq_data(gumbel_sample(200, 0, 1, 41), p))
    if (std::fabs(b) < 1.5) dev_small = std::max(dev_small, std::fabs(a - b));
  for (const auto& [a, b] : qq_data(gumbel_sample(20000, 0, 1, 42), p))
    if (std::fabs(b) < 1.5) dev_big = std::max(dev_big, std::fabs(a - b));
  CHECK(dev_big < 0.1);
  CHECK(dev_big < dev_small);
}

TEST_CASE("per-site transform to unit Frechet") {
  const int n = 4, T = 240;
  SpaceTimeField raw(n, T, Margins::Raw);
  Rng rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < T; ++t)
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x) raw(x, y, t) = 10 + x - (1 + 0.2 * y) * std::log(-std::log(u(rng)));

  MarginsOptions o;
  o.force_gumbel = true;
  const MarginsResult r = transform_margins(raw, o);
  CHECK(r.transformed.margins == Margins::Frechet);
  REQUIRE(r.sites.size() == 16);
  for (const auto& s : r.sites) {
    CHECK(std::fabs(s.gumbel.mu - (10 + s.x)) < 0.35);
    CHECK(std::fabs(s.gumbel.sigma - (1 + 0.2 * s.y)) < 0.25);
    CHECK(s.gumbel_selected);
  }

  SpaceTimeField affine = raw;
  for (double& v : affine.values) v = -7 + 2.5 * v;
  const MarginsResult ra = transform_margins(affine, o);
  for (std::size_t i = 0; i < raw.values.size(); ++i)
    CHECK(ra.transformed.values[i] == Approx(r.transformed.values[i]).epsilon(1e-7));

  o.target = MarginTarget::Gumbel;
  const MarginsResult rg = transform_margins(raw, o);
  CHECK(rg.transformed.margins == Margins::Gumbel);
  for (std::size_t i = 0; i < raw.values.size(); i += 37)
    CHECK(rg.transformed.values[i] == Approx(std::log(r.transformed.values[i])).epsilon(1e-10));

  MarginsOptions seasonal;
  seasonal.period = 24;
  seasonal.force_gumbel = true;
  seasonal.target = MarginTarget::Gumbel;
  CHECK_NOTHROW(transform_margins(raw, seasonal));
  seasonal.period = 7;
  CHECK_THROWS_AS(transform_margins(raw, seasonal), Error);

  std::ostringstream os;
  write_margins_csv(os, r.sites);
  const std::string csv = os.str();
  CHECK(csv.rfind("x,y,mu,sigma,xi,ci_lo,ci_hi\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 17);
}
