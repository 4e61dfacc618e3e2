#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "stmado/error.hpp"
#include "stmado/madogram.hpp"
#include "stmado/models.hpp"
#include "stmado/simulate.hpp"
#include "stmado/special.hpp"

using namespace stmado;
using doctest::Approx;

namespace {

SpaceTimeField iid_frechet(int n, int T, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SpaceTimeField f(n, T, Margins::Frechet);
  for (double& v : f.values) v = -1.0 / std::log(u(rng));
  return f;
}

// Direct double loop over all cell pairs; returns {pooled mean, count}.
std::pair<double, std::int64_t> brute_pooled(const SpaceTimeField& f, int h2, int l) {
  double s = 0.0;
  std::int64_t c = 0;
  for (int t1 = 0; t1 < f.T; ++t1)
    for (int t2 = 0; t2 < f.T; ++t2) {
      if (t2 - t1 != l) continue;
      for (int y1 = 0; y1 < f.n; ++y1)
        for (int x1 = 0; x1 < f.n; ++x1)
          for (int y2 = 0; y2 < f.n; ++y2)
            for (int x2 = 0; x2 < f.n; ++x2) {
              const int dx = x2 - x1, dy = y2 - y1;
              if (dx * dx + dy * dy != h2) continue;
              // count unordered pairs once at l == 0
              if (l == 0 && (y2 * f.n + x2) <= (y1 * f.n + x1)) continue;
              const double a = f(x1, y1, t1), b = f(x2, y2, t2);
              if (std::isnan(a) || std::isnan(b)) continue;
              s += 0.5 * std::fabs(std::exp(-1 / a) - std::exp(-1 / b));
              ++c;
            }
    }
  return {s / static_cast<double>(c), c};
}

double brute_slice_average(const SpaceTimeField& f, int h2) {
  double total = 0.0;
  int slices = 0;
  for (int t = 0; t < f.T; ++t) {
    SpaceTimeField one(f.n, 1, Margins::Frechet);
    for (int y = 0; y < f.n; ++y)
      for (int x = 0; x < f.n; ++x) one(x, y, 0) = f(x, y, t);
    const auto [m, c] = brute_pooled(one, h2, 0);
    if (c > 0) {
      total += m;
      ++slices;
    }
  }
  return total / slices;
}

}  // namespace

TEST_CASE("Frechet distribution function") {
  CHECK(frechet_cdf(1.0) == Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(frechet_cdf(1.0) == Approx(0.367879).epsilon(1e-6));
  CHECK(frechet_cdf(1e12) == Approx(1.0).epsilon(1e-11));
  CHECK(frechet_cdf(1 / std::log(2.0)) == Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS(frechet_cdf(0.0), Error);
  CHECK_THROWS_AS(frechet_cdf(-2.0), Error);
}

TEST_CASE("constant fields give zero") {
  SpaceTimeField f(6, 12, Margins::Frechet, 2.5);
  for (const auto& e : empirical_spatial_fmadogram(f, {1, 2, 4})) CHECK(e.value == 0.0);
  for (const auto& e : empirical_temporal_fmadogram(f, {1, 5})) CHECK(e.value == 0.0);
  for (const auto& e : empirical_st_fmadogram(f, {1, 2}, {1, 3})) CHECK(e.value == 0.0);
}

TEST_CASE("independent margins give one sixth") {
  const SpaceTimeField f = iid_frechet(20, 50, 3);
  CHECK(std::fabs(empirical_spatial_fmadogram(f, {1})[0].value - 1.0 / 6) <= 0.01);
  CHECK(std::fabs(empirical_temporal_fmadogram(f, {1})[0].value - 1.0 / 6) <= 0.01);
}

TEST_CASE("estimators agree with a brute-force double loop, with missing values") {
  SpaceTimeField f = iid_frechet(5, 6, 17);
  Rng rng(4);
  for (int i = 0; i < 12; ++i) f.values[rng() % f.values.size()] = kMissing;

  for (int h2 : {1, 2, 4, 5}) {
    const auto st = empirical_st_fmadogram(f, {h2}, {1, 2});
    for (const auto& e : st) {
      const auto [m, c] = brute_pooled(f, e.h2, e.lprime);
      CAPTURE(e.h2);
      CAPTURE(e.lprime);
      CHECK(e.value == Approx(m).epsilon(1e-13));
      CHECK(e.npairs == c);
    }
    CHECK(empirical_spatial_fmadogram(f, {h2})[0].value == Approx(brute_slice_average(f, h2)).epsilon(1e-13));
  }
}

TEST_CASE("joint classes at the axes coincide with the spatial and temporal estimators") {
  SimConfig cfg;
  cfg.seed = 12;
  const SpaceTimeField f = simulate_br(BRParams{0.4, 1.5, 0.2, 1}, GridSpec(9), 8, cfg);
  const auto st = empirical_st_fmadogram(f, {0, 1, 2}, {1, 2});
  const auto sp = empirical_spatial_fmadogram(f, {1, 2});
  const auto tm = empirical_temporal_fmadogram(f, {1, 2});
  for (const auto& e : st) {
    if (e.lprime == 0) {
      const auto& s = e.h2 == 1 ? sp[0] : sp[1];
      CHECK(e.value == Approx(s.value).epsilon(1e-14));
      CHECK(e.npairs == s.npairs);
    }
    if (e.h2 == 0) {
      const auto& t = e.lprime == 1 ? tm[0] : tm[1];
      CHECK(e.value == Approx(t.value).epsilon(1e-14));
      CHECK(e.npairs == t.npairs);
    }
  }
}

TEST_CASE("vector classes average to the scalar class") {
  SimConfig cfg;
  cfg.seed = 5;
  const SpaceTimeField f = simulate_mar(MarParams{SmithInnovation{1, 0.3, 1}, {1, 1}, 0.7}, GridSpec(9), 10, cfg);
  const auto vec = empirical_st_fmadogram_vector(f, {1, 5}, {1, 2});
  const auto sca = empirical_st_fmadogram(f, {1, 5}, {1, 2});
  for (const auto& s : sca) {
    double sum = 0.0;
    std::int64_t c = 0;
    for (const auto& v : vec)
      if (v.h2 == s.h2 && v.lprime == s.lprime) {
        CHECK(v.directional);
        CHECK(v.offset.norm2() == s.h2);
        sum += v.value * static_cast<double>(v.npairs);
        c += v.npairs;
      }
    CHECK(c == s.npairs);
    CHECK(sum / static_cast<double>(c) == Approx(s.value).epsilon(1e-13));
  }
  const auto sv = empirical_spatial_fmadogram_vector(f, {5});
  CHECK(sv.size() == half_plane_offsets(5).size());
}

TEST_CASE("invariance under grid symmetries and monotone transforms") {
  const SpaceTimeField f = iid_frechet(8, 7, 21);
  SpaceTimeField flipped = f, transposed = f;
  for (int t = 0; t < f.T; ++t)
    for (int y = 0; y < f.n; ++y)
      for (int x = 0; x < f.n; ++x) {
        flipped(x, y, t) = f(f.n - 1 - x, y, t);
        transposed(x, y, t) = f(y, x, t);
      }
  const std::vector<int> h2 = {1, 2, 4, 5, 8};
  const auto a = empirical_st_fmadogram(f, h2, {1, 2});
  const auto b = empirical_st_fmadogram(flipped, h2, {1, 2});
  const auto c = empirical_st_fmadogram(transposed, h2, {1, 2});
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].value == Approx(b[i].value).epsilon(1e-13));
    CHECK(a[i].value == Approx(c[i].value).epsilon(1e-13));
  }

  MadogramOptions rank;
  rank.mode = MarginMode::Rank;
  SpaceTimeField raw = f;
  raw.margins = Margins::Raw;
  for (double& v : raw.values) v = 3.0 + 2.0 * std::log(v) + std::pow(v, 0.3);
  const auto r1 = empirical_st_fmadogram(f, h2, {1, 2}, rank);
  const auto r2 = empirical_st_fmadogram(raw, h2, {1, 2}, rank);
  for (std::size_t i = 0; i < r1.size(); ++i) CHECK(r1[i].value == Approx(r2[i].value).epsilon(1e-14));
}

TEST_CASE("rank transform uses per-site average ranks over T + 1") {
  SpaceTimeField f(2, 4, Margins::Raw);
  for (int t = 0; t < 4; ++t)
    for (int s = 0; s < 4; ++s) f.values[static_cast<std::size_t>(t * 4 + s)] = t == 1 || t == 2 ? 5.0 : t;
  MadogramOptions rank;
  rank.mode = MarginMode::Rank;
  const auto u = transformed_values(f, rank);
  for (int s = 0; s < 4; ++s) {
    CHECK(u[s] == Approx(1.0 / 5));
    CHECK(u[4 + s] == Approx(3.5 / 5));
    CHECK(u[8 + s] == Approx(3.5 / 5));
    CHECK(u[12 + s] == Approx(2.0 / 5));
  }
}

TEST_CASE("simulated Brown-Resnick field: lag-one spatial estimate within a Monte-Carlo band") {
  const BRParams p{0.4, 1.5, 0.2, 1};
  std::vector<double> sp, tm;
  for (int r = 0; r < 60; ++r) {
    SimConfig cfg;
    cfg.seed = derive_seed(808, r);
    const SpaceTimeField f = simulate_br(p, GridSpec(10), 12, cfg);
    sp.push_back(empirical_spatial_fmadogram(f, {1})[0].value);
    tm.push_back(empirical_temporal_fmadogram(f, {1})[0].value);
  }
  CHECK(std::fabs(stmado::mean(sp) - 0.5 + 1 / (1 + 2 * oracle::normal_cdf(std::sqrt(0.4)))) <=
        3 * std::sqrt(sample_variance(sp) / 60));
  CHECK(std::fabs(stmado::mean(tm) - fmadogram_model(p, 0.0, 1)) <= 3 * std::sqrt(sample_variance(tm) / 60));
}

TEST_CASE("MAR-Smith joint estimate at an oriented lag") {
  const MarParams p{SmithInnovation{1, 0, 1}, {1, 1}, 0.7};
  std::vector<double> v;
  for (int r = 0; r < 40; ++r) {
    SimConfig cfg;
    cfg.seed = derive_seed(909, r);
    const SpaceTimeField f = simulate_mar(p, GridSpec(12), 20, cfg);
    for (const auto& e : empirical_st_fmadogram_vector(f, {2}, {1}))
      if (e.offset == Offset{1, 1}) v.push_back(e.value);
  }
  REQUIRE(v.size() == 40);
  CHECK(std::fabs(stmado::mean(v) - fmadogram_model(p, Vec2{1, 1}, 1)) <= 3 * std::sqrt(sample_variance(v) / 40));
}

TEST_CASE("estimates stay in [0, 1/2]") {
  SpaceTimeField f(4, 6, Margins::Frechet);
  for (std::size_t i = 0; i < f.values.size(); ++i) f.values[i] = i % 2 ? 1e-3 : 1e6;
  for (const auto& e : empirical_st_fmadogram(f, {1, 2}, {1, 2})) {
    CHECK(e.value >= 0.0);
    CHECK(e.value <= 0.5);
  }
}

TEST_CASE("errors") {
  const SpaceTimeField f = iid_frechet(5, 5, 1);
  CHECK_THROWS_AS(empirical_spatial_fmadogram(f, {3}), Error);
  CHECK_THROWS_AS(empirical_spatial_fmadogram(f, {50}), Error);
  CHECK_THROWS_AS(empirical_temporal_fmadogram(f, {5}), Error);
  SpaceTimeField raw = f;
  raw.margins = Margins::Raw;
  CHECK_THROWS_AS(empirical_spatial_fmadogram(raw, {1}), Error);
}

TEST_CASE("CSV output") {
  const SpaceTimeField f = iid_frechet(5, 5, 2);
  std::ostringstream a, b;
  write_madogram_csv(a, empirical_spatial_fmadogram(f, {1, 2}));
  CHECK(a.str().rfind("h,lprime,nu_hat,npairs\n", 0) == 0);
  CHECK(a.str().find("\n1,0,") != std::string::npos);
  write_madogram_csv(b, empirical_st_fmadogram_vector(f, {1}, {1}));
  CHECK(b.str().rfind("h,lprime,nu_hat,npairs,dx,dy\n", 0) == 0);
}
