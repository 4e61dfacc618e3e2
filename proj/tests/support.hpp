#pragma once

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "stmado/models.hpp"
#include "stmado/rng.hpp"

namespace support {

using namespace stmado;

inline double unif(Rng& rng, double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }

inline ModelSpec random_model(Family f, Rng& rng) {
  auto tau = [&] { return Vec2{unif(rng, -2, 2), unif(rng, -2, 2)}; };
  switch (f) {
    case Family::A1: return BRParams{unif(rng, 0.05, 3), unif(rng, 0.1, 2), unif(rng, 0.05, 3), unif(rng, 0.1, 2)};
    case Family::A2:
      return SepSchlatherParams{unif(rng, 0.2, 8), unif(rng, 0.1, 1.95), unif(rng, 0.2, 8), unif(rng, 0.1, 1.95)};
    case Family::B1: return MarParams{BRInnovation{unif(rng, 0.2, 5), unif(rng, 0.1, 2)}, tau(), unif(rng, 0.05, 0.95)};
    case Family::B2: {
      const double s11 = unif(rng, 0.3, 3), s22 = unif(rng, 0.3, 3), r = unif(rng, -0.9, 0.9);
      return MarParams{SmithInnovation{s11, r * std::sqrt(s11 * s22), s22}, tau(), unif(rng, 0.05, 0.95)};
    }
    case Family::B3:
      return MarParams{ExtremalTInnovation{unif(rng, 0.2, 5), unif(rng, 0.1, 1.95), unif(rng, 1, 20)}, tau(),
                       unif(rng, 0.05, 0.95)};
    case Family::MarSchlather:
      return MarParams{SchlatherInnovation{unif(rng, 0.2, 5), unif(rng, 0.1, 1.95)}, tau(), unif(rng, 0.05, 0.95)};
  }
  return BRParams{};
}

// Exponent of the pair (X(0,0), X(h,l)), written from the model definitions.
inline double oracle_V(const ModelSpec& m, Vec2 h, double l, double x1, double x2) {
  if (const auto* a1 = std::get_if<BRParams>(&m)) {
    const double hn = std::hypot(h.x, h.y);
    const double g = 2 * a1->phi_s * std::pow(hn, a1->kappa_s) + (l > 0 ? 2 * a1->phi_t * std::pow(l, a1->kappa_t) : 0);
    return oracle::smith_V(x1, x2, std::sqrt(2 * g));
  }
  if (const auto* a2 = std::get_if<SepSchlatherParams>(&m)) {
    const double hn = std::hypot(h.x, h.y);
    const double rho = std::exp(-std::pow(hn / a2->phi_s, a2->kappa_s)) * std::exp(-std::pow(l / a2->phi_t, a2->kappa_t));
    return oracle::schlather_V(x1, x2, rho);
  }
  const auto& p = std::get<MarParams>(m);
  const double dl = std::pow(p.delta, l);
  const Vec2 d{h.x - l * p.tau.x, h.y - l * p.tau.y};
  const double dn = std::hypot(d.x, d.y);
  const double y2 = x2 / dl;
  double vin = 0.0;
  if (const auto* s = std::get_if<SmithInnovation>(&p.innovation)) {
    const double det = s->s11 * s->s22 - s->s12 * s->s12;
    const double q = (s->s22 * d.x * d.x - 2 * s->s12 * d.x * d.y + s->s11 * d.y * d.y) / det;
    vin = oracle::smith_V(x1, y2, std::sqrt(std::max(q, 0.0)));
  } else if (const auto* b = std::get_if<BRInnovation>(&p.innovation)) {
    vin = oracle::smith_V(x1, y2, std::sqrt(2 * std::pow(dn / b->phi, b->kappa)));
  } else if (const auto* sc = std::get_if<SchlatherInnovation>(&p.innovation)) {
    vin = oracle::schlather_V(x1, y2, std::exp(-std::pow(dn / sc->phi, sc->kappa)));
  } else {
    const auto& t = std::get<ExtremalTInnovation>(p.innovation);
    const double rho = std::exp(-std::pow(dn / t.phi, t.kappa));
    auto z = [&](double r) { return std::sqrt((t.nu + 1) / (1 - rho * rho)) * (std::pow(r, 1 / t.nu) - rho); };
    if (rho >= 1.0)
      vin = std::max(1 / x1, 1 / y2);
    else
      vin = oracle::student_t_cdf(z(y2 / x1), t.nu + 1) / x1 + oracle::student_t_cdf(z(x1 / y2), t.nu + 1) / y2;
  }
  return vin + (1 - dl) / x2;
}

}  // namespace support
