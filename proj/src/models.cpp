#include "stmado/models.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "stmado/error.hpp"
#include "stmado/special.hpp"

namespace stmado {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

[[noreturn]] void bad_param(const std::string& what) { throw Error(ErrorKind::InvalidParams, what); }

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) bad_param(std::string(name) + " must be > 0, got " + fmt(v));
}

void require_smoothness(double v, const char* name, bool closed_at_two) {
  const bool ok = closed_at_two ? (v > 0.0 && v <= 2.0) : (v > 0.0 && v < 2.0);
  if (!ok) bad_param(std::string(name) + " must lie in " + (closed_at_two ? "(0,2]" : "(0,2)") + ", got " + fmt(v));
}

bool isotropic(const Innovation& inn) { return !std::holds_alternative<SmithInnovation>(inn); }

// Dependence parameter for an innovation at spatial lag d (Euclidean) or h.
double innovation_rho(const Innovation& inn, Vec2 h) {
  return std::visit(overloaded{
                        [&](const SchlatherInnovation& s) { return powered_exponential(norm(h), s.phi, s.kappa); },
                        [&](const ExtremalTInnovation& s) { return powered_exponential(norm(h), s.phi, s.kappa); },
                        [](const auto&) { return 0.0; },
                    },
                    inn);
}

double hr_parameter(const Innovation& inn, Vec2 h) {
  return std::visit(overloaded{
                        [&](const SmithInnovation& s) { return smith_distance(s, h); },
                        [&](const BRInnovation& b) {
                          return std::sqrt(2.0 * std::pow(norm(h) / b.phi, b.kappa));
                        },
                        [](const auto&) { return 0.0; },
                    },
                    inn);
}

constexpr double kRhoOne = 1.0 - 1e-15;

}  // namespace

double norm(Vec2 v) { return std::hypot(v.x, v.y); }

Family family_of(const ModelSpec& m) {
  return std::visit(overloaded{
                        [](const BRParams&) { return Family::A1; },
                        [](const SepSchlatherParams&) { return Family::A2; },
                        [](const MarParams& p) {
                          return std::visit(overloaded{
                                                [](const BRInnovation&) { return Family::B1; },
                                                [](const SmithInnovation&) { return Family::B2; },
                                                [](const ExtremalTInnovation&) { return Family::B3; },
                                                [](const SchlatherInnovation&) { return Family::MarSchlather; },
                                            },
                                            p.innovation);
                        },
                    },
                    m);
}

std::string_view family_name(Family f) {
  switch (f) {
    case Family::A1: return "A1";
    case Family::A2: return "A2";
    case Family::B1: return "B1";
    case Family::B2: return "B2";
    case Family::B3: return "B3";
    case Family::MarSchlather: return "MAR-Schlather";
  }
  return "?";
}

Family parse_family(std::string_view name) {
  for (Family f : all_families())
    if (family_name(f) == name) return f;
  throw Error(ErrorKind::InvalidArgs, "unknown model family '" + std::string(name) + "'");
}

std::vector<Family> all_families() {
  return {Family::A1, Family::A2, Family::B1, Family::B2, Family::B3, Family::MarSchlather};
}

std::vector<std::string> param_names(Family f) {
  switch (f) {
    case Family::A1:
    case Family::A2: return {"phi_s", "kappa_s", "phi_t", "kappa_t"};
    case Family::B1: return {"phi", "kappa", "tau1", "tau2", "delta"};
    case Family::B2: return {"s11", "s12", "s22", "tau1", "tau2", "delta"};
    case Family::B3: return {"phi", "kappa", "nu", "tau1", "tau2", "delta"};
    case Family::MarSchlather: return {"phi", "kappa", "tau1", "tau2", "delta"};
  }
  return {};
}

int spatial_dim(Family f) {
  switch (f) {
    case Family::B2:
    case Family::B3: return 3;
    default: return 2;
  }
}

int temporal_dim(Family f) {
  switch (f) {
    case Family::A1:
    case Family::A2: return 2;
    default: return 3;
  }
}

std::vector<double> to_vector(const ModelSpec& m) {
  return std::visit(
      overloaded{
          [](const BRParams& p) { return std::vector<double>{p.phi_s, p.kappa_s, p.phi_t, p.kappa_t}; },
          [](const SepSchlatherParams& p) { return std::vector<double>{p.phi_s, p.kappa_s, p.phi_t, p.kappa_t}; },
          [](const MarParams& p) {
            std::vector<double> v = std::visit(
                overloaded{
                    [](const SmithInnovation& s) { return std::vector<double>{s.s11, s.s12, s.s22}; },
                    [](const BRInnovation& s) { return std::vector<double>{s.phi, s.kappa}; },
                    [](const SchlatherInnovation& s) { return std::vector<double>{s.phi, s.kappa}; },
                    [](const ExtremalTInnovation& s) { return std::vector<double>{s.phi, s.kappa, s.nu}; },
                },
                p.innovation);
            v.insert(v.end(), {p.tau.x, p.tau.y, p.delta});
            return v;
          },
      },
      m);
}

ModelSpec from_vector(Family f, std::span<const double> v) {
  if (v.size() != param_names(f).size())
    throw Error(ErrorKind::InvalidArgs, "family " + std::string(family_name(f)) + " expects " +
                                            std::to_string(param_names(f).size()) + " parameters");
  auto mar = [&](Innovation inn, std::size_t off) {
    return MarParams{inn, Vec2{v[off], v[off + 1]}, v[off + 2]};
  };
  switch (f) {
    case Family::A1: return BRParams{v[0], v[1], v[2], v[3]};
    case Family::A2: return SepSchlatherParams{v[0], v[1], v[2], v[3]};
    case Family::B1: return mar(BRInnovation{v[0], v[1]}, 2);
    case Family::B2: return mar(SmithInnovation{v[0], v[1], v[2]}, 3);
    case Family::B3: return mar(ExtremalTInnovation{v[0], v[1], v[2]}, 3);
    case Family::MarSchlather: return mar(SchlatherInnovation{v[0], v[1]}, 2);
  }
  throw Error(ErrorKind::InvalidArgs, "unknown family");
}

void validate(const ModelSpec& m) {
  std::visit(overloaded{
                 [](const BRParams& p) {
                   require_positive(p.phi_s, "phi_s");
                   require_smoothness(p.kappa_s, "kappa_s", true);
                   require_positive(p.phi_t, "phi_t");
                   require_smoothness(p.kappa_t, "kappa_t", true);
                 },
                 [](const SepSchlatherParams& p) {
                   require_positive(p.phi_s, "phi_s");
                   require_smoothness(p.kappa_s, "kappa_s", false);
                   require_positive(p.phi_t, "phi_t");
                   require_smoothness(p.kappa_t, "kappa_t", false);
                 },
                 [](const MarParams& p) {
                   if (!(p.delta > 0.0 && p.delta < 1.0)) bad_param("delta must lie in (0,1), got " + fmt(p.delta));
                   if (!std::isfinite(p.tau.x) || !std::isfinite(p.tau.y)) bad_param("tau must be finite");
                   std::visit(overloaded{
                                  [](const SmithInnovation& s) {
                                    require_positive(s.s11, "s11");
                                    require_positive(s.s22, "s22");
                                    const double det = s.s11 * s.s22 - s.s12 * s.s12;
                                    if (!(det > 0.0)) bad_param("Sigma must be positive definite (det = " + fmt(det) + ")");
                                  },
                                  [](const BRInnovation& s) {
                                    require_positive(s.phi, "phi");
                                    require_smoothness(s.kappa, "kappa", true);
                                  },
                                  [](const SchlatherInnovation& s) {
                                    require_positive(s.phi, "phi");
                                    require_smoothness(s.kappa, "kappa", false);
                                  },
                                  [](const ExtremalTInnovation& s) {
                                    require_positive(s.phi, "phi");
                                    require_smoothness(s.kappa, "kappa", false);
                                    if (!(s.nu >= 1.0) || !std::isfinite(s.nu))
                                      bad_param("nu must be >= 1, got " + fmt(s.nu));
                                  },
                              },
                              p.innovation);
                 },
             },
             m);
}

double fbm_semivariogram(double h, double lprime, const BRParams& p) {
  if (h < 0.0 || lprime < 0.0) throw Error(ErrorKind::InvalidArgs, "lags must be nonnegative");
  const double gs = h > 0.0 ? 2.0 * p.phi_s * std::pow(h, p.kappa_s) : 0.0;
  const double gt = lprime > 0.0 ? 2.0 * p.phi_t * std::pow(lprime, p.kappa_t) : 0.0;
  return gs + gt;
}

double powered_exponential(double d, double phi, double kappa) {
  if (d <= 0.0) return 1.0;
  return std::exp(-std::pow(d / phi, kappa));
}

double smith_distance(const SmithInnovation& s, Vec2 h) {
  const double det = s.s11 * s.s22 - s.s12 * s.s12;
  const double q = (s.s22 * h.x * h.x - 2.0 * s.s12 * h.x * h.y + s.s11 * h.y * h.y) / det;
  return std::sqrt(std::max(q, 0.0));
}

// ---------------------------------------------------------------------------
// Extremal coefficient: direct closed forms.

double innovation_theta(const Innovation& inn, Vec2 h) {
  return std::visit(overloaded{
                        [&](const SmithInnovation& s) { return 2.0 * normal_cdf(smith_distance(s, h) / 2.0); },
                        [&](const BRInnovation& b) {
                          const double g = std::pow(norm(h) / b.phi, b.kappa);
                          return 2.0 * normal_cdf(std::sqrt(g / 2.0));
                        },
                        [&](const SchlatherInnovation& s) {
                          const double rho = powered_exponential(norm(h), s.phi, s.kappa);
                          return 1.0 + std::sqrt((1.0 - rho) / 2.0);
                        },
                        [&](const ExtremalTInnovation& s) {
                          const double rho = powered_exponential(norm(h), s.phi, s.kappa);
                          if (rho >= kRhoOne) return 1.0;
                          return 2.0 * student_t_cdf(std::sqrt((s.nu + 1.0) * (1.0 - rho) / (1.0 + rho)), s.nu + 1.0);
                        },
                    },
                    inn);
}

namespace {

double mar_theta(const MarParams& p, Vec2 h, double l) {
  const Vec2 shifted = h - l * p.tau;
  const double log_delta = std::log(p.delta);
  const double dl = std::exp(l * log_delta);  // delta^l
  return std::visit(
      overloaded{
          [&](const SchlatherInnovation& s) {
            const double rho = powered_exponential(norm(shifted), s.phi, s.kappa);
            const double inner = 1.0 - 2.0 * dl * (rho + 1.0) / ((1.0 + dl) * (1.0 + dl));
            return 0.5 * (1.0 + dl) * (1.0 + std::sqrt(std::max(inner, 0.0))) + 1.0 - dl;
          },
          [&](const ExtremalTInnovation& s) {
            const double rho = powered_exponential(norm(shifted), s.phi, s.kappa);
            if (rho >= kRhoOne) return 2.0 - dl;
            const double scale = std::sqrt((s.nu + 1.0) / (1.0 - rho * rho));
            // z(r) = scale (r^(1/nu) - rho) at r = delta^-l and r = delta^l.
            const double z_up = scale * (std::exp(-l * log_delta / s.nu) - rho);
            const double z_dn = scale * (std::exp(l * log_delta / s.nu) - rho);
            return student_t_cdf(z_up, s.nu + 1.0) + dl * student_t_cdf(z_dn, s.nu + 1.0) + 1.0 - dl;
          },
          [&](const auto&) {
            const double b = hr_parameter(p.innovation, shifted);
            if (b <= 0.0) return 2.0 - dl;
            return normal_cdf(b / 2.0 + (-l * log_delta) / b) + dl * normal_cdf(b / 2.0 + (l * log_delta) / b) + 1.0 -
                   dl;
          },
      },
      p.innovation);
}

}  // namespace

double theta(const ModelSpec& m, Vec2 h, double lprime) {
  if (lprime < 0.0) throw Error(ErrorKind::InvalidArgs, "temporal lag must be nonnegative");
  return std::visit(overloaded{
                        [&](const BRParams& p) {
                          const double g = fbm_semivariogram(norm(h), lprime, p);
                          return 2.0 * normal_cdf(std::sqrt(g / 2.0));
                        },
                        [&](const SepSchlatherParams& p) {
                          const double rho = powered_exponential(norm(h), p.phi_s, p.kappa_s) *
                                             powered_exponential(lprime, p.phi_t, p.kappa_t);
                          return 1.0 + std::sqrt((1.0 - rho) / 2.0);
                        },
                        [&](const MarParams& p) { return std::clamp(mar_theta(p, h, lprime), 1.0, 2.0); },
                    },
                    m);
}

double theta(const ModelSpec& m, double h, double lprime) {
  if (const auto* mar = std::get_if<MarParams>(&m)) {
    const bool direction_free = h == 0.0 || (lprime == 0.0 && isotropic(mar->innovation));
    if (!direction_free)
      throw Error(ErrorKind::InvalidArgs,
                  "family " + std::string(family_name(family_of(m))) + " needs a vector spatial lag here");
  }
  return theta(m, Vec2{h, 0.0}, lprime);
}

double fmadogram_from_theta(double th) { return 0.5 - 1.0 / (th + 1.0); }

double fmadogram_model(const ModelSpec& m, Vec2 h, double lprime) {
  return fmadogram_from_theta(theta(m, h, lprime));
}

double fmadogram_model(const ModelSpec& m, double h, double lprime) {
  return fmadogram_from_theta(theta(m, h, lprime));
}

double chi(const ModelSpec& m, Vec2 h, double lprime) { return 2.0 - theta(m, h, lprime); }

// ---------------------------------------------------------------------------
// Exponent functions.

double husler_reiss_exponent(double a, double inv_x1, double inv_x2, double log_ratio) {
  if (a <= 0.0) return std::max(inv_x1, inv_x2);
  return inv_x1 * normal_cdf(a / 2.0 + log_ratio / a) + inv_x2 * normal_cdf(a / 2.0 - log_ratio / a);
}

double schlather_exponent(double rho, double inv_x1, double inv_x2, double log_ratio) {
  // x1 x2 / (x1 + x2)^2 = 1 / (4 cosh^2(log(x2/x1) / 2))
  const double c = std::cosh(0.5 * log_ratio);
  const double w = 0.25 / (c * c);
  const double inner = 1.0 - 2.0 * (rho + 1.0) * w;
  return 0.5 * (inv_x1 + inv_x2) * (1.0 + std::sqrt(std::max(inner, 0.0)));
}

double extremal_t_exponent(double rho, double nu, double inv_x1, double inv_x2, double log_ratio) {
  if (rho >= kRhoOne) return std::max(inv_x1, inv_x2);
  const double scale = std::sqrt((nu + 1.0) / (1.0 - rho * rho));
  const double z12 = scale * (std::exp(log_ratio / nu) - rho);   // r = x2/x1
  const double z21 = scale * (std::exp(-log_ratio / nu) - rho);  // r = x1/x2
  return inv_x1 * student_t_cdf(z12, nu + 1.0) + inv_x2 * student_t_cdf(z21, nu + 1.0);
}

double innovation_exponent(const Innovation& inn, Vec2 h, double inv_x1, double inv_x2, double log_ratio) {
  return std::visit(overloaded{
                        [&](const SchlatherInnovation&) {
                          return schlather_exponent(innovation_rho(inn, h), inv_x1, inv_x2, log_ratio);
                        },
                        [&](const ExtremalTInnovation& s) {
                          return extremal_t_exponent(innovation_rho(inn, h), s.nu, inv_x1, inv_x2, log_ratio);
                        },
                        [&](const auto&) {
                          return husler_reiss_exponent(hr_parameter(inn, h), inv_x1, inv_x2, log_ratio);
                        },
                    },
                    inn);
}

double exponent_V(const ModelSpec& m, Vec2 h, double lprime, double x1, double x2) {
  if (!(x1 > 0.0) || !(x2 > 0.0)) throw Error(ErrorKind::InvalidArgs, "exponent function needs x1, x2 > 0");
  if (lprime < 0.0) throw Error(ErrorKind::InvalidArgs, "temporal lag must be nonnegative");
  const double log_ratio = std::log(x2) - std::log(x1);
  return std::visit(
      overloaded{
          [&](const BRParams& p) {
            const double a = std::sqrt(2.0 * fbm_semivariogram(norm(h), lprime, p));
            return husler_reiss_exponent(a, 1.0 / x1, 1.0 / x2, log_ratio);
          },
          [&](const SepSchlatherParams& p) {
            const double rho =
                powered_exponential(norm(h), p.phi_s, p.kappa_s) * powered_exponential(lprime, p.phi_t, p.kappa_t);
            return schlather_exponent(rho, 1.0 / x1, 1.0 / x2, log_ratio);
          },
          [&](const MarParams& p) {
            // V_{0, h - l tau}(x1, x2 / delta^l) + (1 - delta^l) / x2
            const double log_dl = lprime * std::log(p.delta);
            const double dl = std::exp(log_dl);
            const double spatial =
                innovation_exponent(p.innovation, h - lprime * p.tau, 1.0 / x1, dl / x2, log_ratio - log_dl);
            return spatial + (1.0 - dl) / x2;
          },
      },
      m);
}

double bivariate_cdf(const ModelSpec& m, Vec2 h, double lprime, double x1, double x2) {
  return std::exp(-exponent_V(m, h, lprime, x1, x2));
}

double lambda_madogram_constant(double lambda) { return 3.0 / (2.0 * (1.0 + lambda) * (2.0 - lambda)); }

double lambda_madogram(const ModelSpec& m, Vec2 h, double lprime, double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw Error(ErrorKind::InvalidArgs, "lambda must lie in (0,1)");
  const double v = exponent_V(m, h, lprime, lambda, 1.0 - lambda);
  return v / (1.0 + v) - lambda_madogram_constant(lambda);
}

}  // namespace stmado
