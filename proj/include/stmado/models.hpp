#pragma once

// Closed-form pairwise dependence functions of the space-time max-stable
// families: Brown-Resnick with additive fractional-Brownian semivariogram
// (A1), Schlather with separable powered-exponential correlation (A2), and
// the max-autoregressive (MAR) class X(s,t) = max{delta X(s - tau, t - 1),
// (1 - delta) H(s,t)} with Brown-Resnick (B1), Smith (B2), extremal-t (B3)
// or Schlather innovations.
//
// Conventions: A1 uses gamma(h,l) = 2 phi_s h^kappa_s + 2 phi_t l^kappa_t,
// B1 uses gamma(h) = (h / phi)^kappa. Both give theta = 2 Phi(sqrt(gamma/2))
// for the spatial margin, so A1 at l = 0 matches B1 when
// 2 phi_s h^kappa_s == (h / phi)^kappa.

#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace stmado {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double c, Vec2 a) { return {c * a.x, c * a.y}; }
double norm(Vec2 v);

enum class Family { A1, A2, B1, B2, B3, MarSchlather };

struct BRParams {
  double phi_s = 0.4;
  double kappa_s = 1.5;
  double phi_t = 0.2;
  double kappa_t = 1.0;
};

struct SepSchlatherParams {
  double phi_s = 2.0;
  double kappa_s = 1.0;
  double phi_t = 2.0;
  double kappa_t = 1.0;
};

struct SmithInnovation {
  double s11 = 1.0;
  double s12 = 0.0;
  double s22 = 1.0;
};

struct BRInnovation {
  double phi = 1.0;
  double kappa = 1.0;
};

struct SchlatherInnovation {
  double phi = 1.0;
  double kappa = 1.0;
};

struct ExtremalTInnovation {
  double phi = 1.0;
  double kappa = 1.0;
  double nu = 3.0;
};

using Innovation = std::variant<SmithInnovation, BRInnovation, SchlatherInnovation, ExtremalTInnovation>;

struct MarParams {
  Innovation innovation = SmithInnovation{};
  Vec2 tau{1.0, 1.0};
  double delta = 0.7;
};

using ModelSpec = std::variant<BRParams, SepSchlatherParams, MarParams>;

Family family_of(const ModelSpec& m);
std::string_view family_name(Family f);
Family parse_family(std::string_view name);
std::vector<Family> all_families();

/// Parameter names in vector order, e.g. {"s11","s12","s22","tau1","tau2","delta"} for B2.
std::vector<std::string> param_names(Family f);
/// Number of purely spatial / purely temporal parameters.
int spatial_dim(Family f);
int temporal_dim(Family f);

std::vector<double> to_vector(const ModelSpec& m);
ModelSpec from_vector(Family f, std::span<const double> v);

/// Throws InvalidParams naming the violated bound.
void validate(const ModelSpec& m);

/// Brown-Resnick semivariogram 2 phi_s h^kappa_s + 2 phi_t l^kappa_t.
double fbm_semivariogram(double h, double lprime, const BRParams& p);

/// exp(-(d / phi)^kappa).
double powered_exponential(double d, double phi, double kappa);

/// Extremal coefficient in [1, 2] from the family's closed form.
double theta(const ModelSpec& m, Vec2 h, double lprime);

/// Scalar-distance overload. Valid whenever the value does not depend on the
/// direction of h: A1, A2, any MAR model at lprime == 0 with an isotropic
/// innovation, and any model at h == 0. Throws InvalidArgs otherwise.
double theta(const ModelSpec& m, double h, double lprime);

/// 1/2 - 1/(theta + 1).
double fmadogram_from_theta(double theta);
double fmadogram_model(const ModelSpec& m, Vec2 h, double lprime);
double fmadogram_model(const ModelSpec& m, double h, double lprime);

/// Upper tail dependence chi = 2 - theta.
double chi(const ModelSpec& m, Vec2 h, double lprime);

/// Bivariate exponent function V_{h,l}(x1, x2) for the pair
/// (X(0, 0), X(h, l)). Throws InvalidArgs unless x1, x2 > 0.
double exponent_V(const ModelSpec& m, Vec2 h, double lprime, double x1, double x2);

/// exp(-V).
double bivariate_cdf(const ModelSpec& m, Vec2 h, double lprime, double x1, double x2);

/// c(lambda) = 3 / (2 (1 + lambda)(2 - lambda)).
double lambda_madogram_constant(double lambda);

/// nu_lambda = V(lambda, 1 - lambda) / (1 + V(lambda, 1 - lambda)) - c(lambda),
/// the closed form of (1/2) E|F(X1)^lambda - F(X2)^(1 - lambda)|.
double lambda_madogram(const ModelSpec& m, Vec2 h, double lprime, double lambda);

/// Spatial exponent of a MAR innovation at lag h, with the arguments given
/// through 1/x1, 1/x2 and log(x2/x1) so large time lags cannot overflow.
double innovation_exponent(const Innovation& inn, Vec2 h, double inv_x1, double inv_x2, double log_ratio);

/// Extremal coefficient of a MAR innovation at spatial lag h.
double innovation_theta(const Innovation& inn, Vec2 h);

/// Husler-Reiss exponent with dependence parameter a (a = sqrt(2 gamma) for
/// Brown-Resnick, sqrt(h' Sigma^-1 h) for Smith); a == 0 is complete dependence.
double husler_reiss_exponent(double a, double inv_x1, double inv_x2, double log_ratio);

/// Extremal-t exponent with correlation rho and nu degrees of freedom.
double extremal_t_exponent(double rho, double nu, double inv_x1, double inv_x2, double log_ratio);

/// Schlather exponent with correlation rho.
double schlather_exponent(double rho, double inv_x1, double inv_x2, double log_ratio);

/// Mahalanobis norm sqrt(h' Sigma^-1 h).
double smith_distance(const SmithInnovation& s, Vec2 h);

}  // namespace stmado
