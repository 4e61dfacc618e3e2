#pragma once

// Marginal preprocessing of gridded maxima: block maxima, seasonal centering,
// Gumbel/GEV maximum likelihood and the transform to unit Frechet margins.

#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "stmado/field.hpp"

namespace stmado {

struct GumbelParams {
  double mu = 0.0;
  double sigma = 1.0;
};

struct GevParams {
  double mu = 0.0;
  double sigma = 1.0;
  double xi = 0.0;
  double xi_lo = 0.0;  ///< asymptotic 95% interval for xi (observed information)
  double xi_hi = 0.0;
  double loglik = 0.0;
};

/// (n/b) x (n/b) x (T/w) field of maxima over b x b x w blocks. A block whose
/// cells are all missing is missing. Throws IndivisibleBlocks.
SpaceTimeField block_maxima(const SpaceTimeField& raw, int space_block, int time_block);

/// Subtracts, for each within-period index, the mean of that index over the
/// years (the mean includes the value itself). Throws LengthMismatch unless
/// series.size() == period * years. Missing values are skipped in the means.
std::vector<double> deseasonalize(std::span<const double> series, int period, int years);

double gumbel_cdf(double x, const GumbelParams& p);
double gumbel_quantile(double u, const GumbelParams& p);
double gumbel_loglik(std::span<const double> x, const GumbelParams& p);
double gev_loglik(std::span<const double> x, const GevParams& p);

/// sigma0 = sd sqrt(6) / pi, mu0 = mean - gamma_E sigma0.
GumbelParams gumbel_moments(std::span<const double> x);

/// Maximum likelihood by safeguarded Newton on the profile equation for sigma.
/// Needs >= 30 finite observations (InvalidArgs otherwise).
GumbelParams fit_gumbel(std::span<const double> x);

/// Maximum likelihood over (mu, log sigma, xi) from the Gumbel fit, with the
/// interval for xi from the numerically differentiated observed information.
/// Throws SupportViolation if the optimum puts data outside the support.
GevParams fit_gev(std::span<const double> x);

/// x -> -1 / log(G(x)) for the Gumbel CDF G; maps Gumbel(mu, sigma) to unit Frechet.
std::vector<double> pit_to_frechet(std::span<const double> x, const GumbelParams& p);

/// x -> (1 + xi (x - mu) / sigma)^(1/xi), the unit Frechet transform under a
/// GEV fit (reduces to pit_to_frechet at xi = 0). Values outside the support
/// map to 0 or +infinity.
std::vector<double> gev_to_frechet(std::span<const double> x, const GevParams& p);

/// x -> (x - mu) / sigma; maps Gumbel(mu, sigma) to the standard Gumbel.
std::vector<double> pit_to_gumbel(std::span<const double> x, const GumbelParams& p);

/// (sorted sample, model quantile at i / (N + 1)).
std::vector<std::pair<double, double>> qq_data(std::span<const double> x, const GumbelParams& p);

/// Per-site marginal fit summary.
struct SiteMargins {
  int x = 0;  ///< 0-based
  int y = 0;
  GevParams gev;
  GumbelParams gumbel;
  bool gumbel_selected = true;
};

enum class MarginTarget { Frechet, Gumbel };

struct MarginsOptions {
  int period = 0;          ///< deseasonalize when > 0 (years = T / period)
  bool force_gumbel = false;  ///< skip the GEV interval check
  MarginTarget target = MarginTarget::Frechet;
};

struct MarginsResult {
  SpaceTimeField transformed;  ///< Frechet (or Gumbel) margins
  std::vector<SiteMargins> sites;
};

/// Per site: deseasonalize (optional), fit the GEV, select Gumbel when 0 lies in
/// the xi interval (or always, with force_gumbel), then transform with the
/// selected fit.
MarginsResult transform_margins(const SpaceTimeField& raw, const MarginsOptions& opts = {});

/// Columns x,y,mu,sigma,xi,ci_lo,ci_hi (1-based sites; Gumbel mu, sigma; GEV xi).
void write_margins_csv(std::ostream& os, const std::vector<SiteMargins>& sites);

}  // namespace stmado
