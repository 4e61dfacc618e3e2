#pragma once

// Samplers for the space-time max-stable fields: exact Brown-Resnick by
// extremal functions, spatial Smith / Schlather / Brown-Resnick innovations,
// the max-autoregressive recursion, and the separable space-time Schlather
// model. All return standard Frechet margins.

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "stmado/field.hpp"
#include "stmado/gaussian.hpp"
#include "stmado/lattice.hpp"
#include "stmado/models.hpp"
#include "stmado/rng.hpp"

namespace stmado {

struct SimConfig {
  std::uint64_t seed = 1;
  int truncation = 0;               ///< MAR unroll depth J; 0 picks it from truncation_tol
  double truncation_tol = 1e-6;     ///< target delta^(J+1)
  double jitter = 0.0;              ///< initial relative Cholesky jitter
  int cholesky_budget = 4000;       ///< max sites in one dense factorization
  double smith_buffer_sd = 6.0;     ///< storm-center buffer, in sd of the largest Sigma axis
  double schlather_bound = 5.0;     ///< spectral truncation bound, in sd
};

/// Smallest J >= 1 with delta^(J+1) <= tol: ceil(log(tol) / log(delta)) - 1.
int mar_truncation_depth(double delta, double tol);

/// Generic exact sampler for a Brown-Resnick process on a product of a
/// spatial site set and a time axis whose semivariogram is additive,
/// gamma(s, t) = gamma_s(s) + gamma_t(t). Each factor is simulated with its
/// own Cholesky factorization, so the budget applies per factor.
class SeparableBRSampler {
 public:
  /// gamma_s(dx, dy) and gamma_t(dt) follow the convention
  /// Var(eps(p) - eps(q)) = 2 gamma(p - q).
  SeparableBRSampler(std::vector<Point3> spatial_sites, std::function<double(double, double)> gamma_s, int T,
                     std::function<double(double)> gamma_t, const SimConfig& cfg);

  /// Values ordered time-major: index t * S + s.
  std::vector<double> draw(Rng& rng) const;

  /// Number of spectral functions simulated by the last draw.
  std::size_t last_function_count() const { return last_count_; }

 private:
  std::vector<Point3> sites_;
  int T_;
  std::vector<double> gamma_s_table_;  // S x S
  std::vector<double> gamma_t_table_;  // lag 0..T-1
  GaussianIncrementSampler spatial_;
  std::unique_ptr<GaussianIncrementSampler> temporal_;
  mutable std::size_t last_count_ = 0;
};

/// Exact sample of the A1 Brown-Resnick process on the grid x {1..T}.
SpaceTimeField simulate_br(const BRParams& p, const GridSpec& grid, int T, const SimConfig& cfg);

/// One spatial innovation field on an nx x ny window (row-major y * nx + x)
/// with standard Frechet margins. Extremal-t innovations are not supported.
std::vector<double> simulate_spatial_innovation(const Innovation& inn, int nx, int ny, Rng& rng,
                                                const SimConfig& cfg);

/// Reusable innovation sampler (keeps factorizations across time steps).
class InnovationSampler {
 public:
  InnovationSampler(const Innovation& inn, int nx, int ny, const SimConfig& cfg);
  ~InnovationSampler();
  InnovationSampler(InnovationSampler&&) noexcept;
  std::vector<double> draw(Rng& rng) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// A MAR field together with the realized innovations, for inspection.
struct MarRealization {
  SpaceTimeField field;
  int depth = 0;        ///< truncation depth J
  int x_lo = 0, y_lo = 0;  ///< window origin in grid coordinates (0-based)
  int nx = 0, ny = 0;      ///< window size
  int t_lo = 0;            ///< first innovation time (= -J, 0-based grid time)
  std::vector<double> innovations;  ///< (t - t_lo) * nx * ny + (y - y_lo) * nx + (x - x_lo)

  double innovation(int x, int y, int t) const;
};

/// X(s,t) = max_{j=0..J} delta^j (1 - delta) H(s - j tau, t - j), evaluated by
/// the recursion Y_j(s,t) = max{(1 - delta) H(s,t), delta Y_{j-1}(s - tau, t - 1)}
/// with innovations on the grid enlarged by J |tau| per axis. Throws
/// NonIntegerShift unless tau has integer components.
MarRealization simulate_mar_realization(const MarParams& p, const GridSpec& grid, int T, const SimConfig& cfg);
SpaceTimeField simulate_mar(const MarParams& p, const GridSpec& grid, int T, const SimConfig& cfg);

/// A2: Schlather process with correlation rho_s(h) rho_t(l) on the grid x {1..T}.
SpaceTimeField simulate_sep_schlather(const SepSchlatherParams& p, const GridSpec& grid, int T,
                                      const SimConfig& cfg);

/// Dispatch on the model family.
SpaceTimeField simulate_model(const ModelSpec& m, const GridSpec& grid, int T, const SimConfig& cfg);

}  // namespace stmado
