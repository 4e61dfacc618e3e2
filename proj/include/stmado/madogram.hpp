#pragma once

// Empirical F-madogram estimators on gridded space-time data.

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "stmado/field.hpp"
#include "stmado/lattice.hpp"

namespace stmado {

/// F(x) = exp(-1/x). Throws InvalidArgs for x <= 0.
double frechet_cdf(double x);

enum class MarginMode {
  Frechet,  ///< F is the exact standard Frechet CDF; the field must carry Frechet margins
  Rank,     ///< F is the per-site empirical CDF rank / (N + 1) over time
};

struct MadogramOptions {
  MarginMode mode = MarginMode::Frechet;
};

/// One lag class estimate. Scalar classes leave `offset` at (0, 0) and
/// `directional` false; vector classes hold the oriented offset v of pairs
/// (X(s, t), X(s + v, t + lprime)).
struct MadogramEstimate {
  int h2 = 0;
  int lprime = 0;
  Offset offset;
  bool directional = false;
  double value = 0.0;
  std::int64_t npairs = 0;

  double h() const;
};

/// The transformed values F(X) used by every estimator, NaN where missing.
std::vector<double> transformed_values(const SpaceTimeField& field, const MadogramOptions& opts = {});

/// Per-slice mean of |F(X_i) - F(X_j)| / 2 over B_h, averaged over the
/// slices that have at least one complete pair.
std::vector<MadogramEstimate> empirical_spatial_fmadogram(const SpaceTimeField& field, const std::vector<int>& h2,
                                                          const MadogramOptions& opts = {});

/// Per-site mean over the T - l' pairs of a series, averaged over sites.
std::vector<MadogramEstimate> empirical_temporal_fmadogram(const SpaceTimeField& field, const std::vector<int>& k,
                                                           const MadogramOptions& opts = {});

/// Pooled estimate over every pair of the class B_(h, l'). (0, 0) is skipped.
std::vector<MadogramEstimate> empirical_st_fmadogram(const SpaceTimeField& field, const std::vector<int>& h2,
                                                     const std::vector<int>& k, const MadogramOptions& opts = {});

/// Spatial estimates split by oriented half-plane offset.
std::vector<MadogramEstimate> empirical_spatial_fmadogram_vector(const SpaceTimeField& field,
                                                                 const std::vector<int>& h2,
                                                                 const MadogramOptions& opts = {});

/// Joint estimates split by oriented offset: half-plane offsets at l' = 0,
/// all orientations for l' > 0.
std::vector<MadogramEstimate> empirical_st_fmadogram_vector(const SpaceTimeField& field, const std::vector<int>& h2,
                                                            const std::vector<int>& k,
                                                            const MadogramOptions& opts = {});

/// CSV with header h,lprime,nu_hat,npairs (plus dx,dy when any estimate is directional).
void write_madogram_csv(std::ostream& os, const std::vector<MadogramEstimate>& estimates);

}  // namespace stmado
