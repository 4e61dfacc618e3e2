#pragma once

// Permutation bands for the empirical F-madogram under extremal independence.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "stmado/field.hpp"
#include "stmado/madogram.hpp"

namespace stmado {

enum class PermAxis { Spatial, Temporal };

struct PermBand {
  PermAxis axis = PermAxis::Spatial;
  std::vector<int> lags;  ///< squared distances (spatial) or time lags (temporal)
  std::vector<double> lower;
  std::vector<double> upper;
  int B = 0;

  double lag_value(std::size_t i) const;  ///< h or l'
};

/// Each replicate permutes the sites independently within every time slice and
/// recomputes the spatial estimates; the band is the per-lag 2.5% and 97.5%
/// type-7 quantile over the B replicates. Replicate b uses RNG stream b.
PermBand spatial_perm_band(const SpaceTimeField& field, const std::vector<int>& h2, int B, std::uint64_t seed,
                           const MadogramOptions& opts = {});

/// As above, permuting the time order of each site's series.
PermBand temporal_perm_band(const SpaceTimeField& field, const std::vector<int>& k, int B, std::uint64_t seed,
                            const MadogramOptions& opts = {});

/// One permuted copy of the field (the same draw replicate `stream` uses).
SpaceTimeField permute_field(const SpaceTimeField& field, PermAxis axis, std::uint64_t seed, std::uint64_t stream);

/// Index of the first lag whose fitted value lies in [lower, upper]; empty if none.
std::optional<std::size_t> dependence_range(const PermBand& band, const std::vector<double>& fitted);

/// Columns lag,lower,upper plus optional empirical and fitted overlays.
void write_band_csv(std::ostream& os, const PermBand& band, const std::vector<double>& empirical = {},
                    const std::vector<double>& fitted = {});

}  // namespace stmado
