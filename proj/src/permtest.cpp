#include "stmado/permtest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "stmado/error.hpp"
#include "stmado/rng.hpp"
#include "stmado/special.hpp"

namespace stmado {

namespace {

PermBand make_band(PermAxis axis, const std::vector<int>& lags, const std::vector<std::vector<double>>& reps) {
  PermBand band;
  band.axis = axis;
  band.lags = lags;
  band.B = static_cast<int>(reps.size());
  for (std::size_t i = 0; i < lags.size(); ++i) {
    std::vector<double> v;
    v.reserve(reps.size());
    for (const auto& r : reps) v.push_back(r[i]);
    std::sort(v.begin(), v.end());
    band.lower.push_back(quantile_type7(v, 0.025));
    band.upper.push_back(quantile_type7(v, 0.975));
  }
  return band;
}

PermBand run_band(const SpaceTimeField& field, PermAxis axis, const std::vector<int>& lags, int B,
                  std::uint64_t seed, const MadogramOptions& opts) {
  if (B < 1) throw Error(ErrorKind::InvalidArgs, "permutation count B must be >= 1");
  std::vector<int> used;
  for (int l : lags)
    if (l > 0) used.push_back(l);
  std::vector<std::vector<double>> reps;
  reps.reserve(static_cast<std::size_t>(B));
  for (int b = 0; b < B; ++b) {
    const SpaceTimeField p = permute_field(field, axis, seed, static_cast<std::uint64_t>(b));
    const std::vector<MadogramEstimate> est = axis == PermAxis::Spatial ? empirical_spatial_fmadogram(p, used, opts)
                                                                        : empirical_temporal_fmadogram(p, used, opts);
    std::vector<double> v;
    for (const auto& e : est) v.push_back(e.value);
    reps.push_back(std::move(v));
  }
  return make_band(axis, used, reps);
}

}  // namespace

double PermBand::lag_value(std::size_t i) const {
  return axis == PermAxis::Spatial ? std::sqrt(static_cast<double>(lags[i])) : static_cast<double>(lags[i]);
}

SpaceTimeField permute_field(const SpaceTimeField& field, PermAxis axis, std::uint64_t seed, std::uint64_t stream) {
  Rng rng = make_rng(seed, stream);
  SpaceTimeField out = field;
  if (axis == PermAxis::Spatial) {
    const std::size_t plane = static_cast<std::size_t>(field.n) * field.n;
    std::vector<std::size_t> perm(plane);
    for (int t = 0; t < field.T; ++t) {
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      const auto src = field.slice(t);
      auto dst = out.slice(t);
      for (std::size_t s = 0; s < plane; ++s) dst[s] = src[perm[s]];
    }
  } else {
    std::vector<int> perm(static_cast<std::size_t>(field.T));
    for (int y = 0; y < field.n; ++y)
      for (int x = 0; x < field.n; ++x) {
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        for (int t = 0; t < field.T; ++t) out(x, y, t) = field(x, y, perm[static_cast<std::size_t>(t)]);
      }
  }
  return out;
}

PermBand spatial_perm_band(const SpaceTimeField& field, const std::vector<int>& h2, int B, std::uint64_t seed,
                           const MadogramOptions& opts) {
  return run_band(field, PermAxis::Spatial, h2, B, seed, opts);
}

PermBand temporal_perm_band(const SpaceTimeField& field, const std::vector<int>& k, int B, std::uint64_t seed,
                            const MadogramOptions& opts) {
  return run_band(field, PermAxis::Temporal, k, B, seed, opts);
}

std::optional<std::size_t> dependence_range(const PermBand& band, const std::vector<double>& fitted) {
  if (fitted.size() != band.lags.size())
    throw Error(ErrorKind::InvalidArgs, "fitted values must cover every lag of the band");
  for (std::size_t i = 0; i < fitted.size(); ++i)
    if (fitted[i] >= band.lower[i] && fitted[i] <= band.upper[i]) return i;
  return std::nullopt;
}

void write_band_csv(std::ostream& os, const PermBand& band, const std::vector<double>& empirical,
                    const std::vector<double>& fitted) {
  os << "lag,lower,upper";
  if (!empirical.empty()) os << ",empirical";
  if (!fitted.empty()) os << ",fitted";
  os << '\n';
  os.precision(17);
  for (std::size_t i = 0; i < band.lags.size(); ++i) {
    os << band.lag_value(i) << ',' << band.lower[i] << ',' << band.upper[i];
    if (!empirical.empty()) os << ',' << empirical[i];
    if (!fitted.empty()) os << ',' << fitted[i];
    os << '\n';
  }
}

}  // namespace stmado
