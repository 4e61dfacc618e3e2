#pragma once

// Regular-grid geometry: lag sets and the site/time pairs that realize a
// given spatio-temporal distance. Spatial distances are carried as integer
// squared norms so lag classes never depend on floating-point equality.

#include <cstdint>
#include <utility>
#include <vector>

namespace stmado {

struct GridSpec {
  int n = 0;  ///< side length; sites are {1..n} x {1..n}

  explicit GridSpec(int side);
  int sites() const { return n * n; }
};

/// Integer spatial offset between two grid sites.
struct Offset {
  int dx = 0;
  int dy = 0;
  int norm2() const { return dx * dx + dy * dy; }
  friend bool operator==(const Offset&, const Offset&) = default;
};

/// True when h2 is a sum of two integer squares.
bool is_sum_of_two_squares(int h2);

/// True when some pair of sites on an n x n grid is at squared distance h2.
bool is_realizable(int n, int h2);

/// Offsets (dx, dy) with dx^2 + dy^2 == h2, one per +/- pair, chosen with
/// dx > 0, or dx == 0 and dy > 0. Empty for h2 == 0.
std::vector<Offset> half_plane_offsets(int h2);

/// All offsets with dx^2 + dy^2 == h2 (both orientations).
std::vector<Offset> full_offsets(int h2);

/// Spatial lag set H (as squared distances) and temporal lag set K.
struct LagSets {
  std::vector<int> h2;  ///< sorted, distinct, >= 0
  std::vector<int> k;   ///< sorted, distinct, >= 1

  LagSets() = default;
  LagSets(std::vector<int> h2_values, std::vector<int> k_values);

  /// H = {1, sqrt2, 2, sqrt5, sqrt8, 3, sqrt10, sqrt13, 4, sqrt17}, K = {1..10}.
  static LagSets standard();

  std::vector<double> distances() const;

  /// Throws UnrealizableLag if some h is not realizable on the grid or some
  /// temporal lag does not fit in T time steps.
  void check_realizable(int n, int T) const;
};

/// Linear index of grid site (x, y), 0-based coordinates.
inline std::int64_t site_index(int n, int x, int y) { return static_cast<std::int64_t>(y) * n + x; }

/// Linear index of (x, y, t) in a field stored time-major, 0-based.
inline std::int64_t cell_index(int n, int x, int y, int t) {
  return (static_cast<std::int64_t>(t) * n + y) * n + x;
}

/// Unordered pairs realizing one lag class. Indices are cell indices
/// (cell_index) for space-time classes and site indices for spatial classes.
struct PairClass {
  int h2 = 0;
  int lprime = 0;
  std::vector<std::pair<std::int64_t, std::int64_t>> pairs;
  std::int64_t count() const { return static_cast<std::int64_t>(pairs.size()); }
};

/// Every unordered site pair at exact squared distance h2 (h2 > 0).
PairClass enumerate_spatial_pairs(const GridSpec& grid, int h2);

/// Closed-form per-time-slice pair count for the ten standard lags.
/// Throws UnsupportedLag for any other h2.
std::int64_t count_pairs(int n, int h2);

/// Count of spatial pairs at squared distance h2 obtained from offsets;
/// valid for every h2 and cheaper than enumeration.
std::int64_t count_spatial_pairs(int n, int h2);

/// All unordered ((s_i,t_i),(s_j,t_j)) with ||s_i - s_j||^2 == h2 and
/// |t_i - t_j| == lprime. (h2, lprime) must not be (0, 0).
PairClass enumerate_spacetime_pairs(const GridSpec& grid, int T, int h2, int lprime);

/// Site pairs for one oriented offset: (s, s + offset) for all s on the grid
/// such that both ends lie inside.
struct OffsetPairs {
  Offset offset;
  std::vector<std::pair<std::int32_t, std::int32_t>> sites;
};

/// Cached site-pair index lists for every offset needed by a lag set, built
/// once per (grid, lag set) and shared read-only by estimators.
class LagIndex {
 public:
  LagIndex(const GridSpec& grid, const LagSets& lags);

  int n() const { return n_; }
  const LagSets& lags() const { return lags_; }

  /// Half-plane offsets for spatial lag h2 (used for pairs within a slice).
  const std::vector<OffsetPairs>& half_plane(int h2) const;
  /// All orientations for spatial lag h2 (used when time lags differ).
  const std::vector<OffsetPairs>& full(int h2) const;

 private:
  int n_;
  LagSets lags_;
  std::vector<int> keys_;
  std::vector<std::vector<OffsetPairs>> half_;
  std::vector<std::vector<OffsetPairs>> full_;
  std::size_t slot(int h2) const;
};

OffsetPairs make_offset_pairs(int n, Offset offset);

}  // namespace stmado
