#include "stmado/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stmado/error.hpp"

namespace stmado {

GridSpec::GridSpec(int side) : n(side) {
  if (side < 2) throw Error(ErrorKind::InvalidArgs, "grid side n must be >= 2, got " + std::to_string(side));
}

bool is_sum_of_two_squares(int h2) {
  if (h2 < 0) return false;
  for (int a = 0; a * a <= h2; ++a) {
    const int rest = h2 - a * a;
    const int b = static_cast<int>(std::lround(std::sqrt(static_cast<double>(rest))));
    if (b * b == rest) return true;
  }
  return false;
}

std::vector<Offset> full_offsets(int h2) {
  std::vector<Offset> out;
  if (h2 <= 0) return out;
  const int r = static_cast<int>(std::sqrt(static_cast<double>(h2))) + 1;
  for (int dx = -r; dx <= r; ++dx)
    for (int dy = -r; dy <= r; ++dy)
      if (dx * dx + dy * dy == h2) out.push_back({dx, dy});
  return out;
}

std::vector<Offset> half_plane_offsets(int h2) {
  std::vector<Offset> out;
  for (const Offset& o : full_offsets(h2))
    if (o.dx > 0 || (o.dx == 0 && o.dy > 0)) out.push_back(o);
  return out;
}

bool is_realizable(int n, int h2) {
  if (h2 == 0) return true;
  for (const Offset& o : half_plane_offsets(h2))
    if (std::abs(o.dx) < n && std::abs(o.dy) < n) return true;
  return false;
}

LagSets::LagSets(std::vector<int> h2_values, std::vector<int> k_values)
    : h2(std::move(h2_values)), k(std::move(k_values)) {
  std::sort(h2.begin(), h2.end());
  std::sort(k.begin(), k.end());
  if (std::adjacent_find(h2.begin(), h2.end()) != h2.end() ||
      std::adjacent_find(k.begin(), k.end()) != k.end())
    throw Error(ErrorKind::InvalidArgs, "lag sets must not contain duplicates");
  for (int v : h2) {
    if (!is_sum_of_two_squares(v))
      throw Error(ErrorKind::UnrealizableLag,
                  "squared distance " + std::to_string(v) + " is not a sum of two integer squares");
  }
  for (int v : k)
    if (v < 1) throw Error(ErrorKind::InvalidArgs, "temporal lags must be >= 1");
}

LagSets LagSets::standard() {
  return LagSets({1, 2, 4, 5, 8, 9, 10, 13, 16, 17}, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
}

std::vector<double> LagSets::distances() const {
  std::vector<double> out;
  out.reserve(h2.size());
  for (int v : h2) out.push_back(std::sqrt(static_cast<double>(v)));
  return out;
}

void LagSets::check_realizable(int n, int T) const {
  for (int v : h2)
    if (!is_realizable(n, v))
      throw Error(ErrorKind::UnrealizableLag,
                  "spatial lag sqrt(" + std::to_string(v) + ") is not realizable on a " + std::to_string(n) +
                      "x" + std::to_string(n) + " grid");
  for (int v : k)
    if (v >= T)
      throw Error(ErrorKind::UnrealizableLag,
                  "temporal lag " + std::to_string(v) + " needs more than " + std::to_string(T) + " time steps");
}

OffsetPairs make_offset_pairs(int n, Offset offset) {
  OffsetPairs op;
  op.offset = offset;
  const int x0 = std::max(0, -offset.dx), x1 = std::min(n, n - offset.dx);
  const int y0 = std::max(0, -offset.dy), y1 = std::min(n, n - offset.dy);
  if (x1 <= x0 || y1 <= y0) return op;
  op.sites.reserve(static_cast<std::size_t>(x1 - x0) * static_cast<std::size_t>(y1 - y0));
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x)
      op.sites.emplace_back(static_cast<std::int32_t>(site_index(n, x, y)),
                            static_cast<std::int32_t>(site_index(n, x + offset.dx, y + offset.dy)));
  return op;
}

PairClass enumerate_spatial_pairs(const GridSpec& grid, int h2) {
  if (h2 <= 0 || !is_realizable(grid.n, h2))
    throw Error(ErrorKind::UnrealizableLag, "no site pair at squared distance " + std::to_string(h2));
  PairClass pc;
  pc.h2 = h2;
  for (const Offset& o : half_plane_offsets(h2)) {
    const OffsetPairs op = make_offset_pairs(grid.n, o);
    for (const auto& [a, b] : op.sites) pc.pairs.emplace_back(a, b);
  }
  return pc;
}

std::int64_t count_pairs(int n, int h2) {
  const std::int64_t m = n;
  switch (h2) {
    case 1: return 2 * m * (m - 1);
    case 2: return 2 * (m - 1) * (m - 1);
    case 4: return 2 * m * (m - 2);
    case 5: return 4 * (m - 1) * (m - 2);
    case 8: return 2 * (m - 2) * (m - 2);
    case 9: return 2 * m * (m - 3);
    case 10: return 4 * (m - 1) * (m - 3);
    case 13: return 4 * (m - 2) * (m - 3);
    case 16: return 2 * m * (m - 4);
    case 17: return 4 * (m - 1) * (m - 4);
    default:
      throw Error(ErrorKind::UnsupportedLag,
                  "no closed-form count for squared distance " + std::to_string(h2) + "; enumerate instead");
  }
}

std::int64_t count_spatial_pairs(int n, int h2) {
  std::int64_t total = 0;
  for (const Offset& o : half_plane_offsets(h2)) {
    const std::int64_t wx = n - std::abs(o.dx), wy = n - std::abs(o.dy);
    if (wx > 0 && wy > 0) total += wx * wy;
  }
  return total;
}

PairClass enumerate_spacetime_pairs(const GridSpec& grid, int T, int h2, int lprime) {
  if (lprime < 0) throw Error(ErrorKind::InvalidArgs, "temporal lag must be >= 0");
  if (h2 == 0 && lprime == 0) throw Error(ErrorKind::InvalidArgs, "(h, l') must differ from (0, 0)");
  if (T < lprime + 1) throw Error(ErrorKind::UnrealizableLag, "T must be at least l' + 1");
  if (!is_realizable(grid.n, h2))
    throw Error(ErrorKind::UnrealizableLag, "no site pair at squared distance " + std::to_string(h2));
  const int n = grid.n;
  PairClass pc;
  pc.h2 = h2;
  pc.lprime = lprime;
  std::vector<Offset> offsets;
  if (h2 == 0)
    offsets.push_back({0, 0});
  else
    offsets = lprime == 0 ? half_plane_offsets(h2) : full_offsets(h2);
  for (const Offset& o : offsets) {
    const OffsetPairs op = make_offset_pairs(n, o);
    for (int t = 0; t + lprime < T; ++t) {
      const std::int64_t base_a = static_cast<std::int64_t>(t) * n * n;
      const std::int64_t base_b = static_cast<std::int64_t>(t + lprime) * n * n;
      for (const auto& [a, b] : op.sites) pc.pairs.emplace_back(base_a + a, base_b + b);
    }
  }
  return pc;
}

LagIndex::LagIndex(const GridSpec& grid, const LagSets& lags) : n_(grid.n), lags_(lags) {
  std::vector<int> keys = lags.h2;
  if (std::find(keys.begin(), keys.end(), 0) == keys.end()) keys.insert(keys.begin(), 0);
  keys_ = keys;
  for (int h2 : keys_) {
    std::vector<OffsetPairs> half, full;
    if (h2 == 0) {
      full.push_back(make_offset_pairs(n_, {0, 0}));
    } else {
      for (const Offset& o : half_plane_offsets(h2)) {
        OffsetPairs op = make_offset_pairs(n_, o);
        if (!op.sites.empty()) half.push_back(std::move(op));
      }
      for (const Offset& o : full_offsets(h2)) {
        OffsetPairs op = make_offset_pairs(n_, o);
        if (!op.sites.empty()) full.push_back(std::move(op));
      }
    }
    half_.push_back(std::move(half));
    full_.push_back(std::move(full));
  }
}

std::size_t LagIndex::slot(int h2) const {
  const auto it = std::find(keys_.begin(), keys_.end(), h2);
  if (it == keys_.end()) throw Error(ErrorKind::InvalidArgs, "lag " + std::to_string(h2) + " not indexed");
  return static_cast<std::size_t>(it - keys_.begin());
}

const std::vector<OffsetPairs>& LagIndex::half_plane(int h2) const { return half_[slot(h2)]; }
const std::vector<OffsetPairs>& LagIndex::full(int h2) const { return full_[slot(h2)]; }

}  // namespace stmado
