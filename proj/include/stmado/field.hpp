#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "stmado/lattice.hpp"

namespace stmado {

enum class Margins { Raw, Gumbel, Frechet };

std::string_view margins_name(Margins m);
Margins parse_margins(std::string_view name);

/// Values on an n x n grid at T time points, stored time-major with 0-based
/// coordinates (cell_index). NaN marks a missing observation.
struct SpaceTimeField {
  int n = 0;
  int T = 0;
  Margins margins = Margins::Raw;
  std::vector<double> values;

  SpaceTimeField() = default;
  SpaceTimeField(int side, int steps, Margins m, double fill = 0.0);

  double& operator()(int x, int y, int t) { return values[static_cast<std::size_t>(cell_index(n, x, y, t))]; }
  double operator()(int x, int y, int t) const { return values[static_cast<std::size_t>(cell_index(n, x, y, t))]; }

  std::span<const double> slice(int t) const {
    return {values.data() + static_cast<std::size_t>(t) * n * n, static_cast<std::size_t>(n) * n};
  }
  std::span<double> slice(int t) {
    return {values.data() + static_cast<std::size_t>(t) * n * n, static_cast<std::size_t>(n) * n};
  }

  /// Time series at site (x, y).
  std::vector<double> series(int x, int y) const;
  void set_series(int x, int y, std::span<const double> s);

  std::size_t missing_count() const;
};

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

}  // namespace stmado
