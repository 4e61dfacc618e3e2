#include "stmado/field.hpp"

#include <cmath>
#include <string>

#include "stmado/error.hpp"

namespace stmado {

std::string_view margins_name(Margins m) {
  switch (m) {
    case Margins::Raw: return "raw";
    case Margins::Gumbel: return "gumbel";
    case Margins::Frechet: return "frechet";
  }
  return "raw";
}

Margins parse_margins(std::string_view name) {
  if (name == "raw") return Margins::Raw;
  if (name == "gumbel") return Margins::Gumbel;
  if (name == "frechet") return Margins::Frechet;
  throw Error(ErrorKind::InvalidArgs, "unknown margins tag '" + std::string(name) + "'");
}

SpaceTimeField::SpaceTimeField(int side, int steps, Margins m, double fill) : n(side), T(steps), margins(m) {
  if (side < 1 || steps < 1) throw Error(ErrorKind::InvalidArgs, "field dimensions must be positive");
  values.assign(static_cast<std::size_t>(side) * side * steps, fill);
}

std::vector<double> SpaceTimeField::series(int x, int y) const {
  std::vector<double> s(static_cast<std::size_t>(T));
  for (int t = 0; t < T; ++t) s[static_cast<std::size_t>(t)] = (*this)(x, y, t);
  return s;
}

void SpaceTimeField::set_series(int x, int y, std::span<const double> s) {
  if (s.size() != static_cast<std::size_t>(T)) throw Error(ErrorKind::LengthMismatch, "series length must equal T");
  for (int t = 0; t < T; ++t) (*this)(x, y, t) = s[static_cast<std::size_t>(t)];
}

std::size_t SpaceTimeField::missing_count() const {
  std::size_t c = 0;
  for (double v : values)
    if (std::isnan(v)) ++c;
  return c;
}

}  // namespace stmado
