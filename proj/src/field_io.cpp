#include "stmado/field_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>
#include <tuple>

#include "stmado/error.hpp"
#include "stmado/model_json.hpp"

namespace stmado {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

int parse_int(std::string_view s, std::size_t line) {
  s = trim(s);
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw Error(ErrorKind::IoError, "line " + std::to_string(line) + ": bad integer '" + std::string(s) + "'");
  return v;
}

double parse_value(std::string_view s, std::size_t line) {
  s = trim(s);
  if (s == "NA" || s == "NaN" || s == "nan" || s.empty()) return kMissing;
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw Error(ErrorKind::IoError, "line " + std::to_string(line) + ": bad value '" + std::string(s) + "'");
  return v;
}

}  // namespace

void write_field_csv(std::ostream& os, const SpaceTimeField& field) {
  os << "x,y,t,value\n";
  os.precision(17);
  for (int t = 0; t < field.T; ++t)
    for (int y = 0; y < field.n; ++y)
      for (int x = 0; x < field.n; ++x) {
        os << x + 1 << ',' << y + 1 << ',' << t + 1 << ',';
        const double v = field(x, y, t);
        if (std::isnan(v))
          os << "NA";
        else
          os << v;
        os << '\n';
      }
}

void write_field_csv(const std::string& path, const SpaceTimeField& field) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::IoError, "cannot open " + path + " for writing");
  write_field_csv(os, field);
  if (!os) throw Error(ErrorKind::IoError, "write to " + path + " failed");
}

SpaceTimeField read_field_csv(std::istream& is, Margins margins) {
  std::string line;
  if (!std::getline(is, line)) throw Error(ErrorKind::IoError, "empty field CSV");
  if (trim(line) != "x,y,t,value") throw Error(ErrorKind::IoError, "expected header x,y,t,value");

  std::vector<std::tuple<int, int, int, double>> rows;
  int n = 0, T = 0;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::string_view rest(line);
    std::string_view cols[4];
    for (int c = 0; c < 4; ++c) {
      const auto comma = rest.find(',');
      if (c < 3 && comma == std::string_view::npos)
        throw Error(ErrorKind::IoError, "line " + std::to_string(lineno) + ": expected 4 columns");
      cols[c] = c < 3 ? rest.substr(0, comma) : rest;
      if (c < 3) rest.remove_prefix(comma + 1);
    }
    if (cols[3].find(',') != std::string_view::npos)
      throw Error(ErrorKind::IoError, "line " + std::to_string(lineno) + ": expected 4 columns");
    const int x = parse_int(cols[0], lineno), y = parse_int(cols[1], lineno), t = parse_int(cols[2], lineno);
    if (x < 1 || y < 1 || t < 1)
      throw Error(ErrorKind::IoError, "line " + std::to_string(lineno) + ": coordinates are 1-based");
    rows.emplace_back(x - 1, y - 1, t - 1, parse_value(cols[3], lineno));
    n = std::max({n, x, y});
    T = std::max(T, t);
  }
  if (rows.empty()) throw Error(ErrorKind::IoError, "field CSV has no rows");

  SpaceTimeField f(n, T, margins, kMissing);
  std::vector<char> seen(f.values.size(), 0);
  for (const auto& [x, y, t, v] : rows) {
    const auto i = static_cast<std::size_t>(cell_index(n, x, y, t));
    if (seen[i])
      throw Error(ErrorKind::IoError, "duplicate cell (" + std::to_string(x + 1) + "," + std::to_string(y + 1) +
                                          "," + std::to_string(t + 1) + ")");
    seen[i] = 1;
    f.values[i] = v;
  }
  return f;
}

SpaceTimeField read_field_csv(const std::string& path, Margins margins) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::IoError, "cannot open " + path);
  return read_field_csv(is, margins);
}

nlohmann::json metadata_to_json(const FieldMetadata& m) {
  nlohmann::json j = {{"n", m.n}, {"T", m.T}, {"margins", std::string(margins_name(m.margins))}};
  j["model"] = m.model ? model_to_json(*m.model) : nlohmann::json(nullptr);
  j["seed"] = m.seed ? nlohmann::json(*m.seed) : nlohmann::json(nullptr);
  return j;
}

FieldMetadata metadata_from_json(const nlohmann::json& j) {
  FieldMetadata m;
  try {
    m.n = j.at("n").get<int>();
    m.T = j.at("T").get<int>();
    m.margins = parse_margins(j.at("margins").get<std::string>());
    if (j.contains("model") && !j["model"].is_null()) m.model = model_from_json(j["model"]);
    if (j.contains("seed") && !j["seed"].is_null()) m.seed = j["seed"].get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::IoError, std::string("bad field metadata: ") + e.what());
  }
  return m;
}

}  // namespace stmado
