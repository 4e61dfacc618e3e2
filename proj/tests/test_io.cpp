#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>

#include "stmado/error.hpp"
#include "stmado/field_io.hpp"
#include "stmado/rng.hpp"

using namespace stmado;

namespace {

SpaceTimeField sample(int n, int T, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> z;
  SpaceTimeField f(n, T, Margins::Raw);
  for (double& v : f.values) v = std::exp(z(rng)) * 1e3;
  return f;
}

bool same(const SpaceTimeField& a, const SpaceTimeField& b) {
  if (a.n != b.n || a.T != b.T || a.values.size() != b.values.size()) return false;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    if (std::isnan(a.values[i]) != std::isnan(b.values[i])) return false;
    if (!std::isnan(a.values[i]) && a.values[i] != b.values[i]) return false;
  }
  return true;
}

void expect_io_error(const std::string& text) {
  std::istringstream is(text);
  try {
    read_field_csv(is);
    FAIL("expected IoError for: " << text);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::IoError);
  }
}

}  // namespace

TEST_CASE("round trip keeps every bit and every missing cell") {
  SpaceTimeField f = sample(4, 5, 1);
  f(0, 0, 0) = kMissing;
  f(3, 2, 4) = kMissing;
  f(1, 1, 1) = 1e-300;
  std::ostringstream os;
  write_field_csv(os, f);
  const std::string text = os.str();
  CHECK(text.rfind("x,y,t,value\n", 0) == 0);
  CHECK(text.find("\n1,1,1,NA\n") != std::string::npos);
  std::istringstream is(text);
  const SpaceTimeField g = read_field_csv(is, Margins::Frechet);
  CHECK(same(f, g));
  CHECK(g.margins == Margins::Frechet);
  CHECK(g.missing_count() == 2);
}

TEST_CASE("rows may come in any order and absent rows are missing") {
  const SpaceTimeField f = sample(3, 4, 2);
  std::ostringstream os;
  write_field_csv(os, f);
  std::istringstream lines(os.str());
  std::string header, line;
  std::getline(lines, header);
  std::vector<std::string> rows;
  while (std::getline(lines, line)) rows.push_back(line);
  std::shuffle(rows.begin(), rows.end(), Rng(3));
  const std::string dropped = rows.back();
  rows.pop_back();
  std::string text = header + "\n";
  for (const auto& r : rows) text += r + "\n";
  std::istringstream is(text);
  const SpaceTimeField g = read_field_csv(is);
  REQUIRE(g.n == 3);
  REQUIRE(g.T == 4);
  CHECK(g.missing_count() == 1);
  int x, y, t;
  char c;
  std::istringstream d(dropped);
  d >> x >> c >> y >> c >> t;
  CHECK(std::isnan(g(x - 1, y - 1, t - 1)));
}

TEST_CASE("dimensions come from the largest coordinates") {
  std::istringstream is("x,y,t,value\n1,3,2,0.5\n2,1,1,nan\n");
  const SpaceTimeField g = read_field_csv(is);
  CHECK(g.n == 3);
  CHECK(g.T == 2);
  CHECK(g(0, 2, 1) == 0.5);
  CHECK(g.missing_count() == 17);
}

TEST_CASE("missing value spellings") {
  std::istringstream is("x,y,t,value\n1,1,1,NA\n2,1,1,NaN\n1,2,1,\n2,2,1,2.5\n");
  const SpaceTimeField g = read_field_csv(is);
  CHECK(g.missing_count() == 3);
  CHECK(g(1, 1, 0) == 2.5);
}

TEST_CASE("malformed input") {
  expect_io_error("");
  expect_io_error("a,b,c,d\n1,1,1,1\n");
  expect_io_error("x,y,t,value\n1,1,1,1\n1,1,1,2\n");
  expect_io_error("x,y,t,value\n0,1,1,1\n");
  expect_io_error("x,y,t,value\n1,1,1,abc\n");
  expect_io_error("x,y,t,value\n1,1\n");
  CHECK_THROWS_AS(read_field_csv(std::string("/nonexistent/dir/field.csv")), Error);
}

TEST_CASE("files on disk") {
  const auto dir = std::filesystem::temp_directory_path() / "stmado_test_io";
  std::filesystem::create_directories(dir);
  const SpaceTimeField f = sample(5, 3, 4);
  const std::string path = (dir / "f.csv").string();
  write_field_csv(path, f);
  CHECK(same(read_field_csv(path), f));
  std::filesystem::remove_all(dir);
}

TEST_CASE("metadata") {
  FieldMetadata m;
  m.n = 7;
  m.T = 9;
  m.margins = Margins::Gumbel;
  const FieldMetadata plain = metadata_from_json(metadata_to_json(m));
  CHECK(plain.n == 7);
  CHECK(plain.T == 9);
  CHECK(plain.margins == Margins::Gumbel);
  CHECK(!plain.model);
  CHECK(!plain.seed);

  m.model = MarParams{SmithInnovation{1.0, 0.2, 0.8}, {1.0, -0.5}, 0.4};
  m.seed = 18446744073709551557ULL;
  const FieldMetadata full = metadata_from_json(metadata_to_json(m));
  REQUIRE(full.model);
  CHECK(to_vector(*full.model) == to_vector(*m.model));
  CHECK(family_of(*full.model) == Family::B2);
  CHECK(full.seed == m.seed);
  CHECK(metadata_to_json(m).dump() == metadata_to_json(full).dump());
}
