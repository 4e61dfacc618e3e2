#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "support.hpp"
#include "stmado/error.hpp"
#include "stmado/fit.hpp"
#include "stmado/nls.hpp"
#include "stmado/simulate.hpp"

using namespace stmado;
using doctest::Approx;

namespace {

SpaceTimeField iid_field(int n, int T, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SpaceTimeField f(n, T, Margins::Frechet);
  for (double& v : f.values) v = -1.0 / std::log(u(rng));
  return f;
}

void replace_with_model(std::vector<MadogramEstimate>& es, const ModelSpec& m) {
  for (auto& e : es) e.value = class_model_value(m, e);
}

// Estimates whose values are exactly the model's class values.
EstimateSet exact_estimates(const ModelSpec& m) {
  static const EstimateSet layout = compute_estimates(iid_field(10, 12, 1), LagSets::standard());
  EstimateSet e = layout;
  replace_with_model(e.spatial, m);
  replace_with_model(e.temporal, m);
  replace_with_model(e.spatial_vector, m);
  replace_with_model(e.joint, m);
  replace_with_model(e.joint_vector, m);
  return e;
}

ModelSpec truth_for(Family f) {
  switch (f) {
    case Family::A1: return BRParams{0.8, 1.2, 0.4, 0.9};
    case Family::A2: return SepSchlatherParams{3.0, 1.1, 4.0, 0.8};
    case Family::B1: return MarParams{BRInnovation{1.5, 1.2}, {1.0, 0.0}, 0.6};
    case Family::B2: return MarParams{SmithInnovation{1.2, 0.3, 0.9}, {1.0, 0.5}, 0.7};
    case Family::B3: return MarParams{ExtremalTInnovation{1.5, 1.3, 4.0}, {1.0, 0.0}, 0.6};
    case Family::MarSchlather: return MarParams{SchlatherInnovation{2.0, 1.5}, {1.0, 0.0}, 0.3};
  }
  return BRParams{};
}

void check_close(const ModelSpec& got, const ModelSpec& want, double tol) {
  const auto a = to_vector(got), b = to_vector(want);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CAPTURE(i);
    CHECK(std::fabs(a[i] - b[i]) <= tol);
  }
}

double scheme1_objective(Family f, const EstimateSet& e, const ModelSpec& m) {
  double s = 0.0;
  for (const auto& x : scheme1_spatial_data(f, e)) s += std::pow(x.value - class_model_value(m, x), 2);
  for (const auto& x : e.temporal) s += std::pow(x.value - class_model_value(m, x), 2);
  return s;
}

}  // namespace

TEST_CASE("Nelder-Mead finds a one-dimensional minimum inside a box") {
  const std::vector<ParamSpec> spec{{Transform::Logit, 0.0, 10.0, 0.0, 10.0}};
  auto f = [](std::span<const double> x) { return (x[0] - 3) * (x[0] - 3); };
  const NlsResult r = nls_minimize(f, spec, std::nullopt);
  CHECK(r.converged);
  CHECK(std::fabs(r.x[0] - 3.0) <= 1e-8);
  for (std::size_t i = 1; i < r.history.size(); ++i) CHECK(r.history[i] <= r.history[i - 1]);
}

TEST_CASE("parameter transforms invert each other") {
  const ParamSpec log{Transform::Log, 0.5, 0.0, 1.0, 2.0};
  const ParamSpec logit{Transform::Logit, -1.0, 3.0, 0.0, 1.0};
  const ParamSpec id{Transform::Identity, 0.0, 0.0, -1.0, 1.0};
  for (double x : {0.51, 0.7, 2.0, 40.0}) CHECK(to_external(log, to_internal(log, x)) == Approx(x).epsilon(1e-12));
  for (double x : {-0.99, 0.0, 2.5}) CHECK(to_external(logit, to_internal(logit, x)) == Approx(x).epsilon(1e-12));
  CHECK(to_external(id, to_internal(id, -7.25)) == -7.25);
  CHECK(to_external(log, -5.0) > 0.5);
  CHECK(to_external(logit, 50.0) <= 3.0);
}

TEST_CASE("symmetric minima resolve to the same point every time") {
  const std::vector<ParamSpec> spec{{Transform::Identity, 0, 0, -3, 3}};
  auto f = [](std::span<const double> x) { return std::pow(x[0] * x[0] - 1, 2); };
  NlsOptions o;
  o.seed = 9;
  const NlsResult a = nls_minimize(f, spec, std::nullopt, o);
  const NlsResult b = nls_minimize(f, spec, std::nullopt, o);
  CHECK(std::fabs(std::fabs(a.x[0]) - 1) <= 1e-6);
  CHECK(a.x == b.x);
  CHECK(a.best_start == b.best_start);
  CHECK(a.objective == b.objective);
}

TEST_CASE("minimizer reports failure") {
  const std::vector<ParamSpec> spec{{Transform::Identity, 0, 0, -1, 1}, {Transform::Identity, 0, 0, -1, 1}};
  auto rosen = [](std::span<const double> x) { return 100 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1 - x[0], 2); };
  NlsOptions o;
  o.max_iterations = 1;
  o.polish_rounds = 0;
  CHECK_THROWS_AS(nls_minimize(rosen, spec, std::nullopt, o), Error);
  auto nan = [](std::span<const double>) { return std::nan(""); };
  try {
    nls_minimize(nan, spec, std::nullopt);
    FAIL("expected NoConvergence");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NoConvergence);
  }
  const NlsResult r = nls_minimize(rosen, spec, std::vector<double>{0.0, 0.0});
  CHECK(r.x[0] == Approx(1.0).epsilon(1e-4));
  CHECK(r.x[1] == Approx(1.0).epsilon(1e-4));
}

TEST_CASE("exact data are recovered by both schemes for every family") {
  for (Family f : all_families()) {
    CAPTURE(family_name(f));
    const ModelSpec truth = truth_for(f);
    const EstimateSet e = exact_estimates(truth);
    const FitResult s2 = fit_scheme2(f, scheme2_data(f, e));
    CHECK(s2.converged);
    CHECK(s2.objective < 1e-12);
    check_close(s2.model, truth, 1e-4);
    const FitResult s1 = fit_scheme1(f, scheme1_spatial_data(f, e), e.temporal, {}, s2.model);
    CHECK(s1.converged);
    CHECK(s1.objective < 1e-12);
    check_close(s1.model, truth, 1e-4);
  }
}

TEST_CASE("scheme 1 for autoregressive families keeps the starting direction of tau") {
  const ModelSpec truth = MarParams{BRInnovation{1.5, 1.2}, {0.6, 0.8}, 0.6};
  const EstimateSet e = exact_estimates(truth);
  const FitResult s1 = fit_scheme1(Family::B1, e.spatial, e.temporal, {}, MarParams{BRInnovation{}, {3, 4}, 0.5});
  const auto& p = std::get<MarParams>(s1.model);
  CHECK(p.tau.x / p.tau.y == Approx(0.75).epsilon(1e-9));
  CHECK(norm(p.tau) == Approx(1.0).epsilon(1e-4));
  CHECK(s1.objective < 1e-12);

  const FitResult d = fit_scheme1(Family::B1, e.spatial, e.temporal);
  CHECK(std::get<MarParams>(d.model).tau.y == 0.0);
  CHECK(norm(std::get<MarParams>(d.model).tau) == Approx(1.0).epsilon(1e-4));
}

TEST_CASE("fitted objective is the weighted sum of squares at the estimate") {
  SimConfig cfg;
  cfg.seed = 4;
  const SpaceTimeField field = simulate_br(BRParams{0.5, 1.2, 0.3, 1.0}, GridSpec(10), 12, cfg);
  const EstimateSet e = compute_estimates(field, LagSets::standard());
  const FitResult s1 = fit_scheme1(Family::A1, e.spatial, e.temporal);
  CHECK(s1.objective == Approx(s1.objective_spatial + s1.objective_temporal));
  CHECK(s1.objective == Approx(scheme1_objective(Family::A1, e, s1.model)).epsilon(1e-12));
  CHECK(s1.objective <= scheme1_objective(Family::A1, e, BRParams{0.5, 1.2, 0.3, 1.0}) * (1 + 1e-9));
  for (std::size_t i = 1; i < s1.history.size(); ++i) CHECK(s1.history[i] <= s1.history[i - 1]);

  const FitResult again = fit_scheme1(Family::A1, e.spatial, e.temporal);
  CHECK(to_vector(again.model) == to_vector(s1.model));
}

TEST_CASE("scaling the objective leaves the minimizer unchanged") {
  const std::vector<ParamSpec> spec{{Transform::Identity, 0, 0, -3, 3}, {Transform::Identity, 0, 0, -3, 3}};
  auto g = [](double s) {
    return [s](std::span<const double> x) { return s * (std::pow(x[0] - 1, 2) + 3 * std::pow(x[1] + 0.5, 2)); };
  };
  const NlsResult n1 = nls_minimize(g(1.0), spec, std::nullopt);
  const NlsResult n2 = nls_minimize(g(1e3), spec, std::nullopt);
  CHECK(n1.x[0] == Approx(n2.x[0]).epsilon(1e-7));
  CHECK(n1.x[1] == Approx(n2.x[1]).epsilon(1e-7));
}

TEST_CASE("weighted fits ignore classes with zero weight") {
  const ModelSpec truth = BRParams{0.8, 1.2, 0.4, 0.9};
  EstimateSet e = exact_estimates(truth);
  for (auto& x : e.joint)
    if (x.lprime > 5) x.value = 0.0;
  FitOptions o;
  o.weights = Weights::cutoff(INFINITY, 5.0);
  const FitResult r = fit_scheme2(Family::A1, e.joint, o);
  CHECK(r.objective < 1e-12);
  check_close(r.model, truth, 1e-4);
}

TEST_CASE("weights") {
  CHECK(Weights::equal()(3.0, 7.0) == 1.0);
  const Weights c = Weights::cutoff(2.0, 3.0);
  CHECK(c(2.0, 3.0) == 1.0);
  CHECK(c(2.5, 1.0) == 0.0);
  CHECK(c(1.0, 4.0) == 0.0);
  CHECK(Weights::exponential(0.5)(1.0, 2.0) == Approx(std::exp(-1.5)));
  CHECK(Weights::gaussian(0.5)(3.0, 4.0) == Approx(std::exp(-12.5)));
  CHECK(Weights::power(2.0)(1.0, 1.0) == Approx(0.25));
  for (const auto& w : {Weights::cutoff(2, 2), Weights::gaussian(0.7), Weights::equal()}) {
    const Weights back = weights_from_json(weights_to_json(w));
    CHECK(back(1.5, 1.0) == w(1.5, 1.0));
    CHECK(back(3.0, 3.0) == w(3.0, 3.0));
  }
  CHECK(weights_from_json("equal")(9, 9) == 1.0);
  CHECK_THROWS_AS(weights_from_json(nlohmann::json{{"policy", "triangular"}}), Error);
  CHECK_THROWS_AS(weights_from_json(nlohmann::json{{"policy", "power"}, {"c", 0}}), Error);
}

TEST_CASE("information criterion") {
  const AicValues v = aic_nls(1e-3, 1e-3, 10, 10, 2, 2);
  CHECK(v.aic == Approx(2 * (10 * std::log(1e-4) + 6)).epsilon(1e-13));
  CHECK(v.aicc - v.aic == Approx(6.0).epsilon(1e-13));
  CHECK(aic_nls(1e-3, 2e-3, 10, 10, 2, 2).aic > v.aic);
  CHECK(aic_nls(1e-3, 1e-3, 10, 10, 3, 2).aicc > v.aicc);
  CHECK(aic_nls(1e-3, 1e-3, 10, 10, 2, 3).aic - v.aic == Approx(2.0));
  CHECK_THROWS_AS(aic_nls(1e-3, 1e-3, 10, 3, 2, 3), Error);
  CHECK_THROWS_AS(aic_nls(-1.0, 1e-3, 10, 10, 2, 2), Error);
}

TEST_CASE("responses of the fit to a shifted estimate are monotone") {
  const ModelSpec truth = BRParams{0.8, 1.2, 0.4, 0.9};
  EstimateSet e = exact_estimates(truth);
  const FitResult base = fit_scheme1(Family::A1, e.spatial, e.temporal);
  for (auto& x : e.temporal) x.value += 0.01;
  const FitResult shifted = fit_scheme1(Family::A1, e.spatial, e.temporal);
  const auto& b = std::get<BRParams>(base.model);
  const auto& s = std::get<BRParams>(shifted.model);
  CHECK(s.phi_s == Approx(b.phi_s).epsilon(1e-6));
  CHECK(s.phi_t > b.phi_t);
}

TEST_CASE("too few classes") {
  const EstimateSet e = exact_estimates(BRParams{});
  std::vector<MadogramEstimate> one(e.spatial.begin(), e.spatial.begin() + 1);
  try {
    fit_scheme1(Family::A1, one, e.temporal);
    FAIL("expected InsufficientLags");
  } catch (const Error& err) {
    CHECK(err.kind() == ErrorKind::InsufficientLags);
  }
  CHECK_THROWS_AS(fit_scheme1(Family::A1, e.temporal, e.temporal), Error);
  CHECK_THROWS_AS(fit_scheme2(Family::A1, e.joint, {}, ModelSpec{MarParams{}}), Error);
}

TEST_CASE("class model value averages over the offsets of a class") {
  const ModelSpec m = MarParams{SmithInnovation{1.2, 0.3, 0.9}, {1.0, 0.5}, 0.7};
  MadogramEstimate e;
  e.h2 = 5;
  e.lprime = 1;
  double sum = 0.0;
  const auto offs = full_offsets(5);
  for (const auto& o : offs) sum += fmadogram_model(m, Vec2{double(o.dx), double(o.dy)}, 1);
  CHECK(class_model_value(m, e) == Approx(sum / offs.size()).epsilon(1e-14));
  e.directional = true;
  e.offset = Offset{2, -1};
  CHECK(class_model_value(m, e) == fmadogram_model(m, Vec2{2, -1}, 1));
}

TEST_CASE("model selection") {
  const EstimateSet e = exact_estimates(BRParams{0.8, 1.2, 0.4, 0.9});
  const AICReport one = select_model({Family::A2}, e);
  CHECK(one.selected == Family::A2);
  CHECK(one.H == 10);
  CHECK(one.K == 10);
  CHECK_THROWS_AS(select_model({}, e), Error);

  FitOptions o;
  o.threads = 3;
  const AICReport r = select_model({Family::A2, Family::A1, Family::B2}, e, o);
  CHECK(r.selected == Family::A1);
  REQUIRE(r.candidates.size() == 3);
  CHECK(r.candidates[1].family == Family::A1);
  CHECK(r.candidates[1].k_s == 2);
  CHECK(r.candidates[1].k_t == 2);
  const AICReport r1 = select_model({Family::A2, Family::A1, Family::B2}, e);
  for (int i = 0; i < 3; ++i) CHECK(r.candidates[i].aic.aicc == r1.candidates[i].aic.aicc);

  const nlohmann::json j = report_to_json(r);
  CHECK(j["selected"] == "A1");
  CHECK(j["candidates"].size() == 3);
}

TEST_CASE("fit tables") {
  const ModelSpec m = BRParams{0.8, 1.2, 0.4, 0.9};
  const EstimateSet e = exact_estimates(m);
  std::ostringstream os;
  write_fit_csv(os, m, e.temporal);
  const std::string s = os.str();
  CHECK(s.rfind("h,lprime,dx,dy,nu_hat,nu_model,npairs\n", 0) == 0);
  CHECK(std::count(s.begin(), s.end(), '\n') == 11);
  const nlohmann::json j = fit_to_json(fit_scheme1(Family::A1, e.spatial, e.temporal));
  CHECK(j["family"] == "A1");
  CHECK(j["scheme"] == 1);
}
