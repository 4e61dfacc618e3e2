#include "stmado/study.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "stmado/error.hpp"
#include "stmado/model_json.hpp"
#include "stmado/special.hpp"

namespace stmado {

namespace {

std::vector<int> positive(const std::vector<int>& v) {
  std::vector<int> out;
  for (int x : v)
    if (x > 0) out.push_back(x);
  return out;
}

}  // namespace

std::vector<ParamSummary> summarize(const std::vector<std::string>& names, const std::vector<double>& truth,
                                    const std::vector<std::vector<double>>& estimates) {
  std::vector<ParamSummary> out;
  for (std::size_t j = 0; j < names.size(); ++j) {
    CompensatedSum s, sq, ab;
    for (const auto& e : estimates) {
      s.add(e[j]);
      sq.add((e[j] - truth[j]) * (e[j] - truth[j]));
      ab.add(std::fabs(e[j] - truth[j]));
    }
    const double n = static_cast<double>(estimates.size());
    ParamSummary p;
    p.name = names[j];
    p.truth = truth[j];
    if (n > 0) {
      p.mean = s.value() / n;
      p.rmse = std::sqrt(sq.value() / n);
      p.mae = ab.value() / n;
    } else {
      p.mean = p.rmse = p.mae = std::nan("");
    }
    out.push_back(p);
  }
  return out;
}

std::pair<std::vector<double>, std::vector<double>> study_replicate(const StudyConfig& cfg, int r) {
  const Family family = family_of(cfg.truth);
  const std::uint64_t stream = cfg.same_seed_for_all ? 0 : static_cast<std::uint64_t>(r);
  SimConfig sim = cfg.sim;
  sim.seed = derive_seed(cfg.sim.seed, stream);
  const SpaceTimeField field = simulate_model(cfg.truth, GridSpec(cfg.n), cfg.T, sim);
  const std::vector<int> h2 = positive(cfg.lags.h2);

  std::vector<double> est1, est2;
  std::optional<ModelSpec> start;
  if (cfg.scheme2) {
    const std::vector<MadogramEstimate> joint = family == Family::A1 || family == Family::A2
                                                    ? empirical_st_fmadogram(field, h2, cfg.lags.k)
                                                    : empirical_st_fmadogram_vector(field, h2, cfg.lags.k);
    const FitResult f2 = fit_scheme2(family, joint, cfg.fit);
    est2 = to_vector(f2.model);
    start = f2.model;
  }
  if (cfg.scheme1) {
    const std::vector<MadogramEstimate> spatial = family == Family::B2
                                                      ? empirical_spatial_fmadogram_vector(field, h2)
                                                      : empirical_spatial_fmadogram(field, h2);
    std::vector<MadogramEstimate> temporal;
    if (cfg.temporal_n > 0) {
      SimConfig tsim = cfg.sim;
      tsim.seed = derive_seed(cfg.sim.seed ^ 0x74656d70ULL, stream);
      const SpaceTimeField tf = simulate_model(cfg.truth, GridSpec(cfg.temporal_n), cfg.temporal_T, tsim);
      temporal = empirical_temporal_fmadogram(tf, cfg.lags.k);
    } else {
      temporal = empirical_temporal_fmadogram(field, cfg.lags.k);
    }
    const FitResult f1 = fit_scheme1(family, spatial, temporal, cfg.fit, start);
    est1 = to_vector(f1.model);
  }
  return {est1, est2};
}

StudyResult run_study(const StudyConfig& cfg) {
  if (cfg.replicates < 2) throw Error(ErrorKind::InvalidArgs, "a study needs at least 2 replicates");
  if (!cfg.scheme1 && !cfg.scheme2) throw Error(ErrorKind::InvalidArgs, "a study needs scheme 1 and/or scheme 2");
  validate(cfg.truth);
  if (cfg.temporal_n > 0) {
    LagSets(cfg.lags.h2, {}).check_realizable(cfg.n, cfg.T);
    LagSets({}, cfg.lags.k).check_realizable(cfg.temporal_n, cfg.temporal_T);
    if (cfg.scheme2) cfg.lags.check_realizable(cfg.n, cfg.T);
  } else {
    cfg.lags.check_realizable(cfg.n, cfg.T);
  }
  const Family family = family_of(cfg.truth);
  StudyResult res;
  res.replicates = cfg.replicates;
  SchemeSummary s1{1, {}, {}}, s2{2, {}, {}};
  const auto R = static_cast<std::size_t>(cfg.replicates);
  std::vector<std::pair<std::vector<double>, std::vector<double>>> results(R);
  std::vector<std::string> errors(R);
  std::vector<char> failed(R, 0);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t r = next++; r < R; r = next++) {
      try {
        results[r] = study_replicate(cfg, static_cast<int>(r));
      } catch (const std::exception& e) {
        failed[r] = 1;
        errors[r] = e.what();
      }
    }
  };
  const int nthreads = std::clamp(cfg.threads, 1, cfg.replicates);
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (std::size_t r = 0; r < R; ++r) {
    if (failed[r]) {
      ++res.failures;
      res.failure_messages.push_back("replicate " + std::to_string(r) + ": " + errors[r]);
      continue;
    }
    if (cfg.scheme1) s1.estimates.push_back(std::move(results[r].first));
    if (cfg.scheme2) s2.estimates.push_back(std::move(results[r].second));
  }
  const std::vector<std::string> names = param_names(family);
  const std::vector<double> truth = to_vector(cfg.truth);
  if (cfg.scheme1) {
    s1.params = summarize(names, truth, s1.estimates);
    res.schemes.push_back(std::move(s1));
  }
  if (cfg.scheme2) {
    s2.params = summarize(names, truth, s2.estimates);
    res.schemes.push_back(std::move(s2));
  }
  res.failed = static_cast<double>(res.failures) > cfg.max_failure_fraction * cfg.replicates;
  return res;
}

nlohmann::json study_to_json(const StudyResult& r, const StudyConfig& cfg) {
  nlohmann::json schemes = nlohmann::json::array();
  for (const auto& s : r.schemes) {
    nlohmann::json params = nlohmann::json::array();
    for (const auto& p : s.params)
      params.push_back({{"name", p.name}, {"truth", p.truth}, {"mean", p.mean}, {"rmse", p.rmse}, {"mae", p.mae}});
    schemes.push_back({{"scheme", s.scheme}, {"successful", s.estimates.size()}, {"params", params}});
  }
  return {{"truth", model_to_json(cfg.truth)},
          {"n", cfg.n},
          {"T", cfg.T},
          {"temporal_n", cfg.temporal_n},
          {"temporal_T", cfg.temporal_T},
          {"replicates", r.replicates},
          {"failures", r.failures},
          {"failure_messages", r.failure_messages},
          {"failed", r.failed},
          {"schemes", schemes}};
}

}  // namespace stmado
