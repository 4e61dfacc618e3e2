#include "stmado/fit.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <map>
#include <ostream>
#include <thread>

#include "stmado/error.hpp"
#include "stmado/model_json.hpp"

namespace stmado {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

ParamSpec log_param(double a, double b, double lo = 0.0) { return {Transform::Log, lo, kInf, a, b}; }
ParamSpec logit_param(double lo, double hi, double a, double b) { return {Transform::Logit, lo, hi, a, b}; }
ParamSpec free_param(double a, double b) { return {Transform::Identity, -kInf, kInf, a, b}; }

ParamSpec smoothness() { return logit_param(0.0, 2.0, 0.3, 1.9); }

// A block of parameters: its box, how to read it off a model, and how to
// write it into one.
struct Block {
  std::vector<ParamSpec> specs;
  std::function<std::vector<double>(const ModelSpec&)> read;
  std::function<ModelSpec(const ModelSpec&, std::span<const double>)> write;
};

bool isotropic_innovation(const ModelSpec& m) {
  const auto* p = std::get_if<MarParams>(&m);
  return p == nullptr || !std::holds_alternative<SmithInnovation>(p->innovation);
}

ModelSpec default_model(Family f) {
  switch (f) {
    case Family::A1: return BRParams{};
    case Family::A2: return SepSchlatherParams{};
    case Family::B1: return MarParams{BRInnovation{}, {1.0, 0.0}, 0.5};
    case Family::B2: return MarParams{SmithInnovation{}, {1.0, 0.0}, 0.5};
    case Family::B3: return MarParams{ExtremalTInnovation{}, {1.0, 0.0}, 0.5};
    case Family::MarSchlather: return MarParams{SchlatherInnovation{}, {1.0, 0.0}, 0.5};
  }
  return BRParams{};
}

Block spatial_block(Family f) {
  switch (f) {
    case Family::A1:
      return {{log_param(0.05, 2.0), smoothness()},
              [](const ModelSpec& m) {
                const auto& p = std::get<BRParams>(m);
                return std::vector<double>{p.phi_s, p.kappa_s};
              },
              [](const ModelSpec& m, std::span<const double> x) -> ModelSpec {
                auto p = std::get<BRParams>(m);
                p.phi_s = x[0];
                p.kappa_s = x[1];
                return p;
              }};
    case Family::A2:
      return {{log_param(0.3, 8.0), smoothness()},
              [](const ModelSpec& m) {
                const auto& p = std::get<SepSchlatherParams>(m);
                return std::vector<double>{p.phi_s, p.kappa_s};
              },
              [](const ModelSpec& m, std::span<const double> x) -> ModelSpec {
                auto p = std::get<SepSchlatherParams>(m);
                p.phi_s = x[0];
                p.kappa_s = x[1];
                return p;
              }};
    case Family::B2:
      // Sigma = L L' with L = [[l11, 0], [l21, l22]], l11, l22 > 0.
      return {{log_param(0.4, 2.5), free_param(-1.0, 1.0), log_param(0.4, 2.5)},
              [](const ModelSpec& m) {
                const auto& s = std::get<SmithInnovation>(std::get<MarParams>(m).innovation);
                const double l11 = std::sqrt(s.s11);
                const double l21 = s.s12 / l11;
                return std::vector<double>{l11, l21, std::sqrt(std::max(s.s22 - l21 * l21, 1e-12))};
              },
              [](const ModelSpec& m, std::span<const double> x) -> ModelSpec {
                auto p = std::get<MarParams>(m);
                p.innovation = SmithInnovation{x[0] * x[0], x[0] * x[1], x[1] * x[1] + x[2] * x[2]};
                return p;
              }};
    case Family::B3:
      return {{log_param(0.3, 5.0), smoothness(), log_param(0.5, 9.0, 1.0)},
              [](const ModelSpec& m) {
                const auto& s = std::get<ExtremalTInnovation>(std::get<MarParams>(m).innovation);
                return std::vector<double>{s.phi, s.kappa, s.nu};
              },
              [](const ModelSpec& m, std::span<const double> x) -> ModelSpec {
                auto p = std::get<MarParams>(m);
                p.innovation = ExtremalTInnovation{x[0], x[1], x[2]};
                return p;
              }};
    case Family::B1:
    case Family::MarSchlather: {
      const bool br = f == Family::B1;
      return {{log_param(0.3, br ? 5.0 : 6.0), smoothness()},
              [](const ModelSpec& m) {
                return std::visit(
                    [](const auto& s) -> std::vector<double> {
                      using T = std::decay_t<decltype(s)>;
                      if constexpr (std::is_same_v<T, BRInnovation> || std::is_same_v<T, SchlatherInnovation>)
                        return {s.phi, s.kappa};
                      else
                        return {1.0, 1.0};
                    },
                    std::get<MarParams>(m).innovation);
              },
              [br](const ModelSpec& m, std::span<const double> x) -> ModelSpec {
                auto p = std::get<MarParams>(m);
                if (br)
                  p.innovation = BRInnovation{x[0], x[1]};
                else
                  p.innovation = SchlatherInnovation{x[0], x[1]};
                return p;
              }};
    }
  }
  throw Error(ErrorKind::InvalidArgs, "unknown family");
}

Block separable_temporal_block(Family f) {
  const double hi = f == Family::A1 ? 2.0 : 8.0;
  return {{log_param(0.05, hi), smoothness()},
          [](const ModelSpec& m) {
            return std::visit(
                [](const auto& p) -> std::vector<double> {
                  using T = std::decay_t<decltype(p)>;
                  if constexpr (std::is_same_v<T, MarParams>)
                    return {1.0, 1.0};
                  else
                    return {p.phi_t, p.kappa_t};
                },
                m);
          },
          [](const ModelSpec& m, std::span<const double> x) -> ModelSpec {
            return std::visit(
                [&](auto p) -> ModelSpec {
                  using T = std::decay_t<decltype(p)>;
                  if constexpr (!std::is_same_v<T, MarParams>) {
                    p.phi_t = x[0];
                    p.kappa_t = x[1];
                  }
                  return p;
                },
                m);
          }};
}

// Length of tau in the metric in which the temporal classes see it.
double tau_metric_norm(const MarParams& p, Vec2 v) {
  if (const auto* s = std::get_if<SmithInnovation>(&p.innovation)) return smith_distance(*s, v);
  return norm(v);
}

// MAR temporal block for scheme 1: (|tau|, delta) along a fixed direction.
Block mar_temporal_block(Vec2 direction) {
  return {{log_param(0.2, 3.0), logit_param(0.0, 1.0, 0.1, 0.9)},
          [](const ModelSpec& m) {
            const auto& p = std::get<MarParams>(m);
            return std::vector<double>{std::max(tau_metric_norm(p, p.tau), 1e-3), p.delta};
          },
          [direction](const ModelSpec& m, std::span<const double> x) -> ModelSpec {
            auto p = std::get<MarParams>(m);
            const double len = tau_metric_norm(p, direction);
            p.tau = (x[0] / len) * direction;
            p.delta = x[1];
            return p;
          }};
}

// MAR temporal block for scheme 2: (tau1, tau2, delta).
Block mar_joint_temporal_block() {
  return {{free_param(-2.0, 2.0), free_param(-2.0, 2.0), logit_param(0.0, 1.0, 0.1, 0.9)},
          [](const ModelSpec& m) {
            const auto& p = std::get<MarParams>(m);
            return std::vector<double>{p.tau.x, p.tau.y, p.delta};
          },
          [](const ModelSpec& m, std::span<const double> x) -> ModelSpec {
            auto p = std::get<MarParams>(m);
            p.tau = {x[0], x[1]};
            p.delta = x[2];
            return p;
          }};
}

Block concat(Block a, Block b) {
  Block out;
  const std::size_t na = a.specs.size();
  out.specs = a.specs;
  out.specs.insert(out.specs.end(), b.specs.begin(), b.specs.end());
  out.read = [a, b](const ModelSpec& m) {
    std::vector<double> v = a.read(m);
    const std::vector<double> w = b.read(m);
    v.insert(v.end(), w.begin(), w.end());
    return v;
  };
  out.write = [a, b, na](const ModelSpec& m, std::span<const double> x) {
    return b.write(a.write(m, x.first(na)), x.subspan(na));
  };
  return out;
}

bool is_mar(Family f) { return f != Family::A1 && f != Family::A2; }

double weighted_sse(const ModelSpec& m, const std::vector<MadogramEstimate>& data, const std::vector<double>& w) {
  double s = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (w[i] == 0.0) continue;
    const double r = data[i].value - class_model_value(m, data[i]);
    s += w[i] * r * r;
  }
  return s;
}

std::vector<double> class_weights(const Weights& weights, const std::vector<MadogramEstimate>& data) {
  std::vector<double> w(data.size());
  bool positive = false;
  for (std::size_t i = 0; i < data.size(); ++i) {
    w[i] = weights(data[i].h(), data[i].lprime);
    if (!(w[i] >= 0.0) || !std::isfinite(w[i])) throw Error(ErrorKind::InvalidArgs, "weights must be finite and >= 0");
    positive = positive || w[i] > 0.0;
  }
  if (!positive) throw Error(ErrorKind::InvalidArgs, "every weight is zero");
  return w;
}

struct BlockFit {
  ModelSpec model;
  NlsResult nls;
};

BlockFit fit_block(const Block& block, const ModelSpec& base, const std::vector<MadogramEstimate>& data,
                   const FitOptions& opts, const std::optional<ModelSpec>& init) {
  const std::vector<double> w = class_weights(opts.weights, data);
  const Objective objective = [&](std::span<const double> x) {
    try {
      return weighted_sse(block.write(base, x), data, w);
    } catch (const Error&) {
      return kInf;
    }
  };
  std::optional<std::vector<double>> start;
  if (init) {
    start = block.read(*init);
    for (std::size_t j = 0; j < start->size(); ++j) {
      const ParamSpec& s = block.specs[j];
      double& v = (*start)[j];
      if (!std::isfinite(v)) v = 0.5 * (s.start_lo + s.start_hi);
      if (s.transform != Transform::Identity && v <= s.lo) v = s.lo + 1e-3;
      if (s.transform == Transform::Logit && v >= s.hi) v = s.hi - 1e-3;
    }
  }
  BlockFit out;
  out.nls = nls_minimize(objective, block.specs, start, opts.nls);
  out.model = block.write(base, out.nls.x);
  return out;
}

void require_lags(const std::vector<MadogramEstimate>& data, int dim, const char* what) {
  if (static_cast<int>(data.size()) < dim)
    throw Error(ErrorKind::InsufficientLags, std::string(what) + " fit needs at least " + std::to_string(dim) +
                                                 " lag classes, got " + std::to_string(data.size()));
}

void require_family(Family f, const std::optional<ModelSpec>& init) {
  if (init && family_of(*init) != f)
    throw Error(ErrorKind::InvalidArgs, "starting value belongs to family " +
                                            std::string(family_name(family_of(*init))) + ", not " +
                                            std::string(family_name(f)));
}

}  // namespace

Weights Weights::exponential(double c) { return {WeightPolicy::Exponential, kInf, kInf, c}; }
Weights Weights::gaussian(double c) { return {WeightPolicy::Gaussian, kInf, kInf, c}; }
Weights Weights::power(double c) { return {WeightPolicy::Power, kInf, kInf, c}; }

double Weights::operator()(double h, double l) const {
  switch (policy) {
    case WeightPolicy::Equal: return 1.0;
    case WeightPolicy::Cutoff: return (h <= r && l <= q) ? 1.0 : 0.0;
    case WeightPolicy::Exponential: return std::exp(-c * (h + l));
    case WeightPolicy::Gaussian: return std::exp(-c * (h * h + l * l));
    case WeightPolicy::Power: return std::pow(h + l, -c);
  }
  return 1.0;
}

std::string weight_policy_name(WeightPolicy p) {
  switch (p) {
    case WeightPolicy::Equal: return "equal";
    case WeightPolicy::Cutoff: return "cutoff";
    case WeightPolicy::Exponential: return "exponential";
    case WeightPolicy::Gaussian: return "gaussian";
    case WeightPolicy::Power: return "power";
  }
  return "equal";
}

Weights weights_from_json(const nlohmann::json& j) {
  if (j.is_string()) return weights_from_json(nlohmann::json{{"policy", j}});
  const std::string name = j.value("policy", "equal");
  Weights w;
  if (name == "equal") return w;
  if (name == "cutoff") {
    w = Weights::cutoff(j.value("r", kInf), j.value("q", kInf));
  } else if (name == "exponential" || name == "gaussian" || name == "power") {
    const double c = j.value("c", 1.0);
    if (!(c > 0.0)) throw Error(ErrorKind::InvalidArgs, "weight constant c must be > 0");
    w = name == "exponential" ? Weights::exponential(c) : name == "gaussian" ? Weights::gaussian(c) : Weights::power(c);
  } else {
    throw Error(ErrorKind::InvalidArgs, "unknown weight policy '" + name + "'");
  }
  return w;
}

nlohmann::json weights_to_json(const Weights& w) {
  nlohmann::json j{{"policy", weight_policy_name(w.policy)}};
  if (w.policy == WeightPolicy::Cutoff) {
    if (std::isfinite(w.r)) j["r"] = w.r;
    if (std::isfinite(w.q)) j["q"] = w.q;
  } else if (w.policy != WeightPolicy::Equal) {
    j["c"] = w.c;
  }
  return j;
}

double class_model_value(const ModelSpec& m, const MadogramEstimate& e) {
  const double l = e.lprime;
  if (e.directional || e.h2 == 0)
    return fmadogram_model(m, Vec2{static_cast<double>(e.offset.dx), static_cast<double>(e.offset.dy)}, l);
  const bool direction_free =
      std::holds_alternative<BRParams>(m) || std::holds_alternative<SepSchlatherParams>(m) ||
      (l == 0.0 && isotropic_innovation(m));
  if (direction_free) return fmadogram_model(m, Vec2{e.h(), 0.0}, l);
  const std::vector<Offset> offsets = e.lprime == 0 ? half_plane_offsets(e.h2) : full_offsets(e.h2);
  double s = 0.0;
  for (const Offset& o : offsets)
    s += fmadogram_model(m, Vec2{static_cast<double>(o.dx), static_cast<double>(o.dy)}, l);
  return s / static_cast<double>(offsets.size());
}

FitResult fit_scheme1(Family family, const std::vector<MadogramEstimate>& spatial,
                      const std::vector<MadogramEstimate>& temporal, const FitOptions& opts,
                      const std::optional<ModelSpec>& init) {
  require_family(family, init);
  require_lags(spatial, spatial_dim(family), "spatial");
  require_lags(temporal, is_mar(family) ? 2 : temporal_dim(family), "temporal");
  for (const auto& e : spatial)
    if (e.lprime != 0) throw Error(ErrorKind::InvalidArgs, "spatial classes must have l' = 0");
  for (const auto& e : temporal)
    if (e.h2 != 0) throw Error(ErrorKind::InvalidArgs, "temporal classes must have h = 0");

  const ModelSpec base = init.value_or(default_model(family));
  const BlockFit s = fit_block(spatial_block(family), base, spatial, opts, init);

  Block tblock;
  if (is_mar(family)) {
    Vec2 direction = std::get<MarParams>(base).tau;
    if (!(norm(direction) > 0.0)) direction = {1.0, 0.0};
    tblock = mar_temporal_block(direction);
  } else {
    tblock = separable_temporal_block(family);
  }
  // The temporal start is read off the init with the spatial estimate plugged
  // in, so |tau| is measured in the estimated metric.
  std::optional<ModelSpec> tinit;
  if (init) {
    ModelSpec m = s.model;
    if (auto* p = std::get_if<MarParams>(&m)) {
      const auto& q = std::get<MarParams>(*init);
      p->tau = q.tau;
      p->delta = q.delta;
    } else {
      m = separable_temporal_block(family).write(m, separable_temporal_block(family).read(*init));
    }
    tinit = m;
  }
  const BlockFit t = fit_block(tblock, s.model, temporal, opts, tinit);

  FitResult r;
  r.family = family;
  r.model = t.model;
  r.scheme = 1;
  r.objective_spatial = s.nls.objective;
  r.objective_temporal = t.nls.objective;
  r.objective = r.objective_spatial + r.objective_temporal;
  r.iterations = s.nls.iterations + t.nls.iterations;
  r.converged = s.nls.converged && t.nls.converged;
  r.restarts_used = s.nls.restarts_used + t.nls.restarts_used;
  r.history = t.nls.history;
  return r;
}

FitResult fit_scheme2(Family family, const std::vector<MadogramEstimate>& joint, const FitOptions& opts,
                      const std::optional<ModelSpec>& init) {
  require_family(family, init);
  require_lags(joint, spatial_dim(family) + temporal_dim(family), "joint");
  const Block block = concat(spatial_block(family),
                             is_mar(family) ? mar_joint_temporal_block() : separable_temporal_block(family));
  const ModelSpec base = init.value_or(default_model(family));
  const BlockFit b = fit_block(block, base, joint, opts, init);
  FitResult r;
  r.family = family;
  r.model = b.model;
  r.scheme = 2;
  r.objective = b.nls.objective;
  r.iterations = b.nls.iterations;
  r.converged = b.nls.converged;
  r.restarts_used = b.nls.restarts_used;
  r.history = b.nls.history;
  return r;
}

AicValues aic_nls(double L_s, double L_t, int H, int K, int k_s, int k_t) {
  if (H <= k_s || K <= k_t)
    throw Error(ErrorKind::InvalidArgs, "AIC correction needs more lag classes than parameters");
  if (!(L_s >= 0.0) || !(L_t >= 0.0)) throw Error(ErrorKind::InvalidArgs, "objectives must be >= 0");
  const double h = H, k = K, ks = k_s, kt = k_t;
  AicValues v;
  v.aic = h * std::log(L_s / h) + 2.0 * (ks + 1.0) + k * std::log(L_t / k) + 2.0 * (kt + 1.0);
  v.aicc = v.aic + 2.0 * (ks + 1.0) * (ks + 2.0) / (h - ks) + 2.0 * (kt + 1.0) * (kt + 2.0) / (k - kt);
  return v;
}

EstimateSet compute_estimates(const SpaceTimeField& field, const LagSets& lags, const MadogramOptions& opts) {
  std::vector<int> h2;
  for (int v : lags.h2)
    if (v > 0) h2.push_back(v);
  EstimateSet e;
  e.spatial = empirical_spatial_fmadogram(field, h2, opts);
  e.temporal = empirical_temporal_fmadogram(field, lags.k, opts);
  e.spatial_vector = empirical_spatial_fmadogram_vector(field, h2, opts);
  e.joint_vector = empirical_st_fmadogram_vector(field, h2, lags.k, opts);
  // Pool the oriented classes back into scalar ones.
  std::map<std::pair<int, int>, std::pair<double, std::int64_t>> pooled;
  for (const auto& v : e.joint_vector) {
    auto& slot = pooled[{v.lprime, v.h2}];
    slot.first += v.value * static_cast<double>(v.npairs);
    slot.second += v.npairs;
  }
  for (const auto& [key, acc] : pooled) {
    MadogramEstimate m;
    m.lprime = key.first;
    m.h2 = key.second;
    m.value = acc.first / static_cast<double>(acc.second);
    m.npairs = acc.second;
    e.joint.push_back(m);
  }
  return e;
}

const std::vector<MadogramEstimate>& scheme1_spatial_data(Family family, const EstimateSet& e) {
  return family == Family::B2 ? e.spatial_vector : e.spatial;
}

const std::vector<MadogramEstimate>& scheme2_data(Family family, const EstimateSet& e) {
  return is_mar(family) ? e.joint_vector : e.joint;
}

AICReport select_model(const std::vector<Family>& candidates, const EstimateSet& data, const FitOptions& opts) {
  if (candidates.empty()) throw Error(ErrorKind::InvalidArgs, "no candidate models");
  AICReport rep;
  rep.H = static_cast<int>(data.spatial.size());
  rep.K = static_cast<int>(data.temporal.size());
  std::string last_error;
  ErrorKind last_kind = ErrorKind::NoConvergence;
  rep.candidates.resize(candidates.size());
  auto fit_one = [&](std::size_t i) {
    CandidateReport& c = rep.candidates[i];
    c.family = candidates[i];
    c.k_s = spatial_dim(c.family);
    c.k_t = temporal_dim(c.family);
    try {
      c.scheme2 = fit_scheme2(c.family, scheme2_data(c.family, data), opts);
      c.scheme1 = fit_scheme1(c.family, scheme1_spatial_data(c.family, data), data.temporal, opts, c.scheme2.model);
      const std::vector<double> ws(data.spatial.size(), 1.0), wt(data.temporal.size(), 1.0);
      c.L_s = weighted_sse(c.scheme1.model, data.spatial, ws);
      c.L_t = weighted_sse(c.scheme1.model, data.temporal, wt);
      c.aic = aic_nls(c.L_s, c.L_t, rep.H, rep.K, c.k_s, c.k_t);
      c.ok = true;
    } catch (const Error& e) {
      c.error = e.what();
      c.error_kind = e.kind();
    }
  };
  const int nthreads = std::clamp(opts.threads, 1, static_cast<int>(candidates.size()));
  if (nthreads == 1) {
    for (std::size_t i = 0; i < candidates.size(); ++i) fit_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < candidates.size(); i = next++) fit_one(i);
      });
    for (auto& t : pool) t.join();
  }

  int best = -1;
  for (std::size_t i = 0; i < rep.candidates.size(); ++i) {
    const CandidateReport& cur = rep.candidates[i];
    if (!cur.ok) {
      last_error = cur.error;
      last_kind = cur.error_kind;
      continue;
    }
    if (best < 0) {
      best = static_cast<int>(i);
      continue;
    }
    const CandidateReport& b = rep.candidates[static_cast<std::size_t>(best)];
    const double diff = cur.aic.aicc - b.aic.aicc;
    if (diff < -1e-9 || (std::fabs(diff) <= 1e-9 && cur.k_s + cur.k_t < b.k_s + b.k_t)) best = static_cast<int>(i);
  }
  if (best < 0) throw Error(last_kind, "every candidate failed; last error: " + last_error);
  rep.selected = rep.candidates[static_cast<std::size_t>(best)].family;
  return rep;
}

nlohmann::json fit_to_json(const FitResult& f) {
  nlohmann::json j = model_to_json(f.model);
  j["scheme"] = f.scheme;
  j["objective"] = f.objective;
  if (f.scheme == 1) {
    j["objective_spatial"] = f.objective_spatial;
    j["objective_temporal"] = f.objective_temporal;
  }
  j["iterations"] = f.iterations;
  j["converged"] = f.converged;
  j["restarts_used"] = f.restarts_used;
  return j;
}

nlohmann::json report_to_json(const AICReport& r) {
  nlohmann::json cands = nlohmann::json::array();
  for (const auto& c : r.candidates) {
    nlohmann::json j{{"family", family_name(c.family)}, {"ok", c.ok}, {"k_s", c.k_s}, {"k_t", c.k_t}};
    if (c.ok) {
      j["L_s"] = c.L_s;
      j["L_t"] = c.L_t;
      j["aic_nls"] = c.aic.aic;
      j["aic_nlsc"] = c.aic.aicc;
      j["scheme1"] = fit_to_json(c.scheme1);
      j["scheme2"] = fit_to_json(c.scheme2);
    } else {
      j["error"] = c.error;
    }
    cands.push_back(std::move(j));
  }
  return {{"selected", family_name(r.selected)}, {"H", r.H}, {"K", r.K}, {"candidates", cands}};
}

void write_fit_csv(std::ostream& os, const ModelSpec& m, const std::vector<MadogramEstimate>& estimates) {
  os << "h,lprime,dx,dy,nu_hat,nu_model,npairs\n";
  os.precision(17);
  for (const auto& e : estimates)
    os << e.h() << ',' << e.lprime << ',' << e.offset.dx << ',' << e.offset.dy << ',' << e.value << ','
       << class_model_value(m, e) << ',' << e.npairs << '\n';
}

}  // namespace stmado
