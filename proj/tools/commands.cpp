#include "commands.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <boost/uuid/detail/sha1.hpp>
#include <boost/version.hpp>

#include "stmado/error.hpp"
#include "stmado/field_io.hpp"
#include "stmado/fit.hpp"
#include "stmado/madogram.hpp"
#include "stmado/margins.hpp"
#include "stmado/model_json.hpp"
#include "stmado/permtest.hpp"
#include "stmado/rng.hpp"
#include "stmado/simulate.hpp"
#include "stmado/study.hpp"

namespace stmado::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorKind::InvalidArgs, what); }

void check_keys(const json& c, std::initializer_list<const char*> allowed) {
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : c.items())
    if (!ok.count(key)) config_error("unknown config key '" + key + "'");
}

template <class T>
T get(const json& c, const char* key, T fallback) {
  if (!c.contains(key)) return fallback;
  try {
    return c.at(key).get<T>();
  } catch (const json::exception&) {
    config_error(std::string("config key '") + key + "' has the wrong type");
  }
}

template <class T>
T require(const json& c, const char* key) {
  if (!c.contains(key)) config_error(std::string("config key '") + key + "' is required");
  return get<T>(c, key, T{});
}

int positive_int(const json& c, const char* key, int fallback) {
  const int v = get<int>(c, key, fallback);
  if (v < 1) config_error(std::string("config key '") + key + "' must be >= 1");
  return v;
}

LagSets lags_of(const json& c) {
  if (!c.contains("lags")) return LagSets::standard();
  const json& l = c.at("lags");
  check_keys(l, {"h2", "k"});
  const LagSets std_lags = LagSets::standard();
  return LagSets(get<std::vector<int>>(l, "h2", std_lags.h2), get<std::vector<int>>(l, "k", std_lags.k));
}

MadogramOptions madogram_options(const json& c) {
  const std::string mode = get<std::string>(c, "mode", "frechet");
  MadogramOptions o;
  if (mode == "frechet")
    o.mode = MarginMode::Frechet;
  else if (mode == "rank")
    o.mode = MarginMode::Rank;
  else
    config_error("mode must be 'frechet' or 'rank'");
  return o;
}

SimConfig sim_config(const json& c, std::uint64_t seed) {
  SimConfig s;
  s.seed = seed;
  if (!c.contains("sim")) return s;
  const json& j = c.at("sim");
  check_keys(j, {"truncation", "truncation_tol", "jitter", "cholesky_budget", "smith_buffer_sd", "schlather_bound"});
  s.truncation = get<int>(j, "truncation", s.truncation);
  s.truncation_tol = get<double>(j, "truncation_tol", s.truncation_tol);
  s.jitter = get<double>(j, "jitter", s.jitter);
  s.cholesky_budget = get<int>(j, "cholesky_budget", s.cholesky_budget);
  s.smith_buffer_sd = get<double>(j, "smith_buffer_sd", s.smith_buffer_sd);
  s.schlather_bound = get<double>(j, "schlather_bound", s.schlather_bound);
  if (s.truncation < 0) config_error("sim.truncation must be >= 0");
  if (!(s.truncation_tol > 0.0 && s.truncation_tol < 1.0)) config_error("sim.truncation_tol must lie in (0,1)");
  return s;
}

FitOptions fit_options(const json& c, std::uint64_t seed, int threads) {
  FitOptions o;
  if (c.contains("weights")) o.weights = weights_from_json(c.at("weights"));
  o.nls.seed = seed;
  o.threads = threads;
  if (c.contains("nls")) {
    const json& j = c.at("nls");
    check_keys(j, {"max_iterations", "ftol", "starts", "polish_rounds"});
    o.nls.max_iterations = get<int>(j, "max_iterations", o.nls.max_iterations);
    o.nls.ftol = get<double>(j, "ftol", o.nls.ftol);
    o.nls.starts = get<int>(j, "starts", o.nls.starts);
    o.nls.polish_rounds = get<int>(j, "polish_rounds", o.nls.polish_rounds);
    if (o.nls.max_iterations < 1 || o.nls.starts < 0 || o.nls.polish_rounds < 0 || !(o.nls.ftol > 0.0))
      config_error("nls settings out of range");
  }
  return o;
}

std::vector<Family> candidates_of(const json& c) {
  const auto names = require<std::vector<std::string>>(c, "candidates");
  if (names.empty()) config_error("candidate list is empty");
  std::vector<Family> out;
  for (const auto& n : names) out.push_back(parse_family(n));
  return out;
}

SpaceTimeField input_field(const json& c, const char* default_margins) {
  const std::string path = require<std::string>(c, "input");
  return read_field_csv(path, parse_margins(get<std::string>(c, "input_margins", default_margins)));
}

std::string json_text(const json& j) { return j.dump(2) + "\n"; }

// Files written by a command, with their digests, for the manifest.
class Outputs {
 public:
  explicit Outputs(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw Error(ErrorKind::IoError, "cannot create output directory " + dir_.string());
  }

  void write(const std::string& name, const std::string& content) {
    const fs::path p = dir_ / name;
    std::ofstream os(p, std::ios::binary);
    os << content;
    if (!os) throw Error(ErrorKind::IoError, "cannot write " + p.string());
    files_[name] = sha1_hex(content);
  }

  template <class Fn>
  void write_with(const std::string& name, Fn&& fn) {
    std::ostringstream os;
    fn(os);
    write(name, os.str());
  }

  void write_json(const std::string& name, const json& j) { write(name, json_text(j)); }

  void field(const std::string& stem, const SpaceTimeField& f, std::optional<std::uint64_t> seed = std::nullopt,
             std::optional<ModelSpec> model = std::nullopt) {
    write_with(stem + ".csv", [&](std::ostream& os) { write_field_csv(os, f); });
    FieldMetadata meta{f.n, f.T, f.margins, model, seed};
    write_json(stem + ".json", metadata_to_json(meta));
  }

  json listing() const {
    json j = json::object();
    for (const auto& [name, digest] : files_) j[name] = digest;
    return j;
  }

  const fs::path& dir() const { return dir_; }

 private:
  fs::path dir_;
  std::map<std::string, std::string> files_;
};

struct Context {
  json config;
  std::optional<std::uint64_t> seed;
  int threads = 1;
  Outputs* out = nullptr;
  json summary = json::object();  ///< extra manifest fields
  int exit_code = kExitOk;
};

std::uint64_t seed_required(const Context& ctx, const std::string& command) {
  if (!ctx.seed) config_error("command '" + command + "' is stochastic and needs a seed (--seed or config 'seed')");
  return *ctx.seed;
}

std::vector<double> band_fitted(const ModelSpec& m, const std::vector<MadogramEstimate>& est) {
  std::vector<double> v;
  for (const auto& e : est) v.push_back(class_model_value(m, e));
  return v;
}

std::vector<double> values_of(const std::vector<MadogramEstimate>& est) {
  std::vector<double> v;
  for (const auto& e : est) v.push_back(e.value);
  return v;
}

json range_json(const PermBand& band, const std::optional<std::size_t>& idx) {
  if (!idx) return nullptr;
  return band.lag_value(*idx);
}

std::vector<int> positive_only(const std::vector<int>& v) {
  std::vector<int> out;
  for (int x : v)
    if (x > 0) out.push_back(x);
  return out;
}

// Bands with empirical and (optionally) fitted overlays; returns the ranges.
json emit_bands(Context& ctx, const SpaceTimeField& field, const LagSets& lags, int B, std::uint64_t seed,
                const MadogramOptions& mopts, const std::optional<ModelSpec>& model) {
  const std::vector<int> h2 = positive_only(lags.h2);
  const PermBand sb = spatial_perm_band(field, h2, B, derive_seed(seed, 1), mopts);
  const PermBand tb = temporal_perm_band(field, lags.k, B, derive_seed(seed, 2), mopts);
  const auto se = empirical_spatial_fmadogram(field, h2, mopts);
  const auto te = empirical_temporal_fmadogram(field, lags.k, mopts);
  json r = {{"B", B}, {"spatial_range", nullptr}, {"temporal_range", nullptr}};
  std::vector<double> sf, tf;
  if (model) {
    sf = band_fitted(*model, se);
    tf = band_fitted(*model, te);
    r["spatial_range"] = range_json(sb, dependence_range(sb, sf));
    r["temporal_range"] = range_json(tb, dependence_range(tb, tf));
  }
  ctx.out->write_with("band_spatial.csv", [&](std::ostream& os) { write_band_csv(os, sb, values_of(se), sf); });
  ctx.out->write_with("band_temporal.csv", [&](std::ostream& os) { write_band_csv(os, tb, values_of(te), tf); });
  return r;
}

void write_fit_tables(Context& ctx, const std::string& stem, const FitResult& f, const EstimateSet& e) {
  if (f.scheme == 1) {
    ctx.out->write_with(stem + "_spatial.csv",
                        [&](std::ostream& os) { write_fit_csv(os, f.model, scheme1_spatial_data(f.family, e)); });
    ctx.out->write_with(stem + "_temporal.csv", [&](std::ostream& os) { write_fit_csv(os, f.model, e.temporal); });
  } else {
    ctx.out->write_with(stem + "_joint.csv",
                        [&](std::ostream& os) { write_fit_csv(os, f.model, scheme2_data(f.family, e)); });
  }
}

void cmd_simulate(Context& ctx) {
  const json& c = ctx.config;
  check_keys(c, {"model", "n", "T", "seed", "sim"});
  const ModelSpec m = model_from_json(require<json>(c, "model"));
  const int n = positive_int(c, "n", 0), T = positive_int(c, "T", 0);
  const std::uint64_t seed = seed_required(ctx, "simulate");
  const SpaceTimeField f = simulate_model(m, GridSpec(n), T, sim_config(c, seed));
  ctx.out->field("field", f, seed, m);
}

void cmd_madogram(Context& ctx) {
  const json& c = ctx.config;
  check_keys(c, {"input", "input_margins", "mode", "lags", "vector", "seed"});
  const SpaceTimeField f = input_field(c, "frechet");
  const LagSets lags = lags_of(c);
  const MadogramOptions mo = madogram_options(c);
  const EstimateSet e = compute_estimates(f, lags, mo);
  auto csv = [&](const std::string& name, const std::vector<MadogramEstimate>& est) {
    ctx.out->write_with(name, [&](std::ostream& os) { write_madogram_csv(os, est); });
  };
  csv("madogram_spatial.csv", e.spatial);
  csv("madogram_temporal.csv", e.temporal);
  csv("madogram_joint.csv", e.joint);
  if (get<bool>(c, "vector", false)) {
    csv("madogram_spatial_vector.csv", e.spatial_vector);
    csv("madogram_joint_vector.csv", e.joint_vector);
  }
  ctx.summary["missing_cells"] = f.missing_count();
}

void cmd_fit(Context& ctx) {
  const json& c = ctx.config;
  check_keys(c, {"input", "input_margins", "mode", "lags", "family", "scheme", "weights", "init", "nls", "seed"});
  const SpaceTimeField f = input_field(c, "frechet");
  const Family family = parse_family(require<std::string>(c, "family"));
  const int scheme = get<int>(c, "scheme", 1);
  if (scheme != 1 && scheme != 2) config_error("scheme must be 1 or 2");
  std::optional<ModelSpec> init;
  if (c.contains("init")) init = model_from_json(c.at("init"));
  const FitOptions fo = fit_options(c, ctx.seed.value_or(1), ctx.threads);
  const EstimateSet e = compute_estimates(f, lags_of(c), madogram_options(c));
  const FitResult r = scheme == 1 ? fit_scheme1(family, scheme1_spatial_data(family, e), e.temporal, fo, init)
                                  : fit_scheme2(family, scheme2_data(family, e), fo, init);
  ctx.out->write_json("fit.json", fit_to_json(r));
  write_fit_tables(ctx, "fit", r, e);
}

void cmd_select(Context& ctx) {
  const json& c = ctx.config;
  check_keys(c, {"input", "input_margins", "mode", "lags", "candidates", "weights", "nls", "seed"});
  const std::vector<Family> cands = candidates_of(c);
  const SpaceTimeField f = input_field(c, "frechet");
  const FitOptions fo = fit_options(c, ctx.seed.value_or(1), ctx.threads);
  const EstimateSet e = compute_estimates(f, lags_of(c), madogram_options(c));
  const AICReport rep = select_model(cands, e, fo);
  ctx.out->write_json("aic_report.json", report_to_json(rep));
  for (const auto& cand : rep.candidates)
    if (cand.family == rep.selected) write_fit_tables(ctx, "fit_selected", cand.scheme1, e);
  ctx.summary["selected"] = family_name(rep.selected);
}

void cmd_study(Context& ctx) {
  const json& c = ctx.config;
  check_keys(c, {"truth", "n", "T", "temporal_n", "temporal_T", "replicates", "schemes", "lags", "weights", "nls", "sim",
                 "same_seed_for_all", "max_failure_fraction", "seed"});
  StudyConfig s;
  s.truth = model_from_json(require<json>(c, "truth"));
  s.n = positive_int(c, "n", s.n);
  s.T = positive_int(c, "T", s.T);
  s.temporal_n = get<int>(c, "temporal_n", 0);
  s.temporal_T = get<int>(c, "temporal_T", 0);
  if ((s.temporal_n > 0) != (s.temporal_T > 0)) config_error("temporal_n and temporal_T must be given together");
  s.replicates = get<int>(c, "replicates", s.replicates);
  if (s.replicates < 2) config_error("a study needs at least 2 replicates");
  const auto schemes = get<std::vector<int>>(c, "schemes", {1, 2});
  s.scheme1 = std::count(schemes.begin(), schemes.end(), 1) > 0;
  s.scheme2 = std::count(schemes.begin(), schemes.end(), 2) > 0;
  if (!s.scheme1 && !s.scheme2) config_error("schemes must contain 1 and/or 2");
  s.lags = lags_of(c);
  const std::uint64_t seed = seed_required(ctx, "study");
  s.fit = fit_options(c, seed, 1);
  s.sim = sim_config(c, seed);
  s.same_seed_for_all = get<bool>(c, "same_seed_for_all", false);
  s.max_failure_fraction = get<double>(c, "max_failure_fraction", s.max_failure_fraction);
  s.threads = ctx.threads;
  const StudyResult r = run_study(s);
  ctx.out->write_json("study.json", study_to_json(r, s));
  ctx.out->write_with("study_estimates.csv", [&](std::ostream& os) {
    const auto names = param_names(family_of(s.truth));
    os << "scheme,replicate";
    for (const auto& n : names) os << ',' << n;
    os << '\n';
    os.precision(17);
    for (const auto& sc : r.schemes)
      for (std::size_t i = 0; i < sc.estimates.size(); ++i) {
        os << sc.scheme << ',' << i + 1;
        for (double v : sc.estimates[i]) os << ',' << v;
        os << '\n';
      }
  });
  ctx.summary["failures"] = r.failures;
  if (r.failed) ctx.exit_code = kExitPartial;
}

MarginsOptions margins_options(const json& c) {
  MarginsOptions o;
  o.period = get<int>(c, "period", 0);
  if (o.period < 0) config_error("period must be >= 0");
  o.force_gumbel = get<bool>(c, "force_gumbel", false);
  const std::string target = get<std::string>(c, "target", "frechet");
  if (target == "frechet")
    o.target = MarginTarget::Frechet;
  else if (target == "gumbel")
    o.target = MarginTarget::Gumbel;
  else
    config_error("target must be 'frechet' or 'gumbel'");
  return o;
}

SpaceTimeField maxima_of(Context& ctx, const json& c, const SpaceTimeField& raw) {
  const int b = positive_int(c, "space_block", 1), w = positive_int(c, "time_block", 1);
  if (b == 1 && w == 1) return raw;
  SpaceTimeField bm = block_maxima(raw, b, w);
  ctx.out->field("block_maxima", bm);
  return bm;
}

void cmd_margins(Context& ctx) {
  const json& c = ctx.config;
  check_keys(c, {"input", "space_block", "time_block", "period", "force_gumbel", "target", "seed"});
  const SpaceTimeField raw = input_field(c, "raw");
  const SpaceTimeField bm = maxima_of(ctx, c, raw);
  const MarginsResult mr = transform_margins(bm, margins_options(c));
  ctx.out->write_with("margins.csv", [&](std::ostream& os) { write_margins_csv(os, mr.sites); });
  ctx.out->field("transformed", mr.transformed);
}

void cmd_permtest(Context& ctx) {
  const json& c = ctx.config;
  check_keys(c, {"input", "input_margins", "mode", "lags", "B", "model", "seed"});
  const SpaceTimeField f = input_field(c, "frechet");
  const int B = positive_int(c, "B", 1000);
  std::optional<ModelSpec> model;
  if (c.contains("model")) model = model_from_json(c.at("model"));
  const std::uint64_t seed = seed_required(ctx, "permtest");
  ctx.out->write_json("permtest.json", emit_bands(ctx, f, lags_of(c), B, seed, madogram_options(c), model));
}

void cmd_pipeline(Context& ctx) {
  const json& c = ctx.config;
  check_keys(c, {"input", "space_block", "time_block", "period", "force_gumbel", "candidates", "lags", "weights", "nls",
                 "B", "mode", "seed"});
  const std::vector<Family> cands = candidates_of(c);
  const std::uint64_t seed = seed_required(ctx, "pipeline");
  const LagSets lags = lags_of(c);
  const MadogramOptions mo = madogram_options(c);
  const FitOptions fo = fit_options(c, seed, ctx.threads);
  const int B = positive_int(c, "B", 1000);
  MarginsOptions marg = margins_options(json::object());
  marg.period = get<int>(c, "period", 0);
  marg.force_gumbel = get<bool>(c, "force_gumbel", false);

  const SpaceTimeField raw = input_field(c, "raw");
  const SpaceTimeField bm = maxima_of(ctx, c, raw);
  const MarginsResult mr = transform_margins(bm, marg);
  ctx.out->write_with("margins.csv", [&](std::ostream& os) { write_margins_csv(os, mr.sites); });
  ctx.out->field("frechet", mr.transformed);

  const EstimateSet e = compute_estimates(mr.transformed, lags, mo);
  ctx.out->write_with("madogram_spatial.csv", [&](std::ostream& os) { write_madogram_csv(os, e.spatial); });
  ctx.out->write_with("madogram_temporal.csv", [&](std::ostream& os) { write_madogram_csv(os, e.temporal); });
  ctx.out->write_with("madogram_joint.csv", [&](std::ostream& os) { write_madogram_csv(os, e.joint); });

  const AICReport rep = select_model(cands, e, fo);
  ctx.out->write_json("aic_report.json", report_to_json(rep));
  std::optional<ModelSpec> selected;
  for (const auto& cand : rep.candidates) {
    if (!cand.ok) continue;
    write_fit_tables(ctx, "fit_" + std::string(family_name(cand.family)), cand.scheme1, e);
    if (cand.family == rep.selected) selected = cand.scheme1.model;
  }

  const json ranges = emit_bands(ctx, mr.transformed, lags, B, seed, mo, selected);
  json summary = {{"selected", family_name(rep.selected)},
                  {"model", model_to_json(*selected)},
                  {"spatial_range", ranges["spatial_range"]},
                  {"temporal_range", ranges["temporal_range"]},
                  {"missing_cells", mr.transformed.missing_count()}};
  ctx.out->write_json("pipeline.json", summary);
  ctx.summary["selected"] = summary["selected"];
}

using Handler = void (*)(Context&);

Handler handler_for(const std::string& name) {
  static const std::map<std::string, Handler> table = {
      {"simulate", cmd_simulate}, {"madogram", cmd_madogram}, {"fit", cmd_fit},           {"select", cmd_select},
      {"study", cmd_study},       {"margins", cmd_margins},   {"permtest", cmd_permtest}, {"pipeline", cmd_pipeline}};
  const auto it = table.find(name);
  if (it == table.end()) config_error("unknown command '" + name + "'");
  return it->second;
}

json load_config(const RunOptions& opts, std::optional<std::uint64_t>& seed) {
  json c = json::object();
  if (opts.config) {
    c = *opts.config;
  } else if (opts.config_path) {
    std::ifstream is(*opts.config_path);
    if (!is) throw Error(ErrorKind::IoError, "cannot open config " + *opts.config_path);
    try {
      c = json::parse(is);
    } catch (const json::exception& e) {
      config_error("config is not valid JSON: " + std::string(e.what()));
    }
  }
  if (!c.is_object()) config_error("config must be a JSON object");
  // A manifest from an earlier run replays that run's configuration.
  if (c.contains("config_sha1") && c.contains("config")) {
    if (c.value("command", "") != opts.command)
      config_error("manifest was written by command '" + c.value("command", "") + "'");
    c = c.at("config");
  }
  if (opts.seed)
    c["seed"] = *opts.seed;
  if (c.contains("seed")) {
    if (!c["seed"].is_number_unsigned()) config_error("seed must be an unsigned integer");
    seed = c["seed"].get<std::uint64_t>();
  }
  return c;
}

json library_versions() {
  return {{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"boost", std::to_string(BOOST_VERSION / 100000) + "." + std::to_string(BOOST_VERSION / 100 % 1000) + "." +
                        std::to_string(BOOST_VERSION % 100)},
          {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
}

}  // namespace

std::string sha1_hex(const std::string& bytes) {
  boost::uuids::detail::sha1 h;
  h.process_bytes(bytes.data(), bytes.size());
  boost::uuids::detail::sha1::digest_type d;
  h.get_digest(d);
  char buf[41];
  for (int i = 0; i < 5; ++i) std::snprintf(buf + 8 * i, 9, "%08x", d[i]);
  return std::string(buf, 40);
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"simulate", "madogram", "fit",      "select",
                                                 "study",    "margins",  "permtest", "pipeline"};
  return names;
}

int run(const RunOptions& opts) {
  Context ctx;
  std::optional<Outputs> out;
  auto fail = [&](int code, const std::string& msg) {
    std::cerr << "stmado " << opts.command << ": " << msg << '\n';
    if (out) {
      try {
        json m = {{"tool", "stmado"},         {"version", kVersion},  {"command", opts.command},
                  {"config", ctx.config},     {"config_sha1", sha1_hex(ctx.config.dump())},
                  {"seed", ctx.seed ? json(*ctx.seed) : json(nullptr)}, {"libraries", library_versions()},
                  {"status", "failed"},       {"error", msg},         {"outputs", out->listing()}};
        out->write_json("manifest.json", m);
      } catch (const std::exception&) {
      }
    }
    return code;
  };
  try {
    const Handler h = handler_for(opts.command);
    ctx.config = load_config(opts, ctx.seed);
    if (opts.threads < 1) config_error("--threads must be >= 1");
    ctx.threads = opts.threads;
    out.emplace(opts.out);
    ctx.out = &*out;
    h(ctx);
    json m = {{"tool", "stmado"},
              {"version", kVersion},
              {"command", opts.command},
              {"config", ctx.config},
              {"config_sha1", sha1_hex(ctx.config.dump())},
              {"seed", ctx.seed ? json(*ctx.seed) : json(nullptr)},
              {"libraries", library_versions()},
              {"status", ctx.exit_code == kExitOk ? "ok" : "partial"},
              {"summary", ctx.summary},
              {"outputs", out->listing()}};
    out->write_json("manifest.json", m);
    return ctx.exit_code;
  } catch (const Error& e) {
    return fail(e.is_config_error() ? kExitConfig : kExitNumeric, e.what());
  } catch (const json::exception& e) {
    return fail(kExitConfig, std::string("config: ") + e.what());
  } catch (const std::exception& e) {
    return fail(kExitNumeric, e.what());
  }
}

int main_with_args(int argc, const char* const* argv) {
  CLI::App app{"Space-time extremes: simulation, F-madogram estimation, model fitting and selection"};
  app.require_subcommand(1);
  RunOptions opts;
  std::string config;
  std::uint64_t seed = 0;
  for (const auto& name : command_names()) {
    CLI::App* sub = app.add_subcommand(name, "run the " + name + " step");
    sub->add_option("--config", config, "JSON configuration (or a manifest from an earlier run)")
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "base random seed");
    sub->add_option("--out", opts.out, "output directory")->capture_default_str();
    sub->add_option("--threads", opts.threads, "worker threads")->capture_default_str();
  }
  app.add_flag_callback("--version", [] {
    std::cout << "stmado " << kVersion << '\n';
    throw CLI::Success();
  });
  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }
  CLI::App* sub = app.get_subcommands().front();
  opts.command = sub->get_name();
  if (sub->count("--config")) opts.config_path = config;
  if (sub->count("--seed")) opts.seed = seed;
  return run(opts);
}

}  // namespace stmado::cli
