#pragma once

// Weighted least-squares fits of model F-madograms to empirical ones, the
// separate spatial-then-temporal scheme (scheme 1), the joint scheme
// (scheme 2), and AIC-based model selection.

#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stmado/error.hpp"
#include "stmado/field.hpp"
#include "stmado/lattice.hpp"
#include "stmado/madogram.hpp"
#include "stmado/models.hpp"
#include "stmado/nls.hpp"

namespace stmado {

enum class WeightPolicy { Equal, Cutoff, Exponential, Gaussian, Power };

struct Weights {
  WeightPolicy policy = WeightPolicy::Equal;
  double r = std::numeric_limits<double>::infinity();  ///< cutoff: spatial radius
  double q = std::numeric_limits<double>::infinity();  ///< cutoff: temporal radius
  double c = 1.0;                                      ///< decay rate / exponent

  static Weights equal() { return {}; }
  static Weights cutoff(double r, double q) { return {WeightPolicy::Cutoff, r, q, 1.0}; }
  static Weights exponential(double c);
  static Weights gaussian(double c);
  static Weights power(double c);

  /// Weight of the class at spatial distance h and temporal lag l. The decay
  /// families use d = h + l (exponential, power) or d^2 = h^2 + l^2 (gaussian).
  double operator()(double h, double l) const;
};

std::string weight_policy_name(WeightPolicy p);
Weights weights_from_json(const nlohmann::json& j);
nlohmann::json weights_to_json(const Weights& w);

/// Model F-madogram matching an estimate: the value at the estimate's offset
/// for directional classes, otherwise the mean over the offsets of the class
/// (every offset of a class has the same pair count on a square grid).
double class_model_value(const ModelSpec& m, const MadogramEstimate& e);

struct FitOptions {
  Weights weights;
  NlsOptions nls;
  int threads = 1;  ///< select_model fits candidates on this many workers
};

struct FitResult {
  Family family = Family::A1;
  ModelSpec model;
  int scheme = 1;
  double objective = 0.0;  ///< weighted SSE (scheme 1: spatial + temporal)
  double objective_spatial = 0.0;
  double objective_temporal = 0.0;
  int iterations = 0;
  bool converged = false;
  int restarts_used = 0;
  std::vector<double> history;  ///< best objective per iteration of the final optimization
};

/// Spatial parameters from `spatial` (classes with l' = 0), then temporal
/// parameters from `temporal` (classes with h = 0) with the spatial part held
/// fixed. For max-autoregressive families the temporal classes determine tau
/// only through its length in the innovation's metric; its direction is taken
/// from `init` (first axis if absent) and its length is estimated.
FitResult fit_scheme1(Family family, const std::vector<MadogramEstimate>& spatial,
                      const std::vector<MadogramEstimate>& temporal, const FitOptions& opts = {},
                      const std::optional<ModelSpec>& init = std::nullopt);

/// All parameters at once from joint classes.
FitResult fit_scheme2(Family family, const std::vector<MadogramEstimate>& joint, const FitOptions& opts = {},
                      const std::optional<ModelSpec>& init = std::nullopt);

struct AicValues {
  double aic = 0.0;
  double aicc = 0.0;
};

/// |H| log(L_s/|H|) + 2(k_s+1) + |K| log(L_t/|K|) + 2(k_t+1), and the version
/// with 2(k_s+1)(k_s+2)/(|H|-k_s) + 2(k_t+1)(k_t+2)/(|K|-k_t) added.
AicValues aic_nls(double L_s, double L_t, int H, int K, int k_s, int k_t);

/// Every estimate the fitting schemes and model selection need.
struct EstimateSet {
  std::vector<MadogramEstimate> spatial;         ///< scalar, l' = 0
  std::vector<MadogramEstimate> temporal;        ///< h = 0
  std::vector<MadogramEstimate> spatial_vector;  ///< oriented offsets, l' = 0
  std::vector<MadogramEstimate> joint;           ///< scalar, h > 0 and l' > 0
  std::vector<MadogramEstimate> joint_vector;    ///< oriented offsets, h > 0 and l' > 0
};

EstimateSet compute_estimates(const SpaceTimeField& field, const LagSets& lags, const MadogramOptions& opts = {});

/// Spatial classes a scheme-1 fit of `family` uses (oriented ones for the
/// anisotropic Smith innovation).
const std::vector<MadogramEstimate>& scheme1_spatial_data(Family family, const EstimateSet& e);
/// Joint classes a scheme-2 fit uses (oriented ones for the MAR families).
const std::vector<MadogramEstimate>& scheme2_data(Family family, const EstimateSet& e);

struct CandidateReport {
  Family family = Family::A1;
  bool ok = false;
  std::string error;
  ErrorKind error_kind = ErrorKind::NoConvergence;
  FitResult scheme2;
  FitResult scheme1;
  double L_s = 0.0;  ///< unit-weight SSE on the scalar spatial classes
  double L_t = 0.0;  ///< unit-weight SSE on the temporal classes
  int k_s = 0;
  int k_t = 0;
  AicValues aic;
};

struct AICReport {
  std::vector<CandidateReport> candidates;
  Family selected = Family::A1;
  int H = 0;
  int K = 0;
};

/// Fits each candidate by scheme 2, then by scheme 1 started from the scheme-2
/// estimate, and selects the smallest corrected AIC. Ties within 1e-9 go to
/// fewer parameters, then to the earlier candidate. Candidates whose fit
/// fails are reported and skipped; if all fail the last error is rethrown.
AICReport select_model(const std::vector<Family>& candidates, const EstimateSet& data, const FitOptions& opts = {});

nlohmann::json fit_to_json(const FitResult& f);
nlohmann::json report_to_json(const AICReport& r);

/// Columns h,lprime,dx,dy,nu_hat,nu_model,npairs.
void write_fit_csv(std::ostream& os, const ModelSpec& m, const std::vector<MadogramEstimate>& estimates);

}  // namespace stmado
