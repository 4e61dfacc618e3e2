#pragma once

// Bound-aware Nelder-Mead with Latin-hypercube multi-starts. Each parameter
// is mapped to an unconstrained coordinate before the simplex search.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace stmado {

enum class Transform {
  Identity,  ///< unbounded
  Log,       ///< x = lo + exp(u), x > lo
  Logit,     ///< x = lo + (hi - lo) / (1 + exp(-u)), lo < x < hi
};

struct ParamSpec {
  Transform transform = Transform::Identity;
  double lo = 0.0;
  double hi = 0.0;
  double start_lo = 0.0;  ///< Latin-hypercube range for starting points
  double start_hi = 1.0;
};

double to_internal(const ParamSpec& p, double x);
double to_external(const ParamSpec& p, double u);

struct NlsOptions {
  int max_iterations = 2000;  ///< per simplex run
  double ftol = 1e-10;        ///< relative spread of simplex values
  int starts = 8;             ///< Latin-hypercube starting points
  int polish_rounds = 4;      ///< simplex restarts from the best point
  std::uint64_t seed = 1;
};

struct NlsResult {
  std::vector<double> x;
  double objective = 0.0;
  int iterations = 0;    ///< total simplex iterations over all runs
  bool converged = false;
  int restarts_used = 0;  ///< starting points run
  int best_start = -1;    ///< index of the winning start in lexicographic order
  std::vector<double> history;  ///< best objective after each iteration of the winning run
};

using Objective = std::function<double(std::span<const double>)>;

/// Minimizes f over the box described by `specs`. Starting points are the
/// Latin-hypercube draws plus `init`, sorted lexicographically; the winner is
/// the first one whose final value is not beaten by more than a relative 1e-10.
/// Throws NoConvergence if no run converges or every value is non-finite.
NlsResult nls_minimize(const Objective& f, const std::vector<ParamSpec>& specs,
                       const std::optional<std::vector<double>>& init, const NlsOptions& opts = {});

}  // namespace stmado
