#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace stmado {

/// Standard normal CDF, absolute error well below 1e-15 (complementary
/// error function route, so the lower tail keeps full relative accuracy).
double normal_cdf(double x);

/// Standard normal quantile.
double normal_quantile(double p);

/// Student-t CDF with real degrees of freedom df > 0.
double student_t_cdf(double x, double df);

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::fabs(sum_) >= std::fabs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Empirical quantile by linear interpolation between order statistics
/// (Hyndman-Fan type 7, the R default). `sorted` must be ascending.
double quantile_type7(std::span<const double> sorted, double p);

/// Kolmogorov-Smirnov distance between a sample and a continuous CDF.
template <class Cdf>
double ks_statistic(std::vector<double> sample, Cdf cdf);

/// Asymptotic one-sample KS critical value sqrt(-log(alpha/2)/2) / sqrt(N)
/// with the small-sample correction of Stephens.
double ks_critical_value(std::size_t n, double alpha);

double mean(std::span<const double> v);
double sample_variance(std::span<const double> v);

}  // namespace stmado

#include <algorithm>
#include <cmath>

template <class Cdf>
double stmado::ks_statistic(std::vector<double> sample, Cdf cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max(d, std::max(f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f));
  }
  return d;
}
