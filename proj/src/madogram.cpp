#include "stmado/madogram.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <string>

#include "stmado/error.hpp"
#include "stmado/special.hpp"

namespace stmado {

namespace {

struct Accum {
  CompensatedSum sum;
  std::int64_t count = 0;

  void add(double a, double b) {
    if (std::isnan(a) || std::isnan(b)) return;
    sum.add(std::fabs(a - b));
    ++count;
  }
  double mean_half() const { return count > 0 ? 0.5 * sum.value() / static_cast<double>(count) : 0.0; }
};

void check_lags(int n, int T, const std::vector<int>& h2, const std::vector<int>& k) {
  for (int v : h2) {
    if (v < 0 || !is_realizable(n, v))
      throw Error(ErrorKind::UnrealizableLag, "spatial lag sqrt(" + std::to_string(v) + ") not realizable on a " +
                                                  std::to_string(n) + "x" + std::to_string(n) + " grid");
  }
  for (int l : k) {
    if (l < 0 || l >= T)
      throw Error(ErrorKind::UnrealizableLag,
                  "temporal lag " + std::to_string(l) + " needs more than " + std::to_string(T) + " time steps");
  }
}

// Mean of |U(s, t) - U(s + v, t + l)| / 2 over all valid cells, for one offset.
Accum offset_accum(const std::vector<double>& u, int n, int T, Offset v, int l) {
  Accum acc;
  const int x0 = std::max(0, -v.dx), x1 = std::min(n, n - v.dx);
  const int y0 = std::max(0, -v.dy), y1 = std::min(n, n - v.dy);
  const std::size_t plane = static_cast<std::size_t>(n) * n;
  for (int t = 0; t + l < T; ++t) {
    const double* a = u.data() + plane * t;
    const double* b = u.data() + plane * (t + l);
    for (int y = y0; y < y1; ++y)
      for (int x = x0; x < x1; ++x)
        acc.add(a[static_cast<std::size_t>(y) * n + x], b[static_cast<std::size_t>(y + v.dy) * n + x + v.dx]);
  }
  return acc;
}

std::vector<double> rank_transform(const SpaceTimeField& f) {
  std::vector<double> u(f.values.size(), kMissing);
  std::vector<std::pair<double, int>> buf;
  for (int y = 0; y < f.n; ++y)
    for (int x = 0; x < f.n; ++x) {
      buf.clear();
      for (int t = 0; t < f.T; ++t) {
        const double v = f(x, y, t);
        if (!std::isnan(v)) buf.emplace_back(v, t);
      }
      std::sort(buf.begin(), buf.end());
      const double denom = static_cast<double>(buf.size()) + 1.0;
      for (std::size_t i = 0; i < buf.size();) {
        std::size_t j = i;
        while (j + 1 < buf.size() && buf[j + 1].first == buf[i].first) ++j;
        const double rank = 0.5 * static_cast<double>(i + j) + 1.0;  // average rank for ties
        for (std::size_t m = i; m <= j; ++m)
          u[static_cast<std::size_t>(cell_index(f.n, x, y, buf[m].second))] = rank / denom;
        i = j + 1;
      }
    }
  return u;
}

}  // namespace

double frechet_cdf(double x) {
  if (!(x > 0.0)) throw Error(ErrorKind::InvalidArgs, "frechet_cdf needs x > 0, got " + std::to_string(x));
  return std::exp(-1.0 / x);
}

double MadogramEstimate::h() const { return std::sqrt(static_cast<double>(h2)); }

std::vector<double> transformed_values(const SpaceTimeField& field, const MadogramOptions& opts) {
  if (opts.mode == MarginMode::Rank) return rank_transform(field);
  if (field.margins != Margins::Frechet)
    throw Error(ErrorKind::InvalidArgs, "Frechet madogram needs a field with Frechet margins");
  std::vector<double> u(field.values.size());
  std::transform(field.values.begin(), field.values.end(), u.begin(),
                 [](double v) { return std::isnan(v) ? v : frechet_cdf(v); });
  return u;
}

std::vector<MadogramEstimate> empirical_spatial_fmadogram(const SpaceTimeField& field, const std::vector<int>& h2,
                                                          const MadogramOptions& opts) {
  check_lags(field.n, field.T, h2, {});
  const std::vector<double> u = transformed_values(field, opts);
  const int n = field.n;
  std::vector<MadogramEstimate> out;
  for (int hv : h2) {
    if (hv == 0) continue;
    const std::vector<Offset> offsets = half_plane_offsets(hv);
    CompensatedSum slice_means;
    int slices = 0;
    std::int64_t total = 0;
    for (int t = 0; t < field.T; ++t) {
      Accum acc;
      const double* a = u.data() + static_cast<std::size_t>(t) * n * n;
      for (const Offset& v : offsets) {
        const int x0 = std::max(0, -v.dx), x1 = std::min(n, n - v.dx);
        const int y0 = std::max(0, -v.dy), y1 = std::min(n, n - v.dy);
        for (int y = y0; y < y1; ++y)
          for (int x = x0; x < x1; ++x)
            acc.add(a[static_cast<std::size_t>(y) * n + x], a[static_cast<std::size_t>(y + v.dy) * n + x + v.dx]);
      }
      if (acc.count == 0) continue;
      slice_means.add(acc.mean_half());
      ++slices;
      total += acc.count;
    }
    MadogramEstimate e;
    e.h2 = hv;
    e.value = slices > 0 ? slice_means.value() / slices : 0.0;
    e.npairs = total;
    out.push_back(e);
  }
  return out;
}

std::vector<MadogramEstimate> empirical_temporal_fmadogram(const SpaceTimeField& field, const std::vector<int>& k,
                                                           const MadogramOptions& opts) {
  check_lags(field.n, field.T, {}, k);
  const std::vector<double> u = transformed_values(field, opts);
  const std::size_t plane = static_cast<std::size_t>(field.n) * field.n;
  std::vector<MadogramEstimate> out;
  for (int l : k) {
    if (l == 0) continue;
    CompensatedSum site_means;
    int sites = 0;
    std::int64_t total = 0;
    for (std::size_t s = 0; s < plane; ++s) {
      Accum acc;
      for (int t = 0; t + l < field.T; ++t) acc.add(u[plane * t + s], u[plane * (t + l) + s]);
      if (acc.count == 0) continue;
      site_means.add(acc.mean_half());
      ++sites;
      total += acc.count;
    }
    MadogramEstimate e;
    e.lprime = l;
    e.value = sites > 0 ? site_means.value() / sites : 0.0;
    e.npairs = total;
    out.push_back(e);
  }
  return out;
}

std::vector<MadogramEstimate> empirical_st_fmadogram(const SpaceTimeField& field, const std::vector<int>& h2,
                                                     const std::vector<int>& k, const MadogramOptions& opts) {
  check_lags(field.n, field.T, h2, k);
  const std::vector<double> u = transformed_values(field, opts);
  std::vector<MadogramEstimate> out;
  for (int l : k)
    for (int hv : h2) {
      if (hv == 0 && l == 0) continue;
      std::vector<Offset> offsets;
      if (hv == 0)
        offsets = {Offset{0, 0}};
      else
        offsets = l == 0 ? half_plane_offsets(hv) : full_offsets(hv);
      Accum total;
      for (const Offset& v : offsets) {
        const Accum a = offset_accum(u, field.n, field.T, v, l);
        total.sum.add(a.sum.value());
        total.count += a.count;
      }
      if (total.count == 0) continue;
      MadogramEstimate e;
      e.h2 = hv;
      e.lprime = l;
      e.value = total.mean_half();
      e.npairs = total.count;
      out.push_back(e);
    }
  return out;
}

std::vector<MadogramEstimate> empirical_spatial_fmadogram_vector(const SpaceTimeField& field,
                                                                 const std::vector<int>& h2,
                                                                 const MadogramOptions& opts) {
  return empirical_st_fmadogram_vector(field, h2, {0}, opts);
}

std::vector<MadogramEstimate> empirical_st_fmadogram_vector(const SpaceTimeField& field, const std::vector<int>& h2,
                                                            const std::vector<int>& k,
                                                            const MadogramOptions& opts) {
  check_lags(field.n, field.T, h2, k);
  const std::vector<double> u = transformed_values(field, opts);
  std::vector<MadogramEstimate> out;
  for (int l : k)
    for (int hv : h2) {
      if (hv == 0 && l == 0) continue;
      std::vector<Offset> offsets;
      if (hv == 0)
        offsets = {Offset{0, 0}};
      else
        offsets = l == 0 ? half_plane_offsets(hv) : full_offsets(hv);
      for (const Offset& v : offsets) {
        const Accum a = offset_accum(u, field.n, field.T, v, l);
        if (a.count == 0) continue;
        MadogramEstimate e;
        e.h2 = hv;
        e.lprime = l;
        e.offset = v;
        e.directional = true;
        e.value = a.mean_half();
        e.npairs = a.count;
        out.push_back(e);
      }
    }
  return out;
}

void write_madogram_csv(std::ostream& os, const std::vector<MadogramEstimate>& estimates) {
  const bool directional = std::any_of(estimates.begin(), estimates.end(), [](const auto& e) { return e.directional; });
  os << "h,lprime,nu_hat,npairs" << (directional ? ",dx,dy" : "") << '\n';
  os.precision(17);
  for (const MadogramEstimate& e : estimates) {
    os << e.h() << ',' << e.lprime << ',' << e.value << ',' << e.npairs;
    if (directional) os << ',' << e.offset.dx << ',' << e.offset.dy;
    os << '\n';
  }
}

}  // namespace stmado
