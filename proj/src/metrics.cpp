#include "ilmc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iterator>
#include <numeric>

#include <boost/geometry.hpp>
#include <boost/geometry/index/rtree.hpp>

#include "ilmc/errors.hpp"

namespace ilmc {

namespace bg = boost::geometry;
namespace bgi = boost::geometry::index;

namespace {

constexpr double kRadiusFloor = 1e-12;

// Distances from every point of `queries` to its k-th nearest neighbour in
// `reference`; with skip_self the query set is the reference set and the
// zero-distance self match is discarded.
template <int D>
std::vector<double> kth_neighbour_distances(std::span<const Vec> reference,
                                            std::span<const Vec> queries, int k, bool skip_self) {
  using Point = bg::model::point<double, D, bg::cs::cartesian>;
  auto to_point = [](const Vec& v) {
    Point pt;
    bg::set<0>(pt, v(0));
    if constexpr (D > 1) bg::set<1>(pt, v(1));
    if constexpr (D > 2) bg::set<2>(pt, v(2));
    return pt;
  };
  std::vector<Point> pts;
  pts.reserve(reference.size());
  for (const Vec& v : reference) pts.push_back(to_point(v));
  bgi::rtree<Point, bgi::quadratic<16>> tree(pts.begin(), pts.end());

  const unsigned want = static_cast<unsigned>(k + (skip_self ? 1 : 0));
  std::vector<double> out(queries.size());
  std::vector<Point> hits;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    hits.clear();
    const Point q = to_point(queries[i]);
    tree.query(bgi::nearest(q, want), std::back_inserter(hits));
    double kth = 0.0;
    for (const Point& hpt : hits) kth = std::max(kth, bg::distance(q, hpt));
    out[i] = std::max(kth, kRadiusFloor);
  }
  return out;
}

std::vector<double> kth_distances(std::span<const Vec> reference, std::span<const Vec> queries,
                                  int k, bool skip_self, int dim) {
  switch (dim) {
    case 1: return kth_neighbour_distances<1>(reference, queries, k, skip_self);
    case 2: return kth_neighbour_distances<2>(reference, queries, k, skip_self);
    case 3: return kth_neighbour_distances<3>(reference, queries, k, skip_self);
    default: throw InputError("kl_knn: dimension must be 1, 2 or 3");
  }
}

}  // namespace

double w1_empirical_1d(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.empty())
    throw InputError("w1_empirical_1d: samples must be non-empty and of equal length");
  std::vector<double> a(xs.begin(), xs.end());
  std::vector<double> b(ys.begin(), ys.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

double relative_entropy_grid(const DensityField& rho_p, const DensityField& rho_q) {
  if (!(rho_p.grid == rho_q.grid) || rho_p.values.size() != rho_q.values.size())
    throw InputError("relative_entropy_grid: densities live on different grids");
  const double peak = *std::max_element(rho_p.values.begin(), rho_p.values.end());
  const double clip = 1e-15 * peak;
  double s = 0.0;
  for (std::size_t i = 0; i < rho_p.values.size(); ++i) {
    const double p = rho_p.values[i];
    if (p <= 0.0 || p < clip) continue;
    const double q = std::max(rho_q.values[i], 1e-300);
    s += p * std::log(p / q);
  }
  return s * rho_p.grid.dx;
}

KnnDivergence kl_knn(std::span<const Vec> samples_p, std::span<const Vec> samples_q, int k) {
  if (k < 1) throw InputError("kl_knn: k must be >= 1");
  const std::size_t np = samples_p.size();
  const std::size_t nq = samples_q.size();
  if (np < static_cast<std::size_t>(k) + 1 || nq < static_cast<std::size_t>(k) + 1)
    throw InputError("kl_knn: need at least k+1 samples in each set");
  const int dim = static_cast<int>(samples_p.front().size());

  const auto rho = kth_distances(samples_p, samples_p, k, true, dim);
  const auto nu = kth_distances(samples_q, samples_p, k, false, dim);

  std::vector<double> terms(np);
  for (std::size_t i = 0; i < np; ++i) terms[i] = std::log(nu[i] / rho[i]);
  const double mean = std::accumulate(terms.begin(), terms.end(), 0.0) / static_cast<double>(np);
  double var = 0.0;
  for (double t : terms) var += (t - mean) * (t - mean);
  var /= static_cast<double>(np - 1);

  KnnDivergence out;
  out.estimate = dim * mean + std::log(static_cast<double>(nq) / static_cast<double>(np - 1));
  out.std_error = dim * std::sqrt(var / static_cast<double>(np));
  return out;
}

LinearFit fit_linear(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 2) throw InputError("fit_linear: need >= 2 paired points");
  const double nd = static_cast<double>(n);
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / nd;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / nd;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw InputError("fit_linear: abscissae are all equal");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    sse += r * r;
  }
  f.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  f.slope_stderr = n > 2 ? std::sqrt(sse / (nd - 2.0) / sxx) : 0.0;
  return f;
}

LogLogFit fit_loglog_slope(std::span<const double> h, std::span<const double> values) {
  if (h.size() != values.size() || h.size() < 3)
    throw InputError("fit_loglog_slope: need >= 3 paired points");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (!(h[i] > 0.0) || !(values[i] > 0.0))
      throw InputError("fit_loglog_slope: h and values must be positive");
    lx.push_back(std::log(h[i]));
    ly.push_back(std::log(values[i]));
  }
  const LinearFit lf = fit_linear(lx, ly);
  return {lf.slope, lf.intercept, lf.r_squared};
}

BatchMeans batch_means(std::span<const double> series, std::size_t n_batches) {
  if (n_batches < 2 || series.size() < n_batches)
    throw InputError("batch_means: need >= 2 batches and one value per batch");
  const std::size_t len = series.size() / n_batches;
  std::vector<double> means(n_batches, 0.0);
  for (std::size_t b = 0; b < n_batches; ++b) {
    for (std::size_t i = 0; i < len; ++i) means[b] += series[b * len + i];
    means[b] /= static_cast<double>(len);
  }
  BatchMeans out;
  out.mean = std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(n_batches);
  double var = 0.0;
  for (double m : means) var += (m - out.mean) * (m - out.mean);
  var /= static_cast<double>(n_batches - 1);
  out.std_error = std::sqrt(var / static_cast<double>(n_batches));
  return out;
}

void MetricReport::add(double h, double t, const std::string& metric, double value,
                       double std_error) {
  rows.push_back({h, t, metric, value, std_error});
}

std::vector<MetricRow> MetricReport::select(const std::string& metric) const {
  std::vector<MetricRow> out;
  std::copy_if(rows.begin(), rows.end(), std::back_inserter(out),
               [&](const MetricRow& r) { return r.metric == metric; });
  return out;
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

void MetricReport::write_csv(std::ostream& os) const {
  for (const auto& c : header_comments) os << "# " << c << '\n';
  os << "h,t,metric,value,stderr\n";
  for (const auto& r : rows)
    os << format_number(r.h) << ',' << format_number(r.t) << ',' << r.metric << ','
       << format_number(r.value) << ',' << format_number(r.std_error) << '\n';
  for (const auto& [name, fit] : slope_fits)
    os << "#slope metric=" << name << " slope=" << format_number(fit.slope)
       << " r2=" << format_number(fit.r_squared) << '\n';
}

}  // namespace ilmc
