#pragma once

#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "ilmc/density.hpp"
#include "ilmc/types.hpp"

namespace ilmc {

/// Exact W1 between two equally sized samples on the line (sorted matching).
double w1_empirical_1d(std::span<const double> xs, std::span<const double> ys);

/// sum rho_p log(rho_p / rho_q) dx over cells, with 0 log 0 = 0.
///
/// rho_q is floored at 1e-300 and cells with rho_p < 1e-15 max(rho_p) are
/// dropped so the far tails cannot dominate through log(0).
double relative_entropy_grid(const DensityField& rho_p, const DensityField& rho_q);

struct KnnDivergence {
  double estimate = 0.0;
  double std_error = 0.0;  ///< d * sd(per-point log ratios) / sqrt(N_p)
};

/// k-nearest-neighbour estimate of KL(p | q) from samples (dimension <= 3):
///   (d / N_p) sum_i log(nu_k(i) / rho_k(i)) + log(N_q / (N_p - 1)).
KnnDivergence kl_knn(std::span<const Vec> samples_p, std::span<const Vec> samples_q, int k);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double slope_stderr = 0.0;
};

/// Ordinary least squares y ~ intercept + slope * x.
LinearFit fit_linear(std::span<const double> x, std::span<const double> y);

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Least squares on (log h, log value). Needs >= 3 points with positive values.
LogLogFit fit_loglog_slope(std::span<const double> h, std::span<const double> values);

/// Mean and batch-means standard error of a correlated series.
struct BatchMeans {
  double mean = 0.0;
  double std_error = 0.0;
};
BatchMeans batch_means(std::span<const double> series, std::size_t n_batches);

struct MetricRow {
  double h = 0.0;
  double t = 0.0;
  std::string metric;
  double value = 0.0;
  double std_error = 0.0;
};

/// Rows of (h, t, metric, value, stderr) plus named slope fits.
struct MetricReport {
  std::vector<MetricRow> rows;
  std::map<std::string, LogLogFit> slope_fits;
  std::vector<std::string> header_comments;  ///< written as "# ..." lines

  void add(double h, double t, const std::string& metric, double value, double std_error = 0.0);
  std::vector<MetricRow> select(const std::string& metric) const;
  /// CSV `h,t,metric,value,stderr` with `#slope metric=.. slope=.. r2=..` trailers.
  void write_csv(std::ostream& os) const;
};

/// Fixed-format number rendering used in every CSV the library writes.
std::string format_number(double v);

}  // namespace ilmc
