#include "ilmc/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ilmc/errors.hpp"

namespace ilmc {

Grid1D::Grid1D(double half_width, std::size_t cells) : l(half_width), n_cells(cells) {
  if (!(half_width > 0.0)) throw ConfigError("grid half-width must be positive");
  if (cells == 0) throw ConfigError("grid needs at least one cell");
  dx = 2.0 * l / static_cast<double>(n_cells);
}

double DensityField::mass() const {
  double s = 0.0;
  for (double v : values) s += v;
  return s * grid.dx;
}

double DensityField::min_value() const {
  return values.empty() ? 0.0 : *std::min_element(values.begin(), values.end());
}

double DensityField::moment(int order) const {
  double s = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) s += std::pow(grid.center(i), order) * values[i];
  return s * grid.dx;
}

double DensityField::variance() const {
  const double m0 = mass();
  const double m1 = moment(1) / m0;
  return moment(2) / m0 - m1 * m1;
}

void DensityField::normalize() {
  const double m = mass();
  if (!(m > 0.0)) throw SolverError("density has no mass to normalize");
  for (double& v : values) v /= m;
}

DensityField density_from_log_weight(const Grid1D& grid,
                                     const std::function<double(double)>& neg_log_weight) {
  DensityField f;
  f.grid = grid;
  f.values.resize(grid.n_cells);
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.n_cells; ++i) {
    f.values[i] = neg_log_weight(grid.center(i));
    lo = std::min(lo, f.values[i]);
  }
  for (double& v : f.values) v = std::exp(-(v - lo));
  f.normalize();
  return f;
}

DensityField gaussian_density(const Grid1D& grid, double mean, double variance) {
  if (!(variance > 0.0)) throw ConfigError("gaussian density needs positive variance");
  return density_from_log_weight(
      grid, [=](double x) { return 0.5 * (x - mean) * (x - mean) / variance; });
}

}  // namespace ilmc
