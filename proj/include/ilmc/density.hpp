#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace ilmc {

/// Uniform cell-centred grid on [-l, l].
struct Grid1D {
  double l = 1.0;
  std::size_t n_cells = 1;
  double dx = 2.0;

  Grid1D() = default;
  Grid1D(double half_width, std::size_t cells);

  double center(std::size_t i) const { return -l + (static_cast<double>(i) + 0.5) * dx; }
  /// Position of the face between cells i and i+1.
  double face(std::size_t i) const { return -l + static_cast<double>(i + 1) * dx; }
  bool operator==(const Grid1D& o) const { return l == o.l && n_cells == o.n_cells; }
};

/// Cell-averaged probability density on a Grid1D.
struct DensityField {
  Grid1D grid;
  std::vector<double> values;
  double time = 0.0;

  double mass() const;
  double min_value() const;
  double moment(int order) const;  ///< int x^order rho dx
  double variance() const;
  /// Rescales to unit mass.
  void normalize();
};

/// Samples exp(-log_weight(x)) at cell centres and normalizes. The argument is
/// treated as an unnormalized negative log density; the minimum is subtracted
/// before exponentiating.
DensityField density_from_log_weight(const Grid1D& grid,
                                     const std::function<double(double)>& neg_log_weight);

/// Discretized N(mean, variance).
DensityField gaussian_density(const Grid1D& grid, double mean, double variance);

}  // namespace ilmc
