#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "ilmc/types.hpp"

namespace ilmc {

/// Constants of the confinement assumption on U.
struct PotentialConstants {
  double m = 1.0;              ///< Hess U >= m I for |x| >= r_conf
  double big_m = 1.0;          ///< max of |Hess U| over the ball of radius r_conf
  double r_conf = 1.0;         ///< radius of the possibly non-convex region
  double ell = 1.0;            ///< polynomial growth exponent of the derivatives
  double neg_curvature = 0.0;  ///< sup over x of max(0, -lambda_min(Hess U(x)))
};

/// Derivatives of U at one point, filled up to the requested order.
struct Derivatives {
  double value = 0.0;
  Vec grad;
  Mat hess;
  Tensor3 third;
};

/// Derivative oracle of a smooth potential.
class PotentialModel {
 public:
  virtual ~PotentialModel() = default;
  virtual int dim() const = 0;
  /// Fills `out` with derivatives of order 0..max_order (max_order <= 3).
  virtual void evaluate(const Vec& x, int max_order, Derivatives& out) const = 0;
};

/// A confining potential together with its assumption constants.
///
/// Copies share the immutable derivative oracle, so a Potential can be handed
/// to any number of replica workers.
class Potential {
 public:
  Potential(std::string name, std::shared_ptr<const PotentialModel> model,
            PotentialConstants constants);

  const std::string& name() const { return name_; }
  int dim() const { return model_->dim(); }
  const PotentialConstants& constants() const { return constants_; }

  /// Same oracle, different constants (used to build deliberately wrong metadata).
  Potential with_constants(const PotentialConstants& c) const;

  double u(const Vec& x) const;
  Vec grad(const Vec& x) const;
  Mat hess(const Vec& x) const;
  Tensor3 third(const Vec& x) const;
  void evaluate(const Vec& x, int max_order, Derivatives& out) const {
    model_->evaluate(x, max_order, out);
  }

 private:
  std::string name_;
  std::shared_ptr<const PotentialModel> model_;
  PotentialConstants constants_;
};

/// U(x) = kappa |x|^2 / 2.
Potential make_gaussian(int dim, double kappa);

/// U(x) = a|x|^4 - b|x|^2 + b^2/(4a), shifted so that min U = 0.
Potential make_ginzburg_landau(int dim, double a, double b);

/// Builds a potential from its string id (gaussian, ginzburg_landau, double_well).
/// Parameters not used by the id are ignored.
Potential make_potential(const std::string& id, int dim, double kappa, double a, double b);

struct AssumptionCheck {
  std::string name;
  bool passed = true;
  std::size_t n_checked = 0;
  double worst_margin = 0.0;  ///< most negative slack seen (>= 0 when passed)
  Vec worst_point;
};

struct AssumptionReport {
  std::vector<AssumptionCheck> checks;
  bool all_passed() const;
  const AssumptionCheck& find(const std::string& name) const;
};

/// Samples |x| uniformly on [0, 3 r_conf] with uniform directions and checks
/// far-field convexity, the inner Hessian bound, the lower curvature bound and
/// nonnegativity of U.
AssumptionReport check_assumptions(const Potential& p, std::size_t n_samples,
                                   std::uint64_t rng_seed);

}  // namespace ilmc
