#include "ilmc/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "ilmc/errors.hpp"
#include "ilmc/rng.hpp"

namespace ilmc {

namespace {

class GaussianModel final : public PotentialModel {
 public:
  GaussianModel(int dim, double kappa) : dim_(dim), kappa_(kappa) {}
  int dim() const override { return dim_; }

  void evaluate(const Vec& x, int max_order, Derivatives& out) const override {
    out.value = 0.5 * kappa_ * x.squaredNorm();
    if (max_order >= 1) out.grad = kappa_ * x;
    if (max_order >= 2) out.hess = kappa_ * Mat::Identity(dim_, dim_);
    if (max_order >= 3) out.third.resize(dim_);
  }

 private:
  int dim_;
  double kappa_;
};

// Radial quartic a r^4 - b r^2 + b^2/(4a) with r = |x|.
class GinzburgLandauModel final : public PotentialModel {
 public:
  GinzburgLandauModel(int dim, double a, double b) : dim_(dim), a_(a), b_(b) {}
  int dim() const override { return dim_; }

  void evaluate(const Vec& x, int max_order, Derivatives& out) const override {
    const double r2 = x.squaredNorm();
    out.value = a_ * r2 * r2 - b_ * r2 + b_ * b_ / (4.0 * a_);
    const double radial = 4.0 * a_ * r2 - 2.0 * b_;
    if (max_order >= 1) out.grad = radial * x;
    if (max_order >= 2) {
      out.hess = radial * Mat::Identity(dim_, dim_);
      out.hess.noalias() += 8.0 * a_ * x * x.transpose();
    }
    if (max_order >= 3) {
      out.third.resize(dim_);
      const double c = 8.0 * a_;
      for (int i = 0; i < dim_; ++i)
        for (int j = 0; j < dim_; ++j)
          for (int k = 0; k < dim_; ++k) {
            double v = 0.0;
            if (j == k) v += x(i);
            if (i == k) v += x(j);
            if (i == j) v += x(k);
            out.third(i, j, k) = c * v;
          }
    }
  }

 private:
  int dim_;
  double a_;
  double b_;
};

void require_dim(int dim, int max_dim) {
  if (dim < 1 || dim > max_dim)
    throw ConfigError("potential dimension must be in [1, " + std::to_string(max_dim) + "]");
}

double min_eigenvalue(const Mat& h) {
  if (h.rows() == 1) return h(0, 0);
  Eigen::SelfAdjointEigenSolver<Mat> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double operator_norm(const Mat& h) {
  if (h.rows() == 1) return std::abs(h(0, 0));
  Eigen::SelfAdjointEigenSolver<Mat> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

Potential::Potential(std::string name, std::shared_ptr<const PotentialModel> model,
                     PotentialConstants constants)
    : name_(std::move(name)), model_(std::move(model)), constants_(constants) {}

Potential Potential::with_constants(const PotentialConstants& c) const {
  return Potential(name_, model_, c);
}

double Potential::u(const Vec& x) const {
  Derivatives d;
  model_->evaluate(x, 0, d);
  return d.value;
}

Vec Potential::grad(const Vec& x) const {
  Derivatives d;
  model_->evaluate(x, 1, d);
  return d.grad;
}

Mat Potential::hess(const Vec& x) const {
  Derivatives d;
  model_->evaluate(x, 2, d);
  return d.hess;
}

Tensor3 Potential::third(const Vec& x) const {
  Derivatives d;
  model_->evaluate(x, 3, d);
  return d.third;
}

Potential make_gaussian(int dim, double kappa) {
  require_dim(dim, kMaxDim);
  if (!(kappa > 0.0)) throw ConfigError("gaussian: kappa must be positive");
  PotentialConstants c;
  c.m = kappa;
  c.big_m = kappa;
  c.r_conf = 1.0;
  c.ell = 1.0;
  c.neg_curvature = 0.0;
  return Potential("gaussian", std::make_shared<GaussianModel>(dim, kappa), c);
}

Potential make_ginzburg_landau(int dim, double a, double b) {
  // Dense third-derivative tensors are only needed (and tested) in low dimension.
  require_dim(dim, 3);
  if (!(a > 0.0)) throw ConfigError("ginzburg_landau: a must be positive");
  if (!(b >= 0.0)) throw ConfigError("ginzburg_landau: b must be nonnegative");
  // Hess U has radial eigenvalue 12 a r^2 - 2b and tangential ones 4 a r^2 - 2b.
  PotentialConstants c;
  c.ell = 3.0;
  if (b > 0.0) {
    c.r_conf = std::sqrt(b / a);
    c.m = dim == 1 ? 10.0 * b : 2.0 * b;
    c.big_m = 10.0 * b;
    c.neg_curvature = 2.0 * b;
  } else {
    c.r_conf = 1.0;
    c.m = dim == 1 ? 12.0 * a : 4.0 * a;
    c.big_m = 12.0 * a;
    c.neg_curvature = 0.0;
  }
  return Potential("ginzburg_landau", std::make_shared<GinzburgLandauModel>(dim, a, b), c);
}

Potential make_potential(const std::string& id, int dim, double kappa, double a, double b) {
  if (id == "gaussian") return make_gaussian(dim, kappa);
  if (id == "ginzburg_landau" || id == "double_well") return make_ginzburg_landau(dim, a, b);
  throw ConfigError("unknown potential id '" + id + "'");
}

bool AssumptionReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

const AssumptionCheck& AssumptionReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return c;
  throw InputError("no assumption check named '" + name + "'");
}

AssumptionReport check_assumptions(const Potential& p, std::size_t n_samples,
                                   std::uint64_t rng_seed) {
  if (n_samples == 0) throw ConfigError("check_assumptions: n_samples must be >= 1");
  const auto& c = p.constants();
  const int dim = p.dim();
  constexpr double kRelTol = 1e-10;

  AssumptionCheck convex;
  convex.name = "far_field_convexity";
  AssumptionCheck inner;
  inner.name = "inner_hessian_bound";
  AssumptionCheck lower;
  lower.name = "lower_curvature_bound";
  AssumptionCheck nonneg;
  nonneg.name = "nonnegativity";
  for (auto* chk : {&convex, &inner, &lower, &nonneg}) {
    chk->worst_margin = std::numeric_limits<double>::infinity();
    chk->worst_point = Vec::Zero(dim);
  }
  auto record = [](AssumptionCheck& chk, double margin, const Vec& x) {
    ++chk.n_checked;
    if (margin < chk.worst_margin) {
      chk.worst_margin = margin;
      chk.worst_point = x;
    }
  };

  CounterRng rng(rng_seed, 0, 0, StreamPurpose::kAuxiliary);
  Derivatives d;
  for (std::size_t s = 0; s < n_samples; ++s) {
    Vec dir = rng.normal_vec(dim, 1.0);
    const double nrm = dir.norm();
    if (nrm == 0.0) continue;
    const double radius = 3.0 * c.r_conf * rng.uniform();
    const Vec x = (radius / nrm) * dir;
    p.evaluate(x, 2, d);
    const double lam_min = min_eigenvalue(d.hess);
    if (radius >= c.r_conf) record(convex, lam_min - c.m * (1.0 - kRelTol), x);
    if (radius <= c.r_conf) record(inner, c.big_m * (1.0 + kRelTol) - operator_norm(d.hess), x);
    record(lower, lam_min + c.neg_curvature + kRelTol * (1.0 + c.neg_curvature), x);
    record(nonneg, d.value + 1e-12, x);
  }

  AssumptionReport report;
  for (auto* chk : {&convex, &inner, &lower, &nonneg}) {
    if (chk->n_checked == 0) chk->worst_margin = 0.0;
    chk->passed = chk->worst_margin >= 0.0;
    report.checks.push_back(*chk);
  }
  return report;
}

}  // namespace ilmc
