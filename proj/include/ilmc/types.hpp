#pragma once

#include <Eigen/Dense>

#include <array>
#include <cassert>
#include <cstddef>

namespace ilmc {

/// Upper bound on the state dimension. Storage is inline so the hot sampling
/// loops never touch the heap.
inline constexpr int kMaxDim = 8;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

/// Dense symmetric rank-3 tensor, element (i,j,k) at ((i*d)+j)*d+k.
class Tensor3 {
 public:
  Tensor3() = default;
  explicit Tensor3(int dim) { resize(dim); }

  void resize(int dim) {
    assert(dim >= 0 && dim <= kMaxDim);
    dim_ = dim;
    const int n = dim * dim * dim;
    for (int i = 0; i < n; ++i) data_[i] = 0.0;
  }

  int dim() const { return dim_; }

  double& operator()(int i, int j, int k) { return data_[(i * dim_ + j) * dim_ + k]; }
  double operator()(int i, int j, int k) const { return data_[(i * dim_ + j) * dim_ + k]; }

  /// Contraction over the last two indices: out_i = sum_jk T_ijk A_jk.
  Vec contract(const Mat& a) const {
    Vec out = Vec::Zero(dim_);
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j)
        for (int k = 0; k < dim_; ++k) out(i) += (*this)(i, j, k) * a(j, k);
    return out;
  }

 private:
  int dim_ = 0;
  std::array<double, kMaxDim * kMaxDim * kMaxDim> data_;
};

inline Vec make_vec(std::initializer_list<double> values) {
  Vec v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

inline Vec scalar_vec(double x) {
  Vec v(1);
  v(0) = x;
  return v;
}

}  // namespace ilmc
