#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <span>

#include "blockcast/error.hpp"

namespace blockcast {

template <typename Scalar>
struct LineFit {
  Scalar velocity;  // per instance
  Scalar offset;    // value at t = 0
};

// Constant-velocity model y = v t + b, solved through the normal equations
// [t 1]^T [t 1] [v b]^T = [t 1]^T y.
template <typename Scalar>
LineFit<Scalar> fit_constant_velocity(std::span<const Scalar> t, std::span<const Scalar> y) {
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, 2>;
  if (t.size() != y.size()) throw DomainError("fit_constant_velocity: length mismatch");
  if (t.size() < 2) throw DomainError("fit_constant_velocity: fewer than two samples");

  const auto n = static_cast<Eigen::Index>(t.size());
  Mat design(n, 2);
  design.col(0) = Eigen::Map<const Vec>(t.data(), n);
  design.col(1).setOnes();
  const Eigen::Matrix<Scalar, 2, 2> gram = design.transpose() * design;
  // Centred spread of t; zero only when every sample shares one instant.
  const Scalar mean_t = design.col(0).mean();
  const Scalar spread = (design.col(0).array() - mean_t).square().sum();
  if (!(spread > Scalar(0))) throw DomainError("fit_constant_velocity: singular system");

  const Eigen::Matrix<Scalar, 2, 1> rhs = design.transpose() * Eigen::Map<const Vec>(y.data(), n);
  const Eigen::Matrix<Scalar, 2, 1> vb = gram.ldlt().solve(rhs);
  return {vb(0), vb(1)};
}

}  // namespace blockcast
