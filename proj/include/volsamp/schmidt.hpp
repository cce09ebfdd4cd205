#pragma once

#include <Eigen/SVD>

#include <cmath>
#include <cstddef>

#include "volsamp/measure_model.hpp"

namespace volsamp {

/**
 * Schmidt decomposition f(y) = sum_i sigma_i u_i v_i(y) of a discretized
 * function.
 *
 * left_factors (m x r) has Euclidean-orthonormal columns u_i; right_factors
 * (n x r) has columns v_i orthonormal in the weighted inner product
 * <a, b> = sum_j w_j a_j b_j. Singular values are strictly positive and sorted
 * in descending order; values below the relative rank tolerance are dropped.
 */
struct SchmidtDecomposition {
  Vector sigma;
  Matrix left_factors;
  Matrix right_factors;

  std::size_t rank() const noexcept { return static_cast<std::size_t>(sigma.size()); }
  Vector sigma_squared() const { return sigma.array().square().matrix(); }
};

inline constexpr double kDefaultRankTolerance = 1e-12;

/**
 * Computes the Schmidt decomposition via a Jacobi SVD of the matrix whose
 * columns are sqrt(w_j) f(y_j); right factors are recovered by dividing row j
 * by sqrt(w_j).
 *
 * Each u_i is signed so that its entry of largest magnitude is nonnegative
 * (first such row on ties, up to rounding), and v_i is flipped along with it.
 */
inline SchmidtDecomposition schmidt_decompose(const DiscretizedFunction& f,
                                              double rel_tol = kDefaultRankTolerance) {
  if (!(rel_tol > 0.0) || !std::isfinite(rel_tol))
    throw Error(ErrorCode::InvalidArgument, "rank tolerance must be positive and finite");

  const Matrix scaled = f.weighted_values();
  Eigen::JacobiSVD<Matrix> svd(scaled, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success)
    throw Error(ErrorCode::ConvergenceFailure, "Jacobi SVD did not converge");

  const Vector& s = svd.singularValues();
  if (!s.allFinite()) throw Error(ErrorCode::ConvergenceFailure, "SVD produced non-finite values");

  Eigen::Index r = 0;
  if (s.size() > 0 && s(0) > 0.0) {
    const double cutoff = rel_tol * s(0);
    while (r < s.size() && s(r) > cutoff) ++r;
  }

  SchmidtDecomposition d;
  d.sigma = s.head(r);
  d.left_factors = svd.matrixU().leftCols(r);
  d.right_factors = f.weights().cwiseSqrt().cwiseInverse().asDiagonal() * svd.matrixV().leftCols(r);

  for (Eigen::Index i = 0; i < r; ++i) {
    // Magnitudes within a few ulps of the maximum count as tied.
    const double top = d.left_factors.col(i).cwiseAbs().maxCoeff();
    Eigen::Index arg = 0;
    while (std::abs(d.left_factors(arg, i)) < top * (1.0 - 1e-12)) ++arg;
    if (d.left_factors(arg, i) < 0.0) {
      d.left_factors.col(i) *= -1.0;
      d.right_factors.col(i) *= -1.0;
    }
  }
  return d;
}

/// d_k = sqrt(sigma_{k+1}^2 + sigma_{k+2}^2 + ...); zero for k >= rank.
inline double tail_width_squared(const SchmidtDecomposition& d, std::size_t k) {
  if (k >= d.rank()) return 0.0;
  const auto tail = static_cast<Eigen::Index>(d.rank() - k);
  return d.sigma.tail(tail).squaredNorm();
}

inline double tail_width(const SchmidtDecomposition& d, std::size_t k) {
  return std::sqrt(tail_width_squared(d, k));
}

inline std::size_t numerical_rank(const SchmidtDecomposition& d) noexcept { return d.rank(); }

}  // namespace volsamp
