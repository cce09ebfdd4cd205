#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "volsamp/measure_model.hpp"

namespace volsamp {

inline constexpr double kDropTolerance = 1e-12;

/**
 * Orthonormal basis of span{values.col(i) : i in indices} by column-pivoted
 * modified Gram-Schmidt with one reorthogonalization pass.
 *
 * A candidate whose residual norm falls to drop_tol times its original norm or
 * below is treated as dependent and dropped. Zero columns are always dropped.
 */
inline Matrix orthonormal_span(const Matrix& values, std::span<const std::size_t> indices,
                               double drop_tol = kDropTolerance) {
  const auto m = values.rows();
  const auto q = static_cast<Eigen::Index>(indices.size());
  Matrix residual(m, q);
  Vector original(q);
  for (Eigen::Index a = 0; a < q; ++a) {
    residual.col(a) = values.col(static_cast<Eigen::Index>(indices[static_cast<std::size_t>(a)]));
    original(a) = residual.col(a).norm();
  }

  std::vector<bool> live(static_cast<std::size_t>(q), true);
  Matrix basis(m, std::min<Eigen::Index>(m, q));
  Eigen::Index found = 0;

  while (found < basis.cols()) {
    Eigen::Index pick = -1;
    double best = 0.0;
    for (Eigen::Index a = 0; a < q; ++a) {
      if (!live[static_cast<std::size_t>(a)]) continue;
      const double norm = residual.col(a).norm();
      if (norm <= drop_tol * original(a) || norm == 0.0) {
        live[static_cast<std::size_t>(a)] = false;
        continue;
      }
      if (norm > best) {
        best = norm;
        pick = a;
      }
    }
    if (pick < 0) break;

    Vector v = residual.col(pick) / best;
    // Second pass against the accepted basis restores orthogonality lost to cancellation.
    for (Eigen::Index b = 0; b < found; ++b) v -= basis.col(b).dot(v) * basis.col(b);
    const double vn = v.norm();
    live[static_cast<std::size_t>(pick)] = false;
    if (vn == 0.0) continue;
    v /= vn;
    basis.col(found++) = v;

    for (Eigen::Index a = 0; a < q; ++a) {
      if (live[static_cast<std::size_t>(a)]) residual.col(a) -= v.dot(residual.col(a)) * v;
    }
  }
  return basis.leftCols(found);
}

/// ||x - Q Q^T x||^2 computed from the explicit residual vector.
template <typename Derived>
double residual_norm_squared(const Matrix& basis, const Eigen::MatrixBase<Derived>& x) {
  if (basis.cols() == 0) return x.squaredNorm();
  Vector r = x - basis * (basis.transpose() * x);
  r -= basis * (basis.transpose() * r);
  return r.squaredNorm();
}

}  // namespace volsamp
