#pragma once

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "volsamp/measure_model.hpp"
#include "volsamp/orthogonalize.hpp"
#include "volsamp/schmidt.hpp"

namespace volsamp {

/// det G in the log domain. is_zero marks a numerically singular Gram.
struct GramVolume {
  double log_value = -std::numeric_limits<double>::infinity();
  bool is_zero = true;

  double value() const { return is_zero ? 0.0 : std::exp(log_value); }

  static GramVolume zero() { return {}; }
  static GramVolume from_log(double log_value) { return {log_value, false}; }
};

inline constexpr double kPivotTolerance = 1e-12;

namespace detail {

inline bool has_repeats(std::span<const std::size_t> indices) {
  std::vector<std::size_t> sorted(indices.begin(), indices.end());
  std::sort(sorted.begin(), sorted.end());
  return std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end();
}

// Log-determinant by diagonally pivoted Cholesky. A pivot at or below
// kPivotTolerance * (largest diagonal entry) makes the volume exactly zero.
inline GramVolume pivoted_log_det(Matrix work) {
  const Eigen::Index k = work.rows();
  if (k == 0) return GramVolume::from_log(0.0);
  const double largest = work.diagonal().maxCoeff();
  if (!(largest > 0.0)) return GramVolume::zero();
  const double threshold = kPivotTolerance * largest;

  double log_det = 0.0;
  for (Eigen::Index step = 0; step < k; ++step) {
    Eigen::Index p = 0;
    const double pivot = work.diagonal().tail(k - step).maxCoeff(&p);
    p += step;
    if (!(pivot > threshold)) return GramVolume::zero();
    log_det += std::log(pivot);
    if (p != step) {
      work.row(step).swap(work.row(p));
      work.col(step).swap(work.col(p));
    }
    const Eigen::Index rest = k - step - 1;
    if (rest == 0) break;
    const Vector l = work.col(step).tail(rest) / pivot;
    work.bottomRightCorner(rest, rest).noalias() -= pivot * l * l.transpose();
  }
  return GramVolume::from_log(log_det);
}

// Volume of a sub-Gram taken from a precomputed full Gram matrix.
inline GramVolume log_det_subgram(const Matrix& full_gram, std::span<const std::size_t> indices) {
  if (has_repeats(indices)) return GramVolume::zero();
  const auto k = static_cast<Eigen::Index>(indices.size());
  Matrix sub(k, k);
  for (Eigen::Index a = 0; a < k; ++a)
    for (Eigen::Index b = 0; b < k; ++b)
      sub(a, b) = full_gram(static_cast<Eigen::Index>(indices[static_cast<std::size_t>(a)]),
                            static_cast<Eigen::Index>(indices[static_cast<std::size_t>(b)]));
  return pivoted_log_det(std::move(sub));
}

}  // namespace detail

/**
 * log det G for the selected columns. A repeated index gives an exact zero
 * volume (identical rows in the Gram).
 */
inline GramVolume log_det_gram(const DiscretizedFunction& f, std::span<const std::size_t> indices) {
  check_indices(f, indices);
  if (detail::has_repeats(indices)) return GramVolume::zero();
  return detail::pivoted_log_det(gram_matrix(f, indices).entries());
}

/**
 * Elementary symmetric polynomials e_0..e_K of a list of nonnegative values.
 *
 * The recurrence runs on values divided by `scale` (the largest input), so
 * scaled(k) = e_k / scale^k stays representable; values(k) undoes the scaling.
 */
struct SymmetricPolynomials {
  Vector values;
  Vector scaled;
  double scale = 1.0;

  std::size_t max_degree() const noexcept { return static_cast<std::size_t>(values.size()) - 1; }
  double operator[](std::size_t k) const { return values(static_cast<Eigen::Index>(k)); }
};

inline SymmetricPolynomials elementary_symmetric(std::span<const double> sigma_squared,
                                                 std::size_t max_degree) {
  double scale = 0.0;
  for (double s : sigma_squared) {
    if (!(s >= 0.0) || !std::isfinite(s))
      throw Error(ErrorCode::InvalidArgument, "elementary_symmetric expects nonnegative finite values");
    scale = std::max(scale, s);
  }
  if (scale == 0.0) scale = 1.0;

  const auto K = static_cast<Eigen::Index>(max_degree);
  SymmetricPolynomials out;
  out.scale = scale;
  out.scaled = Vector::Zero(K + 1);
  out.scaled(0) = 1.0;
  Eigen::Index seen = 0;
  for (double s : sigma_squared) {
    const double lambda = s / scale;
    ++seen;
    for (Eigen::Index k = std::min(K, seen); k >= 1; --k) out.scaled(k) += lambda * out.scaled(k - 1);
  }
  out.values.resize(K + 1);
  for (Eigen::Index k = 0; k <= K; ++k)
    out.values(k) = out.scaled(k) * std::pow(scale, static_cast<double>(k));
  return out;
}

inline SymmetricPolynomials elementary_symmetric(const Vector& sigma_squared, std::size_t max_degree) {
  return elementary_symmetric(std::span<const double>(sigma_squared.data(),
                                                      static_cast<std::size_t>(sigma_squared.size())),
                              max_degree);
}

inline double factorial(std::size_t k) {
  double out = 1.0;
  for (std::size_t i = 2; i <= k; ++i) out *= static_cast<double>(i);
  return out;
}

/// Integral of det G^(k) over the k-fold product measure: k! e_k(sigma^2).
inline double expected_volume(const SchmidtDecomposition& d, std::size_t k) {
  if (k > d.rank()) return 0.0;
  return factorial(k) * elementary_symmetric(d.sigma_squared(), k)[k];
}

/**
 * ||f(y_j) - Pi_S f(y_j)||^2, i.e. det G(S + j) / det G(S).
 *
 * Uses the Schur complement ||f(y_j)||^2 - w^T G^{-1} w when G(S) is
 * nonsingular, otherwise an explicit orthogonal projection onto span S.
 */
inline double residual_volume(const DiscretizedFunction& f, std::span<const std::size_t> indices,
                              std::size_t j) {
  check_indices(f, indices);
  check_indices(f, std::span<const std::size_t>(&j, 1));
  if (std::find(indices.begin(), indices.end(), j) != indices.end()) return 0.0;

  const auto a = f.column(j);
  if (indices.empty()) return a.squaredNorm();

  const GramVolume vol = log_det_gram(f, indices);
  if (vol.is_zero) {
    const Matrix basis = orthonormal_span(f.values(), indices);
    return residual_norm_squared(basis, a);
  }

  const auto k = static_cast<Eigen::Index>(indices.size());
  Matrix cols(a.size(), k);
  for (Eigen::Index c = 0; c < k; ++c) cols.col(c) = f.column(indices[static_cast<std::size_t>(c)]);
  const Matrix gram = cols.transpose() * cols;
  const Vector cross = cols.transpose() * a;
  const Eigen::LLT<Matrix> llt(gram);
  const double projected = cross.dot(llt.solve(cross));
  return std::max(0.0, a.squaredNorm() - projected);
}

/**
 * E ||f - Pi_y f||^2 under volume sampling of k points, in closed form
 * (k+1) e_{k+1}(sigma^2) / e_k(sigma^2). Requires 1 <= k <= rank.
 */
inline double expected_projection_error(const SchmidtDecomposition& d, std::size_t k) {
  if (k > d.rank())
    throw Error(ErrorCode::RankDeficient, "volume sampling of " + std::to_string(k) +
                                              " points needs rank >= k, rank is " +
                                              std::to_string(d.rank()));
  const SymmetricPolynomials e = elementary_symmetric(d.sigma_squared(), k + 1);
  const auto kk = static_cast<Eigen::Index>(k);
  return static_cast<double>(k + 1) * e.scale * e.scaled(kk + 1) / e.scaled(kk);
}

}  // namespace volsamp
