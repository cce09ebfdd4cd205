#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "volsamp/error.hpp"

namespace volsamp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using IndexList = std::vector<std::size_t>;

/**
 * A function f on a finite discrete measure space {y_1, ..., y_n} with values
 * in R^m. Column j of values() is f(y_j); weights()(j) is the measure of the
 * atom y_j. Immutable after construction.
 */
class DiscretizedFunction {
 public:
  DiscretizedFunction(Matrix values, Vector weights)
      : values_(std::move(values)), weights_(std::move(weights)) {
    if (values_.rows() < 1 || values_.cols() < 1)
      throw Error(ErrorCode::ShapeMismatch, "values must be at least 1x1");
    if (weights_.size() != values_.cols())
      throw Error(ErrorCode::ShapeMismatch,
                  "expected " + std::to_string(values_.cols()) + " weights, got " +
                      std::to_string(weights_.size()));
    if (!values_.allFinite()) throw Error(ErrorCode::NonFiniteEntry, "values contain NaN or Inf");
    if (!weights_.allFinite()) throw Error(ErrorCode::NonFiniteEntry, "weights contain NaN or Inf");
    for (Eigen::Index j = 0; j < weights_.size(); ++j) {
      if (!(weights_(j) > 0.0))
        throw Error(ErrorCode::NonPositiveWeight,
                    "weight " + std::to_string(j) + " is " + std::to_string(weights_(j)));
    }
  }

  // Uniform unit weights.
  explicit DiscretizedFunction(const Matrix& values)
      : DiscretizedFunction(values, Vector::Ones(values.cols())) {}

  const Matrix& values() const noexcept { return values_; }
  const Vector& weights() const noexcept { return weights_; }

  std::size_t dimension() const noexcept { return static_cast<std::size_t>(values_.rows()); }
  std::size_t num_points() const noexcept { return static_cast<std::size_t>(values_.cols()); }
  double total_weight() const { return weights_.sum(); }

  auto column(std::size_t j) const { return values_.col(static_cast<Eigen::Index>(j)); }
  double weight(std::size_t j) const { return weights_(static_cast<Eigen::Index>(j)); }

  // Columns scaled by sqrt(w_j); the singular values of f are those of this matrix.
  Matrix weighted_values() const { return values_ * weights_.cwiseSqrt().asDiagonal(); }

 private:
  Matrix values_;
  Vector weights_;
};

inline DiscretizedFunction new_discretized_function(Matrix values, Vector weights) {
  return DiscretizedFunction(std::move(values), std::move(weights));
}

inline void check_indices(const DiscretizedFunction& f, std::span<const std::size_t> indices) {
  for (std::size_t idx : indices) {
    if (idx >= f.num_points())
      throw Error(ErrorCode::IndexOutOfRange, "index " + std::to_string(idx) + " not in [0, " +
                                                  std::to_string(f.num_points()) + ")");
  }
}

/// Symmetric positive semidefinite matrix of pairwise H inner products.
class GramMatrix {
 public:
  static constexpr double kTolerance = 1e-12;

  GramMatrix(Matrix entries, IndexList source_indices)
      : entries_(std::move(entries)), indices_(std::move(source_indices)) {
    if (entries_.rows() != entries_.cols() ||
        static_cast<std::size_t>(entries_.rows()) != indices_.size())
      throw Error(ErrorCode::ShapeMismatch, "Gram matrix must be k x k for k source indices");
    validate();
  }

  const Matrix& entries() const noexcept { return entries_; }
  const IndexList& source_indices() const noexcept { return indices_; }
  std::size_t size() const noexcept { return indices_.size(); }

 private:
  void validate() const {
    if (entries_.size() == 0) return;
    const double scale = entries_.cwiseAbs().maxCoeff();
    const double tol = kTolerance * scale;
    if ((entries_ - entries_.transpose()).cwiseAbs().maxCoeff() > tol)
      throw Error(ErrorCode::NotPositiveSemidefinite, "Gram matrix is not symmetric");
    // Pivoted outer-product Cholesky; every pivot candidate must stay >= -tol.
    Matrix work = entries_;
    const Eigen::Index k = work.rows();
    for (Eigen::Index step = 0; step < k; ++step) {
      Eigen::Index p = step;
      work.diagonal().tail(k - step).maxCoeff(&p);
      p += step;
      if (work.diagonal().tail(k - step).minCoeff() < -tol)
        throw Error(ErrorCode::NotPositiveSemidefinite, "Gram matrix has a negative pivot");
      const double pivot = work(p, p);
      if (pivot <= tol) break;
      work.row(step).swap(work.row(p));
      work.col(step).swap(work.col(p));
      const Eigen::Index rest = k - step - 1;
      if (rest == 0) break;
      const Vector l = work.col(step).tail(rest) / pivot;
      work.bottomRightCorner(rest, rest).noalias() -= pivot * l * l.transpose();
    }
  }

  Matrix entries_;
  IndexList indices_;
};

// Entry (a, b) is <f(y_{indices[a]}), f(y_{indices[b]})>. Repeated indices are
// allowed. Weights do not enter.
inline GramMatrix gram_matrix(const DiscretizedFunction& f, std::span<const std::size_t> indices) {
  check_indices(f, indices);
  const auto k = static_cast<Eigen::Index>(indices.size());
  Matrix cols(static_cast<Eigen::Index>(f.dimension()), k);
  for (Eigen::Index a = 0; a < k; ++a) cols.col(a) = f.column(indices[static_cast<std::size_t>(a)]);
  Matrix g = cols.transpose() * cols;
  // Exact symmetry regardless of how the product kernel rounds.
  g = (0.5 * (g + g.transpose())).eval();
  return GramMatrix(std::move(g), IndexList(indices.begin(), indices.end()));
}

/// ||f||^2 in L^2(Omega; H), i.e. sum_j w_j ||f(y_j)||^2.
inline double total_l2_norm_squared(const DiscretizedFunction& f) {
  return f.values().colwise().squaredNorm().dot(f.weights());
}

}  // namespace volsamp
