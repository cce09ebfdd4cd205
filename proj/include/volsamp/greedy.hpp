#pragma once

#include <cstddef>
#include <vector>

#include "volsamp/measure_model.hpp"
#include "volsamp/orthogonalize.hpp"

namespace volsamp {

enum class GreedyScore {
  WeightedResidual,  // w_j * ||r_j||^2
  Volume,            // ||r_j||^2, the factor by which det G grows
};

/**
 * Greedy pivoting on residual columns. Each step picks the column with the
 * largest score (lowest index on ties), projects it out of all remaining
 * residuals and repeats. Stops early once every residual has fallen below
 * kDropTolerance times its column's original norm.
 */
inline IndexList greedy_pivots(const DiscretizedFunction& f, std::size_t k, GreedyScore score) {
  const std::size_t n = f.num_points();
  Matrix residual = f.values();
  const Vector original = residual.colwise().norm().transpose();
  Matrix basis(residual.rows(), static_cast<Eigen::Index>(std::min(k, n)));
  std::vector<bool> taken(n, false);
  IndexList order;

  while (order.size() < std::min(k, n)) {
    std::size_t pick = n;
    double best = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (taken[j]) continue;
      const auto jj = static_cast<Eigen::Index>(j);
      const double norm = residual.col(jj).norm();
      if (norm == 0.0 || norm <= kDropTolerance * original(jj)) continue;
      double s = norm * norm;
      if (score == GreedyScore::WeightedResidual) s *= f.weight(j);
      if (s > best) {
        best = s;
        pick = j;
      }
    }
    if (pick == n) break;

    const auto found = static_cast<Eigen::Index>(order.size());
    Vector q = residual.col(static_cast<Eigen::Index>(pick));
    for (Eigen::Index b = 0; b < found; ++b) q -= basis.col(b).dot(q) * basis.col(b);
    q.normalize();
    basis.col(found) = q;
    taken[pick] = true;
    order.push_back(pick);
    residual -= q * (q.transpose() * residual);
  }
  return order;
}

}  // namespace volsamp
