#pragma once

#include <Eigen/Cholesky>

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "volsamp/combinatorics.hpp"
#include "volsamp/greedy.hpp"
#include "volsamp/orthogonalize.hpp"
#include "volsamp/random.hpp"
#include "volsamp/samplers.hpp"
#include "volsamp/schmidt.hpp"
#include "volsamp/volumes.hpp"

namespace volsamp {

enum class Strategy { Exhaustive, VolumeBestOf, GreedyResidual, GreedyVolume };

constexpr std::string_view to_string(Strategy s) noexcept {
  switch (s) {
    case Strategy::Exhaustive: return "exhaustive";
    case Strategy::VolumeBestOf: return "volume-best-of";
    case Strategy::GreedyResidual: return "greedy-residual";
    case Strategy::GreedyVolume: return "greedy-volume";
  }
  return "unknown";
}

inline Strategy parse_strategy(std::string_view name) {
  if (name == "exhaustive") return Strategy::Exhaustive;
  if (name == "volume-best-of") return Strategy::VolumeBestOf;
  if (name == "greedy-residual") return Strategy::GreedyResidual;
  if (name == "greedy-volume") return Strategy::GreedyVolume;
  throw Error(ErrorCode::UnknownStrategy, "unknown strategy '" + std::string(name) + "'");
}

struct SelectionResult {
  IndexList indices;
  double squared_error = 0.0;
  std::string method;
  std::size_t draws_used = 0;
  // Set when rank(f) < k and the volume sample was topped up with uniform draws.
  bool padded = false;
};

/**
 * ||f - Pi_S f||^2 in L^2(Omega; H) = sum_j w_j ||f(y_j) - Pi_S f(y_j)||^2,
 * with Pi_S the orthogonal projector onto span{f(y_i) : i in S}. Dependent
 * selections are fine: the span is built by pivoted orthogonalization.
 */
inline double projection_error(const DiscretizedFunction& f, std::span<const std::size_t> indices) {
  check_indices(f, indices);
  const Matrix basis = orthonormal_span(f.values(), indices);
  double total = 0.0;
  for (std::size_t j = 0; j < f.num_points(); ++j)
    total += f.weight(j) * residual_norm_squared(basis, f.column(j));
  return total;
}

/// Same quantity through Schur complements; nullopt when G_S is singular.
inline std::optional<double> projection_error_schur(const DiscretizedFunction& f,
                                                    std::span<const std::size_t> indices) {
  check_indices(f, indices);
  if (log_det_gram(f, indices).is_zero) return std::nullopt;
  const auto k = static_cast<Eigen::Index>(indices.size());
  Matrix cols(static_cast<Eigen::Index>(f.dimension()), k);
  for (Eigen::Index c = 0; c < k; ++c) cols.col(c) = f.column(indices[static_cast<std::size_t>(c)]);
  const Eigen::LLT<Matrix> llt(cols.transpose() * cols);
  const Matrix cross = cols.transpose() * f.values();
  const Matrix solved = llt.solve(cross);
  double total = 0.0;
  for (Eigen::Index j = 0; j < cross.cols(); ++j) {
    const double residual = f.values().col(j).squaredNorm() - cross.col(j).dot(solved.col(j));
    total += f.weights()(j) * std::max(0.0, residual);
  }
  return total;
}

/// Minimum projection error over all k-subsets; ties go to the lexicographically first.
inline SelectionResult select_exhaustive(const DiscretizedFunction& f, std::size_t k,
                                         std::size_t max_subsets = kDefaultEnumerationLimit) {
  const std::size_t n = f.num_points();
  k = std::min(k, n);
  detail::require_enumerable(n, k, max_subsets);
  SelectionResult best;
  best.method = std::string(to_string(Strategy::Exhaustive));
  best.squared_error = std::numeric_limits<double>::infinity();
  for_each_subset(n, k, [&](const IndexList& s) {
    const double err = projection_error(f, s);
    ++best.draws_used;
    if (err < best.squared_error) {
      best.squared_error = err;
      best.indices = s;
    }
  });
  return best;
}

/**
 * Best of T volume samples. When rank(f) < k, each draw volume-samples rank(f)
 * indices and fills the remaining slots uniformly from the unused indices;
 * adding indices never increases the error, so the result is exact either way.
 */
inline SelectionResult select_volume_best_of(const DiscretizedFunction& f, std::size_t k,
                                             std::size_t draws, const SamplerConfig& config) {
  if (draws < 1) throw Error(ErrorCode::InvalidArgument, "volume-best-of needs at least one draw");
  const std::size_t n = f.num_points();
  k = std::min(k, n);
  const std::size_t rank = schmidt_decompose(f).rank();
  const std::size_t sampled = std::min(k, rank);
  VolumeSampler sampler(f, sampled, config);

  SelectionResult best;
  best.method = std::string(to_string(Strategy::VolumeBestOf));
  best.squared_error = std::numeric_limits<double>::infinity();
  best.padded = sampled < k;
  for (std::size_t t = 0; t < draws; ++t) {
    IndexList s = sampler.draw(t);
    if (s.size() < k) {
      CounterRng pad_rng(detail::mix64(config.seed ^ 0x70616464ULL), t);
      IndexList rest;
      for (std::size_t j = 0; j < n; ++j)
        if (std::find(s.begin(), s.end(), j) == s.end()) rest.push_back(j);
      while (s.size() < k) {
        const auto pick = static_cast<std::size_t>(pad_rng.below(rest.size()));
        s.push_back(rest[pick]);
        rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(pick));
      }
      std::sort(s.begin(), s.end());
    }
    const double err = projection_error(f, s);
    if (err < best.squared_error) {
      best.squared_error = err;
      best.indices = std::move(s);
    }
  }
  best.draws_used = draws;
  return best;
}

namespace detail {

inline SelectionResult greedy_result(const DiscretizedFunction& f, std::size_t k, GreedyScore score,
                                     Strategy label) {
  SelectionResult out;
  out.indices = greedy_pivots(f, k, score);
  out.squared_error = projection_error(f, out.indices);
  out.method = std::string(to_string(label));
  return out;
}

}  // namespace detail

/// Greedy on weighted residuals w_j ||r_j||^2; indices in pick order.
inline SelectionResult select_greedy_residual(const DiscretizedFunction& f, std::size_t k) {
  return detail::greedy_result(f, k, GreedyScore::WeightedResidual, Strategy::GreedyResidual);
}

/// Greedy on incremental volume ||r_j||^2 (weights ignored); indices in pick order.
inline SelectionResult select_greedy_max_volume(const DiscretizedFunction& f, std::size_t k) {
  return detail::greedy_result(f, k, GreedyScore::Volume, Strategy::GreedyVolume);
}

inline SelectionResult run_strategy(const DiscretizedFunction& f, std::size_t k, Strategy strategy,
                                    const SamplerConfig& config, std::size_t draws = 16) {
  switch (strategy) {
    case Strategy::Exhaustive: return select_exhaustive(f, k, config.max_enumeration);
    case Strategy::VolumeBestOf: return select_volume_best_of(f, k, draws, config);
    case Strategy::GreedyResidual: return select_greedy_residual(f, k);
    case Strategy::GreedyVolume: return select_greedy_max_volume(f, k);
  }
  throw Error(ErrorCode::UnknownStrategy, "unhandled strategy");
}

inline constexpr double kCertificateSlack = 1e-12;

/**
 * Check of d_k^2 <= ||f - Pi_S f||^2 <= (k+1) d_k^2 for one selection.
 * prefactor_squared is achieved / optimal, absent when d_k = 0. Comparisons
 * allow kCertificateSlack * ||f||^2 of rounding.
 */
struct BoundCertificate {
  std::size_t k = 0;
  double optimal_tail_squared = 0.0;
  double achieved_squared_error = 0.0;
  std::optional<double> prefactor_squared;
  bool satisfied = false;
  double scale = 0.0;
  SelectionResult selection;

  double bound_squared() const { return static_cast<double>(k + 1) * optimal_tail_squared; }
};

inline BoundCertificate make_certificate(std::size_t k, double optimal_tail_squared,
                                         SelectionResult selection, double scale) {
  BoundCertificate c;
  c.k = k;
  c.optimal_tail_squared = optimal_tail_squared;
  c.achieved_squared_error = selection.squared_error;
  c.scale = scale;
  if (optimal_tail_squared > 0.0) c.prefactor_squared = selection.squared_error / optimal_tail_squared;
  c.satisfied = c.achieved_squared_error <= c.bound_squared() + kCertificateSlack * scale;
  c.selection = std::move(selection);
  return c;
}

inline BoundCertificate certify_bound(const DiscretizedFunction& f, std::size_t k, Strategy strategy,
                                      const SamplerConfig& config, std::size_t draws = 16) {
  const SchmidtDecomposition d = schmidt_decompose(f);
  SelectionResult sel = run_strategy(f, k, strategy, config, draws);
  return make_certificate(k, tail_width_squared(d, k), std::move(sel), total_l2_norm_squared(f));
}

}  // namespace volsamp
