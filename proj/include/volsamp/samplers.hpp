#pragma once

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "volsamp/combinatorics.hpp"
#include "volsamp/greedy.hpp"
#include "volsamp/random.hpp"
#include "volsamp/schmidt.hpp"
#include "volsamp/volumes.hpp"

namespace volsamp {

// Volume sampling of k-subsets S of {0..n-1} with P(S) proportional to
// det G_S * prod_{j in S} w_j. Ordered tuples with a repeated index have zero
// density and the k! orderings of a subset share its mass, so subsets are
// sampled directly.

enum class SamplingMethod { Enumerate, Kdpp, Mcmc };

constexpr std::string_view to_string(SamplingMethod m) noexcept {
  switch (m) {
    case SamplingMethod::Enumerate: return "enumerate";
    case SamplingMethod::Kdpp: return "kdpp";
    case SamplingMethod::Mcmc: return "mcmc";
  }
  return "unknown";
}

inline SamplingMethod parse_sampling_method(std::string_view name) {
  if (name == "enumerate") return SamplingMethod::Enumerate;
  if (name == "kdpp") return SamplingMethod::Kdpp;
  if (name == "mcmc") return SamplingMethod::Mcmc;
  throw Error(ErrorCode::InvalidArgument, "unknown sampling method '" + std::string(name) + "'");
}

inline constexpr std::size_t kDefaultEnumerationLimit = 1'000'000;

struct SamplerConfig {
  std::uint64_t seed = 0;
  SamplingMethod method = SamplingMethod::Kdpp;
  std::optional<std::size_t> mcmc_steps;  // default 50 * n * k
  std::size_t max_enumeration = kDefaultEnumerationLimit;

  std::size_t resolved_mcmc_steps(std::size_t n, std::size_t k) const {
    const std::size_t steps = mcmc_steps.value_or(50 * n * k);
    if (method == SamplingMethod::Mcmc && steps < n * k)
      throw Error(ErrorCode::InvalidArgument, "mcmc_steps must be at least n * k = " +
                                                  std::to_string(n * k));
    return steps;
  }

  // 20% of the chain is discarded as burn-in.
  static std::size_t burn_in(std::size_t steps) noexcept { return steps / 5; }
};

struct SubsetDistribution {
  std::vector<IndexList> subsets;  // lexicographic order
  std::vector<double> probabilities;

  std::size_t size() const noexcept { return subsets.size(); }

  double probability_of(const IndexList& subset) const {
    IndexList key = subset;
    std::sort(key.begin(), key.end());
    const auto it = std::lower_bound(subsets.begin(), subsets.end(), key);
    if (it == subsets.end() || *it != key) return 0.0;
    return probabilities[static_cast<std::size_t>(it - subsets.begin())];
  }
};

namespace detail {

inline Matrix full_gram(const DiscretizedFunction& f) {
  Matrix g = f.values().transpose() * f.values();
  return 0.5 * (g + g.transpose());
}

inline void require_rank(std::size_t rank, std::size_t k) {
  if (rank < k)
    throw Error(ErrorCode::RankDeficient, "volume sampling of " + std::to_string(k) +
                                              " points needs rank >= k, rank is " +
                                              std::to_string(rank));
}

inline void require_enumerable(std::size_t n, std::size_t k, std::size_t limit) {
  const double count = binomial(n, k);
  if (count > static_cast<double>(limit))
    throw Error(ErrorCode::CombinatorialBlowup,
                "C(" + std::to_string(n) + ", " + std::to_string(k) + ") exceeds enumeration limit " +
                    std::to_string(limit));
}

}  // namespace detail

/**
 * Exact volume-sampling distribution over all C(n, k) subsets, normalized in
 * the log domain. Subsets with dependent columns get probability exactly 0.
 */
inline SubsetDistribution enumerate_distribution(const DiscretizedFunction& f, std::size_t k,
                                                 std::size_t max_subsets = kDefaultEnumerationLimit) {
  const std::size_t n = f.num_points();
  if (k > n) detail::require_rank(std::min(n, f.dimension()), k);
  detail::require_enumerable(n, k, max_subsets);
  detail::require_rank(schmidt_decompose(f).rank(), k);

  const Matrix gram = detail::full_gram(f);
  const Vector log_w = f.weights().array().log().matrix();

  SubsetDistribution dist;
  std::vector<double> log_mass;
  double peak = -std::numeric_limits<double>::infinity();
  for_each_subset(n, k, [&](const IndexList& s) {
    const GramVolume vol = detail::log_det_subgram(gram, s);
    double lm = -std::numeric_limits<double>::infinity();
    if (!vol.is_zero) {
      lm = vol.log_value;
      for (std::size_t j : s) lm += log_w(static_cast<Eigen::Index>(j));
      peak = std::max(peak, lm);
    }
    dist.subsets.push_back(s);
    log_mass.push_back(lm);
  });
  if (!std::isfinite(peak)) detail::require_rank(0, k);

  double total = 0.0;
  dist.probabilities.resize(log_mass.size());
  for (std::size_t i = 0; i < log_mass.size(); ++i) {
    dist.probabilities[i] = std::isfinite(log_mass[i]) ? std::exp(log_mass[i] - peak) : 0.0;
    total += dist.probabilities[i];
  }
  for (double& p : dist.probabilities) p /= total;
  return dist;
}

/// Inverse-CDF draw from an enumerated distribution.
inline IndexList sample_from(const SubsetDistribution& dist, CounterRng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (dist.probabilities[i] <= 0.0) continue;
    last_positive = i;
    acc += dist.probabilities[i];
    if (u < acc) return dist.subsets[i];
  }
  return dist.subsets[last_positive];
}

/**
 * Exact spectral k-DPP draw for the kernel L = B^T B, B = [sqrt(w_j) f(y_j)].
 *
 * The nonzero eigenpairs of L are (sigma_i^2, sqrt(w) .* v_i). Eigenvectors
 * are first selected with elementary-symmetric-polynomial probabilities, then
 * k indices are drawn one at a time from the projection DPP they span.
 */
inline IndexList sample_kdpp(const SchmidtDecomposition& d, const DiscretizedFunction& f,
                             std::size_t k, CounterRng& rng) {
  const std::size_t r = d.rank();
  detail::require_rank(r, k);
  if (k == 0) return {};
  const auto n = static_cast<Eigen::Index>(f.num_points());
  const auto rr = static_cast<Eigen::Index>(r);
  const auto kk = static_cast<Eigen::Index>(k);

  const double top = d.sigma(0) * d.sigma(0);
  // esp(l, i): e_l of the first i rescaled eigenvalues.
  Matrix esp = Matrix::Zero(kk + 1, rr + 1);
  esp.row(0).setOnes();
  for (Eigen::Index i = 1; i <= rr; ++i) {
    const double lambda = d.sigma(i - 1) * d.sigma(i - 1) / top;
    for (Eigen::Index l = 1; l <= std::min(kk, i); ++l)
      esp(l, i) = esp(l, i - 1) + lambda * esp(l - 1, i - 1);
  }

  std::vector<Eigen::Index> chosen;
  Eigen::Index remaining = kk;
  for (Eigen::Index i = rr; i >= 1 && remaining > 0; --i) {
    if (i == remaining) {
      chosen.push_back(i - 1);
      --remaining;
      continue;
    }
    const double lambda = d.sigma(i - 1) * d.sigma(i - 1) / top;
    const double p = lambda * esp(remaining - 1, i - 1) / esp(remaining, i);
    if (rng.uniform() < p) {
      chosen.push_back(i - 1);
      --remaining;
    }
  }

  const Vector sqrt_w = f.weights().cwiseSqrt();
  Matrix basis(n, kk);
  for (Eigen::Index c = 0; c < kk; ++c)
    basis.col(c) = sqrt_w.cwiseProduct(d.right_factors.col(chosen[static_cast<std::size_t>(c)]));

  IndexList out;
  out.reserve(k);
  while (basis.cols() > 0) {
    const Vector mass = basis.rowwise().squaredNorm();
    const double total = mass.sum();
    const double u = rng.uniform() * total;
    double acc = 0.0;
    Eigen::Index pick = -1;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (mass(j) <= 0.0) continue;
      pick = j;
      acc += mass(j);
      if (u < acc) break;
    }
    out.push_back(static_cast<std::size_t>(pick));

    // Restrict the span to vectors vanishing at `pick`, then re-orthonormalize.
    Eigen::Index col = 0;
    basis.row(pick).cwiseAbs().maxCoeff(&col);
    const Vector pivot = basis.col(col) / basis(pick, col);
    const Eigen::Index last = basis.cols() - 1;
    if (col != last) basis.col(col) = basis.col(last);
    basis.conservativeResize(Eigen::NoChange, last);
    if (last == 0) break;
    basis -= pivot * basis.row(pick);
    basis.row(pick).setZero();
    Eigen::HouseholderQR<Matrix> qr(basis);
    basis = qr.householderQ() * Matrix::Identity(n, last);
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Probability of accepting a Metropolis move from `current` to `proposed`.
inline double mcmc_acceptance_probability(const DiscretizedFunction& f,
                                          std::span<const std::size_t> current,
                                          std::span<const std::size_t> proposed) {
  auto log_target = [&](std::span<const std::size_t> s) {
    const GramVolume v = log_det_gram(f, s);
    if (v.is_zero) return -std::numeric_limits<double>::infinity();
    double lt = v.log_value;
    for (std::size_t j : s) lt += std::log(f.weight(j));
    return lt;
  };
  const double to = log_target(proposed);
  const double from = log_target(current);
  if (!std::isfinite(from)) return 1.0;
  if (!std::isfinite(to)) return 0.0;
  return std::exp(std::min(0.0, to - from));
}

/**
 * Metropolis chain on k-subsets: propose swapping a uniformly chosen member
 * for a uniformly chosen non-member, accept with min(1, target ratio) where
 * the ratio is formed from log volumes.
 */
class McmcChain {
 public:
  McmcChain(const DiscretizedFunction& f, IndexList start, CounterRng rng)
      : gram_(detail::full_gram(f)),
        log_w_(f.weights().array().log().matrix()),
        in_(std::move(start)),
        rng_(rng) {
    std::vector<bool> member(f.num_points(), false);
    for (std::size_t j : in_) member[j] = true;
    for (std::size_t j = 0; j < f.num_points(); ++j)
      if (!member[j]) out_.push_back(j);
    log_target_ = log_target(in_);
    if (!std::isfinite(log_target_))
      throw Error(ErrorCode::NoNonzeroStart, "initial subset has zero volume");
  }

  void step() {
    if (in_.empty() || out_.empty()) return;
    const auto p = static_cast<std::size_t>(rng_.below(in_.size()));
    const auto q = static_cast<std::size_t>(rng_.below(out_.size()));
    std::swap(in_[p], out_[q]);
    const double proposed = log_target(in_);
    const double u = rng_.uniform();
    if (std::isfinite(proposed) && std::log(u) < proposed - log_target_) {
      log_target_ = proposed;
      ++accepted_;
    } else {
      std::swap(in_[p], out_[q]);
    }
  }

  IndexList state() const {
    IndexList s = in_;
    std::sort(s.begin(), s.end());
    return s;
  }

  std::size_t accepted() const noexcept { return accepted_; }

 private:
  double log_target(std::span<const std::size_t> s) const {
    const GramVolume v = detail::log_det_subgram(gram_, s);
    if (v.is_zero) return -std::numeric_limits<double>::infinity();
    double lt = v.log_value;
    for (std::size_t j : s) lt += log_w_(static_cast<Eigen::Index>(j));
    return lt;
  }

  Matrix gram_;
  Vector log_w_;
  IndexList in_;
  IndexList out_;
  CounterRng rng_;
  double log_target_ = 0.0;
  std::size_t accepted_ = 0;
};

namespace detail {

// Greedy max-volume start for the chain.
inline IndexList mcmc_start(const DiscretizedFunction& f, std::size_t k) {
  IndexList start = greedy_pivots(f, k, GreedyScore::Volume);
  if (start.size() < k) {
    require_rank(schmidt_decompose(f).rank(), k);
    throw Error(ErrorCode::NoNonzeroStart, "greedy search found no subset with nonzero volume");
  }
  std::sort(start.begin(), start.end());
  return start;
}

}  // namespace detail

/// Visited states after burn-in of one chain of config.mcmc_steps steps.
inline std::vector<IndexList> mcmc_trace(const DiscretizedFunction& f, std::size_t k,
                                         const SamplerConfig& config, std::uint64_t stream = 0) {
  const std::size_t steps = config.resolved_mcmc_steps(f.num_points(), k);
  McmcChain chain(f, detail::mcmc_start(f, k), CounterRng(config.seed, stream));
  std::vector<IndexList> trace;
  trace.reserve(steps - SamplerConfig::burn_in(steps));
  for (std::size_t s = 0; s < steps; ++s) {
    chain.step();
    if (s >= SamplerConfig::burn_in(steps)) trace.push_back(chain.state());
  }
  return trace;
}

/**
 * Draws reproducible volume samples. Draw t always uses RNG substream t of the
 * configured seed, so the t-th draw does not depend on which draws came before.
 * Holds mutable state (the draw counter); use one instance per thread.
 */
class VolumeSampler {
 public:
  VolumeSampler(const DiscretizedFunction& f, std::size_t k, SamplerConfig config)
      : f_(f), k_(k), config_(config) {
    switch (config_.method) {
      case SamplingMethod::Enumerate:
        distribution_ = enumerate_distribution(f_, k_, config_.max_enumeration);
        break;
      case SamplingMethod::Kdpp:
        decomposition_ = schmidt_decompose(f_);
        detail::require_rank(decomposition_->rank(), k_);
        break;
      case SamplingMethod::Mcmc:
        steps_ = config_.resolved_mcmc_steps(f_.num_points(), k_);
        start_ = detail::mcmc_start(f_, k_);
        break;
    }
  }

  IndexList draw(std::uint64_t index) const {
    CounterRng rng(config_.seed, index);
    switch (config_.method) {
      case SamplingMethod::Enumerate:
        return sample_from(*distribution_, rng);
      case SamplingMethod::Kdpp:
        return sample_kdpp(*decomposition_, f_, k_, rng);
      case SamplingMethod::Mcmc: {
        McmcChain chain(f_, start_, rng);
        for (std::size_t s = 0; s < steps_; ++s) chain.step();
        return chain.state();
      }
    }
    return {};
  }

  IndexList next() { return draw(counter_++); }

  const SamplerConfig& config() const noexcept { return config_; }
  std::size_t subset_size() const noexcept { return k_; }

 private:
  DiscretizedFunction f_;
  std::size_t k_;
  SamplerConfig config_;
  std::optional<SubsetDistribution> distribution_;
  std::optional<SchmidtDecomposition> decomposition_;
  IndexList start_;
  std::size_t steps_ = 0;
  std::uint64_t counter_ = 0;
};

inline IndexList sample_kdpp(const SchmidtDecomposition& d, const DiscretizedFunction& f,
                             std::size_t k, const SamplerConfig& config, std::uint64_t draw = 0) {
  CounterRng rng(config.seed, draw);
  return sample_kdpp(d, f, k, rng);
}

inline IndexList sample_mcmc(const DiscretizedFunction& f, std::size_t k, const SamplerConfig& config,
                             std::uint64_t draw = 0) {
  SamplerConfig c = config;
  c.method = SamplingMethod::Mcmc;
  return VolumeSampler(f, k, c).draw(draw);
}

}  // namespace volsamp
