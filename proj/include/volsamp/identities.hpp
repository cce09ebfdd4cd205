#pragma once

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "volsamp/combinatorics.hpp"
#include "volsamp/samplers.hpp"
#include "volsamp/schmidt.hpp"
#include "volsamp/selection.hpp"
#include "volsamp/volumes.hpp"

namespace volsamp {

// Brute-force numerical checks of the volume-sampling identities on a small
// instance. Used by `volsamp verify`.

struct IdentityCheck {
  std::string name;
  std::size_t k = 0;
  bool passed = false;
  bool skipped = false;
  double max_deviation = 0.0;
  double tolerance = 0.0;
  std::size_t evaluations = 0;
  std::string note;
};

struct VerifyOptions {
  std::vector<std::size_t> ks{1, 2, 3};
  double tolerance = 1e-9;
  std::size_t max_enumeration = kDefaultEnumerationLimit;
  // Test hook: relative perturbation applied to G(0,0) of every Gram in the
  // brute-force volume sum. Nonzero values must make verification fail.
  double gram_corruption = 0.0;
};

struct VerifyReport {
  std::vector<IdentityCheck> checks;

  bool all_passed() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const IdentityCheck& c) { return c.passed || c.skipped; });
  }
};

namespace detail {

inline double relative_deviation(double value, double reference, double floor) {
  if (value == reference) return 0.0;
  return std::abs(value - reference) / std::max(std::abs(reference), floor);
}

inline IdentityCheck make_check(std::string name, std::size_t k, double tolerance) {
  IdentityCheck c;
  c.name = std::move(name);
  c.k = k;
  c.tolerance = tolerance;
  return c;
}

inline bool advance_tuple(IndexList& tuple, std::size_t n) {
  for (std::size_t i = tuple.size(); i-- > 0;) {
    if (++tuple[i] < n) return true;
    tuple[i] = 0;
  }
  return false;
}

}  // namespace detail

/**
 * Sum over all ordered k-tuples (repeats included) of prod_i w_{j_i} det G(j_1..j_k),
 * with det taken by LU on the explicit Gram.
 */
inline double brute_force_expected_volume(const DiscretizedFunction& f, std::size_t k,
                                          double gram_corruption = 0.0) {
  const std::size_t n = f.num_points();
  const Matrix gram = detail::full_gram(f);
  const auto kk = static_cast<Eigen::Index>(k);
  IndexList tuple(k, 0);
  double total = 0.0;
  Matrix sub(kk, kk);
  do {
    double weight = 1.0;
    for (Eigen::Index a = 0; a < kk; ++a) {
      const auto ja = static_cast<Eigen::Index>(tuple[static_cast<std::size_t>(a)]);
      weight *= f.weights()(ja);
      for (Eigen::Index b = 0; b < kk; ++b)
        sub(a, b) = gram(ja, static_cast<Eigen::Index>(tuple[static_cast<std::size_t>(b)]));
    }
    if (kk > 0) sub(0, 0) *= 1.0 + gram_corruption;
    total += weight * (kk > 0 ? sub.determinant() : 1.0);
  } while (detail::advance_tuple(tuple, n));
  return total;
}

inline VerifyReport verify_identities(const DiscretizedFunction& f, const VerifyOptions& options) {
  const SchmidtDecomposition d = schmidt_decompose(f);
  const double norm2 = total_l2_norm_squared(f);
  const std::size_t n = f.num_points();
  const double tol = options.tolerance;
  VerifyReport report;

  for (std::size_t k : options.ks) {
    if (k > n) throw Error(ErrorCode::InvalidArgument, "k = " + std::to_string(k) + " exceeds n");
    if (std::pow(static_cast<double>(n), static_cast<double>(k)) >
        static_cast<double>(options.max_enumeration))
      throw Error(ErrorCode::CombinatorialBlowup,
                  std::to_string(n) + "^" + std::to_string(k) + " tuples exceed the enumeration limit");
    detail::require_enumerable(n, k, options.max_enumeration);
  }

  for (std::size_t k : options.ks) {
    const double scale_k = std::pow(norm2, static_cast<double>(k));

    {
      IdentityCheck c = detail::make_check("expected_volume", k, tol);
      const double brute = brute_force_expected_volume(f, k, options.gram_corruption);
      const double closed = expected_volume(d, k);
      c.max_deviation = detail::relative_deviation(brute, closed, 1e-12 * scale_k);
      c.evaluations = static_cast<std::size_t>(std::pow(static_cast<double>(n), static_cast<double>(k)));
      c.passed = c.max_deviation <= tol;
      report.checks.push_back(c);
    }

    {
      IdentityCheck c = detail::make_check("schur_factorization", k, tol);
      for_each_subset(n, k, [&](const IndexList& s) {
        const GramVolume vs = log_det_gram(f, s);
        for (std::size_t j = 0; j < n; ++j) {
          IndexList ext = s;
          ext.push_back(j);
          const GramVolume ve = log_det_gram(f, ext);
          ++c.evaluations;
          if (vs.is_zero) {
            if (!ve.is_zero) c.max_deviation = std::max(c.max_deviation, 1.0);
            continue;
          }
          const double lhs = ve.value();
          const double rhs = vs.value() * residual_volume(f, s, j);
          const double floor = 1e-12 * vs.value() * f.column(j).squaredNorm();
          if (std::max(lhs, rhs) <= floor) continue;
          c.max_deviation = std::max(c.max_deviation, detail::relative_deviation(lhs, rhs, floor));
        }
      });
      c.passed = c.max_deviation <= tol;
      report.checks.push_back(c);
    }

    {
      IdentityCheck c = detail::make_check("projection_error_paths", k, tol);
      for_each_subset(n, k, [&](const IndexList& s) {
        const auto schur = projection_error_schur(f, s);
        if (!schur) return;
        ++c.evaluations;
        c.max_deviation = std::max(
            c.max_deviation, detail::relative_deviation(projection_error(f, s), *schur, 1e-12 * norm2));
      });
      c.passed = c.max_deviation <= tol;
      report.checks.push_back(c);
    }

    if (k == 0 || k > d.rank()) {
      for (const char* name : {"expected_projection_error", "sandwich_bound"}) {
        IdentityCheck c = detail::make_check(name, k, tol);
        c.skipped = true;
        c.note = "requires 1 <= k <= rank";
        report.checks.push_back(c);
      }
      continue;
    }

    const double closed = expected_projection_error(d, k);
    {
      IdentityCheck c = detail::make_check("expected_projection_error", k, tol);
      const SubsetDistribution dist = enumerate_distribution(f, k, options.max_enumeration);
      double averaged = 0.0;
      for (std::size_t i = 0; i < dist.size(); ++i) {
        if (dist.probabilities[i] == 0.0) continue;
        averaged += dist.probabilities[i] * projection_error(f, dist.subsets[i]);
      }
      c.evaluations = dist.size();
      c.max_deviation = detail::relative_deviation(averaged, closed, 1e-12 * norm2);
      c.passed = c.max_deviation <= tol;
      report.checks.push_back(c);
    }

    {
      IdentityCheck c = detail::make_check("sandwich_bound", k, kCertificateSlack);
      const double tail = tail_width_squared(d, k);
      const double below = std::max(0.0, tail - closed);
      const double above = std::max(0.0, closed - static_cast<double>(k + 1) * tail);
      c.max_deviation = std::max(below, above) / norm2;
      c.evaluations = 1;
      c.passed = c.max_deviation <= c.tolerance;
      report.checks.push_back(c);
    }
  }
  return report;
}

}  // namespace volsamp
