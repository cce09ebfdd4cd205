#pragma once

#include <Eigen/QR>

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "volsamp/measure_model.hpp"
#include "volsamp/random.hpp"

namespace volsamp {

enum class InstanceKind { PrescribedSpectrum, KernelSnapshot, Gaussian };
enum class KernelKind { InverseSum, Gaussian };
enum class WeightMode { Uniform, Random, Explicit };

constexpr std::string_view to_string(InstanceKind k) noexcept {
  switch (k) {
    case InstanceKind::PrescribedSpectrum: return "prescribed_spectrum";
    case InstanceKind::KernelSnapshot: return "kernel_snapshot";
    case InstanceKind::Gaussian: return "gaussian";
  }
  return "unknown";
}

constexpr std::string_view to_string(KernelKind k) noexcept {
  return k == KernelKind::InverseSum ? "inverse_sum" : "gaussian";
}

struct InstanceSpec {
  InstanceKind kind = InstanceKind::Gaussian;
  std::size_t m = 1;
  std::size_t n = 1;
  std::uint64_t seed = 0;

  // prescribed_spectrum
  std::vector<double> spectrum;
  bool canonical_factors = false;  // u_i = e_i, v_i = e_i / sqrt(w_i)

  // prescribed_spectrum and gaussian
  WeightMode weight_mode = WeightMode::Uniform;
  std::vector<double> weights;  // WeightMode::Explicit

  // kernel_snapshot: f(y)(x) = 1 / (x + y + shift)  or  exp(-(x - y)^2 / length^2)
  KernelKind kernel = KernelKind::InverseSum;
  double shift = 1.0;
  double length = 1.0;
  std::vector<double> x_grid;
  std::vector<double> y_grid;
};

inline std::vector<double> linspace(double lo, double hi, std::size_t count) {
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  for (std::size_t i = 0; i < count; ++i)
    out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  return out;
}

/// Composite trapezoidal weights on a strictly increasing grid; a single node gets weight 1.
inline Vector trapezoid_weights(const std::vector<double>& grid) {
  const auto n = static_cast<Eigen::Index>(grid.size());
  Vector w = Vector::Zero(n);
  if (n == 1) {
    w(0) = 1.0;
    return w;
  }
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    const double h = grid[static_cast<std::size_t>(i + 1)] - grid[static_cast<std::size_t>(i)];
    w(i) += 0.5 * h;
    w(i + 1) += 0.5 * h;
  }
  return w;
}

namespace detail {

inline Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, CounterRng rng) {
  std::normal_distribution<double> normal;
  Matrix z(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) z(r, c) = normal(rng);
  return z;
}

inline Matrix orthonormal_columns(Matrix z) {
  const Eigen::Index r = z.cols();
  Eigen::HouseholderQR<Matrix> qr(z);
  Matrix q = qr.householderQ() * Matrix::Identity(z.rows(), r);
  // Fix signs so Q does not depend on the QR sign convention.
  const Matrix rmat = qr.matrixQR().topRows(r).triangularView<Eigen::Upper>();
  for (Eigen::Index c = 0; c < r; ++c)
    if (rmat(c, c) < 0.0) q.col(c) *= -1.0;
  return q;
}

inline Vector instance_weights(const InstanceSpec& spec, std::size_t n) {
  switch (spec.weight_mode) {
    case WeightMode::Uniform:
      return Vector::Ones(static_cast<Eigen::Index>(n));
    case WeightMode::Random: {
      CounterRng rng(spec.seed, 3);
      Vector w(static_cast<Eigen::Index>(n));
      for (Eigen::Index j = 0; j < w.size(); ++j) w(j) = 0.25 + 1.75 * rng.uniform();
      return w;
    }
    case WeightMode::Explicit:
      if (spec.weights.size() != n)
        throw Error(ErrorCode::ShapeMismatch, "explicit weights must have n entries");
      return Eigen::Map<const Vector>(spec.weights.data(), static_cast<Eigen::Index>(n));
  }
  return {};
}

inline void require_dims(const InstanceSpec& spec) {
  if (spec.m < 1 || spec.n < 1) throw Error(ErrorCode::ShapeMismatch, "instance dimensions must be >= 1");
}

}  // namespace detail

/**
 * f = sum_i sigma_i u_i v_i with random Euclidean-orthonormal u_i and random
 * v_i orthonormal in the weighted inner product, so the Schmidt decomposition
 * of the result has exactly the prescribed singular values.
 */
inline DiscretizedFunction gen_prescribed_spectrum(const InstanceSpec& spec) {
  detail::require_dims(spec);
  const std::size_t r = spec.spectrum.size();
  if (r > std::min(spec.m, spec.n))
    throw Error(ErrorCode::SpectrumTooLong, std::to_string(r) + " singular values for a " +
                                                std::to_string(spec.m) + "x" + std::to_string(spec.n) +
                                                " instance");
  for (std::size_t i = 0; i < r; ++i) {
    if (!(spec.spectrum[i] > 0.0) || !std::isfinite(spec.spectrum[i]) ||
        (i > 0 && spec.spectrum[i] > spec.spectrum[i - 1]))
      throw Error(ErrorCode::InvalidArgument, "spectrum must be positive and descending");
  }

  const auto m = static_cast<Eigen::Index>(spec.m);
  const auto n = static_cast<Eigen::Index>(spec.n);
  const auto rr = static_cast<Eigen::Index>(r);
  const Vector w = detail::instance_weights(spec, spec.n);
  const Vector inv_sqrt_w = w.cwiseSqrt().cwiseInverse();

  Matrix u, v;
  if (spec.canonical_factors) {
    u = Matrix::Identity(m, rr);
    v = inv_sqrt_w.asDiagonal() * Matrix::Identity(n, rr);
  } else {
    u = detail::orthonormal_columns(detail::gaussian_matrix(m, rr, CounterRng(spec.seed, 1)));
    v = inv_sqrt_w.asDiagonal() *
        detail::orthonormal_columns(detail::gaussian_matrix(n, rr, CounterRng(spec.seed, 2)));
  }
  const Vector sigma = Eigen::Map<const Vector>(spec.spectrum.data(), rr);
  Matrix values = Matrix::Zero(m, n);
  if (r > 0) values = u * sigma.asDiagonal() * v.transpose();
  return DiscretizedFunction(std::move(values), w);
}

/// Snapshot matrix of a parametric kernel; weights are trapezoidal on the y grid.
inline DiscretizedFunction gen_kernel_snapshot(const InstanceSpec& spec) {
  auto check_grid = [](const std::vector<double>& g, std::string_view name) {
    if (g.empty()) throw Error(ErrorCode::InvalidGrid, std::string(name) + " grid is empty");
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!std::isfinite(g[i]) || (i > 0 && !(g[i] > g[i - 1])))
        throw Error(ErrorCode::InvalidGrid, std::string(name) + " grid must be strictly increasing");
    }
  };
  check_grid(spec.x_grid, "x");
  check_grid(spec.y_grid, "y");

  const auto m = static_cast<Eigen::Index>(spec.x_grid.size());
  const auto n = static_cast<Eigen::Index>(spec.y_grid.size());
  Matrix values(m, n);
  switch (spec.kernel) {
    case KernelKind::InverseSum:
      if (!(spec.shift > 0.0)) throw Error(ErrorCode::InvalidGrid, "inverse_sum kernel needs shift > 0");
      for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
          const double denom =
              spec.x_grid[static_cast<std::size_t>(i)] + spec.y_grid[static_cast<std::size_t>(j)] + spec.shift;
          if (!(denom > 0.0))
            throw Error(ErrorCode::InvalidGrid, "inverse_sum kernel is singular on this grid");
          values(i, j) = 1.0 / denom;
        }
      break;
    case KernelKind::Gaussian:
      if (!(spec.length > 0.0)) throw Error(ErrorCode::InvalidGrid, "gaussian kernel needs length > 0");
      for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
          const double diff = spec.x_grid[static_cast<std::size_t>(i)] - spec.y_grid[static_cast<std::size_t>(j)];
          values(i, j) = std::exp(-diff * diff / (spec.length * spec.length));
        }
      break;
  }
  return DiscretizedFunction(std::move(values), trapezoid_weights(spec.y_grid));
}

/// I.i.d. standard normal entries.
inline DiscretizedFunction gen_gaussian(const InstanceSpec& spec) {
  detail::require_dims(spec);
  Matrix values = detail::gaussian_matrix(static_cast<Eigen::Index>(spec.m),
                                          static_cast<Eigen::Index>(spec.n), CounterRng(spec.seed, 0));
  return DiscretizedFunction(std::move(values), detail::instance_weights(spec, spec.n));
}

inline DiscretizedFunction generate(const InstanceSpec& spec) {
  switch (spec.kind) {
    case InstanceKind::PrescribedSpectrum: return gen_prescribed_spectrum(spec);
    case InstanceKind::KernelSnapshot: return gen_kernel_snapshot(spec);
    case InstanceKind::Gaussian: return gen_gaussian(spec);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown instance kind");
}

}  // namespace volsamp
