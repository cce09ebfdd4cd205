#include <gtest/gtest.h>

#include <Eigen/QR>

#include "oracles.hpp"
#include "volsamp/schmidt.hpp"
#include "volsamp/selection.hpp"

using namespace volsamp;

namespace {

DiscretizedFunction diag(std::initializer_list<double> d, std::initializer_list<double> w = {}) {
  const auto n = static_cast<Eigen::Index>(d.size());
  Matrix v = Matrix::Zero(n, n);
  Eigen::Index i = 0;
  for (double x : d) {
    v(i, i) = x;
    ++i;
  }
  if (w.size() == 0) return DiscretizedFunction(v);
  Vector wv(n);
  i = 0;
  for (double x : w) wv(i++) = x;
  return DiscretizedFunction(v, wv);
}

void expect_valid(const DiscretizedFunction& f, const SchmidtDecomposition& d) {
  const auto r = static_cast<Eigen::Index>(d.rank());
  for (Eigen::Index i = 1; i < r; ++i) EXPECT_GE(d.sigma(i - 1), d.sigma(i));
  if (r > 0) {
    EXPECT_GT(d.sigma(r - 1), 0.0);
  }
  const Matrix uu = d.left_factors.transpose() * d.left_factors;
  const Matrix vv = d.right_factors.transpose() * f.weights().asDiagonal() * d.right_factors;
  EXPECT_LT((uu - Matrix::Identity(r, r)).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((vv - Matrix::Identity(r, r)).cwiseAbs().maxCoeff(), 1e-10);
  if (r > 0) {
    const Matrix rec = d.left_factors * d.sigma.asDiagonal() * d.right_factors.transpose();
    EXPECT_LT((rec - f.values()).cwiseAbs().maxCoeff(), 1e-10 * d.sigma(0));
  }
}

}  // namespace

TEST(SchmidtDecompose, WeightsScaleColumns) {
  const auto f = diag({1, 1}, {4, 1});
  const auto d = schmidt_decompose(f);
  ASSERT_EQ(d.rank(), 2u);
  EXPECT_NEAR(d.sigma(0), 2.0, 1e-14);
  EXPECT_NEAR(d.sigma(1), 1.0, 1e-14);
  expect_valid(f, d);
}

TEST(SchmidtDecompose, ZeroFunctionHasRankZero) {
  const DiscretizedFunction f(Matrix::Zero(3, 4));
  const auto d = schmidt_decompose(f);
  EXPECT_EQ(d.rank(), 0u);
  EXPECT_EQ(d.sigma.size(), 0);
  EXPECT_EQ(tail_width(d, 0), 0.0);
}

TEST(SchmidtDecompose, DiagonalInputAndSignConvention) {
  const auto f = diag({3, 2});
  const auto d = schmidt_decompose(f);
  ASSERT_EQ(d.rank(), 2u);
  EXPECT_NEAR(d.sigma(0), 3.0, 1e-14);
  EXPECT_NEAR(d.sigma(1), 2.0, 1e-14);
  EXPECT_TRUE(d.left_factors.isApprox(Matrix::Identity(2, 2)));

  const DiscretizedFunction neg(-f.values());
  const auto dn = schmidt_decompose(neg);
  EXPECT_TRUE(dn.left_factors.isApprox(Matrix::Identity(2, 2)));
  EXPECT_TRUE(dn.right_factors.isApprox(-Matrix::Identity(2, 2)));
}

TEST(SchmidtDecompose, SignTieBrokenByFirstRow) {
  Matrix v(2, 1);
  v << -1, 1;
  const auto d = schmidt_decompose(DiscretizedFunction(v));
  ASSERT_EQ(d.rank(), 1u);
  EXPECT_GT(d.left_factors(0, 0), 0.0);
}

TEST(SchmidtDecompose, RejectsBadTolerance) {
  const auto f = diag({1, 1});
  EXPECT_THROW(schmidt_decompose(f, 0.0), Error);
  EXPECT_THROW(schmidt_decompose(f, -1.0), Error);
}

TEST(TailWidth, Examples) {
  const auto d = schmidt_decompose(diag({3, 2, 1}));
  EXPECT_NEAR(tail_width(d, 1), std::sqrt(5.0), 1e-14);
  EXPECT_EQ(tail_width(d, 3), 0.0);
  EXPECT_EQ(tail_width(d, 7), 0.0);
  EXPECT_NEAR(tail_width(d, 0), std::sqrt(14.0), 1e-14);
}

TEST(NumericalRank, Examples) {
  EXPECT_EQ(numerical_rank(schmidt_decompose(diag({1, 1e-20}))), 1u);
  EXPECT_EQ(numerical_rank(schmidt_decompose(diag({1, 1}))), 2u);
  Vector a(3), b(4);
  a << 1, -2, 0.5;
  b << 3, 1, -1, 2;
  EXPECT_EQ(numerical_rank(schmidt_decompose(DiscretizedFunction(a * b.transpose()))), 1u);
  // A looser tolerance truncates more.
  EXPECT_EQ(numerical_rank(schmidt_decompose(diag({1, 1e-3}), 1e-2)), 1u);
}

TEST(SchmidtProperty, InvariantsOnRandomInstances) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const std::size_t m = 1 + seed % 6, n = 1 + (seed * 7) % 8;
    const auto f = oracle::random_instance(seed, m, n);
    const auto d = schmidt_decompose(f);
    expect_valid(f, d);

    const auto ref = oracle::sigma_squared(f);
    ASSERT_EQ(ref.size(), d.rank()) << "seed " << seed;
    for (std::size_t i = 0; i < ref.size(); ++i)
      EXPECT_NEAR(d.sigma(static_cast<Eigen::Index>(i)) * d.sigma(static_cast<Eigen::Index>(i)), ref[i],
                  1e-10 * ref[0]);

    const double total = total_l2_norm_squared(f);
    for (std::size_t k = 0; k <= d.rank(); ++k) {
      const double head = d.sigma.head(static_cast<Eigen::Index>(k)).squaredNorm();
      EXPECT_NEAR(tail_width_squared(d, k) + head, total, 1e-10 * total);
      if (k > 0) {
        EXPECT_LE(tail_width(d, k), tail_width(d, k - 1));
      }
    }
  }
}

TEST(SchmidtProperty, SingularValuesInvariantUnderSymmetries) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto f = oracle::random_instance(50 + seed, 4, 5);
    const Vector s = schmidt_decompose(f).sigma;

    // Column permutation together with weights.
    Eigen::PermutationMatrix<Eigen::Dynamic> perm(5);
    perm.indices() << 3, 0, 4, 1, 2;
    const DiscretizedFunction permuted(f.values() * perm, perm.transpose() * f.weights());
    EXPECT_LT((schmidt_decompose(permuted).sigma - s).cwiseAbs().maxCoeff(), 1e-12 * s(0));

    // Splitting a column into two half-weight copies.
    Matrix v(4, 6);
    v << f.values(), f.values().col(2);
    Vector w(6);
    w << f.weights(), 0.5 * f.weights()(2);
    w(2) *= 0.5;
    EXPECT_LT((schmidt_decompose(DiscretizedFunction(v, w)).sigma - s).cwiseAbs().maxCoeff(), 1e-12 * s(0));

    // Orthogonal change of coordinates in H.
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal;
    Matrix z(4, 4);
    for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = normal(gen);
    const Matrix q = Eigen::HouseholderQR<Matrix>(z).householderQ();
    const DiscretizedFunction rotated(q * f.values(), f.weights());
    EXPECT_LT((schmidt_decompose(rotated).sigma - s).cwiseAbs().maxCoeff(), 1e-12 * s(0));
  }
}

TEST(SchmidtProperty, TailWidthIsOptimalOverAllSubsets) {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const std::size_t m = 2 + seed % 5, n = 2 + (seed * 3) % 5;
    const auto f = oracle::random_instance(200 + seed, m, n);
    const auto d = schmidt_decompose(f);
    for (std::size_t k = 0; k <= std::min<std::size_t>(3, n); ++k) {
      const double tail = tail_width_squared(d, k);
      for (const IndexList& s : oracle::all_subsets(n, k))
        EXPECT_LE(tail, oracle::projection_error(f, s) * (1 + 1e-10) + 1e-14) << "seed " << seed;
    }
  }
}
