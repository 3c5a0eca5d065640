#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "test_util.hpp"
#include "tnf/errors.hpp"
#include "tnf/tensor.hpp"

using namespace tnf;
using tnf::testing::random_tensor;
using tnf::testing::relative_difference;

namespace {

// Rebuilds isometry * diag(s) * right as a tensor with the split's axis order.
Tensor reconstruct(const TruncatedSvd& svd) {
  Tensor right = svd.right;
  const std::size_t k = svd.singulars.size();
  const std::size_t rest = right.size() / k;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < rest; ++j) right.data()[i * rest + j] *= svd.singulars[i];
  }
  return contract(svd.isometry, right, {{svd.isometry.rank() - 1, 0}});
}

}  // namespace

TEST(Tensor, ScalarAndExtentsInvariant) {
  Tensor s = Tensor::scalar({2.0, -1.0});
  EXPECT_EQ(s.rank(), 0u);
  EXPECT_EQ(s.size(), 1u);
  EXPECT_THROW(Tensor({2, 2}, std::vector<Complex>(3)), DimensionError);
  EXPECT_THROW(Tensor({2, 0}), DimensionError);
}

TEST(Tensor, PermuteMatchesIndexDefinition) {
  std::mt19937_64 rng(1);
  Tensor t = random_tensor({2, 3, 4}, rng);
  Tensor p = t.permute({2, 0, 1});
  ASSERT_EQ(p.extents(), (Extents{4, 2, 3}));
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(p({k, i, j}), t({i, j, k}));
}

TEST(Contract, IdentityTimesVector) {
  Tensor v({2}, {Complex{0.3, 0.1}, Complex{-1.0, 2.0}});
  Tensor r = contract(Tensor::identity(2), v, {{1, 0}});
  EXPECT_EQ(r, v);
}

TEST(Contract, UnitVectorNormalisation) {
  Tensor v({2}, {Complex{0.6, 0.0}, Complex{0.0, 0.8}});
  Tensor r = contract(v.conj(), v, {{0, 0}});
  ASSERT_EQ(r.rank(), 0u);
  EXPECT_NEAR(std::abs(r.data()[0] - Complex{1.0, 0.0}), 0.0, 1e-15);
}

TEST(Contract, MatrixProductAgainstNaiveLoop) {
  std::mt19937_64 rng(7);
  for (std::size_t n : {2u, 3u, 5u}) {
    Tensor a = random_tensor({n, n}, rng);
    Tensor b = random_tensor({n, n}, rng);
    Tensor c = contract(a, b, {{1, 0}});
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        Complex acc{};
        for (std::size_t k = 0; k < n; ++k) acc += a({i, k}) * b({k, j});
        EXPECT_NEAR(std::abs(c({i, j}) - acc), 0.0, 1e-13);
      }
    }
  }
}

TEST(Contract, ResultAxisOrder) {
  std::mt19937_64 rng(3);
  Tensor a = random_tensor({2, 3, 4}, rng);
  Tensor b = random_tensor({5, 3}, rng);
  Tensor c = contract(a, b, {{1, 1}});
  ASSERT_EQ(c.extents(), (Extents{2, 4, 5}));
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t k = 0; k < 4; ++k)
      for (std::size_t m = 0; m < 5; ++m) {
        Complex acc{};
        for (std::size_t j = 0; j < 3; ++j) acc += a({i, j, k}) * b({m, j});
        EXPECT_NEAR(std::abs(c({i, k, m}) - acc), 0.0, 1e-13);
      }
}

TEST(Contract, Errors) {
  Tensor a({2, 3});
  Tensor b({3, 2});
  EXPECT_THROW(contract(a, b, {{0, 0}, {1, 1}}), DimensionError);
  EXPECT_THROW(contract(a, b, {{1, 0}, {1, 1}}), ArgumentError);
  EXPECT_THROW(contract(a, b, {{5, 0}}), ArgumentError);
}

TEST(ContractProperty, Bilinear) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    Tensor a = random_tensor({3, 2, 4}, rng);
    Tensor b = random_tensor({4, 3, 2}, rng);
    const Complex alpha{u(rng), u(rng)};
    Tensor lhs = contract(alpha * a, b, {{0, 1}, {2, 0}});
    Tensor rhs = alpha * contract(a, b, {{0, 1}, {2, 0}});
    EXPECT_LT(relative_difference(lhs, rhs), 1e-12);
  }
}

TEST(ContractProperty, SwappingArgumentsPermutesResult) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    Tensor a = random_tensor({3, 2, 4}, rng);
    Tensor b = random_tensor({4, 5}, rng);
    Tensor ab = contract(a, b, {{2, 0}});  // (3,2,5)
    Tensor ba = contract(b, a, {{0, 2}});  // (5,3,2)
    EXPECT_LT(relative_difference(ba.permute({1, 2, 0}), ab), 1e-14);
  }
}

TEST(SvdSplit, RankOne) {
  Tensor u({3}, {Complex{0.6, 0}, Complex{0, 0.8}, Complex{0, 0}});
  Tensor v({2}, {Complex{1 / std::sqrt(2.0), 0}, Complex{0, 1 / std::sqrt(2.0)}});
  Tensor m = outer(u, v);
  TruncatedSvd s = svd_split(m, {0}, 4);
  ASSERT_EQ(s.singulars.size(), 1u);
  EXPECT_NEAR(s.singulars[0], 1.0, 1e-14);
  EXPECT_NEAR(s.discarded_weight, 0.0, 1e-15);
}

TEST(SvdSplit, DegenerateIdentityTruncation) {
  TruncatedSvd s = svd_split(Tensor::identity(2), {0}, 1);
  ASSERT_EQ(s.singulars.size(), 1u);
  EXPECT_NEAR(s.singulars[0], 1.0, 1e-15);
  EXPECT_NEAR(s.discarded_weight, 0.5, 1e-15);
  // gauge: largest entry of the kept left vector is real and positive
  const Complex top = s.isometry.data()[0].real() > 0.5 ? s.isometry.data()[0] : s.isometry.data()[1];
  EXPECT_GT(top.real(), 0.0);
  EXPECT_EQ(top.imag(), 0.0);
}

TEST(SvdSplit, NoTruncationReconstructs) {
  std::mt19937_64 rng(5);
  Tensor m = random_tensor({4, 4}, rng);
  TruncatedSvd s = svd_split(m, {0}, 4);
  EXPECT_LT(relative_difference(reconstruct(s), m), 1e-12);
}

TEST(SvdSplit, GaugeLargestLeftEntryRealPositive) {
  std::mt19937_64 rng(6);
  Tensor m = random_tensor({5, 3}, rng);
  TruncatedSvd s = svd_split(m, {0}, 3);
  for (std::size_t k = 0; k < 3; ++k) {
    std::size_t best = 0;
    for (std::size_t i = 0; i < 5; ++i)
      if (std::abs(s.isometry({i, k})) > std::abs(s.isometry({best, k}))) best = i;
    EXPECT_GT(s.isometry({best, k}).real(), 0.0);
    EXPECT_EQ(s.isometry({best, k}).imag(), 0.0);
  }
}

TEST(SvdSplit, Errors) {
  Tensor m({2, 2});
  EXPECT_THROW(svd_split(m, {0}, 0), ArgumentError);
  EXPECT_THROW(svd_split(m, std::span<const std::size_t>{}, 2), ArgumentError);
  EXPECT_THROW(svd_split(m, {0, 1}, 2), ArgumentError);
}

TEST(SvdSplitProperty, InvariantsOnRandomTensors) {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<std::size_t> ext(1, 4);
  for (int trial = 0; trial < 60; ++trial) {
    Tensor t = random_tensor({ext(rng), ext(rng), ext(rng), ext(rng)}, rng);
    const std::size_t rows = t.extent(2) * t.extent(0);
    const std::size_t cols = t.extent(1) * t.extent(3);
    const std::size_t chi = std::uniform_int_distribution<std::size_t>(1, 6)(rng);
    TruncatedSvd s = svd_split(t, {2, 0}, chi);
    const std::size_t k = s.singulars.size();
    EXPECT_LE(k, chi);
    for (std::size_t i = 0; i + 1 < k; ++i) EXPECT_GE(s.singulars[i], s.singulars[i + 1]);
    for (double v : s.singulars) EXPECT_GE(v, 0.0);
    // isometry^dagger isometry == 1
    Tensor gram = contract(s.isometry.conj(), s.isometry, {{0, 0}, {1, 1}});
    EXPECT_LT((gram - Tensor::identity(k)).frobenius_norm(), 1e-10);
    if (chi >= std::min(rows, cols)) {
      Tensor rec = reconstruct(s);  // axes (2,0,1,3)
      EXPECT_LT(relative_difference(rec, t.permute({2, 0, 1, 3})), 1e-10);
    }
  }
}

TEST(SvdSplitProperty, DeterministicWithinProcess) {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 20; ++trial) {
    Tensor t = random_tensor({3, 4, 2}, rng);
    TruncatedSvd a = svd_split(t, {0, 2}, 3);
    TruncatedSvd b = svd_split(t, {0, 2}, 3);
    EXPECT_EQ(a.isometry, b.isometry);
    EXPECT_EQ(a.right, b.right);
    EXPECT_EQ(a.singulars, b.singulars);
  }
}

TEST(QrSplit, ReconstructsWithOrthonormalQ) {
  std::mt19937_64 rng(8);
  Tensor t = random_tensor({3, 2, 5}, rng);
  QrSplit qr = qr_split(t, {0, 1});
  Tensor gram = contract(qr.q.conj(), qr.q, {{0, 0}, {1, 1}});
  EXPECT_LT((gram - Tensor::identity(qr.q.extent(2))).frobenius_norm(), 1e-12);
  EXPECT_LT(relative_difference(contract(qr.q, qr.r, {{2, 0}}), t), 1e-12);
}

TEST(Renormalize, MaxEntryFour) {
  Tensor t({3}, {Complex{1, 0}, Complex{-4, 0}, Complex{2, 0}});
  Renormalized r = renormalize(t);
  EXPECT_FALSE(r.is_zero);
  EXPECT_EQ(r.tensor, Tensor({3}, {Complex{0.25, 0}, Complex{-1, 0}, Complex{0.5, 0}}));
  EXPECT_DOUBLE_EQ(r.log_factor, std::log(4.0));
}

TEST(Renormalize, AlreadyNormalised) {
  Tensor t({2}, {Complex{1, 0}, Complex{0, 0.5}});
  Renormalized r = renormalize(t);
  EXPECT_EQ(r.tensor, t);
  EXPECT_EQ(r.log_factor, 0.0);
}

TEST(Renormalize, ZeroFlagged) {
  Tensor t({2, 2});
  Renormalized r = renormalize(t);
  EXPECT_TRUE(r.is_zero);
  EXPECT_EQ(r.log_factor, 0.0);
  EXPECT_EQ(r.tensor, t);
}

TEST(Renormalize, ChainedProductOfSmallScalars) {
  Tensor acc = Tensor::scalar(1.0);
  double log_total = 0.0;
  for (int i = 0; i < 50; ++i) {
    acc = contract(acc, Tensor::scalar(0.1), {});
    Renormalized r = renormalize(acc);
    acc = r.tensor;
    log_total += r.log_factor;
  }
  EXPECT_NEAR(log_total, 50.0 * std::log(0.1), 1e-12);
  EXPECT_NEAR(std::abs(acc.data()[0]), 1.0, 1e-12);
}

TEST(FlopCounter, CountsMatrixProduct) {
  reset_flop_count();
  contract(Tensor({2, 3}), Tensor({3, 4}), {{1, 0}});
  EXPECT_EQ(flop_count(), 24u);
}
