#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "dense_oracle.hpp"
#include "test_util.hpp"
#include "tnf/errors.hpp"
#include "tnf/floquet.hpp"

using namespace tnf;
using namespace tnf::testing::dense;
using tnf::testing::relative_difference;

namespace {

const double kLn2 = std::numbers::ln2;

Mat to_eigen(const Tensor& t) {
  Mat m(static_cast<Eigen::Index>(t.extent(0)), static_cast<Eigen::Index>(t.extent(1)));
  for (std::size_t i = 0; i < t.extent(0); ++i)
    for (std::size_t j = 0; j < t.extent(1); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = t({i, j});
  return m;
}

Vec to_eigen(const std::vector<Complex>& v) { return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())); }

SpinConfiguration random_chain(std::size_t L, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(0.5);
  std::vector<int> v(L);
  for (auto& x : v) x = coin(rng) ? 1 : 0;
  return SpinConfiguration(v);
}

// Transverse schedule with dense boundaries over the time axis.
Complex dense_transverse(const FloquetParams& p, const SpinConfiguration& n, std::size_t chi, std::size_t t) {
  const Mpo mpo = build_floquet_mpo(p);
  DenseRow b = dense_trivial(t);
  for (std::size_t j = 0; j < p.L; ++j) {
    const Tensor& w = mpo.tensors[j];  // (out, l, in, r)
    std::vector<Tensor> column;
    for (std::size_t k = 0; k < t; ++k) {
      const std::size_t din = k == 0 ? 1 : 2;
      const std::size_t dout = k + 1 == t ? 1 : 2;
      Tensor cell({w.extent(1), din, w.extent(3), dout});
      for (std::size_t l = 0; l < w.extent(1); ++l)
        for (std::size_t i = 0; i < din; ++i)
          for (std::size_t r = 0; r < w.extent(3); ++r)
            for (std::size_t o = 0; o < dout; ++o) {
              const std::size_t out = k + 1 == t ? static_cast<std::size_t>(n[j]) : o;
              cell({l, i, r, o}) = w({out, l, i, r});
            }
      column.push_back(cell);
    }
    b = dense_absorb(b, column);
    dense_truncate(b, chi);
  }
  return b.psi[0];
}

// Inverse-time schedule with a dense boundary over the chain.
Complex dense_inverse(const FloquetParams& p, const SpinConfiguration& n, std::size_t chi, std::size_t t) {
  const Mpo mpo = build_floquet_mpo(p);
  DenseRow b{std::vector<std::size_t>(p.L, 2), Vec::Zero(static_cast<Eigen::Index>(std::size_t{1} << p.L))};
  b.psi[static_cast<Eigen::Index>(basis_index(n))] = 1.0;
  for (std::size_t step = 0; step < t; ++step) {
    b = dense_absorb(b, mpo.tensors);
    dense_truncate(b, chi);
  }
  return b.psi[0];
}

// MPO-MPO compression written directly against Eigen: site matrices
// (left, 4 * right), QR sweep right, truncated JacobiSVD sweep left.
struct EigenOperator {
  std::vector<Mat> sites;  // (left, phys * right) with phys = out * 2 + in
  std::vector<std::size_t> right;
};

Complex eigen_mpo_amplitude(const FloquetParams& p, const SpinConfiguration& n, std::size_t chi, std::size_t t) {
  const Mpo mpo = build_floquet_mpo(p);
  const std::size_t L = p.L;
  EigenOperator op;
  for (std::size_t j = 0; j < L; ++j) {
    Mat id = Mat::Zero(1, 4);
    id(0, 0) = 1.0;
    id(0, 3) = 1.0;
    op.sites.push_back(id);
    op.right.push_back(1);
  }
  for (std::size_t step = 0; step < t; ++step) {
    for (std::size_t j = 0; j < L; ++j) {
      const Tensor& w = mpo.tensors[j];
      const Eigen::Index lm = op.sites[j].rows();
      const std::size_t rm = op.right[j];
      const std::size_t lf = w.extent(1), rf = w.extent(3);
      Mat next = Mat::Zero(lm * static_cast<Eigen::Index>(lf), static_cast<Eigen::Index>(4 * rm * rf));
      for (Eigen::Index a = 0; a < lm; ++a)
        for (std::size_t b = 0; b < lf; ++b)
          for (std::size_t out = 0; out < 2; ++out)
            for (std::size_t in = 0; in < 2; ++in)
              for (std::size_t c = 0; c < rm; ++c)
                for (std::size_t d = 0; d < rf; ++d) {
                  Complex s = 0.0;
                  for (std::size_t m = 0; m < 2; ++m)
                    s += op.sites[j](a, static_cast<Eigen::Index>((out * 2 + m) * rm + c)) * w({m, b, in, d});
                  next(a * static_cast<Eigen::Index>(lf) + static_cast<Eigen::Index>(b),
                       static_cast<Eigen::Index>(((out * 2 + in) * rm + c) * rf + d)) = s;
                }
      op.sites[j] = next;
      op.right[j] = rm * rf;
    }
    // Left-canonicalise.
    for (std::size_t j = 0; j + 1 < L; ++j) {
      const Eigen::Index rows = op.sites[j].rows() * 4;
      const auto r = static_cast<Eigen::Index>(op.right[j]);
      Mat m(rows, r);
      for (Eigen::Index a = 0; a < op.sites[j].rows(); ++a)
        for (Eigen::Index q = 0; q < 4; ++q)
          for (Eigen::Index c = 0; c < r; ++c) m(a * 4 + q, c) = op.sites[j](a, q * r + c);
      Eigen::HouseholderQR<Mat> qr(m);
      const Eigen::Index k = std::min(rows, r);
      Mat q = qr.householderQ() * Mat::Identity(rows, k);
      Mat rr = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
      op.sites[j].resize(rows / 4, 4 * k);
      for (Eigen::Index a = 0; a < rows / 4; ++a)
        for (Eigen::Index qq = 0; qq < 4; ++qq)
          for (Eigen::Index c = 0; c < k; ++c) op.sites[j](a, qq * k + c) = q(a * 4 + qq, c);
      op.right[j] = static_cast<std::size_t>(k);
      op.sites[j + 1] = rr * op.sites[j + 1];
    }
    // Truncate right to left.
    for (std::size_t j = L - 1; j >= 1; --j) {
      Eigen::JacobiSVD<Mat> svd(op.sites[j], Eigen::ComputeThinU | Eigen::ComputeThinV);
      const Eigen::VectorXd s = svd.singularValues();
      Eigen::Index k = 0;
      while (k < s.size() && static_cast<std::size_t>(k) < chi && s[k] > 1e-14 * s[0]) ++k;
      Mat vh = svd.matrixV().leftCols(k).adjoint();
      Mat us = svd.matrixU().leftCols(k) * s.head(k).asDiagonal();
      op.sites[j] = vh;
      const auto rprev = static_cast<Eigen::Index>(op.right[j - 1]);
      Mat prev = op.sites[j - 1];
      Mat next(prev.rows(), 4 * k);
      for (Eigen::Index q = 0; q < 4; ++q) next.middleCols(q * k, k) = prev.middleCols(q * rprev, rprev) * us;
      op.sites[j - 1] = next;
      op.right[j - 1] = static_cast<std::size_t>(k);
    }
  }
  Mat v = Mat::Ones(1, 1);
  for (std::size_t j = 0; j < L; ++j) {
    const auto r = static_cast<Eigen::Index>(op.right[j]);
    const Eigen::Index q = static_cast<Eigen::Index>(n[j]) * 2;
    v = v * op.sites[j].middleCols(q * r, r);
  }
  return v(0, 0);
}

double fidelity_deficit(const std::vector<Complex>& a, const std::vector<Complex>& b) {
  const Vec va = to_eigen(a), vb = to_eigen(b);
  return 1.0 - std::norm(va.dot(vb)) / (va.squaredNorm() * vb.squaredNorm());
}

std::vector<Complex> mps_state(const Mps& mps, std::size_t L) {
  return enumerate_amplitudes([&](const SpinConfiguration& n) { return mps_amplitude(mps, n); }, L);
}

}  // namespace

TEST(FloquetMpo, IdentityWhenAllCouplingsVanish) {
  for (std::size_t L = 2; L <= 6; ++L) {
    const Tensor dense = mpo_dense(build_floquet_mpo({L, 0.0, 0.0, 0.0, 0}));
    EXPECT_LT((to_eigen(dense) - Mat::Identity(dense.extent(0), dense.extent(1))).norm(), 1e-13) << L;
  }
}

TEST(FloquetMpo, NoIsingCouplingGivesBondOne) {
  const Mpo mpo = build_floquet_mpo({6, 0.0, 0.4, 0.3, 0});
  EXPECT_EQ(mpo.max_bond(), 1u);
  EXPECT_LE(build_floquet_mpo(FloquetParams::maximally_chaotic(6, 0)).max_bond(), 4u);
}

TEST(FloquetMpo, TwoSitesMatchGateProduct) {
  const double J = 0.7, g = 0.5, h = 0.5;
  Mat zz = Mat::Zero(4, 4), field = Mat::Zero(4, 4);
  const double z[2] = {1.0, -1.0};
  const Complex i{0.0, 1.0};
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      zz(2 * a + b, 2 * a + b) = std::exp(i * J * z[a] * z[b]);
      field(2 * a + b, 2 * a + b) = std::exp(i * h * (z[a] + z[b]));
    }
  Mat kick1(2, 2);
  kick1 << std::cos(g), i * std::sin(g), i * std::sin(g), std::cos(g);
  Mat kick(4, 4);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c)
        for (int d = 0; d < 2; ++d) kick(2 * a + c, 2 * b + d) = kick1(a, b) * kick1(c, d);
  const Mat expected = kick * field * zz;
  const Mat got = to_eigen(mpo_dense(build_floquet_mpo({2, J, g, h, 0})));
  EXPECT_LT((got - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(FloquetMpo, DenseMpoMatchesGateApplication) {
  const FloquetParams p{5, 0.7, 0.5, 0.5, 0};
  const Mat f = to_eigen(mpo_dense(build_floquet_mpo(p)));
  for (std::size_t x = 0; x < 32; ++x) {
    std::vector<Complex> e(32, 0.0);
    e[x] = 1.0;
    apply_floquet_step(p, e);
    EXPECT_LT((to_eigen(e) - f.col(static_cast<Eigen::Index>(x))).norm(), 1e-12);
  }
}

TEST(ExactEvolve, StartsInAllUpState) {
  const auto psi = exact_evolve(FloquetParams::maximally_chaotic(6, 0), 0);
  EXPECT_EQ(psi[0], Complex(1.0, 0.0));
  for (std::size_t x = 1; x < psi.size(); ++x) EXPECT_EQ(psi[x], Complex(0.0, 0.0));
}

TEST(ExactEvolve, PreservesNorm) {
  const FloquetParams p = FloquetParams::less_chaotic(10, 0);
  std::vector<Complex> psi = exact_evolve(p, 0);
  for (std::size_t t = 1; t <= 90; ++t) {
    apply_floquet_step(p, psi);
    if (t == 20 || t == 90) EXPECT_LT(std::abs(to_eigen(psi).norm() - 1.0), 1e-12) << t;
  }
}

TEST(ExactEvolve, MatchesRepeatedDenseMpo) {
  const FloquetParams p = FloquetParams::maximally_chaotic(10, 0);
  const Mat f = to_eigen(mpo_dense(build_floquet_mpo(p)));
  Vec v = Vec::Zero(1024);
  v[0] = 1.0;
  for (int k = 0; k < 5; ++k) v = f * v;
  EXPECT_LT((to_eigen(exact_evolve(p, 5)) - v).norm(), 1e-10);
}

TEST(ExactEvolve, GuardsChainLength) {
  EXPECT_THROW(exact_evolve(FloquetParams::maximally_chaotic(15, 0), 1), ResourceError);
  EXPECT_THROW(exact_evolve({1, 0.1, 0.1, 0.1, 0}, 1), ArgumentError);
}

TEST(EvolveConventional, LosslessBondReproducesExactState) {
  for (const auto& p : {FloquetParams::maximally_chaotic(10, 0), FloquetParams::less_chaotic(10, 0)}) {
    const auto exact = exact_evolve(p, 6);
    const auto mps = mps_state(evolve_conventional(p, 32, 6), 10);
    EXPECT_LT(fidelity_deficit(mps, exact), 1e-8);
    // Amplitude-wise, including the tracked scale.
    const Mps m = evolve_conventional(p, 32, 6);
    for (std::size_t x : {0u, 5u, 77u, 1023u}) {
      EXPECT_LT(relative_difference(mps_amplitude(m, basis_configuration(x, 10)).value(), exact[x]), 1e-8);
    }
  }
}

TEST(EvolveConventional, ProductDynamicsExactAtBondOne) {
  const FloquetParams p{8, 0.0, 0.6, 0.3, 0};
  const auto exact = exact_evolve(p, 7);
  const Mps m = evolve_conventional(p, 1, 7);
  EXPECT_EQ(m.max_bond(), 1u);
  EXPECT_LT(fidelity_deficit(mps_state(m, 8), exact), 1e-12);
}

TEST(EvolveConventional, SchmidtRankBoundedByChi) {
  const FloquetParams p = FloquetParams::less_chaotic(10, 0);
  const auto psi = mps_state(evolve_conventional(p, 4, 15), 10);
  const EntanglementEntry e = entropy_and_spectrum(rdm_from_state(psi, 10, half_chain(10)));
  EXPECT_LT(e.spectrum[4], 1e-12);
  EXPECT_GT(e.spectrum[3], 1e-6);
}

TEST(TnfTransverse, ZeroTimeIsDelta) {
  const FloquetParams p = FloquetParams::maximally_chaotic(6, 0);
  EXPECT_EQ(tnf_amplitude_transverse(p, basis_configuration(0, 6), 2, 0).value(), Complex(1.0, 0.0));
  EXPECT_TRUE(tnf_amplitude_transverse(p, basis_configuration(9, 6), 2, 0).is_zero);
}

TEST(TnfTransverse, UnboundedChiIsExact) {
  std::mt19937_64 rng(11);
  for (const auto& p : {FloquetParams::maximally_chaotic(10, 0), FloquetParams::less_chaotic(10, 0)}) {
    const auto exact = exact_evolve(p, 5);
    for (int k = 0; k < 20; ++k) {
      const SpinConfiguration n = random_chain(10, rng);
      const Complex got = tnf_amplitude_transverse(p, n, kUnboundedChi, 5).value();
      EXPECT_LT(relative_difference(got, exact[basis_index(n)]), 1e-8);
    }
  }
}

TEST(TnfTransverse, MatchesDenseSchedule) {
  std::mt19937_64 rng(12);
  const FloquetParams p = FloquetParams::less_chaotic(10, 0);
  for (int k = 0; k < 10; ++k) {
    const SpinConfiguration n = random_chain(10, rng);
    const Complex got = tnf_amplitude_transverse(p, n, 2, 5).value();
    EXPECT_LT(relative_difference(got, dense_transverse(p, n, 2, 5)), 1e-8);
  }
}

TEST(TnfInverse, ZeroTimeIsDelta) {
  const FloquetParams p = FloquetParams::less_chaotic(6, 0);
  EXPECT_EQ(tnf_amplitude_inverse_time(p, basis_configuration(0, 6), 2, 0).value(), Complex(1.0, 0.0));
  EXPECT_TRUE(tnf_amplitude_inverse_time(p, basis_configuration(4, 6), 2, 0).is_zero);
}

TEST(TnfInverse, UnboundedChiIsExact) {
  std::mt19937_64 rng(13);
  const FloquetParams p = FloquetParams::maximally_chaotic(10, 0);
  const auto exact = exact_evolve(p, 5);
  for (int k = 0; k < 20; ++k) {
    const SpinConfiguration n = random_chain(10, rng);
    EXPECT_LT(relative_difference(tnf_amplitude_inverse_time(p, n, kUnboundedChi, 5).value(), exact[basis_index(n)]),
              1e-8);
  }
}

TEST(TnfInverse, MatchesDenseSchedule) {
  std::mt19937_64 rng(14);
  const FloquetParams p = FloquetParams::less_chaotic(8, 0);
  for (int k = 0; k < 6; ++k) {
    const SpinConfiguration n = random_chain(8, rng);
    EXPECT_LT(relative_difference(tnf_amplitude_inverse_time(p, n, 2, 4).value(), dense_inverse(p, n, 2, 4)), 1e-8);
  }
}

TEST(MpoMpo, ZeroTimeIsIdentity) {
  const CompressedOperator op = mpo_mpo_inverse(FloquetParams::maximally_chaotic(6, 0), 3, 0);
  EXPECT_EQ(op.amplitude(basis_configuration(0, 6)).value(), Complex(1.0, 0.0));
  EXPECT_TRUE(op.amplitude(basis_configuration(1, 6)).is_zero);
}

TEST(MpoMpo, UnboundedChiIsExact) {
  const FloquetParams p = FloquetParams::less_chaotic(10, 0);
  const auto exact = exact_evolve(p, 5);
  const CompressedOperator op = mpo_mpo_inverse(p, kUnboundedChi, 5);
  for (std::size_t x = 0; x < 1024; x += 37) {
    EXPECT_LT(relative_difference(op.amplitude(basis_configuration(x, 10)).value(), exact[x]), 1e-8);
  }
}

TEST(MpoMpo, MatchesEigenImplementation) {
  std::mt19937_64 rng(15);
  const FloquetParams p = FloquetParams::less_chaotic(10, 0);
  const CompressedOperator op = mpo_mpo_inverse(p, 4, 6);
  for (int k = 0; k < 10; ++k) {
    const SpinConfiguration n = random_chain(10, rng);
    EXPECT_LT(relative_difference(op.amplitude(n).value(), eigen_mpo_amplitude(p, n, 4, 6)), 1e-8);
  }
}

TEST(ReducedDensityMatrix, ProductStateIsPure) {
  std::vector<Complex> psi(64, 0.0);
  psi[basis_index(SpinConfiguration({0, 1, 1, 0, 1, 0}))] = Complex(0.0, 2.0);
  const EntanglementEntry e = entropy_and_spectrum(rdm_from_state(psi, 6, half_chain(6)));
  EXPECT_NEAR(e.entropy, 0.0, 1e-14);
  EXPECT_NEAR(e.spectrum[0], 1.0, 1e-14);
  EXPECT_NEAR(e.spectrum[1], 0.0, 1e-14);
}

TEST(ReducedDensityMatrix, BellPairIsMaximallyMixed) {
  std::vector<Complex> psi{1.0, 0.0, 0.0, 1.0};
  const Tensor rho = rdm_from_state(psi, 2, half_chain(2));
  EXPECT_NEAR(std::abs(rho({0, 0}) - 0.5), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(rho({1, 1}) - 0.5), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(rho({0, 1})), 0.0, 1e-15);
  EXPECT_NEAR(entropy_and_spectrum(rho).entropy, kLn2, 1e-14);
}

TEST(ReducedDensityMatrix, MatchesDensePartialTrace) {
  const FloquetParams p = FloquetParams::maximally_chaotic(10, 0);
  const auto psi = exact_evolve(p, 3);
  const Region region{3, 4};
  const Tensor rho = rdm_from_amplitudes(method_amplitudes(p, FloquetMethod::Exact, 1, 3), 10, region, 3);
  Mat oracle = Mat::Zero(16, 16);
  for (std::size_t x = 0; x < 1024; ++x)
    for (std::size_t y = 0; y < 1024; ++y) {
      // Same environment bits (sites outside [3, 7)).
      const std::size_t env_mask = 0b1110000111;
      if ((x & env_mask) != (y & env_mask)) continue;
      oracle((x >> 3) & 15, (y >> 3) & 15) += psi[x] * std::conj(psi[y]);
    }
  oracle /= oracle.trace();
  const Mat got = to_eigen(rho);
  EXPECT_LT((got - oracle).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((got - got.adjoint()).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(EntropyAndSpectrum, SimpleCases) {
  Tensor mixed({2, 2});
  mixed({0, 0}) = 0.5;
  mixed({1, 1}) = 0.5;
  EXPECT_NEAR(entropy_and_spectrum(mixed).entropy, kLn2, 1e-15);
  Tensor pure({2, 2});
  pure({0, 0}) = 1.0;
  EXPECT_EQ(entropy_and_spectrum(pure).entropy, 0.0);
  Tensor bad({2, 2});
  bad({0, 0}) = 1.1;
  EXPECT_THROW(entropy_and_spectrum(bad), DataError);
}

TEST(EntropyAndSpectrum, RandomDensityMatrixMatchesDirectDecomposition) {
  std::mt19937_64 rng(16);
  const Tensor a = tnf::testing::random_tensor({64, 64}, rng);
  Mat m = to_eigen(a);
  Mat rho = m * m.adjoint();
  rho /= rho.trace();
  Tensor rho_t({64, 64});
  for (std::size_t i = 0; i < 64; ++i)
    for (std::size_t j = 0; j < 64; ++j) rho_t({i, j}) = rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  const EntanglementEntry e = entropy_and_spectrum(rho_t);

  Eigen::ComplexEigenSolver<Mat> ces(rho);
  std::vector<double> ev;
  for (Eigen::Index k = 0; k < 64; ++k) ev.push_back(ces.eigenvalues()[k].real());
  std::sort(ev.rbegin(), ev.rend());
  double s = 0.0;
  for (double l : ev) s -= l > 0 ? l * std::log(l) : 0.0;
  EXPECT_NEAR(e.entropy, s, 1e-10);
  ASSERT_EQ(e.spectrum.size(), kSpectrumLength);
  for (std::size_t k = 0; k < kSpectrumLength; ++k) EXPECT_NEAR(e.spectrum[k], ev[k], 1e-12);
  EXPECT_TRUE(std::is_sorted(e.spectrum.rbegin(), e.spectrum.rend()));
}

TEST(EntanglementDynamics, AllMethodsStartUnentangled) {
  const FloquetParams p = FloquetParams::maximally_chaotic(6, 0);
  for (auto m : {FloquetMethod::Exact, FloquetMethod::Mps, FloquetMethod::TnfTransverse, FloquetMethod::TnfInverse,
                 FloquetMethod::Mpo}) {
    const auto s = entanglement_dynamics(p, m, {});
    ASSERT_EQ(s.size(), 1u);
    EXPECT_NEAR(s[0].entropy, 0.0, 1e-12) << to_string(m);
  }
}

TEST(EntanglementDynamics, LosslessMethodsAgreeWithExact) {
  const FloquetParams p = FloquetParams::less_chaotic(8, 6);
  DynamicsOptions o;
  o.chi = kUnboundedChi;
  const auto exact = entanglement_dynamics(p, FloquetMethod::Exact, o);
  for (auto m : {FloquetMethod::Mps, FloquetMethod::TnfTransverse, FloquetMethod::TnfInverse, FloquetMethod::Mpo}) {
    const auto s = entanglement_dynamics(p, m, o);
    for (std::size_t t = 0; t <= 6; ++t) EXPECT_NEAR(s[t].entropy, exact[t].entropy, 1e-8) << to_string(m) << " " << t;
  }
}

TEST(EntanglementDynamics, ThreadCountDoesNotChangeResults) {
  const FloquetParams p = FloquetParams::maximally_chaotic(8, 4);
  DynamicsOptions one, three;
  three.threads = 3;
  const auto a = entanglement_dynamics(p, FloquetMethod::TnfTransverse, one);
  const auto b = entanglement_dynamics(p, FloquetMethod::TnfTransverse, three);
  for (std::size_t t = 0; t < a.size(); ++t) {
    EXPECT_EQ(a[t].entropy, b[t].entropy);
    EXPECT_EQ(a[t].spectrum, b[t].spectrum);
  }
}

TEST(EntanglementDynamics, ExactEntropyGrowsThenSaturates) {
  const FloquetParams p = FloquetParams::maximally_chaotic(14, 20);
  const auto s = entanglement_dynamics(p, FloquetMethod::Exact, {});
  // The first period maps |0...0> to a product state.
  EXPECT_NEAR(s[1].entropy, 0.0, 1e-12);
  for (std::size_t t = 2; t <= 5; ++t) EXPECT_GT(s[t].entropy, s[t - 1].entropy + 0.3) << t;
  const double page = 7 * kLn2 - 0.5;
  for (const auto& e : s) EXPECT_LE(e.entropy, 7 * kLn2 + 1e-8);
  for (std::size_t t = 10; t <= 20; ++t) EXPECT_GT(s[t].entropy, 0.9 * page) << t;
}

TEST(EntanglementDynamics, SpectraArePositiveSemidefinite) {
  const FloquetParams p = FloquetParams::less_chaotic(8, 5);
  for (auto m : {FloquetMethod::Mps, FloquetMethod::TnfTransverse, FloquetMethod::TnfInverse, FloquetMethod::Mpo}) {
    for (const auto& e : entanglement_dynamics(p, m, {})) EXPECT_GE(e.min_eigenvalue, -1e-10) << to_string(m);
  }
}

TEST(BulkEntropy, VolumeLawAtMaximalChaos) {
  const auto psi = exact_evolve(FloquetParams::maximally_chaotic(10, 0), 8);
  const auto s = bulk_entropy_scaling(psi, 10);
  ASSERT_EQ(s.size(), 9u);
  // Roughly ln 2 per site up to the middle.
  for (std::size_t len = 1; len <= 4; ++len) EXPECT_GT(s[len - 1], 0.7 * len * kLn2) << len;
}

TEST(FloquetMethod, NamesRoundTrip) {
  for (auto m : {FloquetMethod::Exact, FloquetMethod::Mps, FloquetMethod::TnfTransverse, FloquetMethod::TnfInverse,
                 FloquetMethod::Mpo}) {
    EXPECT_EQ(floquet_method_from_string(to_string(m)), m);
  }
  EXPECT_THROW(floquet_method_from_string("tebd"), ArgumentError);
}
