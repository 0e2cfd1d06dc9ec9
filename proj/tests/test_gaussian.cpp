#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "daqec/gaussian.hpp"
#include "daqec/states.hpp"

using namespace daqec;

namespace {
constexpr double kPi = std::numbers::pi;

// Both sides built on a padded space, compared on the interior of D. Strong
// squeezing spreads the interior well past 2D, hence the 4x margin.
double synth_distance(const GaussianGateSeq& seq, const std::function<Mat(int)>& H, double t, int D) {
  const int Dw = 4 * D;
  const Mat U = mat_exp(H(Dw), -I1 * t);
  const Mat V = seq_to_fock(seq, Dw, 0);
  return phase_aligned_distance(V, U, interior_size(D));
}

Mat cps_B_gen(int D, double eta) {
  const auto [x, p] = quadratures(D);
  return -(p - eta * x * x);  // exp(i(p - eta x^2) t)
}
Mat tss_A_gen(int D, double xi) {
  const auto [x, p] = quadratures(D);
  return std::sqrt(2.0) * x - xi * (x * x - p * p);
}
Mat tss_B_gen(int D, double xi) {
  const auto [x, p] = quadratures(D);
  return std::sqrt(2.0) * p + xi * (x * p + p * x);
}
Mat sqcat_A_gen(int D, double r) {
  const auto [x, p] = quadratures(D);
  return std::exp(2 * r) * x * x - std::exp(-2 * r) * p * p;
}

void expect_matrix(const Eigen::Matrix2d& A, const Eigen::Matrix2d& B, double tol) {
  EXPECT_LT((A - B).cwiseAbs().maxCoeff(), tol) << "\n" << A << "\nvs\n" << B;
}
}  // namespace

TEST(Gaussian, ZeroTimeIsIdentity) {
  const GaussianGateSeq c = synth_cps_B(0.0, 0.3);
  ASSERT_EQ(c.gates.size(), 4u);
  EXPECT_EQ(c.gates[0].alpha, cplx(0.0));
  EXPECT_NEAR(c.gates[3].value, -kPi / 4, 1e-15);  // R(-phi1), phi1 = pi/4
  EXPECT_NEAR(c.gates[2].value, 0.0, 1e-15);
  for (const auto& seq : {c, synth_tss_A(0.0, 0.2), synth_tss_B(0.0, 0.2), synth_sqcat_A(0.0, 0.5)}) {
    const SymplecticAffine s = seq_to_symplectic(seq);
    expect_matrix(s.S, Eigen::Matrix2d::Identity(), 1e-14);
    EXPECT_LT(s.d.norm(), 1e-15);
  }
  const SymplecticAffine e = seq_to_symplectic({});
  EXPECT_EQ(e.S, Eigen::Matrix2d::Identity());
}

TEST(Gaussian, GoldenSymplecticMatrices) {
  for (double t : {-0.3, 0.1, 0.7}) {
    for (double eta : {0.0, 0.3, 0.5}) {
      const SymplecticAffine s = seq_to_symplectic(synth_cps_B(t, eta));
      Eigen::Matrix2d M;
      M << 1, 0, -2 * eta * t, 1;
      expect_matrix(s.S, M, 1e-12);
      EXPECT_NEAR(s.d(0), -t, 1e-12);
      EXPECT_NEAR(s.d(1), eta * t * t, 1e-12);
    }
    for (double xi : {0.05, 0.23}) {
      const double u = 2 * xi * t;
      Eigen::Matrix2d M;
      M << std::cosh(u), std::sinh(u), std::sinh(u), std::cosh(u);
      expect_matrix(seq_to_symplectic(synth_tss_A(t, xi)).S, M, 1e-12);
    }
    for (double r : {0.0, 0.25, 0.5}) expect_matrix(seq_to_symplectic(synth_sqcat_A(t, r)).S, sqcat_A_symplectic(t, r), 1e-12);
  }
}

TEST(Gaussian, DeterminantIsOne) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (int k = 0; k < 50; ++k) {
    for (const auto& seq : {synth_cps_B(u(rng), 0.5 + u(rng)), synth_tss_A(u(rng), 0.3 + 0.5 * u(rng)),
                            synth_tss_B(u(rng), 0.3 + 0.5 * u(rng)), synth_sqcat_A(u(rng), 0.6 + u(rng))})
      EXPECT_NEAR(seq_to_symplectic(seq).S.determinant(), 1.0, 1e-12);
  }
}

TEST(Gaussian, CpsWithoutCubicityIsDisplacement) {
  const SymplecticAffine s = seq_to_symplectic(synth_cps_B(1.0, 0.0));
  expect_matrix(s.S, Eigen::Matrix2d::Identity(), 1e-14);
  EXPECT_NEAR(s.d(0), -1.0, 1e-14);
  EXPECT_NEAR(s.d(1), 0.0, 1e-14);
}

TEST(Gaussian, TssZeroLimit) {
  const GaussianGateSeq a = synth_tss_A(0.3, 0.0);
  ASSERT_EQ(a.gates.size(), 1u);
  EXPECT_EQ(a.gates[0].alpha, cplx(0.0, -0.3));
  const GaussianGateSeq b = synth_tss_B(0.3, 0.0);
  ASSERT_EQ(b.gates.size(), 1u);
  EXPECT_EQ(b.gates[0].alpha, cplx(0.3, 0.0));
  // the closed form approaches the limit branch continuously
  const SymplecticAffine lim = seq_to_symplectic(a), near = seq_to_symplectic(synth_tss_A(0.3, 1e-6));
  EXPECT_LT((lim.d - near.d).norm(), 1e-5);
  EXPECT_LT(synth_distance(b, [](int D) { return tss_B_gen(D, 0.0); }, 0.3, 40), 1e-10);
}

TEST(Gaussian, SqCatWithoutSqueezingMatchesAlternative) {
  // x^2 - p^2 generates squeezing along the diagonals
  const double t = 0.1;
  const GaussianGateSeq alt{{GaussianGate::R(kPi / 4), GaussianGate::S(-2 * t), GaussianGate::R(-kPi / 4)}, 0.0};
  expect_matrix(seq_to_symplectic(synth_sqcat_A(t, 0.0)).S, seq_to_symplectic(alt).S, 1e-12);
  EXPECT_LT(phase_aligned_distance(seq_to_fock(synth_sqcat_A(t, 0.0), 40), seq_to_fock(alt, 40), 36), 1e-10);
}

TEST(Gaussian, ReferenceParameters) {
  EXPECT_LT(synth_distance(synth_cps_B(0.1, 0.3), [](int D) { return cps_B_gen(D, 0.3); }, 0.1, 40), 1e-7);
  EXPECT_LT(synth_distance(synth_tss_A(0.05, 0.23), [](int D) { return tss_A_gen(D, 0.23); }, 0.05, 40), 1e-7);
  EXPECT_LT(synth_distance(synth_tss_B(0.05, 0.23), [](int D) { return tss_B_gen(D, 0.23); }, 0.05, 40), 1e-7);
  EXPECT_LT(synth_distance(synth_sqcat_A(0.13, 0.5), [](int D) { return sqcat_A_gen(D, 0.5); }, 0.13, 40), 1e-7);
}

TEST(Gaussian, SynthesisSoundnessRandomDraws) {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> tt(-0.35, 0.35), eta(0.0, 0.5), xi(0.01, 0.3), rr(0.0, 0.6);
  double worst[4] = {0, 0, 0, 0};
  for (int k = 0; k < 50; ++k) {
    const double t = tt(rng), e = eta(rng), x = xi(rng), r = rr(rng);
    worst[0] = std::max(worst[0], synth_distance(synth_cps_B(t, e), [&](int D) { return cps_B_gen(D, e); }, t, 40));
    worst[1] = std::max(worst[1], synth_distance(synth_tss_A(t, x), [&](int D) { return tss_A_gen(D, x); }, t, 40));
    worst[2] = std::max(worst[2], synth_distance(synth_tss_B(t, x), [&](int D) { return tss_B_gen(D, x); }, t, 40));
    worst[3] = std::max(worst[3], synth_distance(synth_sqcat_A(t, r), [&](int D) { return sqcat_A_gen(D, r); }, t, 40));
  }
  for (double w : worst) EXPECT_LT(w, 1e-6);
}

TEST(Gaussian, SynthesisIsExactIncludingPhase) {
  // compiled branches are combined coherently, so the global phase has to be right too
  const int D = 40, Dw = 80, k = interior_size(D);
  auto exact = [&](const GaussianGateSeq& s, const Mat& H, double t) {
    return (seq_to_fock(s, Dw) - mat_exp(H, -I1 * t)).topLeftCorner(k, k).norm();
  };
  EXPECT_LT(exact(synth_cps_B(0.2, 0.3), cps_B_gen(Dw, 0.3), 0.2), 1e-7);
  EXPECT_LT(exact(synth_tss_A(-0.1, 0.2), tss_A_gen(Dw, 0.2), -0.1), 1e-7);
  EXPECT_LT(exact(synth_tss_B(0.15, 0.2), tss_B_gen(Dw, 0.2), 0.15), 1e-7);
  EXPECT_LT(exact(synth_sqcat_A(0.1, 0.5), sqcat_A_gen(Dw, 0.5), 0.1), 1e-7);
}

TEST(Gaussian, SeqToFockBasics) {
  const Mat R = seq_to_fock({{GaussianGate::R(kPi)}, 0.0}, 8);
  EXPECT_LT(std::abs(R(1, 1) + 1.0), 1e-14);
  const cplx al(0.4, -0.2);
  const Mat DD = seq_to_fock({{GaussianGate::D(al), GaussianGate::D(-al)}, 0.0}, 30);
  EXPECT_LT(phase_aligned_distance(DD, Mat::Identity(30, 30), 27), 1e-10);
  EXPECT_LT(unitarity_error(seq_to_fock(synth_cps_B(0.1, 0.3), 80), 36), 1e-10);
}

TEST(Gaussian, SymplecticPredictsMoments) {
  const int D = 60;
  const auto [x, p] = quadratures(D);
  for (const auto& seq : {synth_cps_B(0.1, 0.3), synth_tss_A(0.05, 0.23), synth_tss_B(-0.07, 0.2),
                          synth_sqcat_A(0.13, 0.5)}) {
    const Mat U = seq_to_fock(seq, D);
    const Vec psi0 = coherent_state(cplx(0.5, -0.3), D);
    const Vec psi = U * psi0;
    auto mean = [&](const Mat& O, const Vec& v) { return v.dot(O * v).real(); };
    const SymplecticAffine s = seq_to_symplectic(seq);
    const Eigen::Vector2d m0(mean(x, psi0), mean(p, psi0));
    const Eigen::Vector2d pred = s.S * m0 + s.d;
    EXPECT_NEAR(mean(x, psi), pred(0), 1e-8);
    EXPECT_NEAR(mean(p, psi), pred(1), 1e-8);
    // covariance of a coherent state is I/2
    const Eigen::Matrix2d C = 0.5 * s.S * s.S.transpose();
    const double mx = mean(x, psi), mp = mean(p, psi);
    EXPECT_NEAR(mean(x * x, psi) - mx * mx, C(0, 0), 1e-7);
    EXPECT_NEAR(mean(p * p, psi) - mp * mp, C(1, 1), 1e-7);
    EXPECT_NEAR(0.5 * mean(x * p + p * x, psi) - mx * mp, C(0, 1), 1e-7);
  }
}
