#include <cmath>
#include <random>

#include <gtest/gtest.h>
#include <json.hpp>

#include "daqec/analysis.hpp"
#include "daqec/circuit.hpp"
#include "daqec/error.hpp"

using namespace daqec;

namespace {
const double r5 = db_to_natural(5.0);

std::vector<NullifierSpec> all_families() {
  return {NullifierSpec::sqvac(r5), NullifierSpec::cps(r5, 0.3), NullifierSpec::tss(db_to_natural(2.0)),
          NullifierSpec::cat(2.0, -1), NullifierSpec::sqcat(1.0, 0.5, +1)};
}

Mat dm(const Vec& v) { return v * v.adjoint(); }

// Interior of both qubit blocks of a joint operator.
// W is the mode cutoff of the joint operators, D the cutoff whose interior is compared.
double joint_interior_distance(const Mat& A, const Mat& B, int W, int D, bool align_phase) {
  const int k = interior_size(D);
  std::vector<int> idx;
  for (int q = 0; q < 2; ++q)
    for (int n = 0; n < k; ++n) idx.push_back(q * W + n);
  const int m = int(idx.size());
  Mat a(m, m), b(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) a(i, j) = A(idx[i], idx[j]), b(i, j) = B(idx[i], idx[j]);
  return align_phase ? phase_aligned_distance(a, b, m) : (a - b).norm();
}
}  // namespace

TEST(Circuit, SchemeFactors) {
  auto seq = [](Scheme s, int k) {
    std::string out;
    for (const auto& f : step_factors(s, k)) out += std::string(1, f.which) + (f.frac == 1.0 ? "1" : "h");
    return out;
  };
  // rightmost operator acts first
  EXPECT_EQ(seq(Scheme::SharpenTrim, 0), "B1A1");
  EXPECT_EQ(seq(Scheme::SharpenTrim, 1), "A1B1");
  EXPECT_EQ(seq(Scheme::SharpenTrim, 2), "B1A1");
  EXPECT_EQ(seq(Scheme::BsB, 0), "AhB1Ah");
  EXPECT_EQ(seq(Scheme::sBs, 5), "BhA1Bh");
  EXPECT_EQ(scheme_period(Scheme::SharpenTrim), 2);
  EXPECT_EQ(scheme_from_string("sBs"), Scheme::sBs);
  EXPECT_THROW(scheme_from_string("BBs"), Error);
}

TEST(Circuit, ZeroCouplingIsIdentity) {
  const auto ab = build_AB(NullifierSpec::cps(r5, 0.3), 0.0, 20);
  EXPECT_LT((ab.A - Mat::Identity(40, 40)).norm(), 1e-14);
  EXPECT_LT((ab.B - Mat::Identity(40, 40)).norm(), 1e-14);
  const Vec v = build_state_vector(NullifierSpec::cat(1.0, +1), 20, {});
  const StepChannel st = compile_step(NullifierSpec::cat(1.0, +1), Scheme::sBs, 0.0, 20);
  EXPECT_LT((apply_step(QuantumState::density(dm(v)), st).matrix() - dm(v)).norm(), 1e-14);
}

TEST(Circuit, CatGeneratorStructure) {
  const int D = 30;
  const cplx alpha(1.2, 0.4);
  const auto g = factor_generators(NullifierSpec::cat(alpha, +1), D);
  const auto [x, p] = quadratures(D);
  const double x0 = std::sqrt(2.0) * alpha.real(), p0 = std::sqrt(2.0) * alpha.imag();
  const Mat I = Mat::Identity(D, D);
  const Mat ref = 0.5 * ((x * x - x0 * x0 * I) - (p * p - p0 * p0 * I));
  const int k = D - 2;
  EXPECT_LT((g.h1 - ref).topLeftCorner(k, k).norm(), 1e-12);
  EXPECT_LT((generator_A(g) - embed_conditional(Pauli::X, g.h1)).norm(), 1e-15);
}

TEST(Circuit, FactorsAreUnitary) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int D = 40;
  for (int k = 0; k < 8; ++k) {
    const NullifierSpec specs[] = {NullifierSpec::cps(0.6 * u(rng), 0.5 * u(rng)), NullifierSpec::tss(0.3 * u(rng)),
                                   NullifierSpec::sqcat(0.5 + u(rng), 0.5 * u(rng), 1)};
    for (const auto& s : specs) {
      const auto ab = build_AB(s, 0.05 + 0.5 * u(rng), D);
      EXPECT_LT((ab.A * ab.A.adjoint() - Mat::Identity(2 * D, 2 * D)).norm(), 1e-10);
      EXPECT_LT((ab.B * ab.B.adjoint() - Mat::Identity(2 * D, 2 * D)).norm(), 1e-10);
    }
  }
}

TEST(Circuit, SchemeProducts) {
  const int D = 20;
  const NullifierSpec s = NullifierSpec::sqcat(1.0, 0.5, 1);
  const double th = 0.13;
  const auto full = build_AB(s, th, D), half = build_AB(s, th / 2, D);
  EXPECT_LT((compile_step(s, Scheme::BsB, th, D).unitary - half.A * full.B * half.A).norm(), 1e-12);
  EXPECT_LT((compile_step(s, Scheme::sBs, th, D).unitary - half.B * full.A * half.B).norm(), 1e-12);
  EXPECT_LT((compile_step(s, Scheme::SharpenTrim, th, D, CompileMode::Direct, 0).unitary - full.A * full.B).norm(), 1e-12);
  EXPECT_LT((compile_step(s, Scheme::SharpenTrim, th, D, CompileMode::Direct, 1).unitary - full.B * full.A).norm(), 1e-12);
}

TEST(Circuit, BasisRotations) {
  const Eigen::Matrix2cd Z = pauli(Pauli::Z);
  const auto s = NullifierSpec::cat(1.0, 1);
  const CompiledFactor a = compile_factor(s, {'A', 1.0}, 0.1), b = compile_factor(s, {'B', 1.0}, 0.1);
  EXPECT_LT((a.basis * Z * a.basis.adjoint() - pauli(Pauli::X)).norm(), 1e-15);
  EXPECT_LT((b.basis * Z * b.basis.adjoint() + pauli(Pauli::Y)).norm(), 1e-15);
}

TEST(Circuit, CompiledMatchesDirect) {
  // exact agreement (no phase alignment): branch phases become a relative qubit phase
  const int D = 30;
  for (const auto& s : all_families()) {
    for (Scheme sc : {Scheme::SharpenTrim, Scheme::BsB, Scheme::sBs}) {
      const double th = s.family == Family::SqCAT ? 0.13 : 0.1;
      const Mat direct = compile_step(s, sc, th, 2 * D, CompileMode::Direct, 1).unitary;
      const Mat comp = compile_step(s, sc, th, 2 * D, CompileMode::Compiled, 1).unitary;
      EXPECT_LT(joint_interior_distance(comp, direct, 2 * D, D, false), 1e-6) << to_string(s.family) << " " << to_string(sc);
    }
  }
}

TEST(Circuit, CompiledCpsBFactor) {
  const int D = 40;
  const NullifierSpec s = NullifierSpec::cps(r5, 0.3);
  const auto g = factor_generators(s, 2 * D);
  const Mat direct = pauli_conditional_exp(Pauli::Y, -1.0, g.h2, 0.1);
  const Mat comp = compiled_factor_unitary(compile_factor(s, {'B', 1.0}, 0.1), 2 * D);
  EXPECT_LT(joint_interior_distance(comp, direct, 2 * D, D, true), 1e-6);
}

TEST(Circuit, GateJson) {
  const StepChannel st = compile_step(NullifierSpec::sqcat(1.0, 0.5, 1), Scheme::BsB, 0.13, 20, CompileMode::Compiled);
  const auto j = nlohmann::json::parse(gates_to_json(st, 1.3e-8));
  ASSERT_EQ(j.size(), 3u);
  EXPECT_EQ(j[0]["factor"], "A");
  EXPECT_NEAR(j[0]["duration_s"].get<double>(), 0.65e-8, 1e-20);
  EXPECT_EQ(j[1]["branches"].size(), 2u);
  EXPECT_EQ(j[1]["branches"][0]["gates"][0]["kind"], "squeeze");
}

TEST(Circuit, ParityConservation) {
  const int D = 30;
  const Mat P = kron(Mat::Identity(2, 2), parity_op(D));
  for (const auto& s : {NullifierSpec::cat(2.0, -1), NullifierSpec::sqcat(1.0, 0.5, 1)})
    for (Scheme sc : {Scheme::SharpenTrim, Scheme::BsB, Scheme::sBs}) {
      const Mat U = compile_step(s, sc, 0.13, D).unitary;
      EXPECT_LT(commutator(U, P).norm(), 1e-10);
    }
}

TEST(Circuit, KrausStepIsCptp) {
  const int D = 30;
  for (const auto& s : all_families()) {
    const auto K = step_kraus(compile_step(s, Scheme::sBs, 0.3, D).unitary);
    Mat sum = Mat::Zero(D, D);
    for (const auto& k : K) sum += k.adjoint() * k;
    const int m = interior_size(D) - 4;
    EXPECT_LT((sum - Mat::Identity(D, D)).topLeftCorner(m, m).norm(), 1e-6) << to_string(s.family);
  }
  const Vec c = coherent_state(0.7, D);
  const auto traj = run_protocol(dm(c), NullifierSpec::cat(1.0, 1), Scheme::BsB, 10, 0.2);
  ASSERT_EQ(traj.size(), 11u);
  EXPECT_EQ(traj[0], dm(c));
  for (const auto& r : traj) EXPECT_NO_THROW(check_cptp_state(r));
}

TEST(Circuit, StepReducesPurityOutsideKernel) {
  const int D = 30;
  const NullifierSpec s = NullifierSpec::sqvac(0.4);
  const Mat vac = dm(fock_state(0, D));
  const Mat out = run_protocol(vac, s, Scheme::sBs, 1, 0.2).back();
  EXPECT_LT((out * out).trace().real(), 1.0 - 1e-3);
  const Vec target = build_state_vector(s, D, {});
  const Mat kept = run_protocol(dm(target), s, Scheme::sBs, 1, 0.2).back();
  EXPECT_GT((kept * kept).trace().real(), 1.0 - 1e-5);
}

TEST(Circuit, ExcitationDecayRate) {
  // discrete protocol approximates D[delta] at rate (Gamma dt)^2 per step
  const int D = 40;
  const NullifierSpec s = NullifierSpec::sqvac(0.4);
  const double th = 0.1;
  const int N = 200;
  const auto traj = run_protocol(dm(fock_state(0, D)), s, Scheme::sBs, N, th);
  std::vector<double> n, y;
  for (int k = 0; k <= N; k += 10) {
    n.push_back(k);
    y.push_back(std::log(mean_excitation(s, traj[k])));
  }
  const LinearFit f = linear_fit(n, y);
  EXPECT_NEAR(-f.slope / (th * th), 1.0, 0.1);
}

TEST(Circuit, SharpenTrimAlternates) {
  const int D = 20;
  const NullifierSpec s = NullifierSpec::cat(1.0, 1);
  const Mat r0 = dm(coherent_state(0.5, D));
  const auto traj = run_protocol(r0, s, Scheme::SharpenTrim, 3, 0.2);
  Mat r = r0;
  for (int k = 0; k < 3; ++k) r = apply_kraus(step_kraus(compile_step(s, Scheme::SharpenTrim, 0.2, D, CompileMode::Direct, k).unitary), r);
  EXPECT_LT((traj.back() - r).norm(), 1e-13);
}

TEST(Circuit, NoiselessPiecewisePathMatchesKraus) {
  // the Lindblad step with zero rates is just the unitary with ancilla reset
  const int D = 12;
  const NullifierSpec s = NullifierSpec::sqvac(0.3);
  const double gamma = 1e7, dt = 2e-8;
  NoiseModel none;
  none.dephasing = 1e-30;
  const auto ctx = noisy_step_context(s, Scheme::BsB, 0, gamma, dt, none, D);
  const Mat r0 = dm(coherent_state(0.4, D));
  const Mat a = apply_noisy_step(r0, ctx);
  const Mat b = apply_kraus(step_kraus(compile_step(s, Scheme::BsB, gamma * dt, D).unitary), r0);
  EXPECT_LT((a - b).norm(), 1e-8);
}

TEST(Circuit, NoisyStepIsCptpAndWeaklyPerturbed) {
  const int D = 16;
  const NullifierSpec s = NullifierSpec::cps(r5, 0.3);
  NoiseModel nm;
  nm.photon_loss = 5e3;
  nm.qubit_T1 = nm.qubit_T2 = 1e-4;
  ProtocolOptions po;
  po.noise = &nm;
  const Mat vac = dm(fock_state(0, D));
  const auto noisy = run_protocol(vac, s, Scheme::sBs, 4, 0.5, po);
  const auto clean = run_protocol(vac, s, Scheme::sBs, 4, 0.5);
  for (const auto& r : noisy) EXPECT_NO_THROW(check_cptp_state(r));
  EXPECT_LT((noisy.back() - clean.back()).norm(), 0.02);
  EXPECT_GT((noisy.back() - clean.back()).norm(), 1e-6);
}
