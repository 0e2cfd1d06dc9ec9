#include <benchmark/benchmark.h>

#include "daqec/analysis.hpp"
#include "daqec/circuit.hpp"
#include "daqec/fock.hpp"
#include "daqec/states.hpp"

using namespace daqec;

namespace {

const NullifierSpec kSqCat = NullifierSpec::sqcat(1.0, 0.5, +1);

Mat projector(const Vec& v) { return v * v.adjoint(); }

void BM_ExpmHermitian(benchmark::State& state) {
  const int D = static_cast<int>(state.range(0));
  const Mat a = annihilation(D);
  const Mat H = a.adjoint() * a.adjoint() * a * a + a + a.adjoint();
  for (auto _ : state) benchmark::DoNotOptimize(expm_hermitian(H, 0.1));
}
BENCHMARK(BM_ExpmHermitian)->Arg(40)->Arg(80)->Unit(benchmark::kMillisecond);

void BM_MatExpGeneral(benchmark::State& state) {
  const int D = static_cast<int>(state.range(0));
  const Mat a = annihilation(D);
  const Mat G = a * a - 0.3 * a.adjoint();
  for (auto _ : state) benchmark::DoNotOptimize(mat_exp(G, cplx(0.1, 0.0)));
}
BENCHMARK(BM_MatExpGeneral)->Arg(40)->Arg(80)->Unit(benchmark::kMillisecond);

void BM_KrausStep(benchmark::State& state) {
  const int D = static_cast<int>(state.range(0));
  const StepChannel step = compile_step(kSqCat, Scheme::BsB, 0.13, D);
  const auto K = step_kraus(step.unitary);
  Mat rho = projector(fock_state(0, D));
  for (auto _ : state) {
    rho = apply_kraus(K, rho);
    benchmark::DoNotOptimize(rho.data());
  }
}
BENCHMARK(BM_KrausStep)->Arg(40)->Arg(60)->Unit(benchmark::kMillisecond);

void BM_CompileStep(benchmark::State& state) {
  const int D = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(compile_step(kSqCat, Scheme::sBs, 0.13, D).unitary.data());
}
BENCHMARK(BM_CompileStep)->Arg(40)->Unit(benchmark::kMillisecond);

void BM_NoisyStep(benchmark::State& state) {
  const int D = static_cast<int>(state.range(0));
  NoiseModel noise;
  noise.dephasing = 5e3;
  noise.qubit_T1 = 1e-4;
  noise.qubit_T2 = 1e-4;
  const auto ctx = noisy_step_context(kSqCat, Scheme::BsB, 0, 1e7, 1e-8, noise, D);
  const Mat rho = projector(build_state_vector(kSqCat, D, {1e-4, 0}));
  for (auto _ : state) benchmark::DoNotOptimize(apply_noisy_step(rho, ctx).data());
}
BENCHMARK(BM_NoisyStep)->Arg(30)->Arg(40)->Unit(benchmark::kMillisecond);

void BM_PerturbativeA(benchmark::State& state) {
  const int D = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(perturbative_A(kSqCat, D).A);
}
BENCHMARK(BM_PerturbativeA)->Arg(40)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
