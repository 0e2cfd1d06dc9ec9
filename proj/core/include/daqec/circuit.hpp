#pragma once

#include <string>
#include <vector>

#include "daqec/gaussian.hpp"
#include "daqec/lindblad.hpp"
#include "daqec/states.hpp"

namespace daqec {

enum class Scheme { SharpenTrim, BsB, sBs };

const char* to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);

// One Trotter factor: 'A' or 'B' evolved for frac * dt.
struct Factor {
  char which = 'A';
  double frac = 1.0;
};

// Factors of step k in the order they act (rightmost operator first).
// SharpenTrim: even k is Sharpen = A B, odd k is Trim = B A.
std::vector<Factor> step_factors(Scheme s, int step_index);
// Number of distinct step channels the scheme cycles through.
int scheme_period(Scheme s);

// Hermitian parts of the nullifier: h1 = (d + d^dag)/2, h2 = (d - d^dag)/(2i).
struct FactorGenerators {
  Mat h1;
  Mat h2;
};

FactorGenerators factor_generators(const NullifierSpec& spec, int D);
// X (x) h1 and -Y (x) h2
JointOperator generator_A(const FactorGenerators& g);
JointOperator generator_B(const FactorGenerators& g);

// exp(-i phi P (x) h) for a Pauli P, via cos/sin of h.
JointOperator pauli_conditional_exp(Pauli p, double sign, const Mat& h, double phi);

struct ABPair {
  JointOperator A;
  JointOperator B;
};
ABPair build_AB(const NullifierSpec& spec, double gamma_dt, int D);

enum class CompileMode { Direct, Compiled };

// Gate-level form of one factor: basis . blockdiag(branch[0], branch[1]) . basis^dag,
// branch 0 is qubit Z = +1. Branch global phases carry the constant terms of
// the generator; their difference is a qubit Z-phase.
struct CompiledFactor {
  Factor factor;
  Eigen::Matrix2cd basis;
  std::string basis_name;
  GaussianGateSeq branch[2];
  double duration = 0.0;  // in units of dt
};

struct StepChannel {
  Scheme scheme = Scheme::sBs;
  int step_index = 0;
  double gamma_dt = 0.0;
  CompileMode mode = CompileMode::Direct;
  JointOperator unitary;
  std::vector<CompiledFactor> gates;  // filled in compiled mode
};

CompiledFactor compile_factor(const NullifierSpec& spec, const Factor& f, double gamma_dt);
JointOperator compiled_factor_unitary(const CompiledFactor& cf, int D);

StepChannel compile_step(const NullifierSpec& spec, Scheme scheme, double gamma_dt, int D,
                         CompileMode mode = CompileMode::Direct, int step_index = 0);

// JSON list of gate records {kind, parameters per branch, duration}.
std::string gates_to_json(const StepChannel& step, double dt_seconds);

// Ancilla ground state index (see NoiseModel::joint_jumps).
inline constexpr int kAncillaGround = 1;

// Mode-space Kraus operators <q| U |g> of a noiseless step.
std::vector<Mat> step_kraus(const JointOperator& U);
Mat apply_kraus(const std::vector<Mat>& K, const Mat& rho);

Mat tensor_ground(const Mat& rho_mode);
Mat trace_qubit(const Mat& rho_joint);

struct NoisyStepContext {
  // One Liouvillian per factor of the step, plus wall-clock durations.
  std::vector<Liouvillian> pieces;
  std::vector<double> durations;
};

NoisyStepContext noisy_step_context(const NullifierSpec& spec, Scheme scheme, int step_index, double gamma_hz,
                                    double dt, const NoiseModel& noise, int D);

// rho_mode -> Tr_q[evolve(|g><g| (x) rho_mode)] with the factor Hamiltonians
// applied piecewise; the qubit is then reset.
Mat apply_noisy_step(const Mat& rho_mode, const NoisyStepContext& ctx, const EvolveOptions& opt = {});

QuantumState apply_step(const QuantumState& state, const StepChannel& step);

struct ProtocolOptions {
  double gamma_hz = 1e7;
  CompileMode mode = CompileMode::Direct;
  const NoiseModel* noise = nullptr;  // null or noise-free => Kraus path
  bool check_cptp = true;
  EvolveOptions evolve;
};

// States after each step; element 0 is the initial state.
std::vector<Mat> run_protocol(const Mat& initial, const NullifierSpec& spec, Scheme scheme, int N, double gamma_dt,
                              const ProtocolOptions& opt = {});

// Trace/Hermiticity/positivity check used on every step when requested.
void check_cptp_state(const Mat& rho, double trace_tol = 1e-8, double herm_tol = 1e-10, double eig_tol = 1e-8);

}  // namespace daqec
