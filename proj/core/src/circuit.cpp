#include "daqec/circuit.hpp"

#include <cmath>
#include <numbers>

#include <json.hpp>

namespace daqec {

const char* to_string(Scheme s) {
  switch (s) {
    case Scheme::SharpenTrim: return "ST";
    case Scheme::BsB: return "BsB";
    case Scheme::sBs: return "sBs";
  }
  return "?";
}

Scheme scheme_from_string(const std::string& s) {
  if (s == "ST" || s == "SharpenTrim") return Scheme::SharpenTrim;
  if (s == "BsB") return Scheme::BsB;
  if (s == "sBs") return Scheme::sBs;
  throw Error(ErrorKind::ConfigError, "unknown scheme '" + s + "' (expected ST, BsB or sBs)");
}

std::vector<Factor> step_factors(Scheme s, int step_index) {
  switch (s) {
    case Scheme::SharpenTrim:
      // Sharpen = A B acts B first; Trim = B A acts A first
      if (step_index % 2 == 0) return {{'B', 1.0}, {'A', 1.0}};
      return {{'A', 1.0}, {'B', 1.0}};
    case Scheme::BsB: return {{'A', 0.5}, {'B', 1.0}, {'A', 0.5}};
    case Scheme::sBs: return {{'B', 0.5}, {'A', 1.0}, {'B', 0.5}};
  }
  return {};
}

int scheme_period(Scheme s) { return s == Scheme::SharpenTrim ? 2 : 1; }

FactorGenerators factor_generators(const NullifierSpec& spec, int D) {
  const Mat d = build_nullifier(spec, D);
  FactorGenerators g;
  g.h1 = 0.5 * (d + d.adjoint());
  g.h2 = (d - d.adjoint()) / (2.0 * I1);
  g.h1 = 0.5 * (g.h1 + g.h1.adjoint()).eval();
  g.h2 = 0.5 * (g.h2 + g.h2.adjoint()).eval();
  return g;
}

JointOperator generator_A(const FactorGenerators& g) { return embed_conditional(Pauli::X, g.h1); }
JointOperator generator_B(const FactorGenerators& g) { return -embed_conditional(Pauli::Y, g.h2); }

JointOperator pauli_conditional_exp(Pauli p, double sign, const Mat& h, double phi) {
  // (P (x) h)^2 = 1 (x) h^2, so exp(-i phi s P (x) h) = 1 (x) cos(phi h) - i s P (x) sin(phi h)
  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  if (es.info() != Eigen::Success) throw Error(ErrorKind::NumericError, "eigensolver failed");
  const Mat& V = es.eigenvectors();
  const Eigen::VectorXd w = es.eigenvalues() * phi;
  const Mat C = V * w.array().cos().matrix().cast<cplx>().asDiagonal() * V.adjoint();
  const Mat S = V * w.array().sin().matrix().cast<cplx>().asDiagonal() * V.adjoint();
  return kron(Mat::Identity(2, 2), C) - I1 * sign * kron(pauli(p), S);
}

namespace {
JointOperator direct_factor(const FactorGenerators& g, const Factor& f, double gamma_dt) {
  const double phi = gamma_dt * f.frac;
  if (f.which == 'A') return pauli_conditional_exp(Pauli::X, +1.0, g.h1, phi);
  return pauli_conditional_exp(Pauli::Y, -1.0, g.h2, phi);
}

Eigen::Matrix2cd hadamard() {
  Eigen::Matrix2cd h;
  h << 1, 1, 1, -1;
  return h / std::sqrt(2.0);
}

// exp(-i pi X / 4) maps Z to -Y
Eigen::Matrix2cd x_quarter() {
  Eigen::Matrix2cd v;
  v << 1, -I1, -I1, 1;
  return v / std::sqrt(2.0);
}
}  // namespace

ABPair build_AB(const NullifierSpec& spec, double gamma_dt, int D) {
  const FactorGenerators g = factor_generators(spec, D);
  return {direct_factor(g, {'A', 1.0}, gamma_dt), direct_factor(g, {'B', 1.0}, gamma_dt)};
}

CompiledFactor compile_factor(const NullifierSpec& spec, const Factor& f, double gamma_dt) {
  spec.validate();
  CompiledFactor cf;
  cf.factor = f;
  cf.duration = f.frac;
  const bool isA = f.which == 'A';
  cf.basis = isA ? hadamard() : x_quarter();
  cf.basis_name = isA ? "H" : "Rx(pi/2)";
  const double phi = gamma_dt * f.frac;
  const double s2 = std::sqrt(2.0);
  for (int b = 0; b < 2; ++b) {
    const double z = b == 0 ? 1.0 : -1.0;
    const double zp = z * phi;  // branch operator is exp(-i z phi h)
    GaussianGateSeq seq;
    switch (spec.family) {
      case Family::SqVac:
      case Family::CPS:
        if (isA) {
          const double c = zp * std::exp(-spec.r) / s2;  // exp(-i c x)
          seq.gates = {GaussianGate::D(cplx(0.0, -c / s2))};
        } else if (spec.family == Family::SqVac) {
          const double c = zp * std::exp(spec.r) / s2;  // exp(-i c p)
          seq.gates = {GaussianGate::D(cplx(c / s2, 0.0))};
        } else {
          seq = synth_cps_B(-zp * std::exp(spec.r) / s2, spec.eta);
        }
        break;
      case Family::TSS:
        seq = isA ? synth_tss_A(zp / 2, spec.xi) : synth_tss_B(zp / 2, spec.xi);
        break;
      case Family::CAT:
      case Family::SqCAT: {
        const cplx b2 = spec.beta() * spec.beta();
        if (isA) {
          seq = synth_sqcat_A(zp / 2, spec.r);
          seq.global_phase += zp * b2.real();
        } else {
          seq.gates = {GaussianGate::S(-zp)};
          seq.global_phase = zp * b2.imag();
        }
        break;
      }
    }
    cf.branch[b] = seq;
  }
  return cf;
}

JointOperator compiled_factor_unitary(const CompiledFactor& cf, int D) {
  Mat U = Mat::Zero(2 * D, 2 * D);
  U.topLeftCorner(D, D) = seq_to_fock(cf.branch[0], D);
  U.bottomRightCorner(D, D) = seq_to_fock(cf.branch[1], D);
  const Mat W = embed_qubit(cf.basis, D);
  return W * U * W.adjoint();
}

StepChannel compile_step(const NullifierSpec& spec, Scheme scheme, double gamma_dt, int D, CompileMode mode,
                         int step_index) {
  spec.validate();
  StepChannel st;
  st.scheme = scheme;
  st.step_index = step_index;
  st.gamma_dt = gamma_dt;
  st.mode = mode;
  st.unitary = Mat::Identity(2 * D, 2 * D);
  const auto factors = step_factors(scheme, step_index);
  if (mode == CompileMode::Direct) {
    const FactorGenerators g = factor_generators(spec, D);
    for (const auto& f : factors) st.unitary = direct_factor(g, f, gamma_dt) * st.unitary;
  } else {
    for (const auto& f : factors) {
      st.gates.push_back(compile_factor(spec, f, gamma_dt));
      st.unitary = compiled_factor_unitary(st.gates.back(), D) * st.unitary;
    }
  }
  return st;
}

std::string gates_to_json(const StepChannel& step, double dt_seconds) {
  using nlohmann::json;
  json out = json::array();
  for (const auto& cf : step.gates) {
    json rec;
    rec["factor"] = std::string(1, cf.factor.which);
    rec["duration_s"] = cf.duration * dt_seconds;
    rec["basis_rotation"] = cf.basis_name;
    rec["qubit_z_phase"] = 0.5 * (cf.branch[0].global_phase - cf.branch[1].global_phase);
    json branches = json::array();
    for (int b = 0; b < 2; ++b) {
      json gl = json::array();
      for (const auto& g : cf.branch[b].gates) {
        json jg;
        jg["kind"] = to_string(g.kind);
        if (g.kind == GaussianGate::Kind::Displacement) {
          jg["alpha"] = {g.alpha.real(), g.alpha.imag()};
        } else {
          jg[g.kind == GaussianGate::Kind::Rotation ? "phi" : "r"] = g.value;
        }
        gl.push_back(jg);
      }
      branches.push_back({{"z", b == 0 ? 1 : -1}, {"gates", gl}, {"phase", cf.branch[b].global_phase}});
    }
    rec["branches"] = branches;
    out.push_back(rec);
  }
  return out.dump(2);
}

std::vector<Mat> step_kraus(const JointOperator& U) {
  const Eigen::Index D = U.rows() / 2;
  return {U.block(0, kAncillaGround * D, D, D), U.block(D, kAncillaGround * D, D, D)};
}

Mat apply_kraus(const std::vector<Mat>& K, const Mat& rho) {
  Mat out = Mat::Zero(rho.rows(), rho.cols());
  for (const auto& k : K) out.noalias() += k * rho * k.adjoint();
  return 0.5 * (out + out.adjoint());
}

Mat tensor_ground(const Mat& rho_mode) {
  const Eigen::Index D = rho_mode.rows();
  Mat r = Mat::Zero(2 * D, 2 * D);
  r.block(kAncillaGround * D, kAncillaGround * D, D, D) = rho_mode;
  return r;
}

Mat trace_qubit(const Mat& rho_joint) {
  const Eigen::Index D = rho_joint.rows() / 2;
  return rho_joint.topLeftCorner(D, D) + rho_joint.bottomRightCorner(D, D);
}

NoisyStepContext noisy_step_context(const NullifierSpec& spec, Scheme scheme, int step_index, double gamma_hz,
                                    double dt, const NoiseModel& noise, int D) {
  noise.validate();
  const FactorGenerators g = factor_generators(spec, D);
  const Mat GA = generator_A(g), GB = generator_B(g);
  const auto jumps = noise.joint_jumps(D);
  NoisyStepContext ctx;
  for (const auto& f : step_factors(scheme, step_index)) {
    ctx.pieces.emplace_back(gamma_hz * (f.which == 'A' ? GA : GB), jumps);
    ctx.durations.push_back(f.frac * dt);
  }
  return ctx;
}

Mat apply_noisy_step(const Mat& rho_mode, const NoisyStepContext& ctx, const EvolveOptions& opt) {
  Mat r = tensor_ground(rho_mode);
  for (size_t k = 0; k < ctx.pieces.size(); ++k) r = evolve(r, ctx.pieces[k], ctx.durations[k], opt);
  const Mat m = trace_qubit(r);
  return 0.5 * (m + m.adjoint());
}

QuantumState apply_step(const QuantumState& state, const StepChannel& step) {
  if (state.joint()) {
    // joint input: act on the mode marginal after discarding the ancilla
    return QuantumState::density(apply_kraus(step_kraus(step.unitary), trace_qubit(state.rho())));
  }
  if (state.cutoff() * 2 != step.unitary.rows()) throw Error(ErrorKind::ShapeError, "step/state cutoff mismatch");
  const Mat out = apply_kraus(step_kraus(step.unitary), state.rho());
  check_cptp_state(out);
  return QuantumState::density(out);
}

void check_cptp_state(const Mat& rho, double trace_tol, double herm_tol, double eig_tol) {
  const double tr = std::abs(rho.trace() - cplx(1.0));
  if (tr > trace_tol) throw Error(ErrorKind::IntegratorError, "trace drift " + std::to_string(tr));
  const double he = hermiticity_error(rho);
  if (he > herm_tol) throw Error(ErrorKind::IntegratorError, "Hermiticity error " + std::to_string(he));
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -eig_tol)
    throw Error(ErrorKind::IntegratorError, "negative eigenvalue " + std::to_string(es.eigenvalues().minCoeff()));
}

std::vector<Mat> run_protocol(const Mat& initial, const NullifierSpec& spec, Scheme scheme, int N, double gamma_dt,
                              const ProtocolOptions& opt) {
  if (N < 0) throw Error(ErrorKind::SpecError, "depth must be >= 0");
  const int D = static_cast<int>(initial.rows());
  std::vector<Mat> traj;
  traj.reserve(N + 1);
  traj.push_back(initial);
  if (N == 0) return traj;
  const int period = scheme_period(scheme);
  const bool noisy = opt.noise && opt.noise->any();
  std::vector<std::vector<Mat>> kraus;
  std::vector<NoisyStepContext> ctx;
  for (int k = 0; k < period; ++k) {
    if (noisy) {
      ctx.push_back(noisy_step_context(spec, scheme, k, opt.gamma_hz, gamma_dt / opt.gamma_hz, *opt.noise, D));
    } else {
      kraus.push_back(step_kraus(compile_step(spec, scheme, gamma_dt, D, opt.mode, k).unitary));
    }
  }
  Mat rho = initial;
  for (int n = 0; n < N; ++n) {
    rho = noisy ? apply_noisy_step(rho, ctx[n % period], opt.evolve) : apply_kraus(kraus[n % period], rho);
    if (opt.check_cptp) check_cptp_state(rho);
    traj.push_back(rho);
  }
  return traj;
}

}  // namespace daqec
