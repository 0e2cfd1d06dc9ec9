#include "daqec/lindblad.hpp"

#include <algorithm>
#include <cmath>
#include <unsupported/Eigen/MatrixFunctions>

namespace daqec {

void NoiseModel::validate() const {
  if (photon_loss < 0 || dephasing < 0) throw Error(ErrorKind::NegativeRate, "noise rates must be >= 0");
  if (!(qubit_T1 > 0) || !(qubit_T2 > 0)) throw Error(ErrorKind::NegativeRate, "T1 and T2 must be positive");
  if (std::isfinite(qubit_T1) && std::isfinite(qubit_T2) && qubit_T2 > 2 * qubit_T1 * (1 + 1e-12))
    throw Error(ErrorKind::NegativeRate, "T2 must not exceed 2 T1");
  if (!std::isfinite(qubit_T2) && std::isfinite(qubit_T1))
    throw Error(ErrorKind::NegativeRate, "finite T1 requires finite T2 <= 2 T1");
}

double NoiseModel::qubit_pure_dephasing() const {
  const double g2 = std::isfinite(qubit_T2) ? 1.0 / qubit_T2 : 0.0;
  const double g1 = std::isfinite(qubit_T1) ? 1.0 / qubit_T1 : 0.0;
  return std::max(0.0, g2 - 0.5 * g1);
}

std::vector<Jump> NoiseModel::mode_jumps(int D) const {
  std::vector<Jump> j;
  if (photon_loss > 0) j.push_back({photon_loss, annihilation(D)});
  if (dephasing > 0) j.push_back({dephasing, number_op(D)});
  return j;
}

std::vector<Jump> NoiseModel::joint_jumps(int D) const {
  std::vector<Jump> j;
  const Mat Iq = Mat::Identity(2, 2);
  for (auto& m : mode_jumps(D)) j.push_back({m.rate, kron(Iq, m.op)});
  if (std::isfinite(qubit_T1)) {
    Eigen::Matrix2cd lower;
    lower << 0, 0, 1, 0;  // |1><0|
    j.push_back({1.0 / qubit_T1, embed_qubit(lower, D)});
  }
  const double gphi = qubit_pure_dephasing();
  if (gphi > 0) j.push_back({0.5 * gphi, embed_qubit(pauli(Pauli::Z), D)});
  return j;
}

namespace {
double sparse_norm_bound(const SpMat& A) {
  // sqrt(||A||_1 ||A||_inf) >= ||A||_2
  Eigen::VectorXd col = Eigen::VectorXd::Zero(A.cols()), row = Eigen::VectorXd::Zero(A.rows());
  for (int k = 0; k < A.outerSize(); ++k)
    for (SpMat::InnerIterator it(A, k); it; ++it) {
      col(it.col()) += std::abs(it.value());
      row(it.row()) += std::abs(it.value());
    }
  return std::sqrt(col.maxCoeff() * row.maxCoeff());
}
}  // namespace

Liouvillian::Liouvillian(Mat H, std::vector<Jump> jumps) : H_(std::move(H)), jumps_(std::move(jumps)) {
  dim_ = static_cast<int>(H_.rows());
  if (H_.cols() != dim_) throw Error(ErrorKind::ShapeError, "Hamiltonian must be square");
  for (const auto& j : jumps_) {
    if (!std::isfinite(j.rate) || j.rate < 0) throw Error(ErrorKind::NegativeRate, "jump rate must be finite and >= 0");
    if (j.op.rows() != dim_ || j.op.cols() != dim_) throw Error(ErrorKind::ShapeError, "jump operator dimension mismatch");
  }
  Mat Heff = H_;
  for (const auto& j : jumps_) {
    Heff -= 0.5 * I1 * j.rate * (j.op.adjoint() * j.op);
    sjumps_.push_back(to_sparse(j.op));
    rates_.push_back(j.rate);
  }
  Heff_ = to_sparse(Heff);
  norm_bound_ = 2.0 * sparse_norm_bound(Heff_);
  for (size_t k = 0; k < sjumps_.size(); ++k) {
    const double n = sparse_norm_bound(sjumps_[k]);
    norm_bound_ += rates_[k] * n * n;
  }
}

Liouvillian build_liouvillian(const Mat* H, const std::vector<Jump>& jumps, int dim) {
  Mat h = H ? *H : Mat::Zero(dim, dim);
  if (h.rows() != dim || h.cols() != dim) throw Error(ErrorKind::ShapeError, "Hamiltonian dimension mismatch");
  for (const auto& j : jumps) {
    if (j.rate < 0) throw Error(ErrorKind::NegativeRate, "jump rate must be >= 0");
    if (j.op.rows() != dim || j.op.cols() != dim) throw Error(ErrorKind::ShapeError, "jump dimension mismatch");
  }
  return Liouvillian(std::move(h), jumps);
}

Mat Liouvillian::apply(const Mat& rho) const {
  const Mat Hr = Heff_ * rho;
  // rho Heff^dag = (Heff rho^dag)^dag
  Mat out = -I1 * (Hr - (Heff_ * rho.adjoint()).adjoint());
  for (size_t k = 0; k < sjumps_.size(); ++k) {
    const Mat Jr = sjumps_[k] * rho;
    out += rates_[k] * (sjumps_[k] * Jr.adjoint()).adjoint();
  }
  return out;
}

Mat superop_hamiltonian(const Mat& H) {
  const Mat I = Mat::Identity(H.rows(), H.cols());
  return -I1 * (kron(I, H) - kron(H.transpose(), I));
}

Mat superop_dissipator(const Mat& L) {
  const Mat I = Mat::Identity(L.rows(), L.cols());
  const Mat LdL = L.adjoint() * L;
  return kron(L.conjugate(), L) - 0.5 * kron(I, LdL) - 0.5 * kron(LdL.transpose(), I);
}

Mat Liouvillian::superoperator() const {
  Mat S = superop_hamiltonian(H_);
  for (const auto& j : jumps_) S += j.rate * superop_dissipator(j.op);
  return S;
}

Mat unvectorize(const Eigen::VectorXcd& v, int d) { return Eigen::Map<const Mat>(v.data(), d, d); }

namespace {

Mat hermitize(const Mat& m) { return 0.5 * (m + m.adjoint()); }

Mat evolve_dense(const Mat& rho0, const Liouvillian& L, double t) {
  const Mat E = (L.superoperator() * t).exp();
  return unvectorize(E * vectorize(rho0), L.dim());
}

// Truncated Taylor series of exp(hL) on the state, with substeps chosen so
// that h * norm_bound stays below a few units.
Mat evolve_taylor(const Mat& rho0, const Liouvillian& L, double t, double dt_max) {
  const double b = L.norm_bound();
  int steps = std::max(1, static_cast<int>(std::ceil(b * t / 3.0)));
  if (std::isfinite(dt_max) && dt_max > 0) steps = std::max(steps, static_cast<int>(std::ceil(t / dt_max)));
  const double h = t / steps;
  Mat rho = rho0;
  for (int s = 0; s < steps; ++s) {
    Mat term = rho;
    Mat sum = rho;
    for (int k = 1; k < 200; ++k) {
      term = L.apply(term) * (h / k);
      sum += term;
      if (k > b * h && term.norm() <= 1e-16 * sum.norm()) break;
      if (k == 199) throw Error(ErrorKind::IntegratorError, "Taylor series did not converge");
    }
    rho = hermitize(sum);
  }
  return rho;
}

// Dormand-Prince 5(4) with Hermitian re-symmetrization after each accepted step.
Mat evolve_rk45(const Mat& rho0, const Liouvillian& L, double t, const EvolveOptions& opt) {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;
  (void)c2; (void)c3; (void)c4; (void)c5;

  Mat y = rho0;
  double time = 0.0;
  double h = std::min(t, std::min(opt.dt_max, 1.0 / std::max(L.norm_bound(), 1e-300)));
  Mat k1 = L.apply(y);
  int guard = 0;
  while (time < t) {
    if (++guard > 10'000'000) throw Error(ErrorKind::StiffnessError, "RK45 exceeded step budget");
    h = std::min(h, t - time);
    const Mat k2 = L.apply(y + h * (a21 * k1));
    const Mat k3 = L.apply(y + h * (a31 * k1 + a32 * k2));
    const Mat k4 = L.apply(y + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const Mat k5 = L.apply(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const Mat k6 = L.apply(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const Mat y5 = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const Mat k7 = L.apply(y5);
    const Mat err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const Eigen::ArrayXXd scale = opt.atol + opt.rtol * y.cwiseAbs().cwiseMax(y5.cwiseAbs()).array();
    const double en = std::sqrt((err.cwiseAbs().array() / scale).square().mean());
    if (en <= 1.0) {
      time += h;
      y = hermitize(y5);
      k1 = L.apply(y);
    }
    const double fac = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
    h = std::min(h * fac, opt.dt_max);
    if (h < 1e-14 * std::max(t, 1e-300)) throw Error(ErrorKind::StiffnessError, "RK45 step size underflow");
  }
  return y;
}

}  // namespace

Mat evolve(const Mat& rho0, const Liouvillian& L, double t, const EvolveOptions& opt) {
  if (rho0.rows() != L.dim() || rho0.cols() != L.dim()) throw Error(ErrorKind::ShapeError, "state/Liouvillian dimension mismatch");
  if (t < 0) throw Error(ErrorKind::IntegratorError, "negative evolution time");
  if (t == 0) return rho0;
  EvolveMethod m = opt.method;
  if (m == EvolveMethod::Auto) m = L.dim() <= opt.dense_max_dim ? EvolveMethod::Dense : EvolveMethod::Taylor;
  Mat out;
  switch (m) {
    case EvolveMethod::Dense: out = evolve_dense(rho0, L, t); break;
    case EvolveMethod::RK45: out = evolve_rk45(rho0, L, t, opt); break;
    default: out = evolve_taylor(rho0, L, t, opt.dt_max); break;
  }
  out = hermitize(out);
  const double drift = std::abs(out.trace() - rho0.trace());
  if (drift > 1e-8) throw Error(ErrorKind::IntegratorError, "trace drift " + std::to_string(drift));
  return out;
}

QuantumState evolve(const QuantumState& rho0, const Liouvillian& L, double t, const EvolveOptions& opt) {
  return QuantumState::density(evolve(rho0.rho(), L, t, opt), rho0.joint());
}

Mat dephase(const Mat& rho, double kappa_t) {
  Mat out = rho;
  for (Eigen::Index m = 0; m < rho.cols(); ++m)
    for (Eigen::Index n = 0; n < rho.rows(); ++n) {
      const double d = static_cast<double>(n - m);
      out(n, m) *= std::exp(-0.5 * kappa_t * d * d);
    }
  return out;
}

Mat RestrictedLiouvillian::restrict_state(const Mat& rho) const {
  const int k = static_cast<int>(index.size());
  Mat r(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) r(i, j) = rho(index[i], index[j]);
  return r;
}

Mat RestrictedLiouvillian::embed_state(const Mat& rho_sub) const {
  Mat r = Mat::Zero(full_dim, full_dim);
  const int k = static_cast<int>(index.size());
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) r(index[i], index[j]) = rho_sub(i, j);
  return r;
}

RestrictedLiouvillian parity_restrict(const Liouvillian& L, ParitySector sector) {
  const int d = L.dim();
  const Mat P = parity_op(d);
  auto commutes = [&](const Mat& A) {
    // jump operators may also anticommute (e.g. a); only commuting ones keep the sector
    return commutator(A, P).norm() <= 1e-10 * std::max(1.0, A.norm());
  };
  if (!commutes(L.hamiltonian())) throw Error(ErrorKind::RestrictionInvalid, "Hamiltonian breaks parity");
  for (const auto& j : L.jumps())
    if (!commutes(j.op)) throw Error(ErrorKind::RestrictionInvalid, "jump operator breaks parity");
  RestrictedLiouvillian R;
  R.full_dim = d;
  const int start = sector == ParitySector::Odd ? 1 : 0;
  for (int n = start; n < d; n += 2) R.index.push_back(n);
  auto sub = [&](const Mat& A) {
    const int k = static_cast<int>(R.index.size());
    Mat s(k, k);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) s(i, j) = A(R.index[i], R.index[j]);
    return s;
  };
  std::vector<Jump> jumps;
  for (const auto& j : L.jumps()) jumps.push_back({j.rate, sub(j.op)});
  R.L = Liouvillian(sub(L.hamiltonian()), std::move(jumps));
  return R;
}

QuantumState steady_state(const Liouvillian& L, const SteadyStateOptions& opt) {
  const Liouvillian* target = &L;
  RestrictedLiouvillian R;
  if (opt.restrict != ParitySector::None) {
    R = parity_restrict(L, opt.restrict);
    target = &R.L;
  }
  const int d = target->dim();
  Eigen::BDCSVD<Mat> svd(target->superoperator(), Eigen::ComputeFullV);
  const Eigen::VectorXd& s = svd.singularValues();
  const double smax = s(0);
  const Eigen::Index n = s.size();
  int kernel = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    if (s(i) <= opt.kernel_tol * smax) ++kernel;
  if (kernel != 1)
    throw Error(ErrorKind::NonuniqueSteadyState,
                "kernel dimension " + std::to_string(kernel) + " (restrict the parity sector)");
  Mat rho = unvectorize(svd.matrixV().col(n - 1), d);
  rho = hermitize(rho);
  rho /= rho.trace();
  if (opt.restrict != ParitySector::None) rho = R.embed_state(rho);
  return QuantumState::density(rho);
}

}  // namespace daqec
