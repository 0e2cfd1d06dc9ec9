#include "daqec/fock.hpp"

#include <cmath>
#include <unsupported/Eigen/MatrixFunctions>

namespace daqec {

const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidCutoff: return "invalid-cutoff";
    case ErrorKind::NumericError: return "numeric-error";
    case ErrorKind::ShapeError: return "shape-error";
    case ErrorKind::SpecError: return "spec-error";
    case ErrorKind::CutoffTooSmall: return "cutoff-too-small";
    case ErrorKind::CompileError: return "compile-error";
    case ErrorKind::IntegratorError: return "integrator-error";
    case ErrorKind::StiffnessError: return "stiffness-error";
    case ErrorKind::NonuniqueSteadyState: return "nonunique-steady-state";
    case ErrorKind::RestrictionInvalid: return "restriction-invalid";
    case ErrorKind::EstimateUndefined: return "estimate-undefined";
    case ErrorKind::PerturbationIllPosed: return "perturbation-ill-posed";
    case ErrorKind::NotAProjector: return "not-a-projector";
    case ErrorKind::NegativeRate: return "negative-rate";
    case ErrorKind::RankDeficient: return "rank-deficient";
    case ErrorKind::ConfigError: return "config-error";
  }
  return "unknown";
}

namespace {
void check_cutoff(int D) {
  if (D < 2) throw Error(ErrorKind::InvalidCutoff, "cutoff must be >= 2, got " + std::to_string(D));
}
}  // namespace

Mat annihilation(int D) {
  check_cutoff(D);
  Mat a = Mat::Zero(D, D);
  for (int n = 1; n < D; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

Mat creation(int D) { return annihilation(D).adjoint(); }

Mat number_op(int D) {
  check_cutoff(D);
  Mat n = Mat::Zero(D, D);
  for (int k = 0; k < D; ++k) n(k, k) = static_cast<double>(k);
  return n;
}

Mat identity(int D) { return Mat::Identity(D, D); }

std::pair<Mat, Mat> quadratures(int D) {
  const Mat a = annihilation(D);
  const Mat ad = a.adjoint();
  const double s = 1.0 / std::sqrt(2.0);
  return {s * (a + ad), -I1 * s * (a - ad)};
}

Mat parity_op(int D) {
  check_cutoff(D);
  Mat P = Mat::Zero(D, D);
  for (int k = 0; k < D; ++k) P(k, k) = (k % 2 == 0) ? 1.0 : -1.0;
  return P;
}

Eigen::Matrix2cd pauli(Pauli p) {
  Eigen::Matrix2cd m;
  switch (p) {
    case Pauli::X: m << 0, 1, 1, 0; break;
    case Pauli::Y: m << 0, -I1, I1, 0; break;
    case Pauli::Z: m << 1, 0, 0, -1; break;
  }
  return m;
}

Mat kron(const Mat& A, const Mat& B) {
  Mat K(A.rows() * B.rows(), A.cols() * B.cols());
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j)
      K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return K;
}

JointOperator embed_conditional(Pauli p, const FockOperator& mode_op) {
  if (mode_op.rows() != mode_op.cols())
    throw Error(ErrorKind::ShapeError, "mode operator must be square");
  return kron(pauli(p), mode_op);
}

JointOperator embed_qubit(const Eigen::Matrix2cd& q, int D) { return kron(q, identity(D)); }

Mat dagger(const Mat& A) { return A.adjoint(); }

Mat commutator(const Mat& A, const Mat& B) { return A * B - B * A; }

double hermiticity_error(const Mat& A) { return (A - A.adjoint()).norm(); }

int interior_size(int D) { return std::max(1, D - std::max(1, D / 10)); }

double unitarity_error(const Mat& U, int keep) {
  const Mat G = U.adjoint() * U;
  return (G.topLeftCorner(keep, keep) - Mat::Identity(keep, keep)).norm();
}

Mat expm_hermitian(const Mat& H, double s) {
  Eigen::SelfAdjointEigenSolver<Mat> es(H);
  if (es.info() != Eigen::Success) throw Error(ErrorKind::NumericError, "eigensolver failed");
  const Eigen::VectorXd& w = es.eigenvalues();
  Vec ph(w.size());
  for (Eigen::Index k = 0; k < w.size(); ++k) ph(k) = std::exp(-I1 * s * w(k));
  const Mat& V = es.eigenvectors();
  return V * ph.asDiagonal() * V.adjoint();
}

Mat mat_exp(const Mat& op, cplx scale) {
  if (op.rows() != op.cols()) throw Error(ErrorKind::ShapeError, "mat_exp needs a square matrix");
  if (!op.allFinite() || !std::isfinite(scale.real()) || !std::isfinite(scale.imag()))
    throw Error(ErrorKind::NumericError, "non-finite entries in exponent");
  const Mat M = scale * op;
  const double mnorm = M.norm();
  if (mnorm == 0.0) return Mat::Identity(op.rows(), op.cols());
  if ((M + M.adjoint()).norm() <= 1e-14 * mnorm) {
    // M = -i H with H = i M Hermitian
    Mat H = I1 * M;
    H = 0.5 * (H + H.adjoint()).eval();
    Mat U = expm_hermitian(H, 1.0);
    if (unitarity_error(U, static_cast<int>(U.rows())) > 1e-10)
      throw Error(ErrorKind::NumericError, "exponential of anti-Hermitian generator is not unitary");
    return U;
  }
  Mat E = M.exp();
  if (!E.allFinite()) throw Error(ErrorKind::NumericError, "matrix exponential overflow");
  return E;
}

double phase_aligned_distance(const Mat& A, const Mat& B, int k) {
  const Mat a = A.topLeftCorner(k, k);
  const Mat b = B.topLeftCorner(k, k);
  Eigen::Index i = 0, j = 0;
  b.cwiseAbs().maxCoeff(&i, &j);
  if (std::abs(a(i, j)) == 0.0) return (a - b).norm();
  const cplx ph = (b(i, j) / a(i, j)) / std::abs(b(i, j) / a(i, j));
  return (ph * a - b).norm();
}

SpMat to_sparse(const Mat& A, double drop) {
  std::vector<Eigen::Triplet<cplx>> t;
  for (Eigen::Index j = 0; j < A.cols(); ++j)
    for (Eigen::Index i = 0; i < A.rows(); ++i)
      if (std::abs(A(i, j)) > drop) t.emplace_back(i, j, A(i, j));
  SpMat S(A.rows(), A.cols());
  S.setFromTriplets(t.begin(), t.end());
  return S;
}

}  // namespace daqec
