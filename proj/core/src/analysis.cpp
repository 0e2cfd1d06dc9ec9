#include "daqec/analysis.hpp"

#include <algorithm>
#include <cmath>

namespace daqec {

double fidelity(const Mat& rho, const Vec& target) {
  if (rho.rows() != target.size()) throw Error(ErrorKind::ShapeError, "fidelity: dimension mismatch");
  const double ov = (target.adjoint() * rho * target)(0, 0).real();
  return std::clamp(std::sqrt(std::max(ov, 0.0)), 0.0, 1.0);
}

double fidelity(const QuantumState& rho, const QuantumState& target) {
  if (target.kind() == QuantumState::Kind::Pure) return fidelity(rho.rho(), target.vector());
  return fidelity_mixed(rho.rho(), target.rho());
}

namespace {
Mat psd_sqrt(const Mat& A) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (A + A.adjoint()));
  const Eigen::VectorXd s = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * s.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
}
}  // namespace

double fidelity_mixed(const Mat& rho, const Mat& sigma) {
  if (rho.rows() != sigma.rows()) throw Error(ErrorKind::ShapeError, "fidelity: dimension mismatch");
  const Mat s = psd_sqrt(rho);
  const Mat M = s * sigma * s;
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (M + M.adjoint()), Eigen::EigenvaluesOnly);
  return std::clamp(es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum(), 0.0, 1.0);
}

double leakage(const Mat& rho, const Mat& P_code) {
  if ((P_code * P_code - P_code).norm() > 1e-8 * std::max(1.0, P_code.norm()))
    throw Error(ErrorKind::NotAProjector, "P_code is not idempotent");
  if (rho.rows() != P_code.rows()) throw Error(ErrorKind::ShapeError, "leakage: dimension mismatch");
  const double w = (rho.trace() - (P_code * rho).trace()).real();
  return std::clamp(w, 0.0, 1.0);
}

double mean_excitation(const NullifierSpec& spec, const Mat& rho) {
  const Mat d = build_nullifier(spec, static_cast<int>(rho.rows()));
  const cplx v = (d.adjoint() * d * rho).trace();
  if (std::abs(v.imag()) > 1e-10 * std::max(1.0, std::abs(v)))
    throw Error(ErrorKind::NumericError, "<delta^dag delta> has an imaginary part");
  return v.real();
}

double mean_excitation(const NullifierSpec& spec, const Vec& psi) {
  const Mat d = build_nullifier(spec, static_cast<int>(psi.size()));
  return (d * psi).squaredNorm();
}

double cps_vacuum_excitation(double r, double eta) {
  return 0.5 * std::cosh(2 * r) + 0.375 * eta * eta * std::exp(2 * r) - 0.5;
}

double tss_vacuum_excitation(double xi) { return 2 * xi * xi; }

DepthEstimate depth_estimate(const NullifierSpec& spec, const Mat& initial, double epsilon, double gamma_dt) {
  if (!(epsilon > 0)) throw Error(ErrorKind::EstimateUndefined, "epsilon must be positive");
  if (!(gamma_dt > 0)) throw Error(ErrorKind::EstimateUndefined, "Gamma dt must be positive");
  DepthEstimate e;
  e.mean_excitation = mean_excitation(spec, initial);
  e.epsilon = epsilon;
  e.gamma_dt = gamma_dt;
  if (e.mean_excitation <= epsilon)
    throw Error(ErrorKind::EstimateUndefined, "<n~> <= epsilon: the initial state is already converged");
  e.kappa_tau = std::log(e.mean_excitation / epsilon);
  e.depth_N = static_cast<long>(std::ceil(e.kappa_tau / (gamma_dt * gamma_dt)));
  if (spec.family == Family::CPS)
    e.cps_large_r_kappa_tau = 2 * spec.r + std::log((3 * spec.eta * spec.eta + 2) / (8 * epsilon));
  return e;
}

double birth_death_P0(const std::vector<double>& populations, double kappa_t) {
  double total = 0.0;
  for (double p : populations) {
    if (p < 0) throw Error(ErrorKind::NumericError, "negative population");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw Error(ErrorKind::NumericError, "populations must sum to 1");
  const double q = -std::expm1(-kappa_t);  // 1 - e^{-kappa t}
  double P0 = 0.0, qn = 1.0;
  for (double p : populations) {
    P0 += p * qn;
    qn *= q;
  }
  return P0;
}

Mat nullifier_basis(const NullifierSpec& spec, int D, int count) {
  spec.validate();
  if (count > D) throw Error(ErrorKind::ShapeError, "basis count exceeds cutoff");
  switch (spec.family) {
    case Family::SqVac: {
      const int Dw = D + 60;
      return squeeze_op(-spec.r, Dw).block(0, 0, D, count);
    }
    case Family::CPS: {
      const int Dw = std::max(500, D + 100);
      const Mat cols = squeeze_op(-spec.r, Dw).leftCols(count);
      auto [x, p] = quadratures(Dw);
      Eigen::SelfAdjointEigenSolver<Mat> es(x);
      Vec ph(Dw);
      for (int k = 0; k < Dw; ++k) {
        const double xv = es.eigenvalues()(k);
        ph(k) = std::exp(I1 * spec.eta * xv * xv * xv / 3.0);
      }
      const Mat& V = es.eigenvectors();
      const Mat out = V * ph.asDiagonal() * (V.adjoint() * cols);
      return out.topRows(D);
    }
    default:
      throw Error(ErrorKind::SpecError, "nullifier basis is only defined for SqVac and CPS");
  }
}

std::vector<double> nullifier_populations(const NullifierSpec& spec, const Mat& rho, int count) {
  const Mat B = nullifier_basis(spec, static_cast<int>(rho.rows()), count);
  std::vector<double> pops(count);
  for (int n = 0; n < count; ++n) pops[n] = std::max(0.0, (B.col(n).adjoint() * rho * B.col(n))(0, 0).real());
  return pops;
}

namespace {

struct EvenSystem {
  std::vector<int> idx;
  Mat delta_e, n_e, P_e;
  Vec plus_e;
};

EvenSystem even_system(const NullifierSpec& spec, int D) {
  if (!spec.parity_symmetric()) throw Error(ErrorKind::SpecError, "leakage analysis needs a CAT or SqCAT spec");
  EvenSystem s;
  for (int n = 0; n < D; n += 2) s.idx.push_back(n);
  const int k = static_cast<int>(s.idx.size());
  const Mat d = build_nullifier(spec, D);
  // cutoff already vetted by the caller against its own tail tolerance
  const Mat P = code_projector(spec, D, {1.0, 0});
  NullifierSpec sp = spec;
  sp.sign = +1;
  const Vec plus = build_state_vector(sp, D, {1.0, 0});
  s.delta_e.resize(k, k);
  s.P_e.resize(k, k);
  s.n_e = Mat::Zero(k, k);
  s.plus_e.resize(k);
  for (int i = 0; i < k; ++i) {
    s.plus_e(i) = plus(s.idx[i]);
    s.n_e(i, i) = s.idx[i];
    for (int j = 0; j < k; ++j) {
      s.delta_e(i, j) = d(s.idx[i], s.idx[j]);
      s.P_e(i, j) = P(s.idx[i], s.idx[j]);
    }
  }
  return s;
}

}  // namespace

PerturbativeResult perturbative_A(const NullifierSpec& spec, int D) {
  const EvenSystem es = even_system(spec, D);
  const int k = static_cast<int>(es.idx.size());
  const Mat L0 = superop_dissipator(es.delta_e);
  const Mat L1 = superop_dissipator(es.n_e);

  Eigen::BDCSVD<Mat> s0(L0);
  const Eigen::VectorXd& sv = s0.singularValues();
  const Eigen::Index m = sv.size();
  int kernel = 0;
  for (Eigen::Index i = 0; i < m; ++i)
    if (sv(i) <= 1e-8 * sv(0)) ++kernel;
  if (kernel != 1)
    throw Error(ErrorKind::PerturbationIllPosed, "even-sector kernel dimension " + std::to_string(kernel));

  const Mat rho0 = es.plus_e * es.plus_e.adjoint();
  Mat Aug(k * k + 1, k * k);
  Aug.topRows(k * k) = L0;
  Aug.row(k * k) = vectorize(Mat::Identity(k, k)).transpose();
  Vec rhs(k * k + 1);
  rhs.head(k * k) = -L1 * vectorize(rho0);
  rhs(k * k) = 0.0;

  Eigen::BDCSVD<Mat> svd(Aug, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(1e-10);
  const Vec x = svd.solve(rhs);

  PerturbativeResult r;
  r.rho1 = unvectorize(x, k);
  r.rho1 = 0.5 * (r.rho1 + r.rho1.adjoint()).eval();
  r.residual = (L0 * vectorize(r.rho1) + L1 * vectorize(rho0)).norm();
  r.trace_rho1 = std::abs(r.rho1.trace());
  r.kernel_gap = sv(m - 2) / sv(0);
  r.A = -(es.P_e * r.rho1).trace().real();
  return r;
}

double continuous_steady_leakage(const NullifierSpec& spec, int D, double eps) {
  const EvenSystem es = even_system(spec, D);
  Liouvillian L(Mat::Zero(es.delta_e.rows(), es.delta_e.cols()),
                {{1.0, es.delta_e}, {eps, es.n_e}});
  const Mat rho = steady_state(L).rho();
  return std::clamp((rho.trace() - (es.P_e * rho).trace()).real(), 0.0, 1.0);
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  const size_t n = x.size();
  if (n < 2 || y.size() != n) throw Error(ErrorKind::RankDeficient, "linear fit needs >= 2 paired samples");
  double mx = 0, my = 0;
  for (size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0) throw Error(ErrorKind::RankDeficient, "x values are all equal");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ssr = 0;
  for (size_t i = 0; i < n; ++i) {
    const double e = y[i] - (f.intercept + f.slope * x[i]);
    ssr += e * e;
  }
  f.r2 = syy > 0 ? 1.0 - ssr / syy : 1.0;
  return f;
}

LeakageExpansion fit_leakage_expansion(const std::vector<std::pair<double, double>>& samples) {
  if (samples.size() < 3) throw Error(ErrorKind::RankDeficient, "need at least 3 samples");
  std::vector<double> e, w;
  for (auto [a, b] : samples) {
    e.push_back(a);
    w.push_back(b);
  }
  auto sorted = e;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw Error(ErrorKind::RankDeficient, "epsilon values must be distinct");
  const LinearFit f = linear_fit(e, w);
  LeakageExpansion out;
  out.C = f.intercept;
  out.A = f.slope;
  double ss = 0;
  for (size_t i = 0; i < e.size(); ++i) ss += std::pow(w[i] - (f.intercept + f.slope * e[i]), 2);
  out.residual = std::sqrt(ss / e.size());
  out.epsilon_range = e;
  return out;
}

}  // namespace daqec
