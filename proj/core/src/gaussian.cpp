#include "daqec/gaussian.hpp"

#include <cmath>
#include <numbers>

#include "daqec/states.hpp"

namespace daqec {

namespace {
constexpr double kXiZero = 1e-8;
constexpr double kPi = std::numbers::pi;

// H = h0 + h1 a + h1d a^dag + h2 a^2 + h2d a^dag^2 + w a^dag a
struct Quadratic {
  cplx h0 = 0, h1 = 0, h1d = 0, h2 = 0, h2d = 0, w = 0;
};

Quadratic operator+(Quadratic p, const Quadratic& q) {
  p.h0 += q.h0, p.h1 += q.h1, p.h1d += q.h1d, p.h2 += q.h2, p.h2d += q.h2d, p.w += q.w;
  return p;
}
Quadratic operator*(cplx k, Quadratic p) {
  p.h0 *= k, p.h1 *= k, p.h1d *= k, p.h2 *= k, p.h2d *= k, p.w *= k;
  return p;
}

const double kR2 = std::sqrt(2.0);
const Quadratic qx{0, 1 / kR2, 1 / kR2, 0, 0, 0};
const Quadratic qp{0, -I1 / kR2, I1 / kR2, 0, 0, 0};
const Quadratic qxx{0.5, 0, 0, 0.5, 0.5, 1.0};
const Quadratic qpp{0.5, 0, 0, -0.5, -0.5, 1.0};
const Quadratic qxp_px{0, 0, 0, -I1, I1, 0};

// Unnormalized Gaussian ket exp(c + mu a^dag + nu a^dag^2 / 2)|0>, so that
// <0|psi> = exp(c) carries the exact phase.
struct GaussKet {
  cplx c = 0, mu = 0, nu = 0;
};

GaussKet rhs(const Quadratic& H, const GaussKet& k) {
  // i d/ds psi = H psi, using a psi = (mu + nu a^dag) psi
  GaussKet d;
  d.c = -I1 * (H.h0 + H.h1 * k.mu + H.h2 * (k.mu * k.mu + k.nu));
  d.mu = -I1 * (H.h1 * k.nu + H.h1d + 2.0 * H.h2 * k.mu * k.nu + H.w * k.mu);
  d.nu = -2.0 * I1 * (H.h2 * k.nu * k.nu + H.h2d + H.w * k.nu);
  return d;
}

GaussKet propagate(GaussKet k, const Quadratic& H, double t, int steps = 4000) {
  const double h = t / steps;
  auto axpy = [](const GaussKet& a, double s, const GaussKet& b) {
    return GaussKet{a.c + s * b.c, a.mu + s * b.mu, a.nu + s * b.nu};
  };
  for (int i = 0; i < steps; ++i) {
    const GaussKet k1 = rhs(H, k), k2 = rhs(H, axpy(k, h / 2, k1)), k3 = rhs(H, axpy(k, h / 2, k2)),
                   k4 = rhs(H, axpy(k, h, k3));
    k.c += h / 6 * (k1.c + 2.0 * k2.c + 2.0 * k3.c + k4.c);
    k.mu += h / 6 * (k1.mu + 2.0 * k2.mu + 2.0 * k3.mu + k4.mu);
    k.nu += h / 6 * (k1.nu + 2.0 * k2.nu + 2.0 * k3.nu + k4.nu);
  }
  return k;
}

Quadratic gate_generator(const GaussianGate& g) {
  switch (g.kind) {
    case GaussianGate::Kind::Rotation: return {0, 0, 0, 0, 0, g.value};
    case GaussianGate::Kind::Squeeze: return {0, 0, 0, I1 * g.value / 2.0, -I1 * g.value / 2.0, 0};
    case GaussianGate::Kind::Displacement: return {0, -I1 * std::conj(g.alpha), I1 * g.alpha, 0, 0, 0};
  }
  return {};
}

// Phase that makes seq equal exp(-i H t) exactly, not just up to a phase.
double phase_correction(const GaussianGateSeq& seq, const Quadratic& H, double t) {
  const GaussKet exact = propagate({}, H, t);
  GaussKet k;
  for (auto it = seq.gates.rbegin(); it != seq.gates.rend(); ++it) k = propagate(k, gate_generator(*it), 1.0, 400);
  return std::remainder(exact.c.imag() - k.c.imag(), 2 * kPi);
}
}  // namespace

const char* to_string(GaussianGate::Kind k) {
  switch (k) {
    case GaussianGate::Kind::Displacement: return "displacement";
    case GaussianGate::Kind::Rotation: return "rotation";
    case GaussianGate::Kind::Squeeze: return "squeeze";
  }
  return "?";
}

// The closed forms are written with rotation angles negated relative to the
// textbook decomposition; with R(phi) = exp(-i phi n) this is what reproduces
// the generator (and its Heisenberg matrix) exactly.
GaussianGateSeq synth_cps_B(double t, double eta) {
  const double s = std::sqrt(1.0 + eta * eta * t * t);
  const double phi1 = std::atan(s - eta * t);
  const double r = std::log(s - eta * t);
  const double phi2 = -std::atan(s + eta * t);
  const cplx alpha = cplx(-t, eta * t * t) / std::sqrt(2.0);
  GaussianGateSeq seq{{GaussianGate::D(alpha), GaussianGate::R(-phi2), GaussianGate::S(r), GaussianGate::R(-phi1)}, 0.0};
  seq.global_phase = phase_correction(seq, eta * qxx + (-1.0) * qp, t);
  return seq;
}

GaussianGateSeq synth_tss_A(double t, double xi) {
  if (std::abs(xi) < kXiZero) return {{GaussianGate::D(cplx(0.0, -t))}, 0.0};
  const double u = 2.0 * xi * t;
  const cplx alpha = cplx(1.0 - std::cosh(u), -std::sinh(u)) / (2.0 * xi);
  GaussianGateSeq seq{{GaussianGate::D(alpha), GaussianGate::R(-kPi / 4), GaussianGate::S(-u), GaussianGate::R(kPi / 4)},
                      0.0};
  seq.global_phase = phase_correction(seq, kR2 * qx + (-xi) * (qxx + (-1.0) * qpp), t);
  return seq;
}

GaussianGateSeq synth_tss_B(double t, double xi) {
  if (std::abs(xi) < kXiZero) return {{GaussianGate::D(cplx(t, 0.0))}, 0.0};
  const double u = 2.0 * xi * t;
  GaussianGateSeq seq{{GaussianGate::D(std::expm1(u) / (2.0 * xi)), GaussianGate::S(-u)}, 0.0};
  seq.global_phase = phase_correction(seq, kR2 * qp + xi * qxp_px, t);
  return seq;
}

Eigen::Matrix2d sqcat_A_symplectic(double t, double r) {
  Eigen::Matrix2d M;
  const double c = std::cosh(2 * t), s = std::sinh(2 * t);
  M << c, -std::exp(-2 * r) * s, -std::exp(2 * r) * s, c;
  return M;
}

GaussianGateSeq synth_sqcat_A(double t, double r) {
  const double k = std::cosh(2 * r) * std::sinh(2 * t);
  const double rs = std::atanh(-k / std::sqrt(1.0 + k * k));
  const double phi0 = 0.5 * std::atan2(std::cosh(2 * t), std::sinh(2 * r) * std::sinh(2 * t));
  const Eigen::Matrix2d target = sqcat_A_symplectic(t, r);

  auto make = [&](double phi) {
    return GaussianGateSeq{{GaussianGate::R(-(phi + kPi / 2)), GaussianGate::S(-rs), GaussianGate::R(-phi)}, 0.0};
  };
  // phi is fixed by tan(2 phi) only up to pi/2; try the branches and keep
  // the one whose symplectic product matches, preferring (-pi/4, pi/4].
  GaussianGateSeq best;
  double best_err = INFINITY;
  bool best_in_window = false;
  for (int b = -2; b <= 2; ++b) {
    const double phi = phi0 + b * kPi / 2;
    GaussianGateSeq cand = make(phi);
    const double err = (seq_to_symplectic(cand).S - target).norm();
    const bool in_window = phi > -kPi / 4 + 1e-12 && phi <= kPi / 4 + 1e-12;
    const bool match = err < 1e-9, best_match = best_err < 1e-9;
    if ((match && !best_match) || (match == best_match && match && in_window && !best_in_window) ||
        (!match && !best_match && err < best_err)) {
      best = cand;
      best_err = err;
      best_in_window = in_window;
    }
  }
  best.global_phase = phase_correction(best, std::exp(2 * r) * qxx + (-std::exp(-2 * r)) * qpp, t);
  return best;
}

SymplecticAffine gate_symplectic(const GaussianGate& g) {
  SymplecticAffine a;
  switch (g.kind) {
    case GaussianGate::Kind::Displacement:
      a.d << std::sqrt(2.0) * g.alpha.real(), std::sqrt(2.0) * g.alpha.imag();
      break;
    case GaussianGate::Kind::Rotation: {
      const double c = std::cos(g.value), s = std::sin(g.value);
      a.S << c, s, -s, c;
      break;
    }
    case GaussianGate::Kind::Squeeze:
      a.S << std::exp(-g.value), 0, 0, std::exp(g.value);
      break;
  }
  return a;
}

SymplecticAffine seq_to_symplectic(const GaussianGateSeq& seq) {
  // (G1 G2)^dag X (G1 G2) = S1 (S2 X + d2) + d1
  SymplecticAffine acc;
  for (const auto& g : seq.gates) {
    const SymplecticAffine m = gate_symplectic(g);
    acc.d = acc.S * m.d + acc.d;
    acc.S = acc.S * m.S;
  }
  return acc;
}

Mat gate_to_fock(const GaussianGate& g, int Dw) {
  switch (g.kind) {
    case GaussianGate::Kind::Rotation: {
      Vec ph(Dw);
      for (int n = 0; n < Dw; ++n) ph(n) = std::exp(-I1 * g.value * static_cast<double>(n));
      return ph.asDiagonal();
    }
    case GaussianGate::Kind::Squeeze:
      return squeeze_op(g.value, Dw);
    case GaussianGate::Kind::Displacement: {
      const Mat a = annihilation(Dw);
      return mat_exp(g.alpha * a.adjoint() - std::conj(g.alpha) * a, 1.0);
    }
  }
  throw Error(ErrorKind::NumericError, "unknown gate kind");
}

Mat seq_to_fock(const GaussianGateSeq& seq, int D, int margin) {
  const int Dw = D + (margin < 0 ? D : margin);
  Mat U = Mat::Identity(Dw, Dw);
  for (const auto& g : seq.gates) U = U * gate_to_fock(g, Dw);
  return std::exp(I1 * seq.global_phase) * U.topLeftCorner(D, D);
}

}  // namespace daqec
