#pragma once

#include <vector>

#include "daqec/fock.hpp"

namespace daqec {

struct GaussianGate {
  enum class Kind { Displacement, Rotation, Squeeze };
  Kind kind = Kind::Rotation;
  cplx alpha = 0.0;   // displacement amplitude
  double value = 0.0; // rotation angle or squeezing parameter

  static GaussianGate D(cplx a) { return {Kind::Displacement, a, 0.0}; }
  static GaussianGate R(double phi) { return {Kind::Rotation, 0.0, phi}; }
  static GaussianGate S(double r) { return {Kind::Squeeze, 0.0, r}; }
};

const char* to_string(GaussianGate::Kind k);

// Gates are stored in the order they are written, so gates.front() acts last.
struct GaussianGateSeq {
  std::vector<GaussianGate> gates;
  double global_phase = 0.0;
};

struct SymplecticAffine {
  Eigen::Matrix2d S = Eigen::Matrix2d::Identity();
  Eigen::Vector2d d = Eigen::Vector2d::Zero();
};

// exp[i(p - eta x^2) t]
GaussianGateSeq synth_cps_B(double t, double eta);
// exp[-i{sqrt2 x - xi(x^2 - p^2)} t]
GaussianGateSeq synth_tss_A(double t, double xi);
// exp[-i{sqrt2 p + xi(xp + px)} t]
GaussianGateSeq synth_tss_B(double t, double xi);
// exp[-i(x^2 e^{2r} - p^2 e^{-2r}) t]
GaussianGateSeq synth_sqcat_A(double t, double r);

// Target Heisenberg matrix of synth_sqcat_A, used for the phi branch choice.
Eigen::Matrix2d sqcat_A_symplectic(double t, double r);

// Heisenberg action U^dag (x,p) U = S (x,p) + d of the full sequence.
SymplecticAffine gate_symplectic(const GaussianGate& g);
SymplecticAffine seq_to_symplectic(const GaussianGateSeq& seq);

// Fock matrix of one gate on Dw levels (no padding).
Mat gate_to_fock(const GaussianGate& g, int Dw);
// Product computed on D + margin levels, then cut back to D. margin < 0 picks D.
Mat seq_to_fock(const GaussianGateSeq& seq, int D, int margin = -1);

}  // namespace daqec
