#pragma once

#include <string>

#include "daqec/fock.hpp"

namespace daqec {

enum class Family { SqVac, CPS, TSS, CAT, SqCAT };

const char* to_string(Family f);
Family family_from_string(const std::string& s);

// Squeezing and trisqueezing levels in dB map to natural units as (dB/20) ln 10.
double db_to_natural(double dB);
double natural_to_db(double r);

struct NullifierSpec {
  Family family = Family::SqVac;
  double r = 0.0;
  double eta = 0.0;
  double xi = 0.0;
  cplx alpha = 0.0;
  int sign = +1;

  static NullifierSpec sqvac(double r);
  static NullifierSpec cps(double r, double eta);
  static NullifierSpec tss(double xi);
  static NullifierSpec cat(cplx alpha, int sign);
  static NullifierSpec sqcat(cplx alpha, double r, int sign);

  // Throws spec-error if a parameter irrelevant to the family is set.
  void validate() const;
  bool parity_symmetric() const { return family == Family::CAT || family == Family::SqCAT; }
  // alpha cosh r + conj(alpha) sinh r; the cat amplitude seen by the squeezed frame
  cplx beta() const;
};

class QuantumState {
public:
  enum class Kind { Pure, Density };

  QuantumState() = default;
  static QuantumState pure(Vec psi, bool joint = false);
  static QuantumState density(Mat rho, bool joint = false);

  Kind kind() const { return kind_; }
  bool joint() const { return joint_; }
  int cutoff() const { return cutoff_; }
  int dim() const { return joint_ ? 2 * cutoff_ : cutoff_; }

  const Vec& vector() const;
  const Mat& matrix() const;
  // Density matrix regardless of storage kind.
  Mat rho() const;

  // Largest violation of the norm / trace / Hermiticity / positivity invariants.
  double invariant_violation() const;

private:
  Kind kind_ = Kind::Pure;
  bool joint_ = false;
  int cutoff_ = 0;
  Vec psi_;
  Mat rho_;
};

struct StateOptions {
  // Allowed population in the top 10% of Fock levels (measured before the
  // final truncation). CPS and TSS have heavy tails and usually need a looser value.
  double tail_tolerance = 1e-8;
  // Working cutoff for unitary-based constructions; 0 picks a family default.
  int work_cutoff = 0;
};

Vec fock_state(int n, int D);
Vec coherent_state(cplx alpha, int D);
// S(-r)|0>, the state annihilated by a cosh r - a^dag sinh r.
Vec squeezed_vacuum(double r, int D);
// S(r) = exp[r(a^2 - a^dag^2)/2] on D levels.
Mat squeeze_op(double r, int D);

FockOperator build_nullifier(const NullifierSpec& spec, int D);
QuantumState build_state(const NullifierSpec& spec, int D, const StateOptions& opt = {});
// Same as build_state but returns the raw vector together with its tail weight.
Vec build_state_vector(const NullifierSpec& spec, int D, const StateOptions& opt, double* tail = nullptr);

FockOperator code_projector(const NullifierSpec& spec, int D, const StateOptions& opt = {});

// ||delta psi|| over the leading interior rows.
double annihilation_residual(const FockOperator& delta, const Vec& psi, int rows);

std::string state_to_json(const QuantumState& s);
QuantumState state_from_json(const std::string& text);

}  // namespace daqec
