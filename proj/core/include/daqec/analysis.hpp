#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "daqec/lindblad.hpp"
#include "daqec/states.hpp"

namespace daqec {

// sqrt(<psi|rho|psi>), clamped to [0, 1]
double fidelity(const Mat& rho, const Vec& target);
double fidelity(const QuantumState& rho, const QuantumState& target);
// Tr sqrt(sqrt(rho) sigma sqrt(rho)) for two density matrices.
double fidelity_mixed(const Mat& rho, const Mat& sigma);

double leakage(const Mat& rho, const Mat& P_code);

// <delta^dag delta> on the given state (real part; the imaginary part is checked)
double mean_excitation(const NullifierSpec& spec, const Mat& rho);
double mean_excitation(const NullifierSpec& spec, const Vec& psi);

// Closed forms for excitation of the vacuum
double cps_vacuum_excitation(double r, double eta);  // cosh(2r)/2 + 3 eta^2 e^{2r}/8 - 1/2
double tss_vacuum_excitation(double xi);             // 2 xi^2

struct DepthEstimate {
  double mean_excitation = 0.0;
  double epsilon = 0.0;
  double gamma_dt = 0.0;
  double kappa_tau = 0.0;
  long depth_N = 0;
  std::optional<double> cps_large_r_kappa_tau;  // 2r + ln((3 eta^2 + 2)/(8 eps))
};

DepthEstimate depth_estimate(const NullifierSpec& spec, const Mat& initial, double epsilon, double gamma_dt);

double birth_death_P0(const std::vector<double>& populations, double kappa_t);

// Columns |n~> = U|n>, n < count, where U maps a to the nullifier (SqVac, CPS).
Mat nullifier_basis(const NullifierSpec& spec, int D, int count);
// P_n~ = <n~|rho|n~>
std::vector<double> nullifier_populations(const NullifierSpec& spec, const Mat& rho, int count);

struct PerturbativeResult {
  double A = 0.0;
  double residual = 0.0;       // ||L0 rho1 + L1 rho0||
  double trace_rho1 = 0.0;     // |Tr rho1|
  double kernel_gap = 0.0;     // second-smallest / largest singular value of L0 (even)
  Mat rho1;                    // even-sector block
};

// First-order leakage coefficient of the dissipatively stabilized even
// squeezed cat under D[a^dag a], from the augmented least-squares system.
PerturbativeResult perturbative_A(const NullifierSpec& spec, int D);

struct LeakageExpansion {
  double C = 0.0;
  double A = 0.0;
  double residual = 0.0;
  std::vector<double> epsilon_range;
};

LeakageExpansion fit_leakage_expansion(const std::vector<std::pair<double, double>>& samples);

// w(rho_ss) of the continuous stabilization D[delta] + eps D[a^dag a] (even sector).
double continuous_steady_leakage(const NullifierSpec& spec, int D, double eps);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace daqec
