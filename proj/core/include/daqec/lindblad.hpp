#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "daqec/fock.hpp"
#include "daqec/states.hpp"

namespace daqec {

struct Jump {
  double rate = 0.0;
  Mat op;
};

struct NoiseModel {
  double photon_loss = 0.0;  // kappa for D[a], 1/s
  double dephasing = 0.0;    // kappa_phi for D[a^dag a], 1/s
  double qubit_T1 = std::numeric_limits<double>::infinity();
  double qubit_T2 = std::numeric_limits<double>::infinity();

  void validate() const;
  // 1/T2 - 1/(2 T1)
  double qubit_pure_dephasing() const;
  bool mode_noise() const { return photon_loss > 0.0 || dephasing > 0.0; }
  bool qubit_noise() const { return std::isfinite(qubit_T1) || std::isfinite(qubit_T2); }
  bool any() const { return mode_noise() || qubit_noise(); }

  std::vector<Jump> mode_jumps(int D) const;
  // Mode jumps lifted to qubit (x) mode plus the qubit T1 / dephasing jumps.
  // The ancilla ground state is index 1, so T1 decay is |1><0|.
  std::vector<Jump> joint_jumps(int D) const;
};

// L(rho) = -i[H, rho] + sum_k rate_k D[L_k] rho
class Liouvillian {
public:
  Liouvillian() = default;
  Liouvillian(Mat H, std::vector<Jump> jumps);

  int dim() const { return dim_; }
  const Mat& hamiltonian() const { return H_; }
  const std::vector<Jump>& jumps() const { return jumps_; }

  Mat apply(const Mat& rho) const;
  // Dense d^2 x d^2 column-stacking superoperator.
  Mat superoperator() const;
  // Upper bound on the induced Frobenius norm of the map.
  double norm_bound() const { return norm_bound_; }

private:
  int dim_ = 0;
  Mat H_;
  std::vector<Jump> jumps_;
  SpMat Heff_;
  std::vector<SpMat> sjumps_;
  std::vector<double> rates_;
  double norm_bound_ = 0.0;
};

Liouvillian build_liouvillian(const Mat* H, const std::vector<Jump>& jumps, int dim);

// Column-stacking superoperators.
Mat superop_hamiltonian(const Mat& H);
Mat superop_dissipator(const Mat& L);
inline Eigen::VectorXcd vectorize(const Mat& rho) { return Eigen::Map<const Eigen::VectorXcd>(rho.data(), rho.size()); }
Mat unvectorize(const Eigen::VectorXcd& v, int d);

enum class EvolveMethod { Auto, Dense, RK45, Taylor };

struct EvolveOptions {
  EvolveMethod method = EvolveMethod::Auto;
  double dt_max = std::numeric_limits<double>::infinity();
  double rtol = 1e-9;
  double atol = 1e-12;
  // Auto picks the dense exponential up to this dimension.
  int dense_max_dim = 16;
};

Mat evolve(const Mat& rho0, const Liouvillian& L, double t, const EvolveOptions& opt = {});
QuantumState evolve(const QuantumState& rho0, const Liouvillian& L, double t, const EvolveOptions& opt = {});

// D[a^dag a] in closed form: rho_nm -> rho_nm exp(-kappa t (n-m)^2 / 2)
Mat dephase(const Mat& rho, double kappa_t);

enum class ParitySector { None, Even, Odd };

struct RestrictedLiouvillian {
  Liouvillian L;
  std::vector<int> index;  // sub-space index -> full Fock index
  int full_dim = 0;

  Mat restrict_state(const Mat& rho) const;
  Mat embed_state(const Mat& rho_sub) const;
};

RestrictedLiouvillian parity_restrict(const Liouvillian& L, ParitySector sector = ParitySector::Even);

struct SteadyStateOptions {
  ParitySector restrict = ParitySector::None;
  double kernel_tol = 1e-8;  // relative to the largest singular value
};

QuantumState steady_state(const Liouvillian& L, const SteadyStateOptions& opt = {});

}  // namespace daqec
