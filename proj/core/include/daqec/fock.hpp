#pragma once

#include <complex>
#include <utility>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "daqec/error.hpp"

namespace daqec {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using SpMat = Eigen::SparseMatrix<cplx>;

inline constexpr cplx I1{0.0, 1.0};

// Mode operators are plain D x D matrices; the cutoff is the row count.
// Joint operators are 2D x 2D with the qubit as the slow (outer) index.
using FockOperator = Mat;
using JointOperator = Mat;

enum class Pauli { X, Y, Z };

Mat annihilation(int D);
Mat creation(int D);
Mat number_op(int D);
Mat identity(int D);
// (x, p) with x = (a + a^dag)/sqrt2, p = -i(a - a^dag)/sqrt2
std::pair<Mat, Mat> quadratures(int D);
// exp(i pi n)
Mat parity_op(int D);

Eigen::Matrix2cd pauli(Pauli p);
Mat kron(const Mat& A, const Mat& B);
JointOperator embed_conditional(Pauli p, const FockOperator& mode_op);
JointOperator embed_qubit(const Eigen::Matrix2cd& q, int D);

// exp(scale * op). Anti-Hermitian arguments go through an eigendecomposition
// of the Hermitian part and the result is checked to be unitary; anything
// else falls back to scaling-and-squaring Pade.
Mat mat_exp(const Mat& op, cplx scale);
// exp(-i s H) for Hermitian H.
Mat expm_hermitian(const Mat& H, double s);

Mat commutator(const Mat& A, const Mat& B);
Mat dagger(const Mat& A);

double hermiticity_error(const Mat& A);
// ||U^dag U - 1|| restricted to the leading `keep` indices.
double unitarity_error(const Mat& U, int keep);
// Default interior size: drop the top 10% of Fock levels (at least one).
int interior_size(int D);

// Frobenius distance between leading k x k blocks after removing a global
// phase. The phase is read off the largest-magnitude element of B.
double phase_aligned_distance(const Mat& A, const Mat& B, int k);

SpMat to_sparse(const Mat& A, double drop = 0.0);

}  // namespace daqec
