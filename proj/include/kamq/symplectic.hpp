// Structured linear algebra on sp(2d) / Sp(2d): exponentials, principal
// logarithms, symplecticity checks and Williamson diagonalization of positive
// definite quadratic forms.
//
// Conventions: phase-space points are ordered w = (x_1..x_d, xi_1..xi_d) and
// the standard symplectic matrix is J = [[0, I], [-I, 0]], so that Hamilton's
// equations read  w' = J grad h(w).  A real matrix A is Hamiltonian iff J A is
// symmetric; exp maps such A into Sp(2d) = { M : M^T J M = J }.

#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "kamq/fourier.hpp"

namespace kamq {

using RMat = Eigen::MatrixXd;

inline RMat symplectic_J(int d) {
  RMat J = RMat::Zero(2 * d, 2 * d);
  J.block(0, d, d, d) = RMat::Identity(d, d);
  J.block(d, 0, d, d) = -RMat::Identity(d, d);
  return J;
}

inline double hamiltonian_defect(const RMat& A) {
  int d = int(A.rows()) / 2;
  RMat JA = symplectic_J(d) * A;
  return (JA - JA.transpose()).norm();
}

inline double symplectic_defect(const RMat& M) {
  int d = int(M.rows()) / 2;
  RMat J = symplectic_J(d);
  return (M.transpose() * J * M - J).norm();
}

// exp: sp(2d) -> Sp(2d).  Scaling-and-squaring Pade behind the scenes.
inline RMat expm_hamiltonian(const RMat& A) {
  if (A.rows() != A.cols() || A.rows() % 2 != 0)
    throw std::invalid_argument("expm_hamiltonian: need even square matrix");
  return A.exp();
}

// Principal logarithm of a symplectic matrix; the result is a Hamiltonian
// matrix.  Well defined on the principal branch, i.e. no eigenvalue on the
// closed negative real axis (always the case for ||M - I|| < 1, the regime
// the iteration produces; rotations up to angle pi are also covered).
inline RMat logm_near_identity(const RMat& M) {
  if (M.rows() != M.cols()) throw std::invalid_argument("logm: need square matrix");
  Eigen::EigenSolver<RMat> es(M);
  for (int i = 0; i < M.rows(); ++i) {
    Complex lam = es.eigenvalues()(i);
    if (std::abs(lam) < 1e-300 ||
        (lam.real() <= 0.0 && std::abs(lam.imag()) <= 1e-14 * std::abs(lam.real())))
      throw std::runtime_error("logm_near_identity: eigenvalue on the principal-branch cut");
  }
  return M.log();
}

struct WilliamsonForm {
  RMat P;        // symplectic, P^{-T} S P^{-1} = diag(nu; nu)
  RVec nu_inf;   // length d, ascending
};

// Symplectic diagonalization of a positive definite symmetric form S:
// frequencies are the moduli of the (paired, purely imaginary) eigenvalues of
// J S, and P in Sp(2d) satisfies P^{-T} S P^{-1} = diag(nu,...,nu) in the
// paired (y, eta) ordering.
inline WilliamsonForm williamson_diagonalize(const RMat& S) {
  const int twod = int(S.rows());
  if (S.cols() != twod || twod % 2 != 0)
    throw std::invalid_argument("williamson: need 2d x 2d matrix");
  const int d = twod / 2;
  if ((S - S.transpose()).norm() > 1e-10 * (1.0 + S.norm()))
    throw std::invalid_argument("williamson: matrix not symmetric");

  Eigen::SelfAdjointEigenSolver<RMat> es(S);
  if (es.eigenvalues()(0) <= 0.0)
    throw std::invalid_argument("williamson: matrix not positive definite");

  // L = S^{1/2}, skew K = L^{-1} J L^{-1}; the Hermitian matrix iK has
  // eigenvalues +-1/nu_j whose eigenvectors split into the symplectic basis.
  RMat L = es.operatorSqrt();
  RMat Linv = es.operatorInverseSqrt();
  RMat K = Linv * symplectic_J(d) * Linv;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> hs(Complex(0, 1) * K.cast<Complex>());
  // Take the d positive eigenvalues 1/nu, largest eigenvalue of iK first so
  // that nu comes out ascending.
  struct Mode {
    double inv_nu;
    CVec v;
  };
  std::vector<Mode> modes;
  for (int i = twod - 1; i >= 0; --i) {
    double lam = hs.eigenvalues()(i);
    if (lam <= 0.0) break;
    modes.push_back({lam, hs.eigenvectors().col(i)});
  }
  if (int(modes.size()) != d) throw std::runtime_error("williamson: pairing failed");

  WilliamsonForm out;
  out.nu_inf = RVec(d);
  RMat Q(twod, twod);
  for (int j = 0; j < d; ++j) {
    out.nu_inf(j) = 1.0 / modes[j].inv_nu;
    CVec v = modes[j].v;
    // Canonical phase: largest-magnitude entry made real positive.  This
    // pins the column pair deterministically (any phase works analytically).
    int imax = 0;
    double best = 0.0;
    for (int r = 0; r < twod; ++r)
      if (std::abs(v(r)) > best) {
        best = std::abs(v(r));
        imax = r;
      }
    Complex ph = v(imax) / std::abs(v(imax));
    v /= ph;
    // With K v = -i lam v one has K a = lam b and K b = -lam a, so the
    // canonically oriented pair is (a, -b); ||a|| = ||b|| = 1/sqrt(2) and
    // a.b = 0 hold exactly because v^T v = 0 on these eigenspaces.
    Q.col(j) = std::sqrt(2.0) * v.real();
    Q.col(d + j) = -std::sqrt(2.0) * v.imag();
  }

  RVec ssqrt(twod);
  for (int j = 0; j < d; ++j) {
    ssqrt(j) = std::sqrt(out.nu_inf(j));
    ssqrt(d + j) = ssqrt(j);
  }
  RMat Pinv = Linv * Q * ssqrt.asDiagonal();
  out.P = Pinv.inverse();
  return out;
}

}  // namespace kamq
