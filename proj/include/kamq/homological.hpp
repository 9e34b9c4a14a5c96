// Homological equation of the normal-form iteration, solved pointwise in the
// frequency parameter omega.  With h = omega.I + <z, N zbar> the equation
//
//     {h, chi} + q = <z, Ntilde zbar> + r
//
// splits per Fourier index and per block.  In the eigenbasis of N (Hermitian,
// eigenvalues alpha_i) the coefficient solves are entrywise divisions:
//
//     z-zbar block :  k.omega + alpha_i - alpha_j     (commutator, k != 0)
//     z-z   block :  k.omega + alpha_i + alpha_j     (all |k| <= K)
//     linear block :  k.omega + alpha_i               (all |k| <= K)
//
// The k = 0 z-zbar coefficient defines Ntilde (X_0 = 0, R_0 = 0); indices
// |k| > K and the theta-dependent constant go into the remainder untouched.
// Divisors of solved coefficients feed the acceptance test |divisor| >= kappa;
// the solution is returned either way so rejected frequencies keep their
// diagnostics.  Also contains the linear-forcing reduction (translations plus
// a resonant normal form for exact resonances omega.kbar = nu_jbar).

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "kamq/quad_ham.hpp"

namespace kamq {

struct DivisorEntry {
  std::string block;  // "zzb", "zz" or "lin"
  MultiIndex k;
  int i = 0;
  int j = 0;  // unused for "lin"
  double value = 0.0;
};

struct DivisorReport {
  std::vector<DivisorEntry> entries;

  double min_abs() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& e : entries) m = std::min(m, std::abs(e.value));
    return m;
  }
};

struct HomologicalSolution {
  QuadHamComplex chi;
  QuadHamComplex remainder;
  Eigen::MatrixXcd N_tilde;
  double min_divisor = std::numeric_limits<double>::infinity();
  bool accepted = false;
  DivisorReport used;  // divisors of coefficients actually solved, 0 < |k| <= K
};

namespace detail {

inline double k_dot(const MultiIndex& k, const RVec& omega) {
  double s = 0.0;
  for (int t = 0; t < int(k.size()); ++t) s += k[t] * omega(t);
  return s;
}

}  // namespace detail

// Enumerate every divisor of the three blocks for |k| <= K.
inline DivisorReport divisor_scan(const NormalForm& nf, int K) {
  DivisorReport rep;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(nf.N);
  RVec alpha = es.eigenvalues();
  const int d = nf.d();
  std::vector<MultiIndex> ball;
  {
    MultiIndex k(nf.n(), -K);
    while (true) {
      if (l1_norm(k) <= K) ball.push_back(k);
      int t = nf.n() - 1;
      while (t >= 0) {
        if (++k[t] <= K) break;
        k[t] = -K;
        --t;
      }
      if (t < 0) break;
    }
  }
  for (const auto& k : ball) {
    double kw = detail::k_dot(k, nf.omega);
    bool k0 = (l1_norm(k) == 0);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        if (!k0) rep.entries.push_back({"zzb", k, i, j, kw + alpha(i) - alpha(j)});
        rep.entries.push_back({"zz", k, i, j, kw + alpha(i) + alpha(j)});
      }
      rep.entries.push_back({"lin", k, i, 0, kw + alpha(i)});
    }
  }
  return rep;
}

inline HomologicalSolution solve_homological(const NormalForm& nf, const QuadHamComplex& q, int K,
                                             double kappa) {
  if (K < 1) throw std::invalid_argument("solve_homological: K >= 1 required");
  if (kappa <= 0.0) throw std::invalid_argument("solve_homological: kappa > 0 required");
  if (nf.hermitian_defect() > 1e-13 * (1.0 + nf.N.norm()))
    throw std::invalid_argument("solve_homological: N not Hermitian");
  if (!nf.assumption_holds())
    throw std::invalid_argument("solve_homological: ||N - N0|| bound violated");
  double qscale = q.weight_norm(0.0) + q.c0.max_coeff_norm();
  if (!q.is_real_valued(1e-10 * (1.0 + qscale)))
    throw std::invalid_argument("solve_homological: q is not real-valued");

  const int d = q.d;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(nf.N);
  RVec alpha = es.eigenvalues();
  Mat U = es.eigenvectors();

  // k = 0 block bounds guaranteed by the closeness assumption on N
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j)
      if (std::abs(alpha(i) + alpha(j)) < nf.nu0)
        throw std::logic_error("solve_homological: zz zero-mode divisor below nu0");
    if (std::abs(alpha(i)) < 0.5 * nf.nu0)
      throw std::logic_error("solve_homological: linear zero-mode divisor below nu0/2");
  }

  HomologicalSolution sol;
  int kchi = std::min(q.support_radius(), K);
  sol.chi = QuadHamComplex(d, q.n, std::max(1, kchi));
  sol.remainder = QuadHamComplex(d, q.n, std::max(1, q.support_radius()));
  sol.N_tilde = Eigen::MatrixXcd::Zero(d, d);

  auto note_divisor = [&sol](const std::string& block, const MultiIndex& k, int i, int j,
                             double val) {
    sol.used.entries.push_back({block, k, i, j, val});
    sol.min_divisor = std::min(sol.min_divisor, std::abs(val));
  };

  // z-zbar block
  for (const auto& [k, Qk] : q.Qzzb.coeffs()) {
    if (l1_norm(k) == 0) {
      sol.N_tilde = 0.5 * (Qk + Qk.adjoint());
      continue;
    }
    if (l1_norm(k) > K) {
      sol.remainder.Qzzb.set_coeff(k, Qk);
      continue;
    }
    double kw = detail::k_dot(k, nf.omega);
    Mat G = U.adjoint() * Qk * U;
    Mat Y(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        double div = kw + alpha(i) - alpha(j);
        note_divisor("zzb", k, i, j, div);
        Y(i, j) = Complex(0, 1) * G(i, j) / div;
      }
    sol.chi.Qzzb.set_coeff(k, Mat(U * Y * U.adjoint()));
  }

  // z-z block (k = 0 included; divisors bounded away from zero there)
  for (const auto& [k, Qk] : q.Qzz.coeffs()) {
    if (l1_norm(k) > K) {
      sol.remainder.Qzz.set_coeff(k, Qk);
      continue;
    }
    double kw = detail::k_dot(k, nf.omega);
    Mat G = U.adjoint() * Qk * U.conjugate();
    Mat Y(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        double div = kw + alpha(i) + alpha(j);
        // k = 0 divisors are bounded below by nu0 (asserted above) and do not
        // enter the kappa acceptance test
        if (l1_norm(k) > 0) note_divisor("zz", k, i, j, div);
        Y(i, j) = Complex(0, 1) * G(i, j) / div;
      }
    sol.chi.Qzz.set_coeff(k, Mat(U * Y * U.transpose()));
  }

  // linear block (k = 0 included)
  for (const auto& [k, Qk] : q.Qz.coeffs()) {
    if (l1_norm(k) > K) {
      sol.remainder.Qz.set_coeff(k, Qk);
      continue;
    }
    double kw = detail::k_dot(k, nf.omega);
    Mat gvec = U.adjoint() * Qk;
    Mat y(d, 1);
    for (int i = 0; i < d; ++i) {
      double div = kw + alpha(i);
      if (l1_norm(k) > 0) note_divisor("lin", k, i, 0, div);
      y(i, 0) = Complex(0, 1) * gvec(i, 0) / div;
    }
    sol.chi.Qz.set_coeff(k, Mat(U * y));
  }

  // theta-dependent constant rides along untouched
  sol.remainder.c0 = q.c0;

  sol.accepted = (sol.min_divisor >= kappa) ||
                 sol.used.entries.empty();  // nothing to divide: trivially fine
  return sol;
}

// --- reduction of linear (in phase space) quasiperiodic forcing -------------

struct LinearForcingResult {
  enum class Case { nonresonant, resonant } kind = Case::nonresonant;
  FourierSeries translation_f;  // d-vector series: x = x' - f(omega t)
  FourierSeries translation_g;  // d-vector series: xi = xi' - g(omega t)
  struct ResonantMode {
    MultiIndex kbar;
    int jbar = 0;
    double c1 = 0.0;  // surviving  c1 * x_jbar
    double c2 = 0.0;  // surviving  c2 * xi_jbar
  };
  std::vector<ResonantMode> resonant;
  std::vector<std::pair<MultiIndex, int>> flagged;  // Diophantine violations
  double residual_forcing = 0.0;  // majorant of forcing not removed or classified
};

// Reduce  h = sum nu_j (x_j^2 + xi_j^2)/2 + sum_j g_j(omega t) x_j + f_j(omega t) xi_j.
// Every Fourier mode divides by omega.k +- nu_j; modes violating the
// Diophantine bound gamma / (1 + |k|^tau) must be exact resonances
// omega.kbar = nu_jbar, which survive as constants c1 x + c2 xi; anything
// near-singular but not exactly resonant is rejected.
inline LinearForcingResult reduce_linear_forcing(const RVec& nu, const RVec& omega,
                                                 const FourierSeries& f, const FourierSeries& g,
                                                 double gamma, double tau) {
  const int d = int(nu.size());
  const int n = int(omega.size());
  if (f.rows() != d || g.rows() != d || f.cols() != 1 || g.cols() != 1)
    throw std::invalid_argument("reduce_linear_forcing: forcing must be d-vector series");

  // complex forcing component per mode: Qz = (f + i g)/sqrt(2), and the z
  // equation  zdot = -i nu z - i conj(Qz)(omega t)  is solved by a translation
  // zeta with  zeta_k = conj(Qz_{-k}) / (k.omega - nu).
  LinearForcingResult out;
  int K = std::max(f.support_radius(), g.support_radius());
  FourierSeries zeta(n, d, 1, std::max(1, K));
  FourierSeries qz(n, d, 1, std::max(1, K));
  {
    FourierSeries fi = f, gi = g;
    for (const auto& [k, v] : fi.coeffs()) qz.add_to_coeff(k, Mat(v / std::sqrt(2.0)));
    for (const auto& [k, v] : gi.coeffs())
      qz.add_to_coeff(k, Mat(Complex(0, 1) * v / std::sqrt(2.0)));
  }
  FourierSeries qzbar = qz.conj_on_real_torus();

  const double exact_tol = 1e-9;
  for (const auto& [k, v] : qzbar.coeffs()) {
    double kw = detail::k_dot(k, omega);
    for (int j = 0; j < d; ++j) {
      if (std::abs(v(j, 0)) == 0.0) continue;
      double div = kw - nu(j);
      double dio = gamma / (1.0 + std::pow(double(l1_norm(k)), tau));
      if (std::abs(div) >= dio) {
        Mat cur = zeta.coeff(k);
        cur(j, 0) += v(j, 0) / div;
        zeta.set_coeff(k, cur);
        continue;
      }
      out.flagged.push_back({k, j});
      if (std::abs(div) <= exact_tol * (1.0 + std::abs(kw))) {
        // exact resonance: the rotating-frame average keeps this mode as a
        // constant linear form, c = Qz_{-kbar} in the complex representation
        LinearForcingResult::ResonantMode m;
        m.kbar = k;  // note: resonance condition is omega.kbar = nu_jbar
        m.jbar = j;
        Complex c = qz.coeff(negated(k))(j, 0);
        m.c2 = std::sqrt(2.0) * c.real();  // f' component: c2 * xi
        m.c1 = std::sqrt(2.0) * c.imag();  // g' component: c1 * x
        out.resonant.push_back(m);
        out.kind = LinearForcingResult::Case::resonant;
      } else {
        throw std::runtime_error(
            "reduce_linear_forcing: divisor below Diophantine bound but not an exact resonance");
      }
    }
  }

  // back to real translations: z = z' + zeta  <=>  x = x' - f_t, xi = xi' - g_t
  // with f_t = sqrt(2) Im zeta, g_t = -sqrt(2) Re zeta.
  out.translation_f = FourierSeries(n, d, 1, zeta.k_store());
  out.translation_g = FourierSeries(n, d, 1, zeta.k_store());
  FourierSeries zbar = zeta.conj_on_real_torus();
  std::map<MultiIndex, bool> support;
  for (const auto& [k, v] : zeta.coeffs()) support[k] = true;
  for (const auto& [k, v] : zbar.coeffs()) support[k] = true;
  for (const auto& [k, unused] : support) {
    Mat v = zeta.coeff(k);
    Mat im = (v - zbar.coeff(k)) / Complex(0, 2);
    Mat re = 0.5 * (v + zbar.coeff(k));
    out.translation_f.add_to_coeff(k, Mat(std::sqrt(2.0) * im));
    out.translation_g.add_to_coeff(k, Mat(-std::sqrt(2.0) * re));
  }
  out.translation_f.prune(0.0);
  out.translation_g.prune(0.0);

  // whatever was neither translated away nor classified resonant
  FourierSeries removed(n, d, 1, qzbar.k_store());
  for (const auto& [k, v] : qzbar.coeffs()) {
    Mat left = v;
    double kw = detail::k_dot(k, omega);
    for (int j = 0; j < d; ++j) {
      double div = kw - nu(j);
      double dio = gamma / (1.0 + std::pow(double(l1_norm(k)), tau));
      if (std::abs(div) >= dio || std::abs(div) <= exact_tol * (1.0 + std::abs(kw)))
        left(j, 0) = 0.0;
    }
    if (op_norm(left) > 0) removed.set_coeff(k, left);
  }
  out.residual_forcing = analytic_norm(removed, 0.0).value;
  return out;
}

}  // namespace kamq
