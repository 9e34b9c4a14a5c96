// Real-valued polynomials of degree <= 2 on phase space with quasiperiodic
// coefficients, in complex (z, zbar) and real (x, xi) representations.
//
// Complex variables: z_j = (xi_j - i x_j) / sqrt(2).  A complex-side
// Hamiltonian is stored through the three blocks of
//   q = <z, Qzz z> + <z, Qzzb zbar> + <zbar, conj(Qzz) zbar>
//       + <Qz, z> + <conj(Qz), zbar> + c0,
// with bilinear pairings <a,b> = sum a_j b_j; the conjugate blocks are
// implied, which is exactly the reality constraint.
//
// The Poisson bracket is the canonical real one,
//   {f,g} = sum_j df/dx_j dg/dxi_j - dg/dx_j df/dxi_j,
// transported to complex variables where it reads
//   {f,g} = i sum_j (df/dzbar_j dg/dz_j - df/dz_j dg/dzbar_j).

#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <functional>
#include <stdexcept>

#include "kamq/fourier.hpp"
#include "kamq/symplectic.hpp"

namespace kamq {

// (x, xi) = C (z, zbar):  x = i(z - zbar)/sqrt2,  xi = (z + zbar)/sqrt2.
inline Mat complex_to_real_change(int d) {
  Mat C = Mat::Zero(2 * d, 2 * d);
  const double s = 1.0 / std::sqrt(2.0);
  for (int j = 0; j < d; ++j) {
    C(j, j) = Complex(0, s);
    C(j, d + j) = Complex(0, -s);
    C(d + j, j) = s;
    C(d + j, d + j) = s;
  }
  return C;
}

// (z, zbar) = Cinv (x, xi).
inline Mat real_to_complex_change(int d) {
  Mat Ci = Mat::Zero(2 * d, 2 * d);
  const double s = 1.0 / std::sqrt(2.0);
  for (int j = 0; j < d; ++j) {
    Ci(j, j) = Complex(0, -s);
    Ci(j, d + j) = s;
    Ci(d + j, j) = Complex(0, s);
    Ci(d + j, d + j) = s;
  }
  return Ci;
}

struct QuadHamComplex {
  int d = 0;
  int n = 0;
  FourierSeries Qzz;   // d x d, pointwise symmetric
  FourierSeries Qzzb;  // d x d, pointwise Hermitian when real-valued
  FourierSeries Qz;    // d-vector
  FourierSeries c0;    // scalar

  QuadHamComplex() = default;
  QuadHamComplex(int d_, int n_, int k_store)
      : d(d_),
        n(n_),
        Qzz(FourierSeries::matrix_valued(n_, d_, k_store)),
        Qzzb(FourierSeries::matrix_valued(n_, d_, k_store)),
        Qz(FourierSeries::vector_valued(n_, d_, k_store)),
        c0(FourierSeries::scalar(n_, k_store)) {}

  Complex evaluate(const RVec& theta, const CVec& z) const {
    CVec zb = z.conjugate();
    Mat A = Qzz.evaluate(theta);
    Mat B = Qzzb.evaluate(theta);
    Mat u = Qz.evaluate(theta);
    Complex val = (z.transpose() * A * z).value() + (z.transpose() * B * zb).value() +
                  (zb.transpose() * A.conjugate() * zb).value() + (u.transpose() * z).value() +
                  (u.conjugate().transpose() * zb).value() + c0.evaluate(theta)(0, 0);
    return val;
  }

  bool is_real_valued(double tol) const {
    return Qzzb.is_pointwise_hermitian(tol) && c0.is_real_on_real_torus(tol);
  }

  // The weighted majorant of the three coefficient blocks; this is the
  // computable stand-in for the analytic-strip norm of the Hamiltonian.
  double weight_norm(double sigma) const {
    return analytic_norm(Qzz, sigma).value + analytic_norm(Qzzb, sigma).value +
           analytic_norm(Qz, sigma).value;
  }

  int support_radius() const {
    return std::max(std::max(Qzz.support_radius(), Qzzb.support_radius()),
                    std::max(Qz.support_radius(), c0.support_radius()));
  }

  QuadHamComplex& operator+=(const QuadHamComplex& o) {
    Qzz += o.Qzz;
    Qzzb += o.Qzzb;
    Qz += o.Qz;
    c0 += o.c0;
    return *this;
  }

  QuadHamComplex scaled(const Complex& a) const {
    QuadHamComplex r(*this);
    r.Qzz = Qzz.scaled(a);
    r.Qzzb = Qzzb.scaled(a);
    r.Qz = Qz.scaled(a);
    r.c0 = c0.scaled(a);
    return r;
  }

  void prune_weighted(double tol, double sigma) {
    Qzz.prune_weighted(tol, sigma);
    Qzzb.prune_weighted(tol, sigma);
    Qz.prune_weighted(tol, sigma);
    c0.prune_weighted(tol, sigma);
  }

  void prune_abs(double tol) {
    Qzz.prune(tol);
    Qzzb.prune(tol);
    Qz.prune(tol);
    c0.prune(tol);
  }
};

inline QuadHamComplex operator+(const QuadHamComplex& a, const QuadHamComplex& b) {
  QuadHamComplex r(a);
  r += b;
  return r;
}

struct QuadHamReal {
  int d = 0;
  int n = 0;
  FourierSeries S;   // 2d x 2d, pointwise symmetric, real on the real torus
  FourierSeries L;   // 2d-vector, real on the real torus
  FourierSeries c0;  // scalar

  QuadHamReal() = default;
  QuadHamReal(int d_, int n_, int k_store)
      : d(d_),
        n(n_),
        S(FourierSeries(n_, 2 * d_, 2 * d_, k_store)),
        L(FourierSeries(n_, 2 * d_, 1, k_store)),
        c0(FourierSeries::scalar(n_, k_store)) {}

  // h(theta, w) = 1/2 w.S(theta) w + L(theta).w + c0(theta)
  double evaluate(const RVec& theta, const RVec& w) const {
    Mat Sv = S.evaluate(theta);
    Mat Lv = L.evaluate(theta);
    Complex val = 0.5 * (w.cast<Complex>().transpose() * Sv * w.cast<Complex>()).value() +
                  (Lv.transpose() * w.cast<Complex>()).value() + c0.evaluate(theta)(0, 0);
    return val.real();
  }

  int support_radius() const {
    return std::max(S.support_radius(), std::max(L.support_radius(), c0.support_radius()));
  }

  bool is_valid(double tol) const {
    return S.is_real_on_real_torus(tol) && S.is_pointwise_symmetric(tol) &&
           L.is_real_on_real_torus(tol) && c0.is_real_on_real_torus(tol);
  }

  QuadHamReal& operator+=(const QuadHamReal& o) {
    S += o.S;
    L += o.L;
    c0 += o.c0;
    return *this;
  }

  QuadHamReal scaled(double a) const {
    QuadHamReal r(*this);
    r.S = S.scaled(a);
    r.L = L.scaled(a);
    r.c0 = c0.scaled(a);
    return r;
  }
};

struct NormalForm {
  RVec omega;          // forcing frequencies, length n
  Eigen::MatrixXcd N;  // Hermitian d x d
  RVec nu;             // initial frequencies (N_0 = diag nu)
  double nu0 = 0.0;    // min_j nu_j

  NormalForm() = default;
  NormalForm(const RVec& omega_, const RVec& nu_) : omega(omega_), nu(nu_) {
    N = nu_.cast<Complex>().asDiagonal();
    nu0 = nu_.minCoeff();
  }

  int d() const { return int(nu.size()); }
  int n() const { return int(omega.size()); }

  double hermitian_defect() const { return (N - N.adjoint()).norm(); }

  // ||N - N_0|| < min(1, nu0) / max(4, d), required before a homological solve.
  bool assumption_holds() const {
    Eigen::MatrixXcd D = N - Eigen::MatrixXcd(nu.cast<Complex>().asDiagonal());
    double bound = std::min(1.0, nu0) / std::max(4, d());
    return op_norm(D) < bound;
  }
};

// h = omega.I + <z, N zbar> as a complex Hamiltonian (the omega.I part lives
// in the extended phase space and is handled by whoever needs it).
inline QuadHamComplex normal_form_hamiltonian(const Eigen::MatrixXcd& N, int n) {
  int d = int(N.rows());
  QuadHamComplex h(d, n, 0);
  h.Qzzb.set_coeff(MultiIndex(n, 0), N);
  return h;
}

// --- representation changes (exact, coefficient-wise linear maps) ---------

inline QuadHamComplex to_complex(const QuadHamReal& h) {
  const int d = h.d;
  QuadHamComplex out(d, h.n, std::max(h.S.k_store(), h.L.k_store()));
  Mat C = complex_to_real_change(d);
  for (const auto& [k, Sk] : h.S.coeffs()) {
    Mat M = C.transpose() * Sk * C;  // 1/2 (z,zb).M(z,zb)
    Mat M11 = 0.5 * (M.block(0, 0, d, d) + M.block(0, 0, d, d).transpose());
    out.Qzz.set_coeff(k, Mat(0.5 * M11));
    out.Qzzb.set_coeff(k, Mat(0.5 * (M.block(0, d, d, d) + M.block(d, 0, d, d).transpose())));
  }
  for (const auto& [k, Lk] : h.L.coeffs()) {
    Mat u = C.transpose() * Lk;
    out.Qz.set_coeff(k, Mat(u.topRows(d)));
  }
  out.c0 = h.c0;
  out.c0.set_k_store(std::max(out.c0.k_store(), out.Qzz.k_store()));
  return out;
}

inline QuadHamReal to_real(const QuadHamComplex& q) {
  const int d = q.d;
  int ks = std::max(std::max(q.Qzz.k_store(), q.Qzzb.k_store()), q.Qz.k_store());
  QuadHamReal out(d, q.n, ks);
  Mat Ci = real_to_complex_change(d);
  FourierSeries Azzbar = q.Qzz.conj_on_real_torus();
  FourierSeries uzbar = q.Qz.conj_on_real_torus();
  auto add_quad = [&](const MultiIndex& k) {
    Mat M = Mat::Zero(2 * d, 2 * d);
    M.block(0, 0, d, d) = 2.0 * q.Qzz.coeff(k);
    M.block(0, d, d, d) = q.Qzzb.coeff(k);
    M.block(d, 0, d, d) = q.Qzzb.coeff(k).transpose();
    M.block(d, d, d, d) = 2.0 * Azzbar.coeff(k);
    Mat Sk = Ci.transpose() * M * Ci;
    if (op_norm(Sk) > 0.0) out.S.set_coeff(k, Mat(0.5 * (Sk + Sk.transpose())));
  };
  std::map<MultiIndex, bool> seen;
  for (const auto& [k, v] : q.Qzz.coeffs()) seen[k] = true;
  for (const auto& [k, v] : q.Qzzb.coeffs()) seen[k] = true;
  for (const auto& [k, v] : Azzbar.coeffs()) seen[k] = true;
  for (const auto& [k, f] : seen) add_quad(k);

  seen.clear();
  for (const auto& [k, v] : q.Qz.coeffs()) seen[k] = true;
  for (const auto& [k, v] : uzbar.coeffs()) seen[k] = true;
  for (const auto& [k, f] : seen) {
    Mat stack(2 * d, 1);
    stack.topRows(d) = q.Qz.coeff(k);
    stack.bottomRows(d) = uzbar.coeff(k);
    Mat Lk = Ci.transpose() * stack;
    if (op_norm(Lk) > 0.0) out.L.set_coeff(k, Lk);
  }
  out.c0 = q.c0;
  out.c0.set_k_store(std::max(out.c0.k_store(), ks));
  return out;
}

// --- Poisson brackets ------------------------------------------------------

// {f,g} = sum_j df/dx_j dg/dxi_j - dg/dx_j df/dxi_j = (grad f) . J (grad g).
inline QuadHamReal poisson(const QuadHamReal& f, const QuadHamReal& g) {
  if (f.d != g.d || f.n != g.n) throw std::invalid_argument("poisson: dimension mismatch");
  const int d = f.d;
  Mat J = symplectic_J(d).cast<Complex>();
  int K = f.support_radius() + g.support_radius();
  QuadHamReal out(d, f.n, K);

  FourierSeries JSg = FourierSeries(f.n, 2 * d, 2 * d, g.S.k_store());
  for (const auto& [k, v] : g.S.coeffs()) JSg.set_coeff(k, Mat(J * v));
  FourierSeries JLg = FourierSeries(f.n, 2 * d, 1, g.L.k_store());
  for (const auto& [k, v] : g.L.coeffs()) JLg.set_coeff(k, Mat(J * v));

  // S' = sym(S_f J S_g) * 2, L' = S_f J L_g - S_g J L_f, c' = L_f . J L_g
  auto SfJSg = convolve(f.S, JSg, K).series;
  for (const auto& [k, v] : SfJSg.coeffs()) out.S.add_to_coeff(k, Mat(v + v.transpose()));
  auto t1 = convolve(f.S, JLg, K).series;
  for (const auto& [k, v] : t1.coeffs()) out.L.add_to_coeff(k, v);
  FourierSeries JLf = FourierSeries(f.n, 2 * d, 1, f.L.k_store());
  for (const auto& [k, v] : f.L.coeffs()) JLf.set_coeff(k, Mat(J * v));
  auto t2 = convolve(g.S, JLf, K).series;
  for (const auto& [k, v] : t2.coeffs()) out.L.add_to_coeff(k, Mat(-v));
  auto t3 = convolve(f.L.transposed(), JLg, K).series;
  for (const auto& [k, v] : t3.coeffs()) out.c0.add_to_coeff(k, v);
  out.S.prune(0.0);
  out.L.prune(0.0);
  out.c0.prune(0.0);
  return out;
}

namespace detail {

// Gradient of a complex quadratic as an affine map of (z, zbar, 1):
// f_z = 2 A z + B zbar + u,  f_zbar = B^T z + 2 conj(A) zbar + conj(u).
struct GradRep {
  FourierSeries Pz, Pzb, p;  // d x d, d x d, d-vector
};

inline GradRep grad_z(const QuadHamComplex& f) {
  GradRep r{f.Qzz.scaled(2.0), f.Qzzb, f.Qz};
  return r;
}

inline GradRep grad_zbar(const QuadHamComplex& f) {
  GradRep r{f.Qzzb.transposed(), f.Qzz.conj_on_real_torus().scaled(2.0),
            f.Qz.conj_on_real_torus()};
  return r;
}

// Accumulate the blocks of <P(z,zb,1), Q(z,zb,1)> (bilinear dot) into `out`
// scaled by `w`.  Only the stored blocks (zz, zzb, z, const) are formed.
inline void pair_into(const GradRep& P, const GradRep& Q, const Complex& w, int K,
                      QuadHamComplex& out) {
  auto PzT = P.Pz.transposed();
  auto PzbT = P.Pzb.transposed();
  // zz block: sym(Pz^T Qz)
  auto zz = convolve(PzT, Q.Pz, K).series;
  for (const auto& [k, v] : zz.coeffs()) out.Qzz.add_to_coeff(k, Mat(w * 0.5 * (v + v.transpose())));
  // zzb block: Pz^T Qzb + (Qz^T Pzb)
  auto zzb1 = convolve(PzT, Q.Pzb, K).series;
  for (const auto& [k, v] : zzb1.coeffs()) out.Qzzb.add_to_coeff(k, Mat(w * v));
  auto zzb2 = convolve(Q.Pz.transposed(), P.Pzb, K).series;
  for (const auto& [k, v] : zzb2.coeffs()) out.Qzzb.add_to_coeff(k, Mat(w * v));
  // linear z block: Qz^T p + Pz^T q
  auto l1 = convolve(Q.Pz.transposed(), P.p, K).series;
  for (const auto& [k, v] : l1.coeffs()) out.Qz.add_to_coeff(k, Mat(w * v));
  auto l2 = convolve(PzT, Q.p, K).series;
  for (const auto& [k, v] : l2.coeffs()) out.Qz.add_to_coeff(k, Mat(w * v));
  // constant: p . q
  auto c = convolve(P.p.transposed(), Q.p, K).series;
  for (const auto& [k, v] : c.coeffs()) out.c0.add_to_coeff(k, Mat(w * v));
}

}  // namespace detail

// Complex-side bracket {f,g} = i sum_j (f_zbar g_z - f_z g_zbar)_j.
inline QuadHamComplex poisson(const QuadHamComplex& f, const QuadHamComplex& g) {
  if (f.d != g.d || f.n != g.n) throw std::invalid_argument("poisson: dimension mismatch");
  int K = f.support_radius() + g.support_radius();
  QuadHamComplex out(f.d, f.n, K);
  auto fz = detail::grad_z(f), fzb = detail::grad_zbar(f);
  auto gz = detail::grad_z(g), gzb = detail::grad_zbar(g);
  detail::pair_into(fzb, gz, Complex(0, 1), K, out);
  detail::pair_into(fz, gzb, Complex(0, -1), K, out);
  out.Qzz.prune(0.0);
  out.Qzzb.prune(0.0);
  out.Qz.prune(0.0);
  out.c0.prune(0.0);
  return out;
}

// --- flows and affine conjugation ------------------------------------------

struct FlowAt {
  RMat M;   // e^{t B(theta)}, symplectic
  RVec T;   // translation, int_0^t e^{(t-s)B} J L ds
};

// Time-t flow of the Hamiltonian vector field of chi at frozen angle theta:
// wdot = B w + b with B = J S(theta), b = J L(theta).  Computed through the
// exponential of the augmented matrix [[tB, tb],[0,0]], which covers singular
// B without a special case.
inline FlowAt hamiltonian_flow(const QuadHamReal& chi, const RVec& theta, double t) {
  const int d = chi.d;
  Mat Sv = chi.S.evaluate(theta);
  Mat Lv = chi.L.evaluate(theta);
  RMat Sr = Sv.real();
  RVec Lr = Lv.real().col(0);
  RMat J = symplectic_J(d);
  RMat B = J * Sr;
  RVec b = J * Lr;
  RMat G = RMat::Zero(2 * d + 1, 2 * d + 1);
  G.block(0, 0, 2 * d, 2 * d) = t * B;
  G.block(0, 2 * d, 2 * d, 1) = t * b;
  RMat E = G.exp();
  FlowAt out;
  out.M = E.block(0, 0, 2 * d, 2 * d);
  out.T = E.block(0, 2 * d, 2 * d, 1);
  return out;
}

// h composed with the affine map w -> M w + T, exact for quadratics.
struct AffineAt {
  RMat M;
  RVec T;
};

inline void compose_quadratic_with_affine(const RMat& S, const RVec& L, double c, const AffineAt& m,
                                          RMat& S_out, RVec& L_out, double& c_out) {
  S_out = m.M.transpose() * S * m.M;
  L_out = m.M.transpose() * (S * m.T + L);
  c_out = 0.5 * m.T.dot(S * m.T) + L.dot(m.T) + c;
}

struct ConjugateResult {
  QuadHamReal h;
  double aliasing = 0.0;
  int quad_order = 0;
};

// New Hamiltonian after the time-one flow of chi(omega t, .):
//   h'(theta, w) = h(theta, phi^1 w) - int_0^1 (d_t chi)(theta, phi^tau w) dtau,
// where d_t chi = omega.grad_theta chi.  Evaluated exactly per grid angle
// (affine composition is exact on quadratics; the tau integral uses
// Gauss-Legendre escalated until the increment is below 1e-14), then
// re-expanded to |k| <= K_out with the aliasing mass reported.
inline ConjugateResult conjugate_by_affine(
    const QuadHamReal& h, const QuadHamReal& chi, const RVec& omega, int K_out, int grid_per_dim,
    const std::function<AffineAt(const RVec&, double)>* custom_flow = nullptr) {
  const int d = h.d;
  const int n = h.n;
  const int twod = 2 * d;
  if (grid_per_dim < 2 * K_out + 2) grid_per_dim = 2 * K_out + 2;

  QuadHamReal dchi(d, n, std::max(1, chi.support_radius()));
  dchi.S = chi.S.omega_grad(omega);
  dchi.L = chi.L.omega_grad(omega);
  dchi.c0 = chi.c0.omega_grad(omega);

  // Per grid point produce (S', L', c'); stack into a (2d+1) x (2d+1) value so
  // one tensor analysis recovers all blocks.
  static const std::vector<int> kGlOrders = {6, 12, 24, 48};
  int used_order = kGlOrders.front();

  auto gl_nodes = [](int order) {
    // Gauss-Legendre on [0,1] via the eigenvalues of the Jacobi matrix.
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(order, order);
    for (int i = 1; i < order; ++i) {
      double b = i / std::sqrt(4.0 * i * i - 1.0);
      T(i, i - 1) = b;
      T(i - 1, i) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    std::vector<std::pair<double, double>> nw(order);
    for (int i = 0; i < order; ++i) {
      double x = es.eigenvalues()(i);
      double w = 2.0 * es.eigenvectors()(0, i) * es.eigenvectors()(0, i);
      nw[i] = {0.5 * (x + 1.0), 0.5 * w};
    }
    return nw;
  };

  std::vector<std::vector<std::pair<double, double>>> tables;
  for (int o : kGlOrders) tables.push_back(gl_nodes(o));

  TensorGrid grid(n, grid_per_dim, twod + 1, twod + 1);
  const RMat Jd = symplectic_J(d);
  for (std::size_t flat = 0; flat < grid.size(); ++flat) {
    RVec th = grid.theta(flat);
    RMat Sh = h.S.evaluate(th).real();
    RVec Lh = h.L.evaluate(th).real().col(0);
    double ch = h.c0.evaluate(th)(0, 0).real();
    RMat Sd = dchi.S.evaluate(th).real();
    RVec Ld = dchi.L.evaluate(th).real().col(0);
    double cd = dchi.c0.evaluate(th)(0, 0).real();

    // Frozen-angle generator of chi's flow, exponentiated per needed time.
    RMat G = RMat::Zero(twod + 1, twod + 1);
    G.block(0, 0, twod, twod) = Jd * chi.S.evaluate(th).real();
    G.block(0, twod, twod, 1) = Jd * chi.L.evaluate(th).real();
    auto flow_at = [&](double tau) -> AffineAt {
      if (custom_flow) return (*custom_flow)(th, tau);
      RMat E = RMat(tau * G).exp();
      return AffineAt{E.block(0, 0, twod, twod), E.block(0, twod, twod, 1)};
    };

    AffineAt m1 = flow_at(1.0);
    RMat S1;
    RVec L1;
    double c1;
    compose_quadratic_with_affine(Sh, Lh, ch, m1, S1, L1, c1);

    RMat Sint = RMat::Zero(twod, twod);
    RVec Lint = RVec::Zero(twod);
    double cint = 0.0;
    bool first = true;
    bool converged = false;
    double last_incr = 0.0;
    for (std::size_t oi = 0; oi < tables.size(); ++oi) {
      RMat Sacc = RMat::Zero(twod, twod);
      RVec Lacc = RVec::Zero(twod);
      double cacc = 0.0;
      for (const auto& [tau, wgt] : tables[oi]) {
        AffineAt mt = flow_at(tau);
        RMat St;
        RVec Lt;
        double ct;
        compose_quadratic_with_affine(Sd, Ld, cd, mt, St, Lt, ct);
        Sacc += wgt * St;
        Lacc += wgt * Lt;
        cacc += wgt * ct;
      }
      double scale = Sacc.norm() + Lacc.norm() + std::abs(cacc);
      if (!first) {
        last_incr = (Sacc - Sint).norm() + (Lacc - Lint).norm() + std::abs(cacc - cint);
        used_order = std::max(used_order, kGlOrders[oi]);
        if (last_incr <= 1e-14 * (1.0 + scale)) converged = true;
      }
      Sint = Sacc;
      Lint = Lacc;
      cint = cacc;
      first = false;
      if (converged) break;
    }
    if (!converged && last_incr > 1e-12)
      throw std::runtime_error("conjugate_by_affine: tau quadrature did not converge");

    Mat cell = Mat::Zero(twod + 1, twod + 1);
    cell.block(0, 0, twod, twod) = (S1 - Sint).cast<Complex>();
    cell.block(0, twod, twod, 1) = (L1 - Lint).cast<Complex>();
    cell(twod, twod) = Complex(c1 - cint, 0.0);
    grid.at(flat) = cell;
  }

  ExpandResult ex = grid_analyze(grid, K_out);
  ConjugateResult out;
  out.h = QuadHamReal(d, n, K_out);
  for (const auto& [k, v] : ex.series.coeffs()) {
    Mat Sk = v.block(0, 0, twod, twod);
    Mat Lk = v.block(0, twod, twod, 1);
    Complex ck = v(twod, twod);
    Mat Ssym = 0.5 * (Sk + Sk.transpose());
    if (op_norm(Ssym) > 0.0) out.h.S.set_coeff(k, Ssym);
    if (op_norm(Lk) > 0.0) out.h.L.set_coeff(k, Lk);
    if (std::abs(ck) > 0.0) out.h.c0.set_coeff(k, ck);
  }
  out.aliasing = ex.aliasing;
  out.quad_order = used_order;
  return out;
}

}  // namespace kamq
