// The quadratic normal-form iteration: parameter schedule, repeated
// homological solve + exact affine conjugation, transformation composition to
// the limit, and measure scans over the frequency parameter.
//
// Per step m (schedule driven by the input size eps):
//   sigma_m = sigma_{m-1} - C* sigma_0 / m^2        (C*^-1 = 2 sum j^-2)
//   K_m     = ceil( 2 ln(1/eps_{m-1}) / (sigma_{m-1}-sigma_m) )
//   kappa_m = eps_{m-1}^{1/8},   eps_m = eps^{(3/2)^m}
// The measured majorant of the perturbation drives termination; the schedule
// eps_m only serves as the monitoring envelope.

#pragma once

#include <Eigen/Dense>

#include <atomic>
#include <cmath>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "kamq/homological.hpp"
#include "kamq/quad_ham.hpp"
#include "kamq/symplectic.hpp"

namespace kamq {

struct KamSchedule {
  double eps0 = 1e-3;
  double sigma0 = 1.0;
  int m_max = 25;
  double tol_residual_rel = 1e-12;  // termination: [q_m] <= rel * [q_0]
  int K_cap = 160;                  // storage / solve cutoff bound
  double c_star() const {
    static const double inv = 2.0 * (M_PI * M_PI / 6.0);
    return 1.0 / inv;
  }
  double sigma(int m) const {
    double s = sigma0;
    for (int j = 1; j <= m; ++j) s -= c_star() * sigma0 / double(j) / double(j);
    return s;
  }
  double eps(int m) const { return std::pow(eps0, std::pow(1.5, m)); }
  double kappa(int m) const { return std::pow(eps(m - 1), 0.125); }
  int K(int m) const {
    double dec = c_star() * sigma0 / double(m) / double(m);
    return int(std::ceil(2.0 * std::log(1.0 / eps(m - 1)) / dec));
  }
};

struct KamOptions {
  KamSchedule schedule;
  bool track_transformation = true;
  int compose_grid = 64;         // per-dim grid for the composed map (n = 1)
  int compose_grid_2d = 32;      // per-dim grid when n >= 2
  double noise_floor_rel = 1e-14;  // pointwise DFT noise scale, relative to the
                                   // conjugated Hamiltonian; coefficients below
                                   // it are numerically zero and are dropped
  double tol_floor_abs = 1e-13;  // termination floor added to tol_rel * [q_0]
  int conj_retries = 3;
};

// theta-dependent affine symplectic map  w -> e^{A(theta)} w + V(theta).
struct AffineSymplectic {
  FourierSeries A;  // 2d x 2d, values in sp(2d)
  FourierSeries V;  // 2d-vector

  RMat matrix_at(const RVec& theta) const { return A.evaluate(theta).real().exp(); }
  RVec offset_at(const RVec& theta) const { return V.evaluate(theta).real().col(0); }
  RVec apply(const RVec& theta, const RVec& w) const {
    return matrix_at(theta) * w + offset_at(theta);
  }
  RVec apply_inverse(const RVec& theta, const RVec& w) const {
    RMat E = matrix_at(theta);
    return E.partialPivLu().solve(w - offset_at(theta));
  }
};

struct ReductionResult {
  bool accepted = false;
  bool converged = false;
  int steps_run = 0;
  std::string reason;  // empty on success; "resonant", "cap", "diverged", ...
  int reject_step = -1;
  double reject_min_divisor = 0.0;

  Eigen::MatrixXcd N_infinity;
  RVec nu_infinity;
  RMat diagonalizer;  // P in Sp(2d)
  AffineSymplectic transformation;      // reduced -> original coordinates
  std::vector<QuadHamReal> generators;  // per-step chi_m, for diagnostics

  std::vector<double> residual_history;   // [q_m]_{sigma_m}, m = 0,1,...
  std::vector<double> divisor_margin_history;
  std::vector<double> envelope_history;   // schedule eps_m for comparison
  double aliasing_budget = 0.0;
  double tol_residual = 0.0;
  bool cap_hit = false;
};

struct KamStepResult {
  NormalForm nf;
  QuadHamComplex q;
  QuadHamReal chi_real;
  bool accepted = false;
  double min_divisor = 0.0;
  double aliasing = 0.0;
  bool cap_loss = false;  // solve cutoff clipped below the support of q
};

// One iteration: solve the homological equation at (K_m, kappa_m), flow the
// generator, conjugate h_m + q_m exactly, split off the new normal form as
// the angle average of the z-zbar block.
inline KamStepResult kam_step(const NormalForm& nf, const QuadHamComplex& q, int m,
                              const KamOptions& opt, double tol_abs) {
  const KamSchedule& sch = opt.schedule;
  KamStepResult out;
  out.nf = nf;
  out.q = q;

  int K_sched = sch.K(m);
  int K_eff = std::min(K_sched, sch.K_cap);
  out.cap_loss = (K_sched > sch.K_cap) && (q.support_radius() > sch.K_cap);

  auto sol = solve_homological(nf, q, K_eff, sch.kappa(m));
  out.min_divisor = sol.min_divisor;
  if (!sol.accepted) return out;

  QuadHamReal chi = to_real(sol.chi);
  out.chi_real = chi;

  QuadHamComplex hm = normal_form_hamiltonian(nf.N, q.n);
  QuadHamReal H = to_real(hm + q);
  double hscale = analytic_norm(H.S, 0).value + analytic_norm(H.L, 0).value +
                  analytic_norm(H.c0, 0).value;

  int s_q = std::max(H.support_radius(), 1);
  int s_chi = std::max(chi.support_radius(), 1);
  int K_out = std::min(sch.K_cap, s_q + 3 * s_chi + 4);

  double sig_next = sch.sigma(m);
  ConjugateResult conj;
  for (int attempt = 0;; ++attempt) {
    conj = conjugate_by_affine(H, chi, nf.omega, K_out, 2 * K_out + 2);
    QuadHamComplex qn = to_complex(conj.h);
    double scale = std::max(tol_abs, qn.weight_norm(sig_next));
    if (conj.aliasing <= 0.05 * scale || attempt + 1 >= opt.conj_retries ||
        K_out >= sch.K_cap) {
      out.q = qn;
      break;
    }
    K_out = std::min(sch.K_cap, K_out + K_out / 2 + 2);
  }
  out.aliasing = conj.aliasing;

  // new normal form: angle average of the transformed z-zbar block
  Mat N_next = out.q.Qzzb.coeff(MultiIndex(q.n, 0));
  N_next = 0.5 * (N_next + N_next.adjoint());
  out.q.Qzzb.set_coeff(MultiIndex(q.n, 0), Mat(Mat::Zero(q.d, q.d)));
  out.nf.N = N_next;
  // coefficients at the grid-transform noise scale are numerically zero;
  // keeping them would let the analytic weight amplify noise at large |k|
  out.q.prune_abs(opt.noise_floor_rel * (1.0 + hscale));
  out.accepted = true;
  return out;
}

inline ReductionResult reduce(const RVec& nu, const RVec& omega, const QuadHamComplex& W,
                              double eps, KamOptions opt) {
  const int d = W.d;
  const int n = W.n;
  opt.schedule.eps0 = std::min(std::abs(eps) > 0 ? std::abs(eps) : 1e-16, 0.5);

  ReductionResult res;
  NormalForm nf(omega, nu);
  QuadHamComplex q = W.scaled(eps);

  double q0 = q.weight_norm(opt.schedule.sigma0);
  res.tol_residual = std::max(opt.schedule.tol_residual_rel * q0,
                              opt.tol_floor_abs * (1.0 + op_norm(nf.N)));
  res.residual_history.push_back(q0);
  res.envelope_history.push_back(opt.schedule.eps(0));

  const int G = (n == 1) ? opt.compose_grid : opt.compose_grid_2d;
  TensorGrid Egrid(n, G, 2 * d, 2 * d), Vgrid(n, G, 2 * d, 1);
  if (opt.track_transformation) {
    for (std::size_t i = 0; i < Egrid.size(); ++i) {
      Egrid.at(i) = Mat(Mat::Identity(2 * d, 2 * d));
      Vgrid.at(i) = Mat(Mat::Zero(2 * d, 1));
    }
  }

  bool done = (q0 <= res.tol_residual) || q0 == 0.0;
  int m = 0;
  while (!done) {
    ++m;
    if (m > opt.schedule.m_max) {
      res.reason = "m_max reached before residual tolerance";
      break;
    }
    KamStepResult step = kam_step(nf, q, m, opt, res.tol_residual);
    res.divisor_margin_history.push_back(step.min_divisor);
    if (!step.accepted) {
      res.reason = "resonant";
      res.reject_step = m;
      res.reject_min_divisor = step.min_divisor;
      res.steps_run = m;
      return res;
    }
    if (step.cap_loss) res.cap_hit = true;
    nf = step.nf;
    q = step.q;
    res.aliasing_budget += step.aliasing;
    double rm = q.weight_norm(opt.schedule.sigma(m));
    res.residual_history.push_back(rm);
    res.envelope_history.push_back(opt.schedule.eps(m));
    res.steps_run = m;

    if (opt.track_transformation) {
      res.generators.push_back(step.chi_real);
      for (std::size_t i = 0; i < Egrid.size(); ++i) {
        RVec th = Egrid.theta(i);
        FlowAt f = hamiltonian_flow(step.chi_real, th, 1.0);
        Mat Eprev = Egrid.at(i);
        Vgrid.at(i) = Eprev * f.T.cast<Complex>() + Vgrid.at(i);
        Egrid.at(i) = Eprev * f.M.cast<Complex>();
      }
    }
    done = (rm <= res.tol_residual);
  }

  if (!done) {
    if (res.reason.empty()) res.reason = "did not converge";
    if (res.cap_hit) res.reason += " (K cap hit with support loss)";
    return res;
  }
  if (res.cap_hit) {
    // information was truncated: do not certify convergence
    res.reason = "K cap hit with support loss";
    return res;
  }

  res.converged = true;
  res.N_infinity = nf.N;

  // Williamson frequencies of the limit quadratic form (its Hessian)
  QuadHamReal h_inf = to_real(normal_form_hamiltonian(nf.N, n));
  RMat S_inf = h_inf.S.coeff(MultiIndex(n, 0)).real();
  auto wf = williamson_diagonalize(S_inf);
  res.nu_infinity = wf.nu_inf;
  res.diagonalizer = wf.P;

  if (opt.track_transformation) {
    // composed map on the grid -> principal log -> series
    TensorGrid Agrid(n, G, 2 * d, 2 * d);
    double amax = 0.0;
    for (std::size_t i = 0; i < Egrid.size(); ++i) {
      RMat E = Egrid.at(i).real();
      RMat Ai = logm_near_identity(E);
      amax = std::max(amax, Ai.norm());
      Agrid.at(i) = Ai.cast<Complex>();
    }
    int K_A = G / 2 - 1;
    auto exA = grid_analyze(Agrid, K_A);
    auto exV = grid_analyze(Vgrid, K_A);
    res.transformation.A = exA.series;
    res.transformation.V = exV.series;
    res.transformation.A.prune(opt.noise_floor_rel * (1.0 + amax));
    res.transformation.V.prune(opt.noise_floor_rel * (1.0 + amax));
    res.aliasing_budget += exA.aliasing + exV.aliasing;
  }
  res.accepted = true;
  return res;
}

struct ScanSample {
  RVec omega;
  bool accepted = false;
  bool converged = false;
  int reject_step = -1;
  double min_divisor = 0.0;
  int steps = 0;
};

struct ScanResult {
  double excised_fraction = 0.0;
  std::vector<ScanSample> samples;
  std::vector<int> first_rejection_histogram;  // index m-1 counts rejections at step m
};

// Monte-Carlo over omega in (0, 2pi)^n with a fixed seed; independent
// reductions run on a small worker pool and merge in sample order.
inline ScanResult scan_measure(const RVec& nu, const QuadHamComplex& W, double eps,
                               int omega_samples, unsigned seed, KamOptions opt,
                               int threads = 1) {
  if (omega_samples < 1) throw std::invalid_argument("scan_measure: omega_samples >= 1");
  const int n = W.n;
  opt.track_transformation = false;

  std::vector<RVec> omegas(omega_samples);
  std::mt19937_64 g(seed);
  std::uniform_real_distribution<double> u(0.0, 2.0 * M_PI);
  for (int i = 0; i < omega_samples; ++i) {
    RVec w(n);
    for (int t = 0; t < n; ++t) w(t) = u(g);
    omegas[i] = w;
  }

  ScanResult out;
  out.samples.resize(omega_samples);
  std::atomic<int> next(0);
  auto worker = [&]() {
    while (true) {
      int i = next.fetch_add(1);
      if (i >= omega_samples) break;
      ScanSample s;
      s.omega = omegas[i];
      auto r = reduce(nu, omegas[i], W, eps, opt);
      s.accepted = (r.reason != "resonant");
      s.converged = r.converged;
      s.reject_step = r.reject_step;
      s.min_divisor = r.reject_min_divisor;
      s.steps = r.steps_run;
      out.samples[i] = s;
    }
  };
  int T = std::max(1, threads);
  std::vector<std::thread> pool;
  for (int t = 0; t < T - 1; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  int rejected = 0, max_step = 0;
  for (const auto& s : out.samples)
    if (!s.accepted) {
      ++rejected;
      max_step = std::max(max_step, s.reject_step);
    }
  out.first_rejection_histogram.assign(std::max(1, max_step), 0);
  for (const auto& s : out.samples)
    if (!s.accepted) out.first_rejection_histogram[s.reject_step - 1]++;
  out.excised_fraction = double(rejected) / double(omega_samples);
  return out;
}

}  // namespace kamq
