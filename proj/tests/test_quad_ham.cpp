#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "kamq/quad_ham.hpp"
#include "oracles.hpp"

using namespace kamq;

namespace {

RVec rand_theta(std::mt19937_64& g, int n) {
  RVec th(n);
  for (int t = 0; t < n; ++t) th(t) = oracles::uniform(g, 0, 2 * M_PI);
  return th;
}

RVec rand_point(std::mt19937_64& g, int twod) {
  RVec w(twod);
  for (int t = 0; t < twod; ++t) w(t) = oracles::uniform(g, -1, 1);
  return w;
}

// z = (xi - i x)/sqrt(2) from a real phase point.
CVec z_of_w(const RVec& w, int d) {
  CVec z(d);
  for (int j = 0; j < d; ++j) z(j) = Complex(w(d + j), -w(j)) / std::sqrt(2.0);
  return z;
}

}  // namespace

TEST_CASE("to_complex: oscillator, pure coordinate, zero") {
  int d = 2, n = 1;
  // h = xi_1^2 + x_1^2  ->  2 z_1 zbar_1
  QuadHamReal h(d, n, 0);
  Mat S = Mat::Zero(2 * d, 2 * d);
  S(0, 0) = 2.0;
  S(d, d) = 2.0;  // 1/2 w.S w = x_1^2 + xi_1^2
  h.S.set_coeff({0}, S);
  QuadHamComplex q = to_complex(h);
  Mat B = q.Qzzb.coeff({0});
  REQUIRE(std::abs(B(0, 0) - Complex(2, 0)) < 1e-14);
  REQUIRE(B.norm() == Catch::Approx(2.0).margin(1e-14));
  REQUIRE(q.Qzz.max_coeff_norm() < 1e-14);
  REQUIRE(q.Qz.max_coeff_norm() < 1e-14);

  // h = x_1: evaluation agreement at random points
  QuadHamReal hx(d, n, 0);
  Mat L = Mat::Zero(2 * d, 1);
  L(0, 0) = 1.0;
  hx.L.set_coeff({0}, L);
  QuadHamComplex qx = to_complex(hx);
  auto g = oracles::rng(41);
  for (int trial = 0; trial < 32; ++trial) {
    RVec th = rand_theta(g, n);
    RVec w = rand_point(g, 2 * d);
    Complex lhs = qx.evaluate(th, z_of_w(w, d));
    REQUIRE(std::abs(lhs - Complex(w(0), 0)) < 1e-13);
  }

  QuadHamReal zero(d, n, 0);
  QuadHamComplex qz = to_complex(zero);
  REQUIRE(qz.Qzz.num_coeffs() == 0);
  REQUIRE(qz.Qzzb.num_coeffs() == 0);
  REQUIRE(qz.Qz.num_coeffs() == 0);
}

TEST_CASE("to_real(to_complex(.)) is the identity; evaluation matches") {
  auto g = oracles::rng(42);
  for (int trial = 0; trial < 10; ++trial) {
    int d = 1 + trial % 2, n = 1 + trial % 2;
    QuadHamReal h = oracles::random_quad_real(g, d, n, 2);
    QuadHamComplex q = to_complex(h);
    REQUIRE(q.is_real_valued(1e-12));
    REQUIRE(q.Qzz.is_pointwise_symmetric(1e-13));
    QuadHamReal back = to_real(q);
    for (const auto& [k, v] : h.S.coeffs()) REQUIRE((back.S.coeff(k) - v).norm() < 1e-14 * 10);
    for (const auto& [k, v] : h.L.coeffs()) REQUIRE((back.L.coeff(k) - v).norm() < 1e-14 * 10);
    for (int p = 0; p < 8; ++p) {
      RVec th = rand_theta(g, n);
      RVec w = rand_point(g, 2 * d);
      double hr = h.evaluate(th, w);
      Complex hc = q.evaluate(th, z_of_w(w, d));
      REQUIRE(std::abs(hc.imag()) < 1e-12 * (1.0 + std::abs(hc.real())));
      REQUIRE(std::abs(hc.real() - hr) < 1e-12 * (1.0 + std::abs(hr)));
    }
  }
}

TEST_CASE("poisson (real): canonical pairs and symbolic example") {
  int d = 2, n = 1;
  // f = x_1, g = xi_1: {x_1, xi_1} = 1
  QuadHamReal f(d, n, 0), g(d, n, 0);
  Mat Lf = Mat::Zero(2 * d, 1), Lg = Mat::Zero(2 * d, 1);
  Lf(0, 0) = 1.0;
  Lg(d, 0) = 1.0;
  f.L.set_coeff({0}, Lf);
  g.L.set_coeff({0}, Lg);
  QuadHamReal br = poisson(f, g);
  REQUIRE(std::abs(br.c0.coeff({0})(0, 0) - Complex(1, 0)) < 1e-15);
  REQUIRE(br.S.num_coeffs() == 0);
  REQUIRE(br.L.num_coeffs() == 0);

  // f = x^2, g = xi^2 (d=1): {f,g} = 4 x xi
  QuadHamReal f2(1, n, 0), g2(1, n, 0);
  Mat Sx = Mat::Zero(2, 2), Sxi = Mat::Zero(2, 2);
  Sx(0, 0) = 2.0;
  Sxi(1, 1) = 2.0;
  f2.S.set_coeff({0}, Sx);
  g2.S.set_coeff({0}, Sxi);
  QuadHamReal br2 = poisson(f2, g2);
  Mat expect = Mat::Zero(2, 2);
  expect(0, 1) = expect(1, 0) = 4.0;  // 1/2 w.S w = 4 x xi
  REQUIRE((br2.S.coeff({0}) - expect).norm() < 1e-14);

  // {f,f} = 0
  auto rg = oracles::rng(43);
  QuadHamReal r = oracles::random_quad_real(rg, 2, 2, 2);
  QuadHamReal self = poisson(r, r);
  REQUIRE(analytic_norm(self.S, 0).value < 1e-13);
  REQUIRE(analytic_norm(self.L, 0).value < 1e-13);
}

TEST_CASE("poisson: antisymmetry, Jacobi, finite-difference oracle") {
  auto g = oracles::rng(44);
  for (int trial = 0; trial < 6; ++trial) {
    int d = 1 + trial % 2, n = 1;
    QuadHamReal a = oracles::random_quad_real(g, d, n, 1);
    QuadHamReal b = oracles::random_quad_real(g, d, n, 1);
    QuadHamReal c = oracles::random_quad_real(g, d, n, 1);

    QuadHamReal ab = poisson(a, b);
    QuadHamReal ba = poisson(b, a);
    QuadHamReal anti = ab;
    anti += ba;
    REQUIRE(analytic_norm(anti.S, 0).value + analytic_norm(anti.L, 0).value +
                analytic_norm(anti.c0, 0).value <
            1e-12);

    // Jacobi identity
    QuadHamReal j1 = poisson(a, poisson(b, c));
    QuadHamReal j2 = poisson(b, poisson(c, a));
    QuadHamReal j3 = poisson(c, poisson(a, b));
    QuadHamReal jac = j1;
    jac += j2;
    jac += j3;
    double resid = analytic_norm(jac.S, 0).value + analytic_norm(jac.L, 0).value +
                   analytic_norm(jac.c0, 0).value;
    REQUIRE(resid < 1e-11);

    // pointwise values against the finite-difference bracket (exact for
    // quadratics)
    for (int p = 0; p < 4; ++p) {
      RVec th = rand_theta(g, n);
      RVec w = rand_point(g, 2 * d);
      auto fa = [&](const RVec& x) { return a.evaluate(th, x); };
      auto fb = [&](const RVec& x) { return b.evaluate(th, x); };
      double want = oracles::poisson_fd(fa, fb, w, d);
      REQUIRE(std::abs(ab.evaluate(th, w) - want) < 1e-9 * (1.0 + std::abs(want)));
    }
  }
}

TEST_CASE("complex bracket equals the transported real bracket") {
  auto g = oracles::rng(45);
  for (int trial = 0; trial < 8; ++trial) {
    int d = 1 + trial % 2, n = 1 + trial % 2;
    QuadHamReal a = oracles::random_quad_real(g, d, n, 1);
    QuadHamReal b = oracles::random_quad_real(g, d, n, 1);
    QuadHamComplex lhs = poisson(to_complex(a), to_complex(b));
    QuadHamComplex rhs = to_complex(poisson(a, b));
    for (int p = 0; p < 8; ++p) {
      RVec th = rand_theta(g, n);
      RVec w = rand_point(g, 2 * d);
      CVec z = z_of_w(w, d);
      Complex u = lhs.evaluate(th, z), v = rhs.evaluate(th, z);
      REQUIRE(std::abs(u - v) < 1e-12 * (1.0 + std::abs(v)));
    }
  }
}

TEST_CASE("hamiltonian_flow: trivial, rotation, translation, RK oracle") {
  int n = 1;
  QuadHamReal zero(1, n, 0);
  RVec th(1);
  th << 0.3;
  auto f0 = hamiltonian_flow(zero, th, 1.7);
  REQUIRE((f0.M - RMat::Identity(2, 2)).norm() == 0.0);
  REQUIRE(f0.T.norm() == 0.0);

  // chi = (x^2 + xi^2)/2: rotation by angle t
  QuadHamReal osc(1, n, 0);
  osc.S.set_coeff({0}, Mat(Mat::Identity(2, 2)));
  double t = 0.9;
  auto fr = hamiltonian_flow(osc, th, t);
  RMat expect(2, 2);
  expect << std::cos(t), std::sin(t), -std::sin(t), std::cos(t);
  REQUIRE((fr.M - expect).norm() < 1e-13);
  REQUIRE(fr.T.norm() < 1e-14);

  // chi = a xi: translation x -> x + a t
  QuadHamReal tr(1, n, 0);
  Mat L = Mat::Zero(2, 1);
  L(1, 0) = 0.7;
  tr.L.set_coeff({0}, L);
  auto ft = hamiltonian_flow(tr, th, t);
  REQUIRE((ft.M - RMat::Identity(2, 2)).norm() < 1e-14);
  REQUIRE(ft.T(0) == Catch::Approx(0.7 * t).margin(1e-14));
  REQUIRE(std::abs(ft.T(1)) < 1e-14);

  // random chi against direct ODE integration (theta frozen)
  auto g = oracles::rng(46);
  for (int trial = 0; trial < 5; ++trial) {
    int d = 1 + trial % 2;
    QuadHamReal chi = oracles::random_quad_real(g, d, n, 1);
    RVec theta = rand_theta(g, n);
    RMat J = symplectic_J(d);
    RMat B = J * chi.S.evaluate(theta).real();
    RVec bb = J * chi.L.evaluate(theta).real();
    RVec w0 = rand_point(g, 2 * d);
    auto fat = hamiltonian_flow(chi, theta, 1.0);
    RVec pushed = fat.M * w0 + fat.T;
    auto rhs = [&](double, const RVec& y) { return RVec(B * y + bb); };
    RVec want = oracles::rk4(rhs, w0, 0.0, 1.0, 4000);
    REQUIRE((pushed - want).norm() < 1e-12 * (1.0 + want.norm()));
    REQUIRE(symplectic_defect(fat.M) < 1e-12);
  }
}

TEST_CASE("hamiltonian_flow group property") {
  auto g = oracles::rng(47);
  QuadHamReal chi = oracles::random_quad_real(g, 2, 1, 1);
  RVec th = rand_theta(g, 1);
  double t = 0.6, s = 0.85;
  auto fs = hamiltonian_flow(chi, th, s);
  auto ft = hamiltonian_flow(chi, th, t);
  auto fts = hamiltonian_flow(chi, th, t + s);
  REQUIRE((fts.M - ft.M * fs.M).norm() < 1e-12);
  RVec comp = ft.M * fs.T + ft.T;
  REQUIRE((fts.T - comp).norm() < 1e-12);
}

TEST_CASE("energy conservation along autonomous flows") {
  auto g = oracles::rng(48);
  QuadHamReal h = oracles::random_quad_real(g, 2, 1, 0);  // theta-independent
  RVec th = RVec::Zero(1);
  RVec w0 = rand_point(g, 4);
  double e0 = h.evaluate(th, w0);
  for (double t : {0.5, 1.0, 2.0, 5.0}) {
    auto f = hamiltonian_flow(h, th, t);
    double e = h.evaluate(th, RVec(f.M * w0 + f.T));
    // random h may be hyperbolic; roundoff scales with the flow magnitude
    double scale = 1.0 + f.M.squaredNorm() + f.T.squaredNorm();
    REQUIRE(std::abs(e - e0) < 1e-12 * scale * (1.0 + std::abs(e0)));
  }
}

TEST_CASE("conjugate_by_affine: chi = 0 leaves h unchanged") {
  auto g = oracles::rng(49);
  QuadHamReal h = oracles::random_quad_real(g, 1, 1, 2);
  QuadHamReal chi(1, 1, 0);
  RVec omega(1);
  omega << 1.3;
  auto r = conjugate_by_affine(h, chi, omega, 4, 0);
  for (const auto& [k, v] : h.S.coeffs()) REQUIRE((r.h.S.coeff(k) - v).norm() < 1e-13);
  for (const auto& [k, v] : h.L.coeffs()) REQUIRE((r.h.L.coeff(k) - v).norm() < 1e-13);
  REQUIRE(r.aliasing < 1e-13);
}

TEST_CASE("conjugate_by_affine: time-independent chi reduces to h o phi") {
  auto g = oracles::rng(50);
  QuadHamReal h = oracles::random_quad_real(g, 1, 1, 1);
  QuadHamReal chi = oracles::random_quad_real(g, 1, 1, 0);  // no theta dependence
  RVec omega(1);
  omega << 0.9;
  auto r = conjugate_by_affine(h, chi, omega, 3, 0);
  for (int p = 0; p < 16; ++p) {
    RVec th = rand_theta(g, 1);
    RVec w = rand_point(g, 2);
    auto f = hamiltonian_flow(chi, th, 1.0);
    double want = h.evaluate(th, RVec(f.M * w + f.T));
    REQUIRE(std::abs(r.h.evaluate(th, w) - want) < 1e-11 * (1.0 + std::abs(want)));
  }
}

TEST_CASE("conjugating h0 by its own flow returns h0") {
  // autonomous invariance: h has no theta dependence, chi = t * h
  QuadHamReal h(1, 1, 0);
  Mat S = Mat::Zero(2, 2);
  S(0, 0) = 1.4;
  S(1, 1) = 1.4;
  h.S.set_coeff({0}, S);
  RVec omega(1);
  omega << 1.1;
  auto r = conjugate_by_affine(h, h, omega, 2, 0);
  REQUIRE((r.h.S.coeff({0}) - S).norm() < 1e-12);
  REQUIRE(analytic_norm(r.h.L, 0).value < 1e-12);
}
