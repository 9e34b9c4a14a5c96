#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "kamq/symplectic.hpp"
#include "oracles.hpp"

using namespace kamq;

namespace {

RMat random_hamiltonian_matrix(std::mt19937_64& g, int d, double scale) {
  // A = J * (symmetric) is the general element of sp(2d).
  RMat S(2 * d, 2 * d);
  for (int i = 0; i < 2 * d; ++i)
    for (int j = 0; j < 2 * d; ++j) S(i, j) = oracles::uniform(g, -1, 1);
  S = 0.5 * (S + S.transpose()).eval();
  return symplectic_J(d) * S * scale;
}

RMat random_symplectic(std::mt19937_64& g, int d, double scale = 0.4) {
  return expm_hamiltonian(random_hamiltonian_matrix(g, d, scale));
}

}  // namespace

TEST_CASE("exp of zero and log of identity") {
  RMat A = RMat::Zero(4, 4);
  REQUIRE((expm_hamiltonian(A) - RMat::Identity(4, 4)).norm() == 0.0);
  REQUIRE(logm_near_identity(RMat::Identity(4, 4)).norm() == 0.0);
}

TEST_CASE("rotation generator: exp(tJ) and principal log") {
  double t = 1.2;
  RMat J = symplectic_J(1);
  RMat R = expm_hamiltonian(t * J);
  RMat expect(2, 2);
  expect << std::cos(t), std::sin(t), -std::sin(t), std::cos(t);
  REQUIRE((R - expect).norm() < 1e-14);
  for (double tt : {0.3, -0.9, 2.5}) {
    RMat L = logm_near_identity(expm_hamiltonian(tt * J));
    REQUIRE((L - tt * J).norm() < 1e-12);
  }
}

TEST_CASE("exp maps sp(2d) into Sp(2d); log round-trips") {
  auto g = oracles::rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    int d = 1 + (trial % 3);
    RMat A = random_hamiltonian_matrix(g, d, 0.3);
    RMat M = expm_hamiltonian(A);
    REQUIRE(symplectic_defect(M) < 1e-12 * (1.0 + M.norm()));
    RMat L = logm_near_identity(M);
    REQUIRE((L - A).norm() < 1e-12 * (1.0 + A.norm()));
    REQUIRE(hamiltonian_defect(L) < 1e-12);
    REQUIRE((expm_hamiltonian(L) - M).norm() < 1e-12);
  }
}

TEST_CASE("log rejects matrices on the branch cut") {
  RMat M = -RMat::Identity(2, 2);  // symplectic, but no real principal log
  REQUIRE_THROWS_AS(logm_near_identity(M), std::runtime_error);
}

TEST_CASE("williamson: identity input") {
  for (int d : {1, 2, 3}) {
    auto w = williamson_diagonalize(RMat::Identity(2 * d, 2 * d));
    for (int j = 0; j < d; ++j) REQUIRE(w.nu_inf(j) == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(symplectic_defect(w.P) < 1e-12);
    // P is a symplectic rotation of the degenerate eigenspace; it must still
    // diagonalize exactly
    RMat Pinv = w.P.inverse();
    RMat D = Pinv.transpose() * RMat::Identity(2 * d, 2 * d) * Pinv;
    REQUIRE((D - RMat::Identity(2 * d, 2 * d)).norm() < 1e-11);
  }
}

TEST_CASE("williamson: 1d scaling h = xi^2 + 4 x^2") {
  RMat S(2, 2);
  S << 4, 0, 0, 1;  // h = (1/2) w.S w scaled: frequencies |eig(J S)| = 2
  auto w = williamson_diagonalize(S);
  REQUIRE(w.nu_inf(0) == Catch::Approx(2.0).margin(1e-12));
  REQUIRE(symplectic_defect(w.P) < 1e-12);
  RMat Pinv = w.P.inverse();
  RMat D = Pinv.transpose() * S * Pinv;
  RMat expect = RMat::Zero(2, 2);
  expect(0, 0) = expect(1, 1) = 2.0;
  REQUIRE((D - expect).norm() < 1e-11);
}

TEST_CASE("williamson: construct-and-recover with known symplectic R") {
  auto g = oracles::rng(32);
  for (int trial = 0; trial < 40; ++trial) {
    int d = 1 + (trial % 2);
    RVec nu(d);
    for (int j = 0; j < d; ++j) nu(j) = oracles::uniform(g, 0.5, 3.0);
    std::sort(nu.data(), nu.data() + d);
    RVec diag(2 * d);
    diag << nu, nu;
    RMat R = random_symplectic(g, d);
    RMat S = R.transpose() * RMat(diag.asDiagonal()) * R;
    auto w = williamson_diagonalize(S);
    for (int j = 0; j < d; ++j) REQUIRE(w.nu_inf(j) == Catch::Approx(nu(j)).margin(1e-11));
    RMat Pinv = w.P.inverse();
    RMat D = Pinv.transpose() * S * Pinv;
    REQUIRE((D - RMat(diag.asDiagonal())).norm() < 1e-10);
    REQUIRE(symplectic_defect(w.P) < 1e-11);
    REQUIRE(std::abs(w.P.determinant() - 1.0) < 1e-10);
  }
}

TEST_CASE("williamson frequencies are symplectic invariants") {
  auto g = oracles::rng(33);
  for (int trial = 0; trial < 20; ++trial) {
    int d = 1 + (trial % 2);
    RMat S0(2 * d, 2 * d);
    for (int i = 0; i < 2 * d; ++i)
      for (int j = 0; j < 2 * d; ++j) S0(i, j) = oracles::uniform(g, -1, 1);
    S0 = (0.5 * (S0 + S0.transpose()) + 3.0 * RMat::Identity(2 * d, 2 * d)).eval();
    RMat R = random_symplectic(g, d);
    auto w1 = williamson_diagonalize(S0);
    auto w2 = williamson_diagonalize(RMat(R.transpose() * S0 * R));
    REQUIRE((w1.nu_inf - w2.nu_inf).norm() < 1e-10 * (1.0 + w1.nu_inf.norm()));
  }
}

TEST_CASE("williamson rejects indefinite input") {
  RMat S(2, 2);
  S << 1, 0, 0, -1;
  REQUIRE_THROWS_AS(williamson_diagonalize(S), std::invalid_argument);
}
