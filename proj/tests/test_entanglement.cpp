#include <doctest.h>

#include <cmath>
#include <random>

#include "modamp/eigensolve.hpp"
#include "modamp/entanglement.hpp"
#include "modamp/hamiltonian.hpp"
#include "oracle/dense_oracle.hpp"

using namespace modamp;
using cplx = std::complex<double>;

namespace {

Eigen::Vector4cd singlet() {
  Eigen::Vector4cd s(0.0, 1.0, -1.0, 0.0);
  return s / std::sqrt(2.0);
}

TwoQubitDensity bell_diagonal(double ps, double px, double py, double pz) {
  const Eigen::Matrix4cd& b = bell_basis();
  Eigen::Vector4cd w(ps, px, py, pz);
  return b * w.asDiagonal() * b.adjoint();
}

ModuleSpec module(int n, double jp, double delta) {
  ModuleSpec m;
  m.n_sites = n;
  m.j_prime = jp;
  m.delta = delta;
  return m;
}

}  // namespace

TEST_CASE("Bell basis is orthonormal and starts with the singlet") {
  const Eigen::Matrix4cd& b = bell_basis();
  CHECK((b.adjoint() * b - Eigen::Matrix4cd::Identity()).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((b.col(0) - singlet()).norm() < 1e-15);
  // Columns 1..3 are (sigma_a (x) 1) |psi->, up to a global phase.
  const oracle::Mat id = oracle::pauli('1');
  const char axes[] = {'x', 'y', 'z'};
  for (int k = 0; k < 3; ++k) {
    const Eigen::Vector4cd v = oracle::kron(oracle::pauli(axes[k]), id) * singlet();
    CHECK(std::abs(std::abs(b.col(k + 1).dot(v)) - 1.0) < 1e-15);
  }
}

TEST_CASE("Bell decomposition of reference states") {
  const Eigen::Vector4cd s = singlet();
  BellMix m = bell_decompose(s * s.adjoint());
  CHECK(m.p_s == doctest::Approx(1.0));
  CHECK(m.p_x == doctest::Approx(0.0));
  CHECK(m.residual < 1e-15);

  m = bell_decompose(Eigen::Matrix4cd::Identity() / 4.0);
  for (double p : {m.p_s, m.p_x, m.p_y, m.p_z}) CHECK(p == doctest::Approx(0.25));
  CHECK(m.residual < 1e-15);

  m = bell_decompose(bell_diagonal(0.1, 0.2, 0.3, 0.4));
  CHECK(m.p_s == doctest::Approx(0.1));
  CHECK(m.p_y == doctest::Approx(0.3));
  CHECK(m.sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m.p_max() == doctest::Approx(0.4));
}

TEST_CASE("entanglement from Bell weights") {
  BellMix m;
  m.p_s = 1.0;
  EntanglementValue v = entanglement_E(m);
  CHECK(v.e == doctest::Approx(1.0));
  CHECK(v.c == doctest::Approx(1.0));

  m = {0.5, 0.5 / 3, 0.5 / 3, 0.5 / 3, 0.0};
  v = entanglement_E(m);
  CHECK(v.e == 0.0);
  CHECK(v.c == 0.0);

  m = {0.625, 0.125, 0.125, 0.125, 0.0};
  CHECK(entanglement_E(m).e == doctest::Approx(0.0455636).epsilon(1e-5));

  // Tiny negative weights are noise.
  m = {1.0 + 5e-11, 0.0, -5e-11, 0.0, 0.0};
  CHECK(std::isfinite(entanglement_E(m).e));
  CHECK(binary_entropy(0.0) == 0.0);
  CHECK(binary_entropy(1.0) == 0.0);
  CHECK(binary_entropy(0.5) == doctest::Approx(1.0));
}

TEST_CASE("E is nondecreasing in p_max and consistent with the Wootters concurrence") {
  double previous = -1.0;
  for (int k = 0; k <= 100; ++k) {
    const double p = 0.5 + 0.005 * k;
    const double rest = (1.0 - p) / 3.0;
    const BellMix m{p, rest, rest, rest, 0.0};
    const EntanglementValue v = entanglement_E(m);
    CHECK(v.e >= previous);
    previous = v.e;
    const double c = concurrence(bell_diagonal(p, rest, rest, rest));
    CHECK(c == doctest::Approx(v.c).epsilon(1e-9));
    if (c > 0.0) CHECK(std::abs(v.e - (1.0 - binary_entropy((c + 1.0) / 2.0))) < 1e-8);
  }
}

TEST_CASE("Wootters concurrence") {
  const Eigen::Vector4cd s = singlet();
  CHECK(concurrence(s * s.adjoint()) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(concurrence(Eigen::Matrix4cd::Identity() / 4.0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(concurrence(bell_diagonal(0.7, 0.1, 0.1, 0.1)) == doctest::Approx(0.4).epsilon(1e-12));
  // Product state.
  Eigen::Vector4cd prod(0.0, 1.0, 0.0, 0.0);
  CHECK(concurrence(prod * prod.adjoint()) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("reduced states of simple vectors") {
  const auto basis = build_sector_basis(4, 2);
  // Sites 0 and 1 of |..10> with site 1 up: first bit (site 0) = 0, second = 1.
  const TwoQubitDensity r = reduced_two_qubit(basis_state(basis, 0b1010), 0, 1);
  CHECK(std::abs(r(1, 1) - cplx(1.0)) < 1e-15);
  CHECK(r.cwiseAbs().sum() == doctest::Approx(1.0));

  const auto b2 = build_sector_basis(2, 1);
  Eigen::VectorXcd a(2);
  // Basis order {01, 10} as configurations: site 0 up, then site 1 up.
  a << 1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0);
  const TwoQubitDensity rs = reduced_two_qubit(make_state(b2, a), 0, 1);
  const BellMix m = bell_decompose(rs);
  CHECK(m.p_s == doctest::Approx(1.0));
  CHECK(std::abs(rs.trace() - cplx(1.0)) < 1e-15);
}

TEST_CASE("module end pair matches the dense partial trace") {
  for (double delta : {0.0, 1.0}) {
    for (double jp : {0.3, 0.8}) {
      const EigenPair g = module_ground_state(module(8, jp, delta));
      const auto bonds = oracle::module_bonds_by_label(8, 1.0, jp, [](int l) { return l - 1; });
      oracle::Vec full = oracle::sector_ground_state(oracle::xxz(8, bonds, delta), 8, 4);
      // Align the global phase with the library vector.
      cplx overlap = 0.0;
      for (std::size_t i = 0; i < g.vector.dim(); ++i)
        overlap += std::conj(full(static_cast<Eigen::Index>(g.vector.basis->state(i)))) *
                   g.vector.amplitudes(static_cast<Eigen::Index>(i));
      full *= overlap / std::abs(overlap);
      const TwoQubitDensity mine = reduced_two_qubit(g.vector, 0, 7);
      const Eigen::Matrix4cd ref = oracle::partial_trace(full, 8, 0, 7);
      CHECK((mine - ref).cwiseAbs().maxCoeff() < 1e-12);
      const BellMix m = bell_decompose(mine);
      CHECK(std::abs(m.p_x - m.p_y) < 1e-10);
      CHECK(m.residual < 1e-10);
      CHECK(m.sum() == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("density and pure reductions agree") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  const auto basis = build_sector_basis(8, 4);
  Eigen::VectorXcd a(static_cast<Eigen::Index>(basis->size()));
  for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = {g(rng), g(rng)};
  a.normalize();
  const StateVector v = make_state(basis, a);
  const TwoQubitDensity r1 = reduced_two_qubit(v, 2, 5);
  const TwoQubitDensity r2 = reduced_two_qubit(pure_density(v), 2, 5);
  CHECK((r1 - r2).cwiseAbs().maxCoeff() < 1e-14);

  oracle::Vec full = oracle::Vec::Zero(256);
  for (std::size_t i = 0; i < basis->size(); ++i)
    full(static_cast<Eigen::Index>(basis->state(i))) = a(static_cast<Eigen::Index>(i));
  CHECK((r1 - oracle::partial_trace(full, 8, 2, 5)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((r1 - r1.adjoint()).cwiseAbs().maxCoeff() < 1e-15);
}
