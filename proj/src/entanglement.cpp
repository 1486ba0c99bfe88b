#include "modamp/entanglement.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "modamp/errors.hpp"

namespace modamp {

using cd = std::complex<double>;

double BellMix::p_max() const noexcept { return std::max({p_s, p_x, p_y, p_z}); }

TwoSiteReducer::TwoSiteReducer(BasisPtr basis, int site_a, int site_b) : basis_(std::move(basis)) {
  if (!basis_) throw DomainError("reducer needs a basis");
  const int n = basis_->n_sites();
  if (site_a < 0 || site_b < 0 || site_a >= n || site_b >= n) throw DomainError("reduced_two_qubit: site out of range");
  if (site_a == site_b) throw DomainError("reduced_two_qubit: sites must be distinct");

  const Config ma = Config{1} << site_a, mb = Config{1} << site_b;
  q_.resize(basis_->size());
  for (std::size_t i = 0; i < basis_->size(); ++i) {
    const Config c = basis_->state(i);
    q_[i] = static_cast<std::uint8_t>(((c & ma) ? 2 : 0) | ((c & mb) ? 1 : 0));
  }
  for (std::size_t i = 0; i < basis_->size(); ++i) {
    const Config c = basis_->state(i);
    const Config rest = c & ~(ma | mb);
    for (std::uint8_t q = 0; q < 4; ++q) {
      if (q <= q_[i]) continue;
      const Config other = rest | ((q & 2) ? ma : 0) | ((q & 1) ? mb : 0);
      if (auto j = basis_->find(other)) pairs_.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(*j)});
    }
  }
}

TwoQubitDensity TwoSiteReducer::reduce(const Eigen::VectorXcd& psi) const {
  if (static_cast<std::size_t>(psi.size()) != q_.size()) throw DomainError("reducer: state dimension mismatch");
  double diag[4] = {0, 0, 0, 0};
  for (std::size_t i = 0; i < q_.size(); ++i) diag[q_[i]] += std::norm(psi(static_cast<Eigen::Index>(i)));
  TwoQubitDensity r = TwoQubitDensity::Zero();
  for (int q = 0; q < 4; ++q) r(q, q) = diag[q];
  for (const Pair& p : pairs_) {
    const cd v = psi(p.i) * std::conj(psi(p.j));
    r(q_[p.i], q_[p.j]) += v;
    r(q_[p.j], q_[p.i]) += std::conj(v);
  }
  return r;
}

TwoQubitDensity TwoSiteReducer::reduce(const Eigen::MatrixXcd& rho) const {
  if (static_cast<std::size_t>(rho.rows()) != q_.size() || rho.rows() != rho.cols())
    throw DomainError("reducer: density dimension mismatch");
  TwoQubitDensity r = TwoQubitDensity::Zero();
  for (std::size_t i = 0; i < q_.size(); ++i) r(q_[i], q_[i]) += rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
  for (const Pair& p : pairs_) {
    r(q_[p.i], q_[p.j]) += rho(p.i, p.j);
    r(q_[p.j], q_[p.i]) += rho(p.j, p.i);
  }
  return r;
}

TwoQubitDensity reduced_two_qubit(const StateVector& state, int site_a, int site_b) {
  return TwoSiteReducer(state.basis, site_a, site_b).reduce(state.amplitudes);
}

TwoQubitDensity reduced_two_qubit(const DensityOperator& rho, int site_a, int site_b) {
  return TwoSiteReducer(rho.basis, site_a, site_b).reduce(rho.matrix);
}

const Eigen::Matrix4cd& bell_basis() {
  static const Eigen::Matrix4cd b = [] {
    const double s = 1.0 / std::sqrt(2.0);
    const cd i(0.0, 1.0);
    Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
    // psi-
    m(1, 0) = s;
    m(2, 0) = -s;
    // (X(x)1) psi- = (|11> - |00>)/sqrt(2)
    m(3, 1) = s;
    m(0, 1) = -s;
    // (Y(x)1) psi- = i(|00> + |11>)/sqrt(2)
    m(0, 2) = i * s;
    m(3, 2) = i * s;
    // (Z(x)1) psi- = (|01> + |10>)/sqrt(2)
    m(1, 3) = s;
    m(2, 3) = s;
    return m;
  }();
  return b;
}

BellMix bell_decompose(const TwoQubitDensity& rho) {
  const Eigen::Matrix4cd& B = bell_basis();
  const Eigen::Matrix4cd r = B.adjoint() * rho * B;
  BellMix mix;
  mix.p_s = r(0, 0).real();
  mix.p_x = r(1, 1).real();
  mix.p_y = r(2, 2).real();
  mix.p_z = r(3, 3).real();
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      if (a != b) mix.residual = std::max(mix.residual, std::abs(r(a, b)));
  return mix;
}

double binary_entropy(double x) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

EntanglementValue entanglement_E(const BellMix& mix) {
  auto clamp = [](double p) { return (p < 0.0 && p >= -1e-10) ? 0.0 : p; };
  const double p = std::min(1.0, std::max({clamp(mix.p_s), clamp(mix.p_x), clamp(mix.p_y), clamp(mix.p_z)}));
  EntanglementValue v;
  if (p > 0.5) {
    v.e = 1.0 - binary_entropy(p);
    v.c = 2.0 * p - 1.0;
  }
  return v;
}

double concurrence(const TwoQubitDensity& rho) {
  Eigen::Matrix4cd yy = Eigen::Matrix4cd::Zero();
  yy(0, 3) = -1.0;
  yy(3, 0) = -1.0;
  yy(1, 2) = 1.0;
  yy(2, 1) = 1.0;
  const Eigen::Matrix4cd flipped = yy * rho.conjugate() * yy;

  const Eigen::Matrix4cd h = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(h);
  Eigen::Vector4d ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Eigen::Matrix4cd sq = es.eigenvectors() * ev.cast<cd>().asDiagonal() * es.eigenvectors().adjoint();

  // Eigenvalues of sqrt(rho) rho~ sqrt(rho) are the squares of Wootters' lambdas.
  Eigen::Matrix4cd m = sq * flipped * sq;
  m = 0.5 * (m + m.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es2(m, Eigen::EigenvaluesOnly);
  Eigen::Vector4d lam = es2.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  std::sort(lam.data(), lam.data() + 4, std::greater<>());
  return std::max(0.0, lam(0) - lam(1) - lam(2) - lam(3));
}

}  // namespace modamp
