#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "modamp/basis.hpp"
#include "modamp/dynamics.hpp"

namespace modamp {

/// Two-qubit state over {00, 01, 10, 11}; the first bit belongs to site_a.
using TwoQubitDensity = Eigen::Matrix4cd;

/// Weights in the Bell basis {|psi->, (X(x)1)|psi->, (Y(x)1)|psi->, (Z(x)1)|psi->}
/// with |psi-> = (|01> - |10>)/sqrt(2).
struct BellMix {
  double p_s = 0.0;
  double p_x = 0.0;
  double p_y = 0.0;
  double p_z = 0.0;
  /// Largest off-diagonal magnitude in the Bell basis.
  double residual = 0.0;

  double p_max() const noexcept;
  double sum() const noexcept { return p_s + p_x + p_y + p_z; }
};

struct EntanglementValue {
  double e = 0.0;  ///< relative entropy of entanglement
  double c = 0.0;  ///< concurrence
};

/// Partial trace onto two sites of states in one sector basis. The pairing
/// of configurations that differ only on the two sites is built once.
class TwoSiteReducer {
 public:
  TwoSiteReducer(BasisPtr basis, int site_a, int site_b);

  const BasisPtr& basis() const noexcept { return basis_; }
  TwoQubitDensity reduce(const Eigen::VectorXcd& psi) const;
  TwoQubitDensity reduce(const Eigen::MatrixXcd& rho) const;

 private:
  struct Pair {
    std::uint32_t i;
    std::uint32_t j;
  };
  BasisPtr basis_;
  std::vector<std::uint8_t> q_;
  std::vector<Pair> pairs_;
};

TwoQubitDensity reduced_two_qubit(const StateVector& state, int site_a, int site_b);
TwoQubitDensity reduced_two_qubit(const DensityOperator& rho, int site_a, int site_b);

/// Columns are the ordered Bell vectors.
const Eigen::Matrix4cd& bell_basis();

BellMix bell_decompose(const TwoQubitDensity& rho);

/// Binary Shannon entropy in bits with H(0) = H(1) = 0.
double binary_entropy(double x);

/// E = 1 - H(p_max) for p_max > 1/2, else 0; C = max(0, 2 p_max - 1).
EntanglementValue entanglement_E(const BellMix& mix);

/// Wootters concurrence through the spin-flipped matrix.
double concurrence(const TwoQubitDensity& rho);

}  // namespace modamp
