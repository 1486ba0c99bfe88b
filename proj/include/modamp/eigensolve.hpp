#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "modamp/basis.hpp"
#include "modamp/hamiltonian.hpp"

namespace modamp {

struct EigenPair {
  double energy = 0.0;
  StateVector vector;
};

struct EigenOptions {
  /// Below this dimension the sector is diagonalized densely.
  std::size_t dense_threshold = 2000;
  /// Residual target relative to max(1, |E|).
  double tol = 1e-10;
  std::size_t max_basis = 120;
  std::size_t max_restarts = 400;
};

/// Lowest eigenpair; phase fixed so the largest-magnitude amplitude is real positive.
EigenPair ground_state(const SparseOperator& op, const EigenOptions& options = {});
/// The k lowest eigenpairs with nondecreasing energies.
std::vector<EigenPair> lowest_k(const SparseOperator& op, std::size_t k, const EigenOptions& options = {});

/// Complete eigendecomposition of a sector: energies ascending, eigenvectors as columns.
struct Spectrum {
  BasisPtr basis;
  Eigen::VectorXd energies;
  Eigen::MatrixXd vectors;

  std::size_t size() const noexcept { return static_cast<std::size_t>(energies.size()); }
  EigenPair pair(std::size_t n) const;
};

inline constexpr std::size_t kDefaultDenseCap = 6000;

/// Throws CapacityError above `dense_cap`.
Spectrum full_spectrum(const SparseOperator& op, std::size_t dense_cap = kDefaultDenseCap);

struct GapResult {
  double e0 = 0.0;
  double e1 = 0.0;
  double delta = 0.0;
  int sector_of_ground = 0;
  int sector_of_gap = 0;
  /// E_1 - E_0 inside the ground-state sector alone.
  double sector_delta = 0.0;
  bool degenerate = false;
};

/// Energy gap of a module, scanning n_up in {N/2, N/2 +- 1, N/2 +- 2}.
GapResult energy_gap(const ModuleSpec& spec, std::span<const double> factors = {}, const EigenOptions& options = {});

/// Ground state of a module in its half-filled sector. With `verify`, the
/// neighbouring sectors are checked to lie strictly higher.
EigenPair module_ground_state(const ModuleSpec& spec, std::span<const double> factors = {}, bool verify = false,
                              const EigenOptions& options = {});

/// Make the largest-magnitude component real and positive.
void fix_phase(Eigen::VectorXcd& v);

}  // namespace modamp
