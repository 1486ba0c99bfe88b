#pragma once

#include <cstddef>
#include <functional>
#include <span>

#include <Eigen/Core>

#include "modamp/basis.hpp"
#include "modamp/eigensolve.hpp"
#include "modamp/hamiltonian.hpp"

namespace modamp {

struct KrylovOptions {
  /// Global error budget over the whole propagation (2-norm of the state).
  double tol = 1e-10;
  int m_start = 20;
  int m_cap = 60;
  int m_step = 10;
  /// Largest number of unsampled sub-steps before giving up.
  std::size_t max_substeps = 100000;
};

/// Counters recorded into run metadata.
struct KrylovStats {
  std::size_t bases = 0;
  std::size_t matvecs = 0;
  std::size_t substeps = 0;
  int max_dim = 0;
  double error_estimate = 0.0;

  void merge(const KrylovStats& o);
};

using SampleSink = std::function<void(std::size_t index, const Eigen::VectorXcd& psi)>;

/// Propagates `v0` (the state at t = 0) with e^{-iHt} and hands the state at
/// every grid time to `sink`, in order. Times must be non-negative and
/// strictly increasing. One Lanczos basis serves as many consecutive grid
/// times as its a posteriori error estimate allows.
KrylovStats propagate_series(const SparseOperator& op, const StateVector& v0, std::span<const double> times,
                             const SampleSink& sink, const KrylovOptions& options = {});

StateVector evolve_krylov(const SparseOperator& op, const StateVector& v, double t, const KrylovOptions& options = {},
                          KrylovStats* stats = nullptr);

/// Reference propagator through the full eigendecomposition.
class DenseEvolver {
 public:
  explicit DenseEvolver(const SparseOperator& op, std::size_t dense_cap = kDefaultDenseCap);
  explicit DenseEvolver(Spectrum spectrum);

  const Spectrum& spectrum() const noexcept { return spectrum_; }
  /// Coefficients of `v` in the eigenbasis.
  Eigen::VectorXcd coefficients(const StateVector& v) const;
  StateVector evolve(const StateVector& v, double t) const;
  StateVector evolve_coefficients(const Eigen::VectorXcd& c, double t) const;

 private:
  Spectrum spectrum_;
};

StateVector evolve_dense(const SparseOperator& op, const StateVector& v, double t,
                         std::size_t dense_cap = kDefaultDenseCap);

/// Mixed state over one sector basis.
struct DensityOperator {
  BasisPtr basis;
  Eigen::MatrixXcd matrix;

  std::size_t dim() const noexcept { return static_cast<std::size_t>(matrix.rows()); }
  double trace() const { return matrix.trace().real(); }
};

DensityOperator pure_density(const StateVector& v);

/// rho(t) = e^{-iHt} rho e^{iHt}, computed in the eigenbasis of H.
DensityOperator evolve_density(const SparseOperator& op, const DensityOperator& rho, double t,
                               std::size_t dense_cap = kDefaultDenseCap);
DensityOperator evolve_density(const DenseEvolver& evolver, const DensityOperator& rho, double t);

}  // namespace modamp
