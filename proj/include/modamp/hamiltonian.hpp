#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "modamp/basis.hpp"

namespace modamp {

/// One XXZ module: bulk exchange J, impurity coupling J' (in units of J)
/// on the two end bonds, and anisotropy delta.
struct ModuleSpec {
  int n_sites = 8;
  double j = 1.0;
  double j_prime = 0.5;
  double delta = 0.0;
  /// Allow delta outside [-1, 1].
  bool allow_any_delta = false;

  void validate() const;
  int n_bonds() const noexcept { return n_sites - 1; }
};

/// Two modules joined by the quench bond J_I between sites N_L and N_R.
///
/// Bond factors, when present, hold one multiplicative factor per physical
/// bond in linear-chain order: entry b scales the bond between linear sites
/// b and b+1. Entry N_L - 1 is therefore the quench bond.
struct ChainSpec {
  ModuleSpec left;
  ModuleSpec right;
  double j_i = 0.75;
  std::optional<std::vector<double>> bond_factors;

  void validate() const;
  int n_sites() const noexcept { return left.n_sites + right.n_sites; }
  int n_bonds() const noexcept { return n_sites() - 1; }
  SiteMap site_map() const { return SiteMap(left.n_sites, right.n_sites); }

  /// Factors of the left module's bonds in module label order.
  std::vector<double> left_factors() const;
  /// Factors of the right module's bonds in module label order (1_R outward).
  std::vector<double> right_factors() const;
};

/// Weighted XXZ coupling between two sites: strength * (XX + YY + delta ZZ).
struct Bond {
  int a;
  int b;
  double strength;
};

std::vector<Bond> module_bonds(const ModuleSpec& spec, std::span<const double> factors = {});
/// All chain bonds in linear order. `include_quench = false` drops H_I.
std::vector<Bond> chain_bonds(const ChainSpec& chain, bool include_quench = true);

struct OperatorOptions {
  /// Materialize CSR entries up to this many nonzeros, else apply on the fly.
  std::size_t max_materialized_nnz = std::size_t{200} * 1000 * 1000;
};

/// Real symmetric XXZ Hamiltonian restricted to one magnetization sector.
/// Immutable; `apply` is re-entrant.
class SparseOperator {
 public:
  SparseOperator(BasisPtr basis, std::vector<Bond> bonds, double delta, OperatorOptions options = {});

  std::size_t dim() const noexcept { return basis_->size(); }
  const BasisPtr& basis() const noexcept { return basis_; }
  const std::vector<Bond>& bonds() const noexcept { return bonds_; }
  double delta() const noexcept { return delta_; }
  bool materialized() const noexcept { return materialized_; }
  std::size_t nnz() const noexcept;

  /// y = H x, rows distributed over OpenMP threads.
  void apply(const Eigen::Ref<const Eigen::VectorXcd>& x, Eigen::Ref<Eigen::VectorXcd> y) const;
  void apply(const Eigen::Ref<const Eigen::VectorXd>& x, Eigen::Ref<Eigen::VectorXd> y) const;
  /// Single-threaded reference kernels.
  void apply_serial(const Eigen::Ref<const Eigen::VectorXcd>& x, Eigen::Ref<Eigen::VectorXcd> y) const;
  void apply_serial(const Eigen::Ref<const Eigen::VectorXd>& x, Eigen::Ref<Eigen::VectorXd> y) const;

  double entry(std::size_t row, std::size_t col) const;
  Eigen::VectorXd diagonal() const;
  Eigen::MatrixXd to_dense() const;
  /// Gershgorin bound on the spectral radius.
  double norm_bound() const;

 private:
  template <typename Vec, typename Out>
  void apply_rows(const Vec& x, Out& y, bool parallel) const;
  double row_diagonal(Config c) const noexcept;

  BasisPtr basis_;
  std::vector<Bond> bonds_;
  double delta_;
  bool materialized_ = false;
  std::vector<std::size_t> row_ptr_;
  std::vector<std::uint32_t> cols_;
  std::vector<double> vals_;
};

SparseOperator build_module_hamiltonian(const ModuleSpec& spec, BasisPtr basis, std::span<const double> factors = {},
                                        OperatorOptions options = {});
SparseOperator build_total_hamiltonian(const ChainSpec& chain, BasisPtr basis, OperatorOptions options = {});
/// H_L + H_R on the joint chain (no quench bond).
SparseOperator build_decoupled_hamiltonian(const ChainSpec& chain, BasisPtr basis, OperatorOptions options = {});

StateVector apply(const SparseOperator& op, const StateVector& v);

}  // namespace modamp
