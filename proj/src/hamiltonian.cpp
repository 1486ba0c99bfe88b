#include "modamp/hamiltonian.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <cmath>
#include <string>

#include "modamp/errors.hpp"

namespace modamp {

void ModuleSpec::validate() const {
  if (n_sites < 4 || n_sites % 2 != 0)
    throw DomainError("module size must be even and >= 4, got " + std::to_string(n_sites));
  if (!(j > 0.0)) throw DomainError("bulk exchange J must be positive");
  if (!(j_prime > 0.0)) throw DomainError("impurity coupling J' must be positive");
  if (!allow_any_delta && (delta < -1.0 || delta > 1.0))
    throw DomainError("anisotropy delta outside [-1, 1]; set allow_any_delta to override");
  if (!std::isfinite(delta)) throw DomainError("anisotropy delta must be finite");
}

void ChainSpec::validate() const {
  left.validate();
  right.validate();
  if (left.j != right.j) throw DomainError("modules must share the bulk exchange J");
  if (left.delta != right.delta) throw DomainError("modules must share the anisotropy delta");
  if (!(j_i >= 0.0) || !std::isfinite(j_i)) throw DomainError("quench bond J_I must be non-negative");
  if (n_sites() > kMaxSites) throw DomainError("chain exceeds the configuration bit width");
  if (bond_factors && static_cast<int>(bond_factors->size()) != n_bonds())
    throw DomainError("bond_factors needs " + std::to_string(n_bonds()) + " entries, got " +
                      std::to_string(bond_factors->size()));
}

std::vector<double> ChainSpec::left_factors() const {
  if (!bond_factors) return {};
  return {bond_factors->begin(), bond_factors->begin() + left.n_bonds()};
}

std::vector<double> ChainSpec::right_factors() const {
  if (!bond_factors) return {};
  // Right module bond (l, l+1) sits between linear sites N-1-l and N-l, i.e. linear bond N-1-l.
  std::vector<double> f(static_cast<std::size_t>(right.n_bonds()));
  const int n = n_sites();
  for (int l = 1; l <= right.n_bonds(); ++l) f[static_cast<std::size_t>(l - 1)] = (*bond_factors)[static_cast<std::size_t>(n - 1 - l)];
  return f;
}

std::vector<Bond> module_bonds(const ModuleSpec& spec, std::span<const double> factors) {
  spec.validate();
  if (!factors.empty() && static_cast<int>(factors.size()) != spec.n_bonds())
    throw DomainError("module bond factors need " + std::to_string(spec.n_bonds()) + " entries");
  std::vector<Bond> bonds;
  bonds.reserve(static_cast<std::size_t>(spec.n_bonds()));
  for (int i = 0; i < spec.n_bonds(); ++i) {
    const bool impurity = (i == 0 || i == spec.n_sites - 2);
    double s = spec.j * (impurity ? spec.j_prime : 1.0);
    if (!factors.empty()) s *= factors[static_cast<std::size_t>(i)];
    bonds.push_back({i, i + 1, s});
  }
  return bonds;
}

std::vector<Bond> chain_bonds(const ChainSpec& chain, bool include_quench) {
  chain.validate();
  const SiteMap map = chain.site_map();
  const auto lf = chain.left_factors();
  const auto rf = chain.right_factors();
  std::vector<Bond> bonds;
  for (const Bond& b : module_bonds(chain.left, lf)) bonds.push_back({map.left(b.a + 1), map.left(b.b + 1), b.strength});
  if (include_quench) {
    double s = chain.j_i * chain.left.j;
    if (chain.bond_factors) s *= (*chain.bond_factors)[static_cast<std::size_t>(chain.left.n_sites - 1)];
    bonds.push_back({map.left(chain.left.n_sites), map.right(chain.right.n_sites), s});
  }
  for (const Bond& b : module_bonds(chain.right, rf)) {
    int a = map.right(b.a + 1), c = map.right(b.b + 1);
    bonds.push_back({std::min(a, c), std::max(a, c), b.strength});
  }
  std::sort(bonds.begin(), bonds.end(), [](const Bond& x, const Bond& y) { return x.a < y.a; });
  return bonds;
}

SparseOperator::SparseOperator(BasisPtr basis, std::vector<Bond> bonds, double delta, OperatorOptions options)
    : basis_(std::move(basis)), bonds_(std::move(bonds)), delta_(delta) {
  if (!basis_) throw DomainError("operator needs a basis");
  for (const Bond& b : bonds_)
    if (b.a < 0 || b.b < 0 || b.a >= basis_->n_sites() || b.b >= basis_->n_sites() || b.a == b.b)
      throw DomainError("bond references a site outside the basis");

  const std::size_t n = basis_->size();
  if (n > std::size_t{0xFFFFFFFFu}) throw CapacityError("sector too large for 32-bit column indices");

  // Upper bound: diagonal plus one hop per bond.
  if (n * (bonds_.size() + 1) > options.max_materialized_nnz) return;

  materialized_ = true;
  row_ptr_.assign(n + 1, 0);
  std::vector<std::uint32_t> cols;
  std::vector<double> vals;
  cols.reserve(n * (bonds_.size() / 2 + 2));
  vals.reserve(cols.capacity());
  for (std::size_t i = 0; i < n; ++i) {
    const Config c = basis_->state(i);
    const std::size_t row_start = cols.size();
    cols.push_back(static_cast<std::uint32_t>(i));
    vals.push_back(row_diagonal(c));
    for (const Bond& b : bonds_) {
      const Config mask = (Config{1} << b.a) | (Config{1} << b.b);
      const Config pair = c & mask;
      if (pair == 0 || pair == mask) continue;
      const Config flipped = c ^ mask;
      const auto j = basis_->find(flipped);
      assert(j && "XX+YY hop left the sector");
      cols.push_back(static_cast<std::uint32_t>(*j));
      vals.push_back(2.0 * b.strength);
    }
    // Sorted columns keep the row access pattern monotone.
    std::vector<std::size_t> order(cols.size() - row_start);
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = row_start + k;
    std::sort(order.begin(), order.end(), [&](std::size_t p, std::size_t q) { return cols[p] < cols[q]; });
    std::vector<std::uint32_t> rc;
    std::vector<double> rv;
    for (std::size_t p : order) {
      if (!rc.empty() && rc.back() == cols[p]) {
        rv.back() += vals[p];
      } else {
        rc.push_back(cols[p]);
        rv.push_back(vals[p]);
      }
    }
    cols.resize(row_start);
    vals.resize(row_start);
    cols.insert(cols.end(), rc.begin(), rc.end());
    vals.insert(vals.end(), rv.begin(), rv.end());
    row_ptr_[i + 1] = cols.size();
  }
  cols_ = std::move(cols);
  vals_ = std::move(vals);
}

double SparseOperator::row_diagonal(Config c) const noexcept {
  if (delta_ == 0.0) return 0.0;
  double d = 0.0;
  for (const Bond& b : bonds_) {
    const bool same = ((c >> b.a) & 1U) == ((c >> b.b) & 1U);
    d += same ? b.strength : -b.strength;
  }
  return delta_ * d;
}

std::size_t SparseOperator::nnz() const noexcept {
  if (materialized_) return vals_.size();
  std::size_t total = 0;
  for (std::size_t i = 0; i < basis_->size(); ++i) {
    const Config c = basis_->state(i);
    ++total;
    for (const Bond& b : bonds_) total += (((c >> b.a) ^ (c >> b.b)) & 1U);
  }
  return total;
}

template <typename Vec, typename Out>
void SparseOperator::apply_rows(const Vec& x, Out& y, bool parallel) const {
  using Scalar = typename Out::Scalar;
  const auto n = static_cast<std::ptrdiff_t>(basis_->size());
  if (materialized_) {
    const std::size_t* rp = row_ptr_.data();
    const std::uint32_t* ci = cols_.data();
    const double* v = vals_.data();
#pragma omp parallel for schedule(static) if (parallel)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      Scalar acc(0);
      for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) acc += v[k] * x(static_cast<Eigen::Index>(ci[k]));
      y(i) = acc;
    }
    return;
  }
#pragma omp parallel for schedule(static) if (parallel)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const Config c = basis_->state(static_cast<std::size_t>(i));
    Scalar acc = row_diagonal(c) * x(i);
    for (const Bond& b : bonds_) {
      if ((((c >> b.a) ^ (c >> b.b)) & 1U) == 0) continue;
      const Config mask = (Config{1} << b.a) | (Config{1} << b.b);
      const std::size_t j = *basis_->find(c ^ mask);
      acc += (2.0 * b.strength) * x(static_cast<Eigen::Index>(j));
    }
    y(i) = acc;
  }
}

namespace {
template <typename In, typename Out>
void check_dims(std::size_t n, const In& x, const Out& y) {
  if (static_cast<std::size_t>(x.size()) != n || static_cast<std::size_t>(y.size()) != n)
    throw DomainError("apply: vector dimension does not match operator");
}
}  // namespace

void SparseOperator::apply(const Eigen::Ref<const Eigen::VectorXcd>& x, Eigen::Ref<Eigen::VectorXcd> y) const {
  check_dims(dim(), x, y);
  apply_rows(x, y, true);
}
void SparseOperator::apply(const Eigen::Ref<const Eigen::VectorXd>& x, Eigen::Ref<Eigen::VectorXd> y) const {
  check_dims(dim(), x, y);
  apply_rows(x, y, true);
}
void SparseOperator::apply_serial(const Eigen::Ref<const Eigen::VectorXcd>& x, Eigen::Ref<Eigen::VectorXcd> y) const {
  check_dims(dim(), x, y);
  apply_rows(x, y, false);
}
void SparseOperator::apply_serial(const Eigen::Ref<const Eigen::VectorXd>& x, Eigen::Ref<Eigen::VectorXd> y) const {
  check_dims(dim(), x, y);
  apply_rows(x, y, false);
}

double SparseOperator::entry(std::size_t row, std::size_t col) const {
  if (row >= dim() || col >= dim()) throw DomainError("entry: index out of range");
  if (materialized_) {
    const auto* begin = cols_.data() + row_ptr_[row];
    const auto* end = cols_.data() + row_ptr_[row + 1];
    const auto* it = std::lower_bound(begin, end, static_cast<std::uint32_t>(col));
    return (it != end && *it == col) ? vals_[static_cast<std::size_t>(it - cols_.data())] : 0.0;
  }
  const Config c = basis_->state(row);
  if (row == col) return row_diagonal(c);
  const Config d = basis_->state(col);
  double v = 0.0;
  for (const Bond& b : bonds_) {
    const Config mask = (Config{1} << b.a) | (Config{1} << b.b);
    if ((c ^ d) == mask && (((c >> b.a) ^ (c >> b.b)) & 1U)) v += 2.0 * b.strength;
  }
  return v;
}

Eigen::VectorXd SparseOperator::diagonal() const {
  Eigen::VectorXd d(static_cast<Eigen::Index>(dim()));
  for (std::size_t i = 0; i < dim(); ++i) d(static_cast<Eigen::Index>(i)) = row_diagonal(basis_->state(i));
  return d;
}

Eigen::MatrixXd SparseOperator::to_dense() const {
  const auto n = static_cast<Eigen::Index>(dim());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n), col(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    e(j) = 1.0;
    apply_serial(e, col);
    m.col(j) = col;
    e(j) = 0.0;
  }
  return m;
}

double SparseOperator::norm_bound() const {
  double off = 0.0;
  for (const Bond& b : bonds_) off += 2.0 * std::abs(b.strength);
  double diag = 0.0;
  for (const Bond& b : bonds_) diag += std::abs(delta_ * b.strength);
  return off + diag;
}

SparseOperator build_module_hamiltonian(const ModuleSpec& spec, BasisPtr basis, std::span<const double> factors,
                                        OperatorOptions options) {
  spec.validate();
  if (!basis || basis->n_sites() != spec.n_sites) throw DomainError("basis size does not match module spec");
  return SparseOperator(std::move(basis), module_bonds(spec, factors), spec.delta, options);
}

SparseOperator build_total_hamiltonian(const ChainSpec& chain, BasisPtr basis, OperatorOptions options) {
  chain.validate();
  if (!basis || basis->n_sites() != chain.n_sites()) throw DomainError("basis size does not match chain spec");
  return SparseOperator(std::move(basis), chain_bonds(chain, true), chain.left.delta, options);
}

SparseOperator build_decoupled_hamiltonian(const ChainSpec& chain, BasisPtr basis, OperatorOptions options) {
  chain.validate();
  if (!basis || basis->n_sites() != chain.n_sites()) throw DomainError("basis size does not match chain spec");
  return SparseOperator(std::move(basis), chain_bonds(chain, false), chain.left.delta, options);
}

StateVector apply(const SparseOperator& op, const StateVector& v) {
  if (v.dim() != op.dim()) throw DomainError("apply: state dimension does not match operator");
  Eigen::VectorXcd out(static_cast<Eigen::Index>(op.dim()));
  op.apply(v.amplitudes, out);
  return StateVector{op.basis(), std::move(out)};
}

}  // namespace modamp
