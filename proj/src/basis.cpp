#include "modamp/basis.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "modamp/errors.hpp"

namespace modamp {

std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  return r;
}

SectorBasis::SectorBasis(int n_sites, int n_up) : n_sites_(n_sites), n_up_(n_up) {
  if (n_sites < 1 || n_sites > kMaxSites)
    throw DomainError("n_sites must be in [1, " + std::to_string(kMaxSites) + "], got " + std::to_string(n_sites));
  if (n_up < 0 || n_up > n_sites)
    throw DomainError("n_up must be in [0, n_sites], got " + std::to_string(n_up));
  states_.reserve(binomial(n_sites, n_up));
  if (n_up == 0) {
    states_.push_back(0);
    return;
  }
  // Gosper's hack walks same-popcount integers in increasing order.
  const Config limit = Config{1} << n_sites;
  Config c = (Config{1} << n_up) - 1;
  while (c < limit) {
    states_.push_back(c);
    const Config lowest = c & (~c + 1);
    const Config ripple = c + lowest;
    c = (((ripple ^ c) >> 2) / lowest) | ripple;
  }
}

std::optional<std::size_t> SectorBasis::find(Config config) const noexcept {
  auto it = std::lower_bound(states_.begin(), states_.end(), config);
  if (it == states_.end() || *it != config) return std::nullopt;
  return static_cast<std::size_t>(it - states_.begin());
}

std::size_t SectorBasis::index_of(Config config) const {
  if (auto i = find(config)) return *i;
  throw DomainError("configuration " + std::to_string(config) + " is not in sector (" + std::to_string(n_sites_) +
                    ", " + std::to_string(n_up_) + ")");
}

BasisPtr build_sector_basis(int n_sites, int n_up) { return std::make_shared<const SectorBasis>(n_sites, n_up); }

std::size_t index_of(const SectorBasis& basis, Config config) { return basis.index_of(config); }

SiteMap::SiteMap(int left_size, int right_size) : left_size_(left_size), right_size_(right_size) {
  if (left_size < 1 || right_size < 1) throw DomainError("module sizes must be positive");
  if (left_size + right_size > kMaxSites) throw DomainError("chain exceeds the configuration bit width");
}

int SiteMap::left(int label) const {
  if (label < 1 || label > left_size_) throw DomainError("left label out of range");
  return label - 1;
}

int SiteMap::right(int label) const {
  if (label < 1 || label > right_size_) throw DomainError("right label out of range");
  return total() - label;
}

StateVector make_state(BasisPtr basis, Eigen::VectorXcd amplitudes) {
  if (!basis) throw DomainError("state needs a basis");
  if (static_cast<std::size_t>(amplitudes.size()) != basis->size())
    throw DomainError("amplitude count does not match basis size");
  return StateVector{std::move(basis), std::move(amplitudes)};
}

StateVector basis_state(BasisPtr basis, Config config) {
  Eigen::VectorXcd amp = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis->size()));
  amp(static_cast<Eigen::Index>(basis->index_of(config))) = 1.0;
  return make_state(std::move(basis), std::move(amp));
}

namespace {

Config mirror_into(Config module_config, int module_size, int total) {
  Config out = 0;
  for (int b = 0; b < module_size; ++b)
    if ((module_config >> b) & 1U) out |= Config{1} << (total - 1 - b);
  return out;
}

}  // namespace

StateVector embed_product_state(const StateVector& left, const StateVector& right) {
  if (!left.basis || !right.basis) throw DomainError("embed_product_state: missing basis");
  const SectorBasis& lb = *left.basis;
  const SectorBasis& rb = *right.basis;
  if (left.dim() != lb.size() || right.dim() != rb.size())
    throw DomainError("embed_product_state: amplitude count does not match basis");
  for (const StateVector* s : {&left, &right})
    if (std::abs(s->norm() - 1.0) > 1e-10) throw DomainError("embed_product_state: inputs must be unit-norm");

  const SiteMap map(lb.n_sites(), rb.n_sites());
  const int n = map.total();
  auto joint = build_sector_basis(n, lb.n_up() + rb.n_up());
  Eigen::VectorXcd amp = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(joint->size()));
  for (std::size_t i = 0; i < lb.size(); ++i) {
    const auto a = left.amplitudes(static_cast<Eigen::Index>(i));
    if (a == 0.0) continue;
    for (std::size_t k = 0; k < rb.size(); ++k) {
      const Config c = lb.state(i) | mirror_into(rb.state(k), rb.n_sites(), n);
      amp(static_cast<Eigen::Index>(joint->index_of(c))) = a * right.amplitudes(static_cast<Eigen::Index>(k));
    }
  }
  return make_state(std::move(joint), std::move(amp));
}

}  // namespace modamp
