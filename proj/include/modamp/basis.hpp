#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Core>

namespace modamp {

/// Bit b of a configuration is 1 when linear site b is spin up.
using Config = std::uint64_t;

/// Largest chain length a Config can encode.
inline constexpr int kMaxSites = 62;

/// All configurations of `n_sites` spins with exactly `n_up` up spins,
/// sorted by integer encoding. Immutable after construction.
class SectorBasis {
 public:
  SectorBasis(int n_sites, int n_up);

  int n_sites() const noexcept { return n_sites_; }
  int n_up() const noexcept { return n_up_; }
  std::size_t size() const noexcept { return states_.size(); }
  Config state(std::size_t i) const { return states_[i]; }
  const std::vector<Config>& states() const noexcept { return states_; }

  /// Ordinal of `config`; throws DomainError when it is not in the sector.
  std::size_t index_of(Config config) const;
  /// Ordinal of `config`, or nullopt when it is not in the sector.
  std::optional<std::size_t> find(Config config) const noexcept;

 private:
  int n_sites_;
  int n_up_;
  std::vector<Config> states_;
};

using BasisPtr = std::shared_ptr<const SectorBasis>;

BasisPtr build_sector_basis(int n_sites, int n_up);
std::size_t index_of(const SectorBasis& basis, Config config);

/// Binomial coefficient, exact for the sizes used here.
std::uint64_t binomial(int n, int k);

/// Mirror numbering of a two-module chain. Left labels 1..N_L run left to
/// right onto 0..N_L-1; right labels run right to left, so N_R sits at N_L
/// and 1_R at N-1.
class SiteMap {
 public:
  SiteMap(int left_size, int right_size);

  int left_size() const noexcept { return left_size_; }
  int right_size() const noexcept { return right_size_; }
  int total() const noexcept { return left_size_ + right_size_; }

  /// 1-based module labels to linear sites.
  int left(int label) const;
  int right(int label) const;

 private:
  int left_size_;
  int right_size_;
};

/// Complex amplitudes over a sector basis.
struct StateVector {
  BasisPtr basis;
  Eigen::VectorXcd amplitudes;

  std::size_t dim() const noexcept { return static_cast<std::size_t>(amplitudes.size()); }
  double norm() const { return amplitudes.norm(); }
};

StateVector make_state(BasisPtr basis, Eigen::VectorXcd amplitudes);
StateVector basis_state(BasisPtr basis, Config config);

/// Product |left> (x) |right> placed on the chain according to SiteMap.
/// Module bit (label - 1) of each input maps to the linear site given by
/// SiteMap, so the right module is stored mirrored. Inputs must be unit-norm;
/// the joint basis is the half-filled sector of N_L + N_R sites.
StateVector embed_product_state(const StateVector& left, const StateVector& right);

}  // namespace modamp
