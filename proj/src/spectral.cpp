#include <cmath>
#include <numbers>

#include "modamp/errors.hpp"
#include "modamp/experiments.hpp"

namespace modamp {

SpectralDecomposition spectral_decomposition(const ChainSpec& chain, const NumericOptions& options) {
  const StateVector psi0 = initial_product_state(chain, options);
  const SparseOperator h = build_total_hamiltonian(chain, psi0.basis);
  auto evolver = std::make_shared<const DenseEvolver>(h, options.dense_cap);

  SpectralDecomposition d;
  d.chain = chain;
  d.coefficients = evolver->coefficients(psi0);
  const Eigen::VectorXd& energies = evolver->spectrum().energies;
  const auto n = static_cast<std::size_t>(energies.size());
  d.components.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    d.components[i] = {i, energies(ii) - energies(0), std::norm(d.coefficients(ii))};
    d.weight_sum += d.components[i].weight;
  }
  // Largest two weights; ties keep the lower energy first.
  std::size_t first = 0, second = n > 1 ? 1 : 0;
  if (n > 1 && d.components[1].weight > d.components[0].weight) std::swap(first, second);
  for (std::size_t i = 2; i < n; ++i) {
    if (d.components[i].weight > d.components[first].weight) {
      second = first;
      first = i;
    } else if (d.components[i].weight > d.components[second].weight) {
      second = i;
    }
  }
  d.top_first = first;
  d.top_second = second;
  d.omega = std::abs(d.components[first].excitation - d.components[second].excitation);
  d.evolver = std::move(evolver);
  return d;
}

std::vector<double> spectral_trace(const SpectralDecomposition& d, std::span<const double> grid) {
  if (!d.evolver) throw DomainError("spectral_trace: decomposition carries no eigenbasis");
  const BasisPtr& basis = d.evolver->spectrum().basis;
  const TwoSiteReducer reducer(basis, 0, basis->n_sites() - 1);
  std::vector<double> e;
  e.reserve(grid.size());
  for (double t : grid) e.push_back(entanglement_E(bell_decompose(reducer.reduce(d.evolver->evolve_coefficients(d.coefficients, t).amplitudes))).e);
  return e;
}

InterferenceReport interference_check(const SpectralDecomposition& d, const PeakResult& peak) {
  if (!(d.omega > 0.0)) throw DomainError("interference_check: omega must be positive");
  InterferenceReport r;
  r.t_phase = std::numbers::pi / d.omega;
  r.offset = std::abs(peak.t_opt - r.t_phase);
  r.top2_weight_sum = d.components.at(d.top_first).weight;
  if (d.top_second != d.top_first) r.top2_weight_sum += d.components.at(d.top_second).weight;
  return r;
}

}  // namespace modamp
