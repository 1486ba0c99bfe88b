#include <algorithm>
#include <cmath>

#include "modamp/errors.hpp"
#include "modamp/experiments.hpp"

namespace modamp {

std::vector<double> linspace(double first, double last, std::size_t samples) {
  if (samples == 0) return {};
  if (samples == 1) return {first};
  std::vector<double> g(samples);
  const double step = (last - first) / static_cast<double>(samples - 1);
  for (std::size_t k = 0; k < samples; ++k) g[k] = first + step * static_cast<double>(k);
  g.back() = last;
  return g;
}

std::vector<double> arange_inclusive(double first, double last, double step) {
  if (!(step > 0.0)) throw DomainError("grid step must be positive");
  if (last < first) throw DomainError("grid end precedes its start");
  const auto count = static_cast<std::size_t>(std::floor((last - first) / step + 0.5)) + 1;
  std::vector<double> g(count);
  for (std::size_t k = 0; k < count; ++k) g[k] = first + step * static_cast<double>(k);
  return g;
}

std::vector<double> Window::grid() const {
  if (!(t_max > 0.0) || samples < 2) throw DomainError("window needs t_max > 0 and at least two samples");
  return linspace(0.0, t_max, samples);
}

ModuleSpec make_module(int n_sites, double j_prime, double delta, double j) {
  ModuleSpec m;
  m.n_sites = n_sites;
  m.j = j;
  m.j_prime = j_prime;
  m.delta = delta;
  return m;
}

ChainSpec make_chain(int n_half, double j_prime, double j_i, double delta, double j) {
  ChainSpec c;
  c.left = make_module(n_half, j_prime, delta, j);
  c.right = c.left;
  c.j_i = j_i;
  return c;
}

StateVector initial_product_state(const ChainSpec& chain, const NumericOptions& options) {
  chain.validate();
  const auto lf = chain.left_factors();
  const auto rf = chain.right_factors();
  const EigenPair gl = module_ground_state(chain.left, lf, options.verify_ground_sector, options.eigen);
  const EigenPair gr = module_ground_state(chain.right, rf, options.verify_ground_sector, options.eigen);
  return embed_product_state(gl.vector, gr.vector);
}

TraceSeries trace_from_state(const SparseOperator& h_total, const StateVector& psi0, std::span<const double> grid,
                             const NumericOptions& options) {
  if (psi0.dim() != h_total.dim()) throw DomainError("trace: state and operator dimensions differ");
  const int n = psi0.basis->n_sites();
  const TwoSiteReducer reducer(psi0.basis, 0, n - 1);

  TraceSeries out;
  out.times.assign(grid.begin(), grid.end());
  out.e.resize(grid.size());
  out.bell.resize(grid.size());

  auto record = [&](std::size_t k, const Eigen::VectorXcd& psi) {
    const BellMix mix = bell_decompose(reducer.reduce(psi));
    out.bell[k] = mix;
    out.e[k] = entanglement_E(mix).e;
    out.max_bell_residual = std::max(out.max_bell_residual, mix.residual);
    out.max_pxy_gap = std::max(out.max_pxy_gap, std::abs(mix.p_x - mix.p_y));
  };

  if (h_total.dim() <= options.dense_propagation_max) {
    out.dense_propagation = true;
    const DenseEvolver evolver(h_total, options.dense_cap);
    const Eigen::VectorXcd c = evolver.coefficients(psi0);
    for (std::size_t k = 0; k < grid.size(); ++k) record(k, evolver.evolve_coefficients(c, grid[k]).amplitudes);
  } else {
    out.stats = propagate_series(h_total, psi0, grid, record, options.krylov);
  }
  return out;
}

TraceSeries entanglement_trace(const ChainSpec& chain, std::span<const double> grid, const NumericOptions& options) {
  const StateVector psi0 = initial_product_state(chain, options);
  const SparseOperator h = build_total_hamiltonian(chain, psi0.basis);
  TraceSeries out = trace_from_state(h, psi0, grid, options);
  out.chain = chain;
  return out;
}

PeakResult find_peak(std::span<const double> times, std::span<const double> values, bool refine, double tie_tol) {
  if (times.empty() || times.size() != values.size()) throw DomainError("find_peak: need a nonempty trace");
  const double top = *std::max_element(values.begin(), values.end());
  std::size_t k = 0;
  while (values[k] < top - tie_tol) ++k;

  PeakResult p;
  p.index = k;
  p.t_opt = times[k];
  p.e_max = values[k];
  p.window_truncated = values.size() > 1 && k + 1 == values.size();
  if (!refine || k == 0 || k + 1 >= values.size()) return p;

  // Parabola through three (possibly unevenly spaced) points.
  const double t0 = times[k - 1], t1 = times[k], t2 = times[k + 1];
  const double y0 = values[k - 1], y1 = values[k], y2 = values[k + 1];
  const double d01 = (y1 - y0) / (t1 - t0);
  const double d12 = (y2 - y1) / (t2 - t1);
  const double a = (d12 - d01) / (t2 - t0);
  if (!(a < 0.0)) return p;
  const double b = d01 - a * (t0 + t1);
  const double tv = std::clamp(-b / (2.0 * a), t0, t2);
  const double yv = y1 + (tv - t1) * (d01 + a * (tv - t0));
  if (yv < y1) return p;
  p.t_opt = tv;
  p.e_max = yv;
  p.refined = true;
  return p;
}

PeakResult find_peak(const TraceSeries& trace, bool refine) { return find_peak(trace.times, trace.e, refine); }

BellMix static_end_bell(const ModuleSpec& spec, const NumericOptions& options) {
  const EigenPair gs = module_ground_state(spec, {}, options.verify_ground_sector, options.eigen);
  return bell_decompose(reduced_two_qubit(gs.vector, 0, spec.n_sites - 1));
}

EntanglementValue static_end_entanglement(const ModuleSpec& spec, const NumericOptions& options) {
  return entanglement_E(static_end_bell(spec, options));
}

}  // namespace modamp
