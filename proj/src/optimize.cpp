#include <cmath>
#include <numbers>
#include <string>

#include "modamp/errors.hpp"
#include "modamp/experiments.hpp"
#include "parallel.hpp"

namespace modamp {

OptimizationResult optimize_couplings(int n_half, double delta, std::span<const double> j_prime_grid,
                                      std::span<const double> j_i_grid, const Window& window,
                                      const NumericOptions& options) {
  if (j_prime_grid.empty() || j_i_grid.empty()) throw DomainError("optimize_couplings: grids must be nonempty");
  const std::vector<double> times = window.grid();
  const std::size_t n_jp = j_prime_grid.size(), n_ji = j_i_grid.size();

  // Initial states depend on J' only.
  std::vector<StateVector> starts(n_jp);
  std::vector<std::string> start_errors(n_jp);
  const int workers = detail::resolve_workers(options.workers);
#pragma omp parallel for schedule(dynamic) num_threads(workers)
  for (std::ptrdiff_t a = 0; a < static_cast<std::ptrdiff_t>(n_jp); ++a) {
    try {
      starts[static_cast<std::size_t>(a)] =
          initial_product_state(make_chain(n_half, j_prime_grid[static_cast<std::size_t>(a)], 1.0, delta), options);
    } catch (const std::exception& e) {
      start_errors[static_cast<std::size_t>(a)] = e.what();
    }
  }

  OptimizationResult result;
  result.surface.resize(n_jp * n_ji);
#pragma omp parallel for schedule(dynamic) num_threads(workers)
  for (std::ptrdiff_t idx = 0; idx < static_cast<std::ptrdiff_t>(n_jp * n_ji); ++idx) {
    const std::size_t a = static_cast<std::size_t>(idx) / n_ji, b = static_cast<std::size_t>(idx) % n_ji;
    SurfacePoint& pt = result.surface[static_cast<std::size_t>(idx)];
    pt.j_prime = j_prime_grid[a];
    pt.j_i = j_i_grid[b];
    if (!start_errors[a].empty()) {
      pt.error = start_errors[a];
      continue;
    }
    try {
      const ChainSpec chain = make_chain(n_half, pt.j_prime, pt.j_i, delta);
      const SparseOperator h = build_total_hamiltonian(chain, starts[a].basis);
      pt.peak = find_peak(trace_from_state(h, starts[a], times, options));
      pt.ok = true;
    } catch (const std::exception& e) {
      pt.error = e.what();
    }
  }

  bool have = false;
  for (const SurfacePoint& pt : result.surface) {
    if (!pt.ok) {
      ++result.failures;
      continue;
    }
    // Row-major order already visits smaller J' first, then smaller J_I.
    if (!have || pt.peak.e_max > result.peak.e_max) {
      have = true;
      result.j_prime = pt.j_prime;
      result.j_i = pt.j_i;
      result.peak = pt.peak;
    }
  }
  if (!have || static_cast<double>(result.failures) > options.max_failure_fraction * static_cast<double>(result.surface.size())) {
    std::string first;
    for (const SurfacePoint& pt : result.surface)
      if (!pt.ok) {
        first = pt.error;
        break;
      }
    throw ConvergenceError("coupling optimization: " + std::to_string(result.failures) + " of " +
                               std::to_string(result.surface.size()) + " grid points failed; first: " + first,
                           0.0);
  }
  return result;
}

namespace {

struct Candidate {
  PeakResult peak;
  double j_i = 0.0;
  bool ok = false;
};

// Best peak over J_I = s * J_I* for one J', or !ok when the module gap is
// degenerate or every candidate fails.
Candidate perturbative_best(int n_half, double j_prime, double delta, std::size_t samples,
                            const NumericOptions& options) {
  Candidate best;
  const ModuleSpec m = make_module(n_half, j_prime, delta);
  double j_i_star = 0.0;
  StateVector start;
  try {
    j_i_star = perturbative_prediction(m, m, options).j_i_star;
    start = initial_product_state(make_chain(n_half, j_prime, 1.0, delta), options);
  } catch (const std::exception&) {
    return best;
  }
  if (!(j_i_star > 0.0) || !std::isfinite(j_i_star)) return best;
  for (double s : kPerturbativeScales) {
    const double j_i = s * j_i_star;
    try {
      const std::vector<double> times = linspace(0.0, 2.5 * std::numbers::pi / (4.0 * j_i), samples);
      const SparseOperator h = build_total_hamiltonian(make_chain(n_half, j_prime, j_i, delta), start.basis);
      const PeakResult p = find_peak(trace_from_state(h, start, times, options));
      if (!best.ok || p.e_max > best.peak.e_max) best = {p, j_i, true};
    } catch (const std::exception&) {
    }
  }
  return best;
}

}  // namespace

AmplificationScan amplification_scan(int n_half, double delta, std::span<const double> j_prime_grid,
                                     std::span<const double> j_i_grid, const Window& window,
                                     const NumericOptions& options, bool perturbative_candidates) {
  const OptimizationResult opt = optimize_couplings(n_half, delta, j_prime_grid, j_i_grid, window, options);
  AmplificationScan scan;
  scan.j_i_grid.assign(j_i_grid.begin(), j_i_grid.end());
  scan.failures = opt.failures;
  const std::size_t n_jp = j_prime_grid.size(), n_ji = j_i_grid.size();

  std::vector<Candidate> extra(n_jp);
  if (perturbative_candidates) {
    const int workers = detail::resolve_workers(options.workers);
#pragma omp parallel for schedule(dynamic) num_threads(workers)
    for (std::ptrdiff_t a = 0; a < static_cast<std::ptrdiff_t>(n_jp); ++a)
      extra[static_cast<std::size_t>(a)] =
          perturbative_best(n_half, j_prime_grid[static_cast<std::size_t>(a)], delta, window.samples, options);
  }

  for (std::size_t a = 0; a < n_jp; ++a) {
    AmplificationRecord rec;
    rec.j_prime = j_prime_grid[a];
    rec.e_static = static_end_entanglement(make_module(n_half, rec.j_prime, delta), options).e;
    bool have = false;
    for (std::size_t b = 0; b < n_ji; ++b) {
      const SurfacePoint& pt = opt.surface[a * n_ji + b];
      rec.e_max_by_j_i.push_back(pt.ok ? pt.peak.e_max : std::nan(""));
      rec.t_opt_by_j_i.push_back(pt.ok ? pt.peak.t_opt : std::nan(""));
      if (pt.ok && (!have || pt.peak.e_max > rec.e_max)) {
        have = true;
        rec.e_max = pt.peak.e_max;
        rec.j_i_best = pt.j_i;
        rec.t_opt = pt.peak.t_opt;
      }
    }
    rec.e_max_grid = rec.e_max;
    if (extra[a].ok) {
      rec.e_max_perturbative = extra[a].peak.e_max;
      rec.j_i_perturbative = extra[a].j_i;
      rec.t_opt_perturbative = extra[a].peak.t_opt;
      if (!have || extra[a].peak.e_max > rec.e_max) {
        have = true;
        rec.e_max = extra[a].peak.e_max;
        rec.j_i_best = extra[a].j_i;
        rec.t_opt = extra[a].peak.t_opt;
      }
    }
    scan.records.push_back(std::move(rec));
  }
  return scan;
}

}  // namespace modamp
