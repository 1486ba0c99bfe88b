#include <algorithm>
#include <cmath>
#include <string>

#include "modamp/errors.hpp"
#include "modamp/experiments.hpp"
#include "parallel.hpp"

namespace modamp {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

// Shifted by x0 so a sample of identical values returns x0 bit-exactly.
MeanSe mean_se(const std::vector<double>& xs, double x0) {
  MeanSe out;
  const auto n = static_cast<double>(xs.size());
  if (xs.empty()) return out;
  double s = 0.0;
  for (double x : xs) s += x - x0;
  const double shift = s / n;
  out.mean = x0 + shift;
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - x0 - shift) * (x - x0 - shift);
    out.se = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return out;
}

std::vector<double> merged_grid(const std::vector<double>& grid, double t) {
  std::vector<double> out = grid;
  const auto it = std::lower_bound(out.begin(), out.end(), t);
  if (it == out.end() || *it != t) out.insert(it, t);
  return out;
}

}  // namespace

std::string to_string(DisorderMode mode) { return mode == DisorderMode::PerBond ? "per-bond" : "per-chain"; }

DisorderMode parse_disorder_mode(const std::string& text) {
  if (text == "per-bond") return DisorderMode::PerBond;
  if (text == "per-chain") return DisorderMode::PerChain;
  throw DomainError("unknown disorder mode '" + text + "' (expected per-bond or per-chain)");
}

double counter_uniform(std::uint64_t seed, std::uint64_t realization, std::uint64_t bond) {
  const std::uint64_t h = splitmix64(splitmix64(splitmix64(seed) ^ realization) ^ bond);
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

std::vector<double> disorder_factors(int n_bonds, double lambda, std::uint64_t seed, std::uint64_t realization,
                                     DisorderMode mode) {
  if (n_bonds < 0) throw DomainError("bond count must be nonnegative");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw DomainError("disorder strength must be finite and >= 0");
  std::vector<double> f(static_cast<std::size_t>(n_bonds));
  for (int b = 0; b < n_bonds; ++b) {
    const std::uint64_t key = mode == DisorderMode::PerBond ? static_cast<std::uint64_t>(b) : 0;
    f[static_cast<std::size_t>(b)] = 1.0 + lambda * (2.0 * counter_uniform(seed, realization, key) - 1.0);
  }
  return f;
}

DisorderStats disorder_ensemble(const ChainSpec& chain, double lambda, std::size_t n_realizations, std::uint64_t seed,
                                const Window& window, DisorderMode mode, const NumericOptions& options) {
  chain.validate();
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw DomainError("disorder strength must be finite and >= 0");
  if (n_realizations == 0) throw DomainError("need at least one realization");
  if (!(lambda < 1.0)) throw DomainError("disorder strength must stay below 1 so every bond keeps its sign");

  ChainSpec clean = chain;
  clean.bond_factors.reset();
  const int n_bonds = clean.n_sites() - 1;

  // The clean optimum on the plain window fixes t_opt; every run below then
  // shares the window with t_opt added so E(t_opt) is sampled exactly.
  const PeakResult clean_window_peak = find_peak(entanglement_trace(clean, window.grid(), options));
  const std::vector<double> grid = merged_grid(window.grid(), clean_window_peak.t_opt);
  const auto topt_index =
      static_cast<std::size_t>(std::lower_bound(grid.begin(), grid.end(), clean_window_peak.t_opt) - grid.begin());

  auto run = [&](const std::vector<double>& factors) {
    ChainSpec c = clean;
    c.bond_factors = factors;
    const TraceSeries tr = entanglement_trace(c, grid, options);
    const PeakResult p = find_peak(tr);
    RealizationResult r;
    r.e_max = p.e_max;
    r.t_peak = p.t_opt;
    r.e_at_clean_topt = tr.e[topt_index];
    r.ok = true;
    return r;
  };

  DisorderStats stats;
  stats.lambda = lambda;
  stats.n_realizations = n_realizations;
  stats.seed = seed;
  stats.mode = mode;
  stats.clean_t_opt = clean_window_peak.t_opt;
  // The clean reference is task n so it runs in the same context as every
  // realization; at lambda = 0 the two are then bit-identical.
  stats.realizations.resize(n_realizations);
  RealizationResult ref;
  std::vector<std::string> errors(n_realizations + 1);
  const int workers = detail::resolve_workers(options.workers);
#pragma omp parallel for schedule(dynamic) num_threads(workers)
  for (std::ptrdiff_t r = 0; r <= static_cast<std::ptrdiff_t>(n_realizations); ++r) {
    const auto ur = static_cast<std::size_t>(r);
    try {
      if (ur == n_realizations)
        ref = run(std::vector<double>(static_cast<std::size_t>(n_bonds), 1.0));
      else
        stats.realizations[ur] = run(disorder_factors(n_bonds, lambda, seed, static_cast<std::uint64_t>(r), mode));
    } catch (const std::exception& e) {
      errors[ur] = e.what();
    }
  }
  if (!ref.ok) throw ConvergenceError("disorder ensemble: clean reference failed: " + errors[n_realizations], 0.0);
  stats.clean_e_max = ref.e_max;
  stats.clean_e_at_topt = ref.e_at_clean_topt;
  stats.clean_t_peak = ref.t_peak;

  std::vector<double> e_max, e_topt, t_peak;
  std::string first_error;
  for (std::size_t r = 0; r < n_realizations; ++r) {
    const RealizationResult& rr = stats.realizations[r];
    if (!rr.ok) {
      ++stats.failures;
      if (first_error.empty()) first_error = errors[r];
      continue;
    }
    e_max.push_back(rr.e_max);
    e_topt.push_back(rr.e_at_clean_topt);
    t_peak.push_back(rr.t_peak);
  }
  if (e_max.empty() ||
      static_cast<double>(stats.failures) > options.max_failure_fraction * static_cast<double>(n_realizations))
    throw ConvergenceError("disorder ensemble: " + std::to_string(stats.failures) + " of " +
                               std::to_string(n_realizations) + " realizations failed; first: " + first_error,
                           0.0);

  const MeanSe a = mean_se(e_max, stats.clean_e_max);
  const MeanSe b = mean_se(e_topt, stats.clean_e_at_topt);
  const MeanSe c = mean_se(t_peak, stats.clean_t_peak);
  stats.mean_e_max = a.mean;
  stats.se_e_max = a.se;
  stats.mean_e_at_clean_topt = b.mean;
  stats.se_e_at_clean_topt = b.se;
  stats.mean_t_peak = c.mean;
  stats.se_t_peak = c.se;
  return stats;
}

}  // namespace modamp
