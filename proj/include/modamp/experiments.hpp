#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "modamp/basis.hpp"
#include "modamp/dynamics.hpp"
#include "modamp/eigensolve.hpp"
#include "modamp/entanglement.hpp"
#include "modamp/hamiltonian.hpp"

namespace modamp {

/// Uniform sampling of [0, t_max]; times in units of hbar/J.
struct Window {
  double t_max = 40.0;
  std::size_t samples = 801;

  std::vector<double> grid() const;
  double step() const { return samples > 1 ? t_max / static_cast<double>(samples - 1) : 0.0; }
};

/// `samples` points from `first` to `last` inclusive.
std::vector<double> linspace(double first, double last, std::size_t samples);
/// first, first + step, ... up to and including `last` (within half a step).
std::vector<double> arange_inclusive(double first, double last, double step);

/// Numerical knobs shared by every experiment.
struct NumericOptions {
  KrylovOptions krylov;
  EigenOptions eigen;
  std::size_t dense_cap = kDefaultDenseCap;
  /// Propagate through a dense eigenbasis at or below this sector size.
  std::size_t dense_propagation_max = 200;
  /// Cross-check that module ground states live in the half-filled sector.
  bool verify_ground_sector = false;
  /// OpenMP threads for task-level loops; 0 keeps the runtime default.
  int workers = 0;
  /// Largest chain for full-space thermal runs.
  int thermal_max_sites = 14;
  /// Abort an ensemble or sweep when more than this fraction of tasks fail.
  double max_failure_fraction = 0.05;
};

struct TraceSeries {
  std::vector<double> times;
  std::vector<double> e;
  std::vector<BellMix> bell;
  ChainSpec chain;
  KrylovStats stats;
  bool dense_propagation = false;
  double max_bell_residual = 0.0;
  /// max |p_x - p_y| over the trace.
  double max_pxy_gap = 0.0;
};

/// Product of the two module ground states, placed on the chain.
StateVector initial_product_state(const ChainSpec& chain, const NumericOptions& options = {});

/// E between sites 1_L and 1_R of e^{-iH_T t}|GS_L>|GS_R> on every grid time.
TraceSeries entanglement_trace(const ChainSpec& chain, std::span<const double> grid, const NumericOptions& options = {});
/// Same, from an already prepared operator and initial state.
TraceSeries trace_from_state(const SparseOperator& h_total, const StateVector& psi0, std::span<const double> grid,
                             const NumericOptions& options = {});

struct PeakResult {
  double t_opt = 0.0;
  double e_max = 0.0;
  std::size_t index = 0;
  bool refined = false;
  bool window_truncated = false;
};

/// Global maximum, earliest on ties (within `tie_tol`), with optional
/// three-point parabolic refinement around an interior argmax.
PeakResult find_peak(std::span<const double> times, std::span<const double> values, bool refine = true,
                     double tie_tol = 1e-10);
PeakResult find_peak(const TraceSeries& trace, bool refine = true);

struct SurfacePoint {
  double j_prime = 0.0;
  double j_i = 0.0;
  PeakResult peak;
  bool ok = false;
  std::string error;
};

struct OptimizationResult {
  double j_prime = 0.0;
  double j_i = 0.0;
  PeakResult peak;
  /// Row-major over (j_prime, j_i).
  std::vector<SurfacePoint> surface;
  std::size_t failures = 0;
};

/// Exhaustive grid search of E_max(J', J_I) for two identical modules of
/// n_half sites. Ties go to the smaller J', then the smaller J_I.
OptimizationResult optimize_couplings(int n_half, double delta, std::span<const double> j_prime_grid,
                                      std::span<const double> j_i_grid, const Window& window,
                                      const NumericOptions& options = {});

/// End-to-end entanglement of the module ground state (sites 1 and N).
EntanglementValue static_end_entanglement(const ModuleSpec& spec, const NumericOptions& options = {});
BellMix static_end_bell(const ModuleSpec& spec, const NumericOptions& options = {});

struct AmplificationRecord {
  double j_prime = 0.0;
  double e_static = 0.0;
  double e_max = 0.0;
  double j_i_best = 0.0;
  double t_opt = 0.0;
  /// Best over the J_I grid alone.
  double e_max_grid = 0.0;
  /// Best over the J_I candidates around the effective-coupling resonance,
  /// each run over a window scaled to its own slow period. NaN when the
  /// candidates were skipped or the module gap is degenerate.
  double e_max_perturbative = std::nan("");
  double j_i_perturbative = std::nan("");
  double t_opt_perturbative = std::nan("");
  /// E_max and t_opt for every J_I on the grid, in grid order.
  std::vector<double> e_max_by_j_i;
  std::vector<double> t_opt_by_j_i;
};

struct AmplificationScan {
  std::vector<double> j_i_grid;
  std::vector<AmplificationRecord> records;
  std::size_t failures = 0;
};

/// Multiples of J_I* = J_eff^L + J_eff^R tried per J' when the scan includes
/// perturbative candidates.
inline constexpr double kPerturbativeScales[] = {0.5, 0.75, 1.0, 1.25, 1.5, 2.0};

/// Per-J' static E and best dynamic E_max. The J_I grid uses `window`. With
/// `perturbative_candidates`, J_I = s * J_I* for each s in
/// kPerturbativeScales is also tried over [0, 2.5 pi / (4 J_I)] with
/// window.samples points, so the slow weak-coupling resonance is reachable.
AmplificationScan amplification_scan(int n_half, double delta, std::span<const double> j_prime_grid,
                                     std::span<const double> j_i_grid, const Window& window,
                                     const NumericOptions& options = {}, bool perturbative_candidates = true);

/// Two-impurity effective model of weakly coupled modules.
struct PerturbativePrediction {
  GapResult gap_left;
  GapResult gap_right;
  double j_eff_left = 0.0;
  double j_eff_right = 0.0;
  double j_i_star = 0.0;
  double t_opt_pred = 0.0;

  /// (5 - 3 cos(4 J_I t)) / 8 at J_I = j_i_star.
  double singlet_weight(double t) const;
  /// Clamped 1 - H(p(t)).
  double entanglement(double t) const;
};

PerturbativePrediction perturbative_prediction(const ModuleSpec& left, const ModuleSpec& right,
                                               const NumericOptions& options = {});

struct SpectralComponent {
  std::size_t index = 0;
  double excitation = 0.0;  ///< E_n - E_0
  double weight = 0.0;      ///< |<E_n|psi(0)>|^2
};

struct SpectralDecomposition {
  ChainSpec chain;
  std::vector<SpectralComponent> components;  ///< ascending energy
  std::size_t top_first = 0;                  ///< index of the largest weight
  std::size_t top_second = 0;                 ///< index of the second largest
  double omega = 0.0;                         ///< |E_top_first - E_top_second|
  double weight_sum = 0.0;
  /// Eigenbasis and overlaps, kept for reconstruction; may be null for
  /// hand-built decompositions.
  std::shared_ptr<const DenseEvolver> evolver;
  Eigen::VectorXcd coefficients;
};

SpectralDecomposition spectral_decomposition(const ChainSpec& chain, const NumericOptions& options = {});
/// E(t) from the stored eigenbasis; requires a decomposition with an evolver.
std::vector<double> spectral_trace(const SpectralDecomposition& decomposition, std::span<const double> grid);

struct InterferenceReport {
  double t_phase = 0.0;  ///< first t with exp(-i omega t) = -1
  double offset = 0.0;   ///< |t_opt - t_phase|
  double top2_weight_sum = 0.0;
};

InterferenceReport interference_check(const SpectralDecomposition& decomposition, const PeakResult& peak);

struct ThermalPoint {
  double temperature = 0.0;  ///< k_B T in units of J
  double e_max = 0.0;
  double t_peak = 0.0;
};

/// E(t) for a Gibbs initial state of H_L + H_R evolved under H_T. T = 0
/// selects the ground-state projector.
std::vector<double> thermal_trace(const ChainSpec& chain, double temperature, std::span<const double> grid,
                                  const NumericOptions& options = {});
std::vector<ThermalPoint> thermal_curve(const ChainSpec& chain, std::span<const double> temperatures,
                                        const Window& window, const NumericOptions& options = {});

enum class DisorderMode {
  PerBond,   ///< independent epsilon for every bond
  PerChain,  ///< one epsilon shared by all bonds of a realization
};

std::string to_string(DisorderMode mode);
DisorderMode parse_disorder_mode(const std::string& text);

/// Uniform [0, 1) draw keyed by (seed, realization, bond).
double counter_uniform(std::uint64_t seed, std::uint64_t realization, std::uint64_t bond);
/// Factors 1 + epsilon with epsilon uniform on [-lambda, lambda].
std::vector<double> disorder_factors(int n_bonds, double lambda, std::uint64_t seed, std::uint64_t realization,
                                     DisorderMode mode);

struct RealizationResult {
  double e_max = 0.0;
  double t_peak = 0.0;
  double e_at_clean_topt = 0.0;
  bool ok = false;
};

struct DisorderStats {
  double lambda = 0.0;
  std::size_t n_realizations = 0;
  std::uint64_t seed = 0;
  DisorderMode mode = DisorderMode::PerBond;
  double clean_t_opt = 0.0;
  double clean_e_max = 0.0;
  double clean_e_at_topt = 0.0;
  double clean_t_peak = 0.0;
  double mean_e_max = 0.0;
  double se_e_max = 0.0;
  double mean_e_at_clean_topt = 0.0;
  double se_e_at_clean_topt = 0.0;
  double mean_t_peak = 0.0;
  double se_t_peak = 0.0;
  std::size_t failures = 0;
  std::vector<RealizationResult> realizations;
};

DisorderStats disorder_ensemble(const ChainSpec& chain, double lambda, std::size_t n_realizations, std::uint64_t seed,
                                const Window& window, DisorderMode mode = DisorderMode::PerBond,
                                const NumericOptions& options = {});

/// Module of n_half sites with the common bulk parameters.
ModuleSpec make_module(int n_sites, double j_prime, double delta, double j = 1.0);
/// Two identical modules joined by J_I.
ChainSpec make_chain(int n_half, double j_prime, double j_i, double delta, double j = 1.0);

}  // namespace modamp
