#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>

#include "modamp/errors.hpp"
#include "modamp/experiments.hpp"
#include "parallel.hpp"

namespace modamp {

namespace {

// Per temperature and time: <P_eq> (sites 0 and N-1 aligned) and
// Re rho2(01,10), both unnormalized until divided by the partition sum.
struct ThermalSeries {
  std::vector<Eigen::VectorXd> aligned;
  std::vector<Eigen::VectorXd> coherence;
};

// The Gibbs state of H_L + H_R and H_T both conserve magnetization, so rho(t)
// is block diagonal and each sector evolves on its own. In the H_T eigenbasis
// rho~ and the observables are real symmetric, so
//   Tr(rho(t) O) = sum_mn rho~_mn O~_mn cos((E_m - E_n) t)
//               = c^T (rho~ o O~) c + s^T (rho~ o O~) s,  c = cos(E t), s = sin(E t),
// which is one matrix product per sector for the whole time grid.
std::vector<std::vector<double>> thermal_series(const ChainSpec& chain, std::span<const double> temperatures,
                                                std::span<const double> grid, const NumericOptions& options) {
  chain.validate();
  const int n = chain.n_sites();
  if (n > options.thermal_max_sites)
    throw CapacityError("thermal runs are capped at " + std::to_string(options.thermal_max_sites) + " sites, got " +
                        std::to_string(n));
  for (double t : temperatures)
    if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("temperatures must be finite and >= 0");

  // Pass 1: spectra of H_L + H_R in every sector fix the reference energy and Z.
  std::vector<Eigen::VectorXd> levels(static_cast<std::size_t>(n + 1));
  for (int up = 0; up <= n; ++up) {
    const auto basis = build_sector_basis(n, up);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(build_decoupled_hamiltonian(chain, basis).to_dense(),
                                                      Eigen::EigenvaluesOnly);
    levels[static_cast<std::size_t>(up)] = es.eigenvalues();
  }
  std::vector<double> all;
  for (const auto& l : levels) all.insert(all.end(), l.data(), l.data() + l.size());
  std::sort(all.begin(), all.end());
  const double e_min = all.front();
  const bool needs_ground = std::any_of(temperatures.begin(), temperatures.end(), [](double t) { return t == 0.0; });
  if (needs_ground && all.size() > 1 && all[1] - all[0] < 1e-10)
    throw DomainError("T = 0 limit needs a nondegenerate ground state of H_L + H_R");

  const std::size_t nt = temperatures.size(), nk = grid.size();
  auto weights = [&](const Eigen::VectorXd& e, double temp) {
    Eigen::VectorXd p(e.size());
    for (Eigen::Index k = 0; k < e.size(); ++k) {
      if (temp == 0.0)
        p(k) = (e(k) == e_min) ? 1.0 : 0.0;
      else
        p(k) = std::exp(-(e(k) - e_min) / temp);
    }
    return p;
  };
  std::vector<double> z(nt, 0.0);
  for (std::size_t ti = 0; ti < nt; ++ti)
    for (const auto& l : levels) z[ti] += weights(l, temperatures[ti]).sum();

  ThermalSeries acc;
  acc.aligned.assign(nt, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nk)));
  acc.coherence.assign(nt, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nk)));

  const Config ma = Config{1}, mb = Config{1} << (n - 1);
  for (int up = 0; up <= n; ++up) {
    const Eigen::VectorXd& e_lr = levels[static_cast<std::size_t>(up)];
    // Skip sectors with no Boltzmann weight at any requested temperature.
    bool relevant = false;
    for (std::size_t ti = 0; ti < nt && !relevant; ++ti)
      relevant = weights(e_lr, temperatures[ti]).maxCoeff() > 1e-18 * z[ti];
    if (!relevant) continue;

    const auto basis = build_sector_basis(n, up);
    const auto d = static_cast<Eigen::Index>(basis->size());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> lr(build_decoupled_hamiltonian(chain, basis).to_dense());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tot(build_total_hamiltonian(chain, basis).to_dense());
    const Eigen::MatrixXd& W = tot.eigenvectors();
    const Eigen::VectorXd& E = tot.eigenvalues();
    const Eigen::MatrixXd U = W.transpose() * lr.eigenvectors();

    Eigen::VectorXd aligned_diag(d);
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
      const Config c = basis->state(static_cast<std::size_t>(i));
      const bool ba = (c & ma) != 0, bb = (c & mb) != 0;
      aligned_diag(i) = (ba == bb) ? 1.0 : 0.0;
      if (!ba && bb) {
        const auto j = static_cast<Eigen::Index>(basis->index_of(c ^ (ma | mb)));
        K(i, j) = 0.5;
        K(j, i) = 0.5;
      }
    }
    const Eigen::MatrixXd a_eig = W.transpose() * aligned_diag.asDiagonal() * W;
    const Eigen::MatrixXd k_eig = W.transpose() * K * W;

    Eigen::MatrixXd Q(d, static_cast<Eigen::Index>(2 * nk));
    for (std::size_t k = 0; k < nk; ++k)
      for (Eigen::Index m = 0; m < d; ++m) {
        Q(m, static_cast<Eigen::Index>(k)) = std::cos(E(m) * grid[k]);
        Q(m, static_cast<Eigen::Index>(nk + k)) = std::sin(E(m) * grid[k]);
      }

    for (std::size_t ti = 0; ti < nt; ++ti) {
      const Eigen::VectorXd p = weights(lr.eigenvalues(), temperatures[ti]);
      const double pmax = p.maxCoeff();
      if (!(pmax > 1e-18 * z[ti])) continue;
      // Low-rank rho~ from the columns that carry weight.
      std::vector<Eigen::Index> keep;
      for (Eigen::Index k = 0; k < d; ++k)
        if (p(k) > 1e-18 * pmax) keep.push_back(k);
      Eigen::MatrixXd Uk(d, static_cast<Eigen::Index>(keep.size()));
      Eigen::VectorXd pk(static_cast<Eigen::Index>(keep.size()));
      for (std::size_t c = 0; c < keep.size(); ++c) {
        Uk.col(static_cast<Eigen::Index>(c)) = U.col(keep[c]);
        pk(static_cast<Eigen::Index>(c)) = p(keep[c]);
      }
      const Eigen::MatrixXd rho = Uk * pk.asDiagonal() * Uk.transpose();
      for (int which = 0; which < 2; ++which) {
        const Eigen::MatrixXd M = rho.cwiseProduct(which == 0 ? a_eig : k_eig);
        const Eigen::MatrixXd R = M * Q;
        const Eigen::RowVectorXd cols = Q.cwiseProduct(R).colwise().sum();
        Eigen::VectorXd& out = which == 0 ? acc.aligned[ti] : acc.coherence[ti];
        out += (cols.head(static_cast<Eigen::Index>(nk)) + cols.tail(static_cast<Eigen::Index>(nk))).transpose();
      }
    }
  }

  std::vector<std::vector<double>> e(nt, std::vector<double>(nk));
  for (std::size_t ti = 0; ti < nt; ++ti) {
    for (std::size_t k = 0; k < nk; ++k) {
      const double aligned = acc.aligned[ti](static_cast<Eigen::Index>(k)) / z[ti];
      const double coh = acc.coherence[ti](static_cast<Eigen::Index>(k)) / z[ti];
      BellMix mix;
      mix.p_x = mix.p_y = 0.5 * aligned;
      mix.p_s = 0.5 * ((1.0 - aligned) - 2.0 * coh);
      mix.p_z = 0.5 * ((1.0 - aligned) + 2.0 * coh);
      e[ti][k] = entanglement_E(mix).e;
    }
  }
  return e;
}

}  // namespace

std::vector<double> thermal_trace(const ChainSpec& chain, double temperature, std::span<const double> grid,
                                  const NumericOptions& options) {
  const double temps[] = {temperature};
  return std::move(thermal_series(chain, temps, grid, options).front());
}

std::vector<ThermalPoint> thermal_curve(const ChainSpec& chain, std::span<const double> temperatures,
                                        const Window& window, const NumericOptions& options) {
  const std::vector<double> grid = window.grid();
  const auto series = thermal_series(chain, temperatures, grid, options);
  std::vector<ThermalPoint> out;
  for (std::size_t ti = 0; ti < temperatures.size(); ++ti) {
    const PeakResult p = find_peak(grid, series[ti]);
    out.push_back({temperatures[ti], p.e_max, p.t_opt});
  }
  return out;
}

}  // namespace modamp
