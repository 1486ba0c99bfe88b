#include "modamp/eigensolve.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include <Eigen/Eigenvalues>

#include "modamp/errors.hpp"

namespace modamp {

void fix_phase(Eigen::VectorXcd& v) {
  if (v.size() == 0) return;
  Eigen::Index imax = 0;
  double best = -1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    // Small slack keeps the choice stable between symmetric partners.
    if (std::abs(v(i)) > best * (1.0 + 1e-9)) {
      best = std::abs(v(i));
      imax = i;
    }
  }
  if (best > 0.0) v *= std::conj(v(imax)) / best;
}

EigenPair Spectrum::pair(std::size_t n) const {
  if (n >= size()) throw DomainError("spectrum index out of range");
  Eigen::VectorXcd v = vectors.col(static_cast<Eigen::Index>(n)).cast<std::complex<double>>();
  fix_phase(v);
  return {energies(static_cast<Eigen::Index>(n)), StateVector{basis, std::move(v)}};
}

Spectrum full_spectrum(const SparseOperator& op, std::size_t dense_cap) {
  if (op.dim() > dense_cap)
    throw CapacityError("sector dimension " + std::to_string(op.dim()) + " exceeds dense cap " +
                        std::to_string(dense_cap) + "; raise the cap to diagonalize densely");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(op.to_dense());
  if (es.info() != Eigen::Success) throw ConvergenceError("dense eigensolver failed", 0.0);
  return Spectrum{op.basis(), es.eigenvalues(), es.eigenvectors()};
}

namespace {

std::vector<EigenPair> dense_lowest(const SparseOperator& op, std::size_t k) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(op.to_dense());
  if (es.info() != Eigen::Success) throw ConvergenceError("dense eigensolver failed", 0.0);
  std::vector<EigenPair> out;
  for (std::size_t n = 0; n < k; ++n) {
    Eigen::VectorXcd v = es.eigenvectors().col(static_cast<Eigen::Index>(n)).cast<std::complex<double>>();
    fix_phase(v);
    out.push_back({es.eigenvalues()(static_cast<Eigen::Index>(n)), StateVector{op.basis(), std::move(v)}});
  }
  return out;
}

// Thick-restart Lanczos in real arithmetic with full reorthogonalization.
// The projected matrix is rebuilt column by column from V^T H v, so after a
// restart the arrow coupling between kept Ritz vectors and the residual
// direction appears without special bookkeeping. Invariant at the top of the
// expansion loop: filled == built + 1, and H V_b = V_b T_b + beta v_{b} e_b^T.
// Columns of `locked` (orthonormal) are projected out of every direction.
std::vector<EigenPair> lanczos_run(const SparseOperator& op, std::size_t k, const EigenOptions& opt,
                                   const Eigen::MatrixXd& locked, std::uint64_t seed) {
  const auto n = static_cast<Eigen::Index>(op.dim());
  const auto m_max =
      static_cast<Eigen::Index>(std::min<std::size_t>(op.dim(), std::max(opt.max_basis, 2 * k + 20)));
  const Eigen::Index keep = std::min<Eigen::Index>(m_max - 1, static_cast<Eigen::Index>(k) + 10);

  Eigen::MatrixXd V(n, m_max + 1);
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m_max, m_max);
  Eigen::VectorXd w(n);

  const auto deflate = [&](Eigen::Ref<Eigen::VectorXd> x) {
    if (locked.cols() == 0) return;
    for (int pass = 0; pass < 2; ++pass) x.noalias() -= locked * (locked.transpose() * x);
  };
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (Eigen::Index i = 0; i < n; ++i) V(i, 0) = uni(rng);
  deflate(V.col(0));
  V.col(0).normalize();

  Eigen::Index built = 0;
  Eigen::Index filled = 1;
  double beta = 0.0;
  double worst = 0.0;
  const auto want = static_cast<Eigen::Index>(k);

  for (std::size_t restart = 0; restart <= opt.max_restarts; ++restart) {
    bool exhausted = false;
    while (built < m_max) {
      const Eigen::Index j = built;
      op.apply(V.col(j), w);
      deflate(w);
      Eigen::VectorXd h = V.leftCols(filled).transpose() * w;
      w.noalias() -= V.leftCols(filled) * h;
      const Eigen::VectorXd h2 = V.leftCols(filled).transpose() * w;
      w.noalias() -= V.leftCols(filled) * h2;
      h += h2;
      T.col(j).head(filled) = h;
      T.row(j).head(filled) = h.transpose();
      ++built;
      beta = w.norm();
      if (beta <= 1e-13 * std::max(1.0, std::abs(h(j)))) {
        exhausted = true;
        break;
      }
      V.col(filled) = w / beta;
      ++filled;
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T.topLeftCorner(built, built));
    const Eigen::VectorXd& theta = es.eigenvalues();
    const Eigen::MatrixXd& Y = es.eigenvectors();
    if (built < want) throw ConvergenceError("Krylov space exhausted before the requested eigenpairs", 0.0);

    worst = 0.0;
    for (Eigen::Index i = 0; i < want; ++i)
      worst = std::max(worst, (exhausted ? 0.0 : beta * std::abs(Y(built - 1, i))) / std::max(1.0, std::abs(theta(i))));

    if (worst <= opt.tol || exhausted) {
      const Eigen::MatrixXd X = V.leftCols(built) * Y.leftCols(want);
      std::vector<EigenPair> out;
      Eigen::VectorXd r(n);
      double true_worst = 0.0;
      for (Eigen::Index i = 0; i < want; ++i) {
        Eigen::VectorXd x = X.col(i).normalized();
        op.apply(x, r);
        r -= theta(i) * x;
        true_worst = std::max(true_worst, r.norm() / std::max(1.0, std::abs(theta(i))));
        Eigen::VectorXcd v = x.cast<std::complex<double>>();
        fix_phase(v);
        out.push_back({theta(i), StateVector{op.basis(), std::move(v)}});
      }
      if (true_worst > std::max(1e-8, 100.0 * opt.tol))
        throw ConvergenceError("Lanczos Ritz vectors lost accuracy", true_worst);
      return out;
    }

    const Eigen::Index kk = std::min(keep, built - 1);
    const Eigen::MatrixXd kept = V.leftCols(built) * Y.leftCols(kk);
    V.col(kk) = V.col(built);
    V.leftCols(kk) = kept;
    T.setZero();
    for (Eigen::Index i = 0; i < kk; ++i) T(i, i) = theta(i);
    built = kk;
    filled = kk + 1;
  }
  throw ConvergenceError("Lanczos did not converge", worst);
}

// A single Krylov sequence sees one vector per degenerate eigenspace. After
// convergence, a run deflated against the accepted vectors looks for levels
// that were skipped and merges them until none turns up.
std::vector<EigenPair> lanczos_lowest(const SparseOperator& op, std::size_t k, const EigenOptions& opt) {
  std::vector<EigenPair> found = lanczos_run(op, k, opt, Eigen::MatrixXd(), 0x5eedULL);
  const auto n = static_cast<Eigen::Index>(op.dim());
  for (std::uint64_t round = 1; static_cast<std::size_t>(round) <= op.dim(); ++round) {
    Eigen::MatrixXd locked(n, static_cast<Eigen::Index>(found.size()));
    for (std::size_t i = 0; i < found.size(); ++i)
      locked.col(static_cast<Eigen::Index>(i)) = found[i].vector.amplitudes.real();
    if (static_cast<std::size_t>(locked.cols()) >= op.dim()) break;
    const EigenPair extra = lanczos_run(op, 1, opt, locked, 0x5eedULL + round).front();
    const double top = found.back().energy;
    if (!(extra.energy < top - std::max(opt.tol, 1e-12) * std::max(1.0, std::abs(top)))) break;
    const auto at = std::upper_bound(found.begin(), found.end(), extra.energy,
                                     [](double e, const EigenPair& p) { return e < p.energy; });
    found.insert(at, extra);
    found.pop_back();
  }
  return found;
}

}  // namespace

std::vector<EigenPair> lowest_k(const SparseOperator& op, std::size_t k, const EigenOptions& options) {
  if (k == 0 || k > op.dim()) throw DomainError("lowest_k: k must be in [1, dim]");
  if (op.dim() <= options.dense_threshold || op.dim() <= 2 * k + 2) return dense_lowest(op, k);
  return lanczos_lowest(op, k, options);
}

EigenPair ground_state(const SparseOperator& op, const EigenOptions& options) {
  return std::move(lowest_k(op, 1, options).front());
}

EigenPair module_ground_state(const ModuleSpec& spec, std::span<const double> factors, bool verify,
                              const EigenOptions& options) {
  spec.validate();
  const int half = spec.n_sites / 2;
  auto basis = build_sector_basis(spec.n_sites, half);
  EigenPair gs = ground_state(build_module_hamiltonian(spec, basis, factors), options);
  if (verify) {
    for (int n_up : {half - 1, half + 1}) {
      auto nb = build_sector_basis(spec.n_sites, n_up);
      const double e = ground_state(build_module_hamiltonian(spec, nb, factors), options).energy;
      if (e <= gs.energy + 1e-10)
        throw DomainError("module ground state is not confined to the half-filled sector (sector " +
                          std::to_string(n_up) + " reaches " + std::to_string(e) + ")");
    }
  }
  return gs;
}

GapResult energy_gap(const ModuleSpec& spec, std::span<const double> factors, const EigenOptions& options) {
  spec.validate();
  const int half = spec.n_sites / 2;
  struct Level {
    double e;
    int sector;
  };
  std::vector<Level> levels;
  double sector_e0 = 0.0, sector_e1 = 0.0;
  for (int n_up : {half, half - 1, half + 1, half - 2, half + 2}) {
    if (n_up < 0 || n_up > spec.n_sites) continue;
    auto basis = build_sector_basis(spec.n_sites, n_up);
    const auto op = build_module_hamiltonian(spec, basis, factors);
    const std::size_t k = std::min<std::size_t>(2, op.dim());
    const auto pairs = lowest_k(op, k, options);
    for (const auto& p : pairs) levels.push_back({p.energy, n_up});
    if (n_up == half) {
      sector_e0 = pairs[0].energy;
      sector_e1 = pairs.size() > 1 ? pairs[1].energy : pairs[0].energy;
    }
  }
  std::stable_sort(levels.begin(), levels.end(), [](const Level& a, const Level& b) { return a.e < b.e; });
  GapResult g;
  g.e0 = levels[0].e;
  g.sector_of_ground = levels[0].sector;
  g.e1 = levels[1].e;
  g.sector_of_gap = levels[1].sector;
  g.delta = std::max(0.0, g.e1 - g.e0);
  g.sector_delta = sector_e1 - sector_e0;
  g.degenerate = g.delta < 1e-10;
  return g;
}

}  // namespace modamp
