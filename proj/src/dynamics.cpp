#include "modamp/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include <Eigen/Eigenvalues>

#include "modamp/errors.hpp"

namespace modamp {

using cd = std::complex<double>;

void KrylovStats::merge(const KrylovStats& o) {
  bases += o.bases;
  matvecs += o.matvecs;
  substeps += o.substeps;
  max_dim = std::max(max_dim, o.max_dim);
  error_estimate += o.error_estimate;
}

namespace {

// Lanczos basis of a complex start vector under a real symmetric operator.
// The projected matrix is real tridiagonal.
class LanczosBasis {
 public:
  LanczosBasis(const SparseOperator& op, int cap) : op_(op), V_(static_cast<Eigen::Index>(op.dim()), cap + 1), w_(static_cast<Eigen::Index>(op.dim())) {
    alpha_.reserve(static_cast<std::size_t>(cap));
    beta_.reserve(static_cast<std::size_t>(cap));
  }

  void reset(const Eigen::VectorXcd& start) {
    norm0_ = start.norm();
    V_.col(0) = start / norm0_;
    alpha_.clear();
    beta_.clear();
    breakdown_ = false;
  }

  // Extends to `m` vectors (or until an invariant subspace is found).
  // Returns the number of matvecs spent.
  std::size_t extend(int m) {
    std::size_t spent = 0;
    while (size() < m && !breakdown_) {
      const Eigen::Index j = size();
      op_.apply(V_.col(j), w_);
      ++spent;
      if (j > 0) w_.noalias() -= beta_.back() * V_.col(j - 1);
      double a = V_.col(j).dot(w_).real();
      w_.noalias() -= a * V_.col(j);
      // One local correction pass against the two newest vectors.
      const cd c0 = V_.col(j).dot(w_);
      w_.noalias() -= c0 * V_.col(j);
      a += c0.real();
      if (j > 0) w_.noalias() -= V_.col(j - 1).dot(w_) * V_.col(j - 1);
      alpha_.push_back(a);
      const double b = w_.norm();
      beta_.push_back(b);
      scale_ = std::max(scale_, std::abs(a) + b);
      if (b <= 1e-14 * std::max(1.0, scale_)) {
        breakdown_ = true;
      } else {
        V_.col(j + 1) = w_ / b;
      }
    }
    if (size() > 0) diagonalize();
    return spent;
  }

  int size() const noexcept { return static_cast<int>(alpha_.size()); }
  bool breakdown() const noexcept { return breakdown_; }

  // Coefficients of e^{-iHt} start in the basis, and the error estimate
  // beta_m |e_m^T exp(-iT t) e_1| (zero after breakdown).
  double coefficients(double t, Eigen::VectorXcd& c) const {
    const Eigen::Index m = size();
    Eigen::VectorXcd phase(m);
    for (Eigen::Index i = 0; i < m; ++i) phase(i) = S_(0, i) * std::polar(1.0, -theta_(i) * t);
    c = S_.cast<cd>() * phase;
    c *= norm0_;
    if (breakdown_) return 0.0;
    return beta_.back() * std::abs(c(m - 1));
  }

  void form(const Eigen::VectorXcd& c, Eigen::VectorXcd& out) const { out.noalias() = V_.leftCols(size()) * c; }

 private:
  void diagonalize() {
    const Eigen::Index m = size();
    Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(alpha_.data(), m);
    Eigen::VectorXd e = Eigen::Map<const Eigen::VectorXd>(beta_.data(), m).head(std::max<Eigen::Index>(m - 1, 0));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(d, e, Eigen::ComputeEigenvectors);
    theta_ = es.eigenvalues();
    S_ = es.eigenvectors();
  }

  const SparseOperator& op_;
  Eigen::MatrixXcd V_;
  Eigen::VectorXcd w_;
  std::vector<double> alpha_;
  std::vector<double> beta_;
  Eigen::VectorXd theta_;
  Eigen::MatrixXd S_;
  double norm0_ = 1.0;
  double scale_ = 0.0;
  bool breakdown_ = false;
};

}  // namespace

KrylovStats propagate_series(const SparseOperator& op, const StateVector& v0, std::span<const double> times,
                             const SampleSink& sink, const KrylovOptions& opt) {
  if (v0.dim() != op.dim()) throw DomainError("propagate_series: state dimension does not match operator");
  if (std::abs(v0.norm() - 1.0) > 1e-8) throw DomainError("propagate_series: initial state must be unit-norm");
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (!(times[k] >= 0.0) || !std::isfinite(times[k])) throw DomainError("propagate_series: times must be finite and >= 0");
    if (k > 0 && !(times[k] > times[k - 1])) throw DomainError("propagate_series: times must be strictly increasing");
  }
  if (opt.m_start < 1 || opt.m_cap < opt.m_start) throw DomainError("propagate_series: bad Krylov dimensions");

  KrylovStats stats;
  if (times.empty()) return stats;

  const double t_end = times.back();
  const int cap = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(opt.m_cap), op.dim()));
  const int m0 = std::min(opt.m_start, cap);
  LanczosBasis basis(op, cap);
  Eigen::VectorXcd cur = v0.amplitudes;
  Eigen::VectorXcd psi(cur.size()), c;
  double t_cur = 0.0;
  std::size_t k = 0;

  auto budget = [&](double tau) { return opt.tol * std::max(tau / std::max(t_end, 1e-300), 1e-6); };

  while (k < times.size()) {
    if (times[k] == t_cur) {
      sink(k, cur);
      ++k;
      continue;
    }
    basis.reset(cur);
    stats.matvecs += basis.extend(m0);
    ++stats.bases;

    std::size_t accepted = 0;
    double err_last = 0.0;
    for (;;) {
      accepted = 0;
      while (k + accepted < times.size()) {
        const double tau = times[k + accepted] - t_cur;
        const double err = basis.coefficients(tau, c);
        if (err > budget(tau)) break;
        err_last = err;
        ++accepted;
      }
      if (accepted > 0 || basis.breakdown() || basis.size() >= cap) break;
      stats.matvecs += basis.extend(std::min(cap, basis.size() + opt.m_step));
    }
    stats.max_dim = std::max(stats.max_dim, basis.size());

    if (accepted == 0) {
      // Largest unsampled step the full basis supports.
      double tau = times[k] - t_cur;
      double err = 0.0;
      do {
        tau *= 0.5;
        err = basis.coefficients(tau, c);
      } while (err > budget(tau) && tau > 1e-14 * std::max(1.0, t_end));
      if (err > budget(tau))
        throw AccuracyError("Krylov propagation cannot meet tolerance " + std::to_string(opt.tol));
      if (++stats.substeps > opt.max_substeps) throw AccuracyError("Krylov propagation exceeded its sub-step limit");
      basis.form(c, cur);
      t_cur += tau;
      stats.error_estimate += err;
      continue;
    }

    for (std::size_t s = 0; s < accepted; ++s) {
      basis.coefficients(times[k + s] - t_cur, c);
      basis.form(c, psi);
      sink(k + s, psi);
    }
    stats.error_estimate += err_last;
    cur = psi;
    t_cur = times[k + accepted - 1];
    k += accepted;
  }
  return stats;
}

StateVector evolve_krylov(const SparseOperator& op, const StateVector& v, double t, const KrylovOptions& options,
                          KrylovStats* stats) {
  if (t == 0.0) return v;
  const bool backward = t < 0.0;
  // H is real, so e^{-iHt} v = conj(e^{-iH|t|} conj v) for t < 0.
  StateVector start{v.basis, backward ? Eigen::VectorXcd(v.amplitudes.conjugate()) : v.amplitudes};
  const double times[] = {std::abs(t)};
  Eigen::VectorXcd out;
  const KrylovStats s =
      propagate_series(op, start, times, [&](std::size_t, const Eigen::VectorXcd& psi) { out = psi; }, options);
  if (stats) stats->merge(s);
  if (backward) out = out.conjugate();
  return StateVector{op.basis(), std::move(out)};
}

DenseEvolver::DenseEvolver(const SparseOperator& op, std::size_t dense_cap) : spectrum_(full_spectrum(op, dense_cap)) {}

DenseEvolver::DenseEvolver(Spectrum spectrum) : spectrum_(std::move(spectrum)) {}

Eigen::VectorXcd DenseEvolver::coefficients(const StateVector& v) const {
  if (v.dim() != spectrum_.size()) throw DomainError("DenseEvolver: state dimension does not match operator");
  return spectrum_.vectors.transpose().cast<cd>() * v.amplitudes;
}

StateVector DenseEvolver::evolve_coefficients(const Eigen::VectorXcd& c, double t) const {
  Eigen::VectorXcd ct(c.size());
  for (Eigen::Index i = 0; i < c.size(); ++i) ct(i) = c(i) * std::polar(1.0, -spectrum_.energies(i) * t);
  return StateVector{spectrum_.basis, spectrum_.vectors.cast<cd>() * ct};
}

StateVector DenseEvolver::evolve(const StateVector& v, double t) const { return evolve_coefficients(coefficients(v), t); }

StateVector evolve_dense(const SparseOperator& op, const StateVector& v, double t, std::size_t dense_cap) {
  return DenseEvolver(op, dense_cap).evolve(v, t);
}

DensityOperator pure_density(const StateVector& v) { return DensityOperator{v.basis, v.amplitudes * v.amplitudes.adjoint()}; }

DensityOperator evolve_density(const DenseEvolver& evolver, const DensityOperator& rho, double t) {
  const Spectrum& sp = evolver.spectrum();
  if (rho.dim() != sp.size()) throw DomainError("evolve_density: dimension mismatch");
  const Eigen::MatrixXcd V = sp.vectors.cast<cd>();
  Eigen::MatrixXcd r = V.adjoint() * rho.matrix * V;
  for (Eigen::Index m = 0; m < r.rows(); ++m)
    for (Eigen::Index n = 0; n < r.cols(); ++n)
      r(m, n) *= std::polar(1.0, -(sp.energies(m) - sp.energies(n)) * t);
  return DensityOperator{sp.basis, V * r * V.adjoint()};
}

DensityOperator evolve_density(const SparseOperator& op, const DensityOperator& rho, double t, std::size_t dense_cap) {
  return evolve_density(DenseEvolver(op, dense_cap), rho, t);
}

}  // namespace modamp
